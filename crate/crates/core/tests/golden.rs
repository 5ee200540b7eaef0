//! Committed emitter output. Regenerate with `UPDATE_GOLDEN=1 cargo test --test golden`.

mod common;

use std::fs;

use common::*;
use nnport::frontend::Dialect;
use nnport::pivot::{deserialize, serialize_to_string};

fn updating() -> bool {
    std::env::var_os("UPDATE_GOLDEN").is_some()
}

fn check(path: &std::path::Path, actual: &str) {
    if updating() {
        fs::write(path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert!(expected == actual, "{} differs from emitted output", path.display());
}

#[test]
fn emitted_code_matches_golden_files() {
    for fx in &FIXTURES {
        let text = source_text(fx);
        for target in Dialect::ALL {
            let path = golden_path(fx, target);
            match migrate(&text, fx.dialect, target) {
                Ok(m) => check(&path, &m.code),
                Err(e) => {
                    assert!(!fx.chain, "{} -> {target}: {e}", fx.name);
                    assert!(!path.exists(), "stale golden file {}", path.display());
                }
            }
        }
    }
}

#[test]
fn pivot_documents_match_fixtures() {
    for fx in &FIXTURES {
        let nn = extract_as(&source_text(fx), fx.dialect);
        let doc = serialize_to_string(&nn).unwrap();
        check(&pivot_path(fx), &doc);
        let back = deserialize(doc.as_bytes()).unwrap();
        assert_eq!(serialize_to_string(&back).unwrap(), doc);
    }
}

#[test]
fn fixture_layer_counts() {
    for fx in &FIXTURES {
        let nn = extract_as(&source_text(fx), fx.dialect);
        assert_eq!(nn.layer_count(), fx.layers, "{}", fx.name);
        assert_eq!(nn.is_chain(), fx.chain, "{}", fx.name);
    }
}
