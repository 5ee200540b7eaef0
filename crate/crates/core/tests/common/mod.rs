#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use nnport::codegen::{EmitOptions, EmitTarget};
use nnport::frontend::{extract, parse_source, Dialect, Framework, Style};
use nnport::migrate::{self, Failure, Migration, Request, SourceSpec};
use nnport::pivot::PivotNN;

pub const TF_SEQ: Dialect = Dialect::new(Framework::ChannelLast, Style::Sequential);
pub const TF_SUB: Dialect = Dialect::new(Framework::ChannelLast, Style::Subclassing);
pub const PT_SEQ: Dialect = Dialect::new(Framework::ChannelFirst, Style::Sequential);
pub const PT_SUB: Dialect = Dialect::new(Framework::ChannelFirst, Style::Subclassing);

pub struct Fixture {
    pub name: &'static str,
    pub dialect: Dialect,
    /// Published layer count of the network.
    pub layers: usize,
    /// Whether the network is a plain chain.
    pub chain: bool,
}

pub const FIXTURES: [Fixture; 5] = [
    Fixture {
        name: "alexnet",
        dialect: PT_SUB,
        layers: 15,
        chain: true,
    },
    Fixture {
        name: "vgg16",
        dialect: PT_SUB,
        layers: 25,
        chain: true,
    },
    Fixture {
        name: "tf_tutorial",
        dialect: TF_SEQ,
        layers: 8,
        chain: true,
    },
    Fixture {
        name: "lstm",
        dialect: TF_SUB,
        layers: 6,
        chain: false,
    },
    Fixture {
        name: "cnn_rnn",
        dialect: TF_SUB,
        layers: 11,
        chain: false,
    },
];

pub fn fixture(name: &str) -> &'static Fixture {
    FIXTURES.iter().find(|f| f.name == name).expect("known fixture")
}

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

pub fn source_text(fx: &Fixture) -> String {
    fs::read_to_string(fixtures_dir().join(format!("{}.py", fx.name))).expect("fixture source")
}

pub fn tag(d: Dialect) -> String {
    format!("{}_{}", d.framework.as_str(), d.style.as_str())
}

pub fn golden_path(fx: &Fixture, target: Dialect) -> PathBuf {
    fixtures_dir().join("golden").join(format!("{}.{}.py", fx.name, tag(target)))
}

pub fn pivot_path(fx: &Fixture) -> PathBuf {
    fixtures_dir().join(format!("{}.nn.json", fx.name))
}

/// Source of `fx` written in dialect `d`: the fixture itself, or its
/// committed migration into `d`.
pub fn source_in(fx: &Fixture, d: Dialect) -> String {
    if d == fx.dialect {
        source_text(fx)
    } else {
        fs::read_to_string(golden_path(fx, d)).expect("golden file")
    }
}

pub fn extract_as(text: &str, d: Dialect) -> PivotNN {
    let tree = parse_source(text).unwrap_or_else(|e| panic!("parse: {e}"));
    extract(&tree, d).unwrap_or_else(|e| panic!("extract as {d}: {e}")).nn
}

pub fn request(source: Dialect, target: EmitTarget) -> Request {
    let mut req = Request::new(target);
    req.source = SourceSpec {
        framework: Some(source.framework),
        style: Some(source.style),
    };
    req.emit = EmitOptions {
        emit_training: true,
        source: source.to_string(),
    };
    req
}

pub fn migrate(text: &str, source: Dialect, target: Dialect) -> Result<Migration, Failure> {
    migrate::migrate_source(text, &request(source, target))
}
