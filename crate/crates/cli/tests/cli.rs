use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn nnport(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nnport")).args(args).output().unwrap()
}

fn copy_fixture(dir: &Path, name: &str) -> PathBuf {
    let to = dir.join(name);
    fs::copy(fixture(name), &to).unwrap();
    to
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

#[test]
fn tutorial_to_pt_subclassing() {
    let dir = tempfile::tempdir().unwrap();
    let input = copy_fixture(dir.path(), "tf_tutorial.py");
    let out = nnport(&[input.to_str().unwrap(), "--to", "pt", "--to-style", "subc"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let code = fs::read_to_string(dir.path().join("tf_tutorial_pt_subclassing.py")).unwrap();
    assert!(code.contains("class "));
    assert!(code.contains("nn.Conv2d("));

    // The output is itself a valid source for the reverse migration.
    let back = nnport(&[dir.path().join("tf_tutorial_pt_subclassing.py").to_str().unwrap(), "--to", "tf", "--to-style", "seq"]);
    assert_eq!(back.status.code(), Some(0), "{}", stderr(&back));
    assert!(dir.path().join("tf_tutorial_pt_subclassing_tf_sequential.py").exists());
}

#[test]
fn explicit_output_and_pivot_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("net.py");
    let out = nnport(&[
        fixture("alexnet.py").to_str().unwrap(),
        "--from",
        "pt",
        "--to",
        "tf",
        "--to-style",
        "seq",
        "--dump-pivot",
        "--emit-training",
        "-o",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(files(dir.path()), vec!["net.nn.json", "net.py"]);
    let code = fs::read_to_string(&out_file).unwrap();
    assert!(code.contains("def train(model, x, y):"));
    let doc = fs::read_to_string(dir.path().join("net.nn.json")).unwrap();
    let nn = nnport::pivot::deserialize(doc.as_bytes()).unwrap();
    assert_eq!(nn.layer_count(), 15);
}

#[test]
fn pivot_document_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = copy_fixture(dir.path(), "vgg16.nn.json");
    let out = nnport(&[input.to_str().unwrap(), "--to", "pt", "--to-style", "seq"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(dir.path().join("vgg16_pt_sequential.py").exists());
}

#[test]
fn missing_file_is_reported() {
    let out = nnport(&["/nonexistent/model.py", "--to", "pt", "--to-style", "subc"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("/nonexistent/model.py: error[E001]"), "{err}");
}

#[test]
fn non_chain_to_sequential_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = copy_fixture(dir.path(), "lstm.py");
    let out = nnport(&[input.to_str().unwrap(), "--to", "pt", "--to-style", "seq", "--dump-pivot"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("error[E050]") && err.contains("(NonChainForSequential)"), "{err}");
    assert_eq!(files(dir.path()), vec!["lstm.py"]);
}

#[test]
fn syntax_error_carries_a_position() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("broken.py");
    fs::write(&input, "import torch\nmodel = nn.Sequential(\n").unwrap();
    let out = nnport(&[input.to_str().unwrap(), "--to", "tf", "--to-style", "seq"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    let prefix = format!("{}:", input.display());
    let located = err.lines().any(|l| {
        l.strip_prefix(&prefix)
            .and_then(|rest| rest.split(": error[E010]").next())
            .is_some_and(|pos| pos.split(':').all(|n| n.parse::<u32>().is_ok()))
    });
    assert!(located, "{err}");
    assert_eq!(files(dir.path()), vec!["broken.py"]);
}

#[test]
fn strict_mode_turns_warnings_into_failure() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("mlp.py");
    fs::write(
        &input,
        "from torch import nn\n\nmodel = nn.Sequential(nn.Linear(16, 8), nn.ReLU(), nn.Linear(8, 2))\n",
    )
    .unwrap();
    let relaxed = nnport(&[input.to_str().unwrap(), "--to", "tf", "--to-style", "seq"]);
    assert_eq!(relaxed.status.code(), Some(0), "{}", stderr(&relaxed));
    assert!(stderr(&relaxed).contains("warning[W003]"));
    fs::remove_file(dir.path().join("mlp_tf_sequential.py")).unwrap();

    let strict = nnport(&[input.to_str().unwrap(), "--to", "tf", "--to-style", "seq", "--strict"]);
    assert_eq!(strict.status.code(), Some(1));
    assert_eq!(files(dir.path()), vec!["mlp.py"]);

    let shaped = nnport(&[input.to_str().unwrap(), "--to", "tf", "--to-style", "seq", "--strict", "--input-shape", "16"]);
    assert_eq!(shaped.status.code(), Some(0), "{}", stderr(&shaped));
}

#[test]
fn bad_input_shape_is_a_usage_error() {
    let out = nnport(&[fixture("alexnet.py").to_str().unwrap(), "--to", "tf", "--to-style", "seq", "--input-shape", "32,x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("E003"));
}

#[test]
fn batch_inputs_into_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = nnport(&[
        fixture("alexnet.py").to_str().unwrap(),
        fixture("vgg16.py").to_str().unwrap(),
        fixture("lstm.py").to_str().unwrap(),
        "--to",
        "tf",
        "--to-style",
        "seq",
        "-o",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("lstm.py"));
    assert_eq!(files(&out_dir), vec!["alexnet_tf_sequential.py", "vgg16_tf_sequential.py"]);
}
