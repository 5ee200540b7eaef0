//! Acceptance suite: one PASS/FAIL line per primary criterion.

mod common;

use std::time::{Duration, Instant};

use common::*;
use nnport::codegen::{generate, EmitOptions};
use nnport::frontend::{parse_source, Dialect, Style};
use nnport::migrate::{self, MigrateError, Request};
use nnport::pivot::*;
use nnport::shape::annotate;

type Outcome = Result<String, String>;

/// Source dialects and targets of the cross-framework scenarios.
fn scenarios(fx: &Fixture) -> Vec<(Dialect, Dialect)> {
    let mut out = Vec::new();
    for src in Dialect::ALL {
        for dst in Dialect::ALL {
            if src.framework == dst.framework {
                continue;
            }
            let both_subclassing = src.style == Style::Subclassing && dst.style == Style::Subclassing;
            if fx.chain || both_subclassing {
                out.push((src, dst));
            }
        }
    }
    out
}

struct Case {
    label: String,
    source_pivot: PivotNN,
    migrated: Result<PivotNN, String>,
}

fn run_cases() -> (Vec<Case>, Duration) {
    let start = Instant::now();
    let mut cases = Vec::new();
    for fx in &FIXTURES {
        for (src, dst) in scenarios(fx) {
            let text = source_in(fx, src);
            let source_pivot = extract_as(&text, src);
            let migrated = migrate(&text, src, dst).map_err(|e| e.to_string()).and_then(|m| {
                let tree = parse_source(&m.code).map_err(|e| format!("output does not parse: {e}"))?;
                nnport::frontend::extract(&tree, dst)
                    .map(|x| x.nn)
                    .map_err(|e| format!("output does not re-extract: {e}"))
            });
            cases.push(Case {
                label: format!("{} {src} -> {dst}", fx.name),
                source_pivot,
                migrated,
            });
        }
    }
    (cases, start.elapsed())
}

fn migration_matrix(cases: &[Case], elapsed: Duration) -> Outcome {
    let failed: Vec<String> = cases
        .iter()
        .filter_map(|c| c.migrated.as_ref().err().map(|e| format!("{}: {e}", c.label)))
        .collect();
    let green = cases.len() - failed.len();
    if !failed.is_empty() {
        return Err(format!("{green}/{} green; {}", cases.len(), failed.join("; ")));
    }
    if cases.len() != 28 {
        return Err(format!("expected 28 cases, ran {}", cases.len()));
    }
    if elapsed >= Duration::from_secs(10) {
        return Err(format!("28/28 green but took {elapsed:?}"));
    }
    Ok(format!("{green}/{} green in {:.2}s", cases.len(), elapsed.as_secs_f64()))
}

fn round_trip(cases: &[Case]) -> Outcome {
    let mut problems = Vec::new();
    for c in cases {
        if let Ok(back) = &c.migrated {
            let diffs = differences(&c.source_pivot, back, InputDims::Lenient);
            if !diffs.is_empty() {
                problems.push(format!("{}: {}", c.label, diffs[0]));
            }
        }
    }
    // Every generated source must also describe the original fixture.
    for fx in &FIXTURES {
        let original = extract_as(&source_text(fx), fx.dialect);
        for d in Dialect::ALL {
            if d == fx.dialect || !golden_path(fx, d).exists() {
                continue;
            }
            let diffs = differences(&original, &extract_as(&source_in(fx, d), d), InputDims::Lenient);
            if let Some(first) = diffs.first() {
                problems.push(format!("{} as {d}: {first}", fx.name));
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("{} migrated pivots equal their sources", cases.len()))
    } else {
        Err(problems.join("; "))
    }
}

/// Number of window placements along one axis, counted one by one.
fn windows(n: u64, k: u64, s: u64, padding: &Padding, axis: usize) -> u64 {
    let mut count = 0;
    let mut start = 0;
    loop {
        let fits = match padding {
            Padding::Valid => start + k <= n,
            Padding::Explicit(p) => start + k <= n + 2 * u64::from(p[axis]),
            // one window per stride step that starts inside the input
            Padding::Same => start < n,
        };
        if !fits {
            return count;
        }
        count += 1;
        start += s;
    }
}

/// Replays the layer semantics on batch-less shapes, module by module.
fn oracle(nn: &PivotNN, input: Vec<u64>) -> Vec<(String, Vec<u64>)> {
    let mut known: Vec<(String, Vec<u64>)> = vec![(INPUT.to_string(), input)];
    let lookup = |known: &Vec<(String, Vec<u64>)>, name: &str| known.iter().find(|(n, _)| n == name).unwrap().1.clone();
    for m in &nn.modules {
        let ins: Vec<Vec<u64>> = m.inputs.iter().map(|i| lookup(&known, i)).collect();
        let x = ins[0].clone();
        let out = match &m.kind {
            ModuleKind::Layer(spec) => match &spec.layer {
                Layer::Linear(l) => {
                    let mut y = x.clone();
                    *y.last_mut().unwrap() = u64::from(l.out_features);
                    y
                }
                Layer::Conv(c) => {
                    let n = c.rank.dims();
                    let mut y: Vec<u64> = (0..n)
                        .map(|a| windows(x[a], c.kernel[a].into(), c.stride[a].into(), &c.padding, a))
                        .collect();
                    y.push(c.out_channels.into());
                    y
                }
                Layer::Pool(p) => {
                    let n = p.rank.dims();
                    let mut y: Vec<u64> = (0..n)
                        .map(|a| windows(x[a], p.kernel[a].into(), p.stride[a].into(), &p.padding, a))
                        .collect();
                    y.push(x[n]);
                    y
                }
                Layer::Flatten => vec![x.iter().product()],
                Layer::Dropout(_) => x.clone(),
                Layer::Embedding(e) => {
                    let mut y = x.clone();
                    y.push(e.embedding_dim.into());
                    y
                }
                Layer::Recurrent(r) => {
                    let features = u64::from(r.hidden_size) * if r.bidirectional { 2 } else { 1 };
                    if r.return_sequences {
                        vec![x[0], features]
                    } else {
                        vec![features]
                    }
                }
            },
            ModuleKind::TensorOp(op) => match op {
                TensorOp::Add | TensorOp::Multiply => {
                    assert!(ins.iter().all(|i| *i == x), "{}: operand shapes differ", m.name);
                    x.clone()
                }
                TensorOp::Concatenate { axis } => {
                    let rank = x.len() as i64 + 1;
                    let a = (if *axis < 0 { rank + axis } else { *axis }) as usize - 1;
                    let mut y = x.clone();
                    y[a] = ins.iter().map(|i| i[a]).sum();
                    y
                }
                TensorOp::Permute { order } => order[1..].iter().map(|&o| x[o - 1]).collect(),
                TensorOp::Reshape { shape } => shape.iter().map(|&d| d.into()).collect(),
                TensorOp::Transpose { dim0, dim1 } => {
                    let mut y = x.clone();
                    y.swap(dim0 - 1, dim1 - 1);
                    y
                }
                TensorOp::Matmul => {
                    let other = &ins[1];
                    let mut y = x.clone();
                    *y.last_mut().unwrap() = *other.last().unwrap();
                    y
                }
            },
            ModuleKind::SubNN(_) => unreachable!("fixtures have no sub-networks"),
        };
        known.push((m.name.clone(), out));
    }
    known.remove(0);
    known
}

fn shape_oracle() -> Outcome {
    let mut compared = 0;
    let mut problems = Vec::new();
    let mut canary = None;
    for fx in &FIXTURES {
        let nn = extract_as(&source_text(fx), fx.dialect);
        let input = nn.input_shape.as_ref().and_then(|s| s.feature_dims()).ok_or(format!("{}: no input shape", fx.name))?;
        let (_, ann) = annotate(&nn, None).map_err(|e| format!("{}: {e}", fx.name))?;
        for (name, expected) in oracle(&nn, input) {
            let got = ann.get(&name).and_then(|s| s.output.feature_dims());
            if got.as_ref() != Some(&expected) {
                problems.push(format!("{}.{name}: propagated {got:?}, oracle {expected:?}", fx.name));
            }
            if fx.name == "tf_tutorial" && nn.module(&name).and_then(|m| m.as_layer()).is_some_and(|l| l.layer == Layer::Flatten) {
                canary = got;
            }
            compared += 1;
        }
    }
    // 32 -conv3-> 30 -pool2-> 15 -conv3-> 13 -pool2-> 6 -conv3-> 4; 4 * 4 * 64 channels
    if canary != Some(vec![1024]) {
        problems.push(format!("TF-Tutorial flatten width {canary:?}, expected [1024]"));
    }
    if problems.is_empty() {
        Ok(format!("{compared} module shapes equal the oracle; TF-Tutorial flatten = 1024"))
    } else {
        Err(problems.join("; "))
    }
}

fn determinism() -> Outcome {
    let mut emitted = 0;
    for fx in &FIXTURES {
        for (src, dst) in scenarios(fx) {
            let text = source_in(fx, src);
            let a = migrate(&text, src, dst).map_err(|e| e.to_string())?.code;
            let b = migrate(&text, src, dst).map_err(|e| e.to_string())?.code;
            if a != b {
                return Err(format!("{} {src} -> {dst}: two emissions differ", fx.name));
            }
            emitted += 1;
        }
        for d in Dialect::ALL {
            let path = golden_path(fx, d);
            if let Ok(m) = migrate(&source_text(fx), fx.dialect, d) {
                let golden = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
                if golden != m.code {
                    return Err(format!("{} differs from emitted output", path.display()));
                }
            }
        }
    }
    Ok(format!("{emitted} cases byte-identical across runs; golden files match"))
}

fn single_layer(kind: LayerKind) -> (PivotNN, Vec<u64>) {
    let conv = |rank: SpatialRank, kernel: Vec<u32>, stride: Vec<u32>, padding: Padding| {
        Layer::Conv(ConvAttrs {
            rank,
            in_channels: None,
            out_channels: 6,
            kernel,
            stride,
            padding,
        })
    };
    let pool = |op: PoolOp, rank: SpatialRank| {
        let n = rank.dims();
        Layer::Pool(PoolAttrs {
            op,
            rank,
            kernel: vec![3; n],
            stride: vec![2; n],
            padding: Padding::Valid,
        })
    };
    let rnn = |cell, return_sequences, bidirectional| {
        Layer::Recurrent(RecurrentAttrs {
            cell,
            input_size: None,
            hidden_size: 9,
            return_sequences,
            bidirectional,
        })
    };
    use LayerKind as K;
    let (layer, activation, input) = match kind {
        K::Linear => (
            Layer::Linear(LinearAttrs {
                in_features: None,
                out_features: 5,
            }),
            ActivationRef::Literal(Activation::Sigmoid),
            vec![12],
        ),
        K::Conv1D => (
            conv(SpatialRank::One, vec![3], vec![2], Padding::Valid),
            ActivationRef::Literal(Activation::Tanh),
            vec![20, 4],
        ),
        K::Conv2D => (
            conv(SpatialRank::Two, vec![3, 5], vec![1, 1], Padding::Same),
            ActivationRef::Literal(Activation::Relu),
            vec![16, 16, 3],
        ),
        K::Conv3D => (
            conv(SpatialRank::Three, vec![3, 3, 3], vec![2, 2, 2], Padding::Valid),
            ActivationRef::None,
            vec![8, 8, 8, 2],
        ),
        K::MaxPool1D => (pool(PoolOp::Max, SpatialRank::One), ActivationRef::None, vec![20, 4]),
        K::MaxPool2D => (pool(PoolOp::Max, SpatialRank::Two), ActivationRef::None, vec![16, 16, 3]),
        K::MaxPool3D => (pool(PoolOp::Max, SpatialRank::Three), ActivationRef::None, vec![8, 8, 8, 2]),
        K::AvgPool1D => (pool(PoolOp::Avg, SpatialRank::One), ActivationRef::None, vec![20, 4]),
        K::AvgPool2D => (pool(PoolOp::Avg, SpatialRank::Two), ActivationRef::None, vec![16, 16, 3]),
        K::AvgPool3D => (pool(PoolOp::Avg, SpatialRank::Three), ActivationRef::None, vec![8, 8, 8, 2]),
        K::Flatten => (Layer::Flatten, ActivationRef::None, vec![4, 5]),
        K::Dropout => (Layer::Dropout(DropoutAttrs { rate: 0.25 }), ActivationRef::None, vec![10]),
        K::Embedding => (
            Layer::Embedding(EmbeddingAttrs {
                vocab_size: 100,
                embedding_dim: 16,
            }),
            ActivationRef::None,
            vec![7],
        ),
        K::SimpleRNN => (rnn(RecurrentCell::Simple, true, false), ActivationRef::None, vec![7, 6]),
        K::LSTM => (rnn(RecurrentCell::Lstm, false, true), ActivationRef::None, vec![7, 6]),
        K::GRU => (rnn(RecurrentCell::Gru, false, false), ActivationRef::Literal(Activation::Softmax), vec![7, 6]),
    };
    let mut nn = PivotNN::new("Net");
    nn.modules.push(ModuleSpec::layer("layer", layer, activation, INPUT));
    nn.input_shape = Some(TensorShape::batched(&input));
    (nn, input)
}

fn layer_bijection() -> Outcome {
    let mut checked = 0;
    let mut problems = Vec::new();
    for kind in LayerKind::ALL {
        let (nn, _) = single_layer(kind);
        let recurrent = matches!(kind, LayerKind::SimpleRNN | LayerKind::LSTM | LayerKind::GRU);
        for src in Dialect::ALL {
            for dst in Dialect::ALL {
                if src.framework == dst.framework || (recurrent && (src == PT_SEQ || dst == PT_SEQ)) {
                    continue;
                }
                let result = (|| -> Result<(), String> {
                    let (filled, ann) = annotate(&nn, None).map_err(|e| e.to_string())?;
                    let source = generate(&filled, &ann, src, &EmitOptions::default()).map_err(|e| e.to_string())?;
                    let back_src = extract_as(&source, src);
                    let migrated = migrate(&source, src, dst).map_err(|e| e.to_string())?;
                    let back = extract_as(&migrated.code, dst);
                    for (label, other) in [("source", &back_src), ("target", &back)] {
                        if let Some(d) = differences(&nn, other, InputDims::Lenient).first() {
                            return Err(format!("{label}: {d}"));
                        }
                        let m = other.modules.first().and_then(|m| m.as_layer()).ok_or("no layer")?;
                        if m.layer.kind() != kind {
                            return Err(format!("{label}: kind {}", m.layer.kind()));
                        }
                    }
                    Ok(())
                })();
                match result {
                    Ok(()) => checked += 1,
                    Err(e) => problems.push(format!("{kind} {src} -> {dst}: {e}")),
                }
            }
        }
    }
    if problems.is_empty() {
        Ok(format!("{} layer kinds, {checked} directed migrations preserve kind and attributes", LayerKind::ALL.len()))
    } else {
        Err(problems.join("; "))
    }
}

fn expect_error(label: &str, result: Result<String, MigrateError>, name: &str) -> Result<String, String> {
    match result {
        Err(e) if e.name() == name => Ok(format!("{label} -> {} {name}", e.code())),
        Err(e) => Err(format!("{label}: expected {name}, got {} ({e})", e.name())),
        Ok(_) => Err(format!("{label}: expected {name}, migration succeeded")),
    }
}

fn error_paths() -> Outcome {
    let run = |text: &str, src: Dialect, dst: Dialect| migrate(text, src, dst).map(|m| m.code).map_err(|f| f.error);
    let mut lines = Vec::new();

    let lstm = source_text(fixture("lstm"));
    lines.push(expect_error("non-chain to sequential", run(&lstm, TF_SUB, PT_SEQ), "NonChainForSequential")?);

    let strided_same = "from tensorflow import keras\nfrom tensorflow.keras import layers\n\nmodel = keras.Sequential([keras.Input(shape=(32, 32, 3)), layers.Conv2D(8, 3, strides=2, padding=\"same\")])\n";
    lines.push(expect_error("strided same padding", run(strided_same, TF_SEQ, PT_SUB), "SamePaddingWithStride")?);

    let conflicting = "import torch\nfrom torch import nn\n\nINPUT_SHAPE = (20,)\nnet = nn.Sequential(nn.Linear(16, 4))\n";
    lines.push(expect_error("declared vs traced width", run(conflicting, PT_SEQ, TF_SUB), "ConflictingAttribute")?);

    let mut nn = extract_as(&source_text(fixture("tf_tutorial")), TF_SEQ);
    let last = nn.modules.last().unwrap().name.clone();
    nn.modules[0].inputs = vec![last.clone()];
    if !validate(&nn).iter().any(|d| d.rule == Rule::CycleOrForwardRef) {
        return Err("cycle injection: validate reports no CycleOrForwardRef".into());
    }
    let doc = serialize_to_string(&extract_as(&source_text(fixture("tf_tutorial")), TF_SEQ)).unwrap();
    let first_input = doc.find("\"INPUT\"").unwrap();
    let cyclic = format!("{}\"{}\"{}", &doc[..first_input], last, &doc[first_input + 7..]);
    match migrate::migrate_document(cyclic.as_bytes(), &Request::new(PT_SUB)) {
        Err(f) => match &f.error {
            MigrateError::Pivot(PivotError::Invalid(d)) if d.iter().any(|d| d.rule == Rule::CycleOrForwardRef) => {
                lines.push(format!("cycle injection -> {} CycleOrForwardRef", f.code()));
            }
            other => return Err(format!("cycle injection: unexpected {other}")),
        },
        Ok(_) => return Err("cycle injection: document accepted".into()),
    }
    Ok(lines.join("; "))
}

#[test]
fn acceptance() {
    let (cases, elapsed) = run_cases();
    let results: Vec<(&str, Outcome)> = vec![
        ("Migration-success matrix", migration_matrix(&cases, elapsed)),
        ("Round-trip structural equality", round_trip(&cases)),
        ("Shape-oracle equivalence", shape_oracle()),
        ("Determinism", determinism()),
        ("Layer-mapping bijection", layer_bijection()),
        ("Error-path suite", error_paths()),
    ];
    let mut failed = 0;
    for (name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
