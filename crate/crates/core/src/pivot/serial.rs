//! Versioned JSON encoding of [`PivotNN`] (`*.nn.json`).

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::model::*;
use super::validate::{validate, Diagnostic};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum PivotError {
    #[error("network fails validation: {}", join(.0))]
    Invalid(Vec<Diagnostic>),
    #[error("malformed pivot document at line {line}, column {column}: {message}")]
    Malformed { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
}

fn join(diags: &[Diagnostic]) -> String {
    diags.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    schema_version: u32,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_shape: Option<Vec<DimDoc>>,
    modules: Vec<ModuleDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<ConfigDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    datasets: Vec<DatasetDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sub_networks: Vec<SubNetworkDoc>,
}

/// Nested networks carry no schema_version of their own.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubNetworkDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_shape: Option<Vec<DimDoc>>,
    modules: Vec<ModuleDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    sub_networks: Vec<SubNetworkDoc>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(untagged)]
enum DimDoc {
    Known(u64),
    Symbolic(BatchToken),
}

#[derive(Serialize, Deserialize, Clone, Copy)]
enum BatchToken {
    #[serde(rename = "batch")]
    Batch,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModuleDoc {
    name: String,
    kind: String,
    inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "is_empty_object")]
    attributes: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    span: Option<Span>,
}

fn is_empty_object(v: &Value) -> bool {
    match v {
        Value::Object(m) => m.is_empty(),
        Value::Null => true,
        _ => false,
    }
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(untagged)]
enum ActivationDoc {
    Literal(String),
    Dynamic { dynamic: String },
}

#[derive(Serialize, Deserialize, Clone)]
#[serde(untagged)]
enum PaddingDoc {
    Mode(String),
    Explicit(Vec<u32>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinearDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_features: Option<u32>,
    out_features: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<ActivationDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConvDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    in_channels: Option<u32>,
    out_channels: u32,
    kernel: Vec<u32>,
    stride: Vec<u32>,
    padding: PaddingDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<ActivationDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolDoc {
    kernel: Vec<u32>,
    stride: Vec<u32>,
    padding: PaddingDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<ActivationDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlainDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<ActivationDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DropoutDoc {
    rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<ActivationDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingDoc {
    vocab_size: u32,
    embedding_dim: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<ActivationDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecurrentDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    input_size: Option<u32>,
    hidden_size: u32,
    return_sequences: bool,
    bidirectional: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    activation: Option<ActivationDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PermuteDoc {
    order: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReshapeDoc {
    shape: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransposeDoc {
    dim0: usize,
    dim1: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConcatDoc {
    axis: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmptyDoc {}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubNnDoc {
    network: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    optimizer: String,
    learning_rate: f64,
    loss: String,
    batch_size: u32,
    epochs: u32,
    #[serde(default)]
    metrics: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetDoc {
    name: String,
    path: String,
    task: String,
    input_format: String,
}

/// Encodes a valid network as pretty-printed JSON. Equal networks produce identical bytes.
pub fn serialize(nn: &PivotNN) -> Result<Vec<u8>, PivotError> {
    let diags = validate(nn);
    if !diags.is_empty() {
        return Err(PivotError::Invalid(diags));
    }
    let doc = NetworkDoc {
        schema_version: SCHEMA_VERSION,
        name: nn.name.clone(),
        input_shape: nn.input_shape.as_ref().map(shape_doc),
        modules: nn.modules.iter().map(module_doc).collect(),
        config: nn.config.as_ref().map(|c| ConfigDoc {
            optimizer: c.optimizer.as_str().into(),
            learning_rate: c.learning_rate,
            loss: c.loss.as_str().into(),
            batch_size: c.batch_size,
            epochs: c.epochs,
            metrics: c.metrics.iter().map(|m| m.as_str().to_string()).collect(),
        }),
        datasets: nn
            .datasets
            .iter()
            .map(|d| DatasetDoc {
                name: d.name.clone(),
                path: d.path.clone(),
                task: match d.task {
                    Task::Classification => "classification",
                    Task::Regression => "regression",
                }
                .into(),
                input_format: match d.input_format {
                    InputFormat::Images => "images",
                    InputFormat::Sequences => "sequences",
                }
                .into(),
            })
            .collect(),
        sub_networks: nn.sub_networks.iter().map(sub_doc).collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&doc).expect("pivot documents always serialize");
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn serialize_to_string(nn: &PivotNN) -> Result<String, PivotError> {
    serialize(nn).map(|b| String::from_utf8(b).expect("serde_json emits UTF-8"))
}

fn sub_doc(nn: &PivotNN) -> SubNetworkDoc {
    SubNetworkDoc {
        name: nn.name.clone(),
        input_shape: nn.input_shape.as_ref().map(shape_doc),
        modules: nn.modules.iter().map(module_doc).collect(),
        sub_networks: nn.sub_networks.iter().map(sub_doc).collect(),
    }
}

fn shape_doc(s: &TensorShape) -> Vec<DimDoc> {
    s.dims
        .iter()
        .map(|d| match d {
            Dim::Batch => DimDoc::Symbolic(BatchToken::Batch),
            Dim::Known(n) => DimDoc::Known(*n),
        })
        .collect()
}

fn activation_doc(a: &ActivationRef) -> Option<ActivationDoc> {
    match a {
        ActivationRef::None => None,
        ActivationRef::Literal(act) => Some(ActivationDoc::Literal(act.as_str().into())),
        ActivationRef::Dynamic(sym) => Some(ActivationDoc::Dynamic { dynamic: sym.clone() }),
    }
}

fn padding_doc(p: &Padding) -> PaddingDoc {
    match p {
        Padding::Valid => PaddingDoc::Mode("valid".into()),
        Padding::Same => PaddingDoc::Mode("same".into()),
        Padding::Explicit(v) => PaddingDoc::Explicit(v.clone()),
    }
}

fn to_value<T: Serialize>(doc: T) -> Value {
    serde_json::to_value(doc).expect("attribute documents always serialize")
}

fn module_doc(m: &ModuleSpec) -> ModuleDoc {
    let (kind, attributes) = match &m.kind {
        ModuleKind::Layer(spec) => {
            let activation = activation_doc(&spec.activation);
            let attrs = match &spec.layer {
                Layer::Linear(l) => to_value(LinearDoc {
                    in_features: l.in_features,
                    out_features: l.out_features,
                    activation,
                }),
                Layer::Conv(c) => to_value(ConvDoc {
                    in_channels: c.in_channels,
                    out_channels: c.out_channels,
                    kernel: c.kernel.clone(),
                    stride: c.stride.clone(),
                    padding: padding_doc(&c.padding),
                    activation,
                }),
                Layer::Pool(p) => to_value(PoolDoc {
                    kernel: p.kernel.clone(),
                    stride: p.stride.clone(),
                    padding: padding_doc(&p.padding),
                    activation,
                }),
                Layer::Flatten => to_value(PlainDoc { activation }),
                Layer::Dropout(d) => to_value(DropoutDoc { rate: d.rate, activation }),
                Layer::Embedding(e) => to_value(EmbeddingDoc {
                    vocab_size: e.vocab_size,
                    embedding_dim: e.embedding_dim,
                    activation,
                }),
                Layer::Recurrent(r) => to_value(RecurrentDoc {
                    input_size: r.input_size,
                    hidden_size: r.hidden_size,
                    return_sequences: r.return_sequences,
                    bidirectional: r.bidirectional,
                    activation,
                }),
            };
            (spec.layer.kind().as_str().to_string(), attrs)
        }
        ModuleKind::TensorOp(op) => {
            let attrs = match op {
                TensorOp::Permute { order } => to_value(PermuteDoc { order: order.clone() }),
                TensorOp::Reshape { shape } => to_value(ReshapeDoc { shape: shape.clone() }),
                TensorOp::Transpose { dim0, dim1 } => to_value(TransposeDoc { dim0: *dim0, dim1: *dim1 }),
                TensorOp::Concatenate { axis } => to_value(ConcatDoc { axis: *axis }),
                TensorOp::Add | TensorOp::Multiply | TensorOp::Matmul => Value::Object(Default::default()),
            };
            (op.op_name().to_string(), attrs)
        }
        ModuleKind::SubNN(target) => ("sub_nn".to_string(), to_value(SubNnDoc { network: target.clone() })),
    };
    ModuleDoc {
        name: m.name.clone(),
        kind,
        inputs: m.inputs.clone(),
        attributes,
        span: m.span,
    }
}

/// Decodes and validates a pivot document.
pub fn deserialize(bytes: &[u8]) -> Result<PivotNN, PivotError> {
    let doc: NetworkDoc = serde_json::from_slice(bytes).map_err(|e| PivotError::Malformed {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(PivotError::Version(doc.schema_version));
    }
    let mut nn = network_from_parts(doc.name, doc.input_shape, doc.modules, doc.sub_networks, "")?;
    if let Some(c) = doc.config {
        nn.config = Some(config_from_doc(c)?);
    }
    nn.datasets = doc
        .datasets
        .into_iter()
        .enumerate()
        .map(|(i, d)| dataset_from_doc(i, d))
        .collect::<Result<_, _>>()?;
    let diags = validate(&nn);
    if !diags.is_empty() {
        return Err(PivotError::Invalid(diags));
    }
    Ok(nn)
}

fn network_from_parts(
    name: String,
    input_shape: Option<Vec<DimDoc>>,
    modules: Vec<ModuleDoc>,
    subs: Vec<SubNetworkDoc>,
    prefix: &str,
) -> Result<PivotNN, PivotError> {
    let mut nn = PivotNN::new(name);
    nn.input_shape = input_shape.map(|dims| {
        TensorShape::new(
            dims.into_iter()
                .map(|d| match d {
                    DimDoc::Known(n) => Dim::Known(n),
                    DimDoc::Symbolic(_) => Dim::Batch,
                })
                .collect(),
        )
    });
    for (i, m) in modules.into_iter().enumerate() {
        let path = format!("{prefix}modules[{i}]");
        nn.modules.push(module_from_doc(m, &path)?);
    }
    for (i, s) in subs.into_iter().enumerate() {
        let path = format!("{prefix}sub_networks[{i}].");
        nn.sub_networks
            .push(network_from_parts(s.name, s.input_shape, s.modules, s.sub_networks, &path)?);
    }
    Ok(nn)
}

fn field_err(path: &str, message: impl Into<String>) -> PivotError {
    PivotError::Field {
        path: path.to_string(),
        message: message.into(),
    }
}

fn attrs<T: serde::de::DeserializeOwned>(value: Value, path: &str) -> Result<T, PivotError> {
    let value = if value.is_null() {
        Value::Object(Default::default())
    } else {
        value
    };
    serde_json::from_value(value).map_err(|e| field_err(&format!("{path}.attributes"), e.to_string()))
}

fn activation_from_doc(doc: Option<ActivationDoc>, path: &str) -> Result<ActivationRef, PivotError> {
    match doc {
        None => Ok(ActivationRef::None),
        Some(ActivationDoc::Literal(s)) => Activation::parse(&s)
            .map(ActivationRef::Literal)
            .ok_or_else(|| field_err(&format!("{path}.attributes.activation"), format!("unknown activation {s:?}"))),
        Some(ActivationDoc::Dynamic { dynamic }) => Ok(ActivationRef::Dynamic(dynamic)),
    }
}

fn padding_from_doc(doc: PaddingDoc, path: &str) -> Result<Padding, PivotError> {
    match doc {
        PaddingDoc::Mode(s) if s == "valid" => Ok(Padding::Valid),
        PaddingDoc::Mode(s) if s == "same" => Ok(Padding::Same),
        PaddingDoc::Mode(s) => Err(field_err(&format!("{path}.attributes.padding"), format!("unknown padding {s:?}"))),
        PaddingDoc::Explicit(v) => Ok(Padding::Explicit(v)),
    }
}

fn module_from_doc(doc: ModuleDoc, path: &str) -> Result<ModuleSpec, PivotError> {
    let ModuleDoc {
        name,
        kind,
        inputs,
        attributes,
        span,
    } = doc;
    let layer = |layer: Layer, activation: Option<ActivationDoc>| -> Result<ModuleKind, PivotError> {
        Ok(ModuleKind::Layer(LayerSpec {
            layer,
            activation: activation_from_doc(activation, path)?,
        }))
    };
    let module_kind = if let Some(lk) = LayerKind::parse(&kind) {
        use LayerKind::*;
        match lk {
            Linear => {
                let d: LinearDoc = attrs(attributes, path)?;
                layer(
                    self::Layer::Linear(LinearAttrs {
                        in_features: d.in_features,
                        out_features: d.out_features,
                    }),
                    d.activation,
                )?
            }
            Conv1D | Conv2D | Conv3D => {
                let d: ConvDoc = attrs(attributes, path)?;
                let rank = match lk {
                    Conv1D => SpatialRank::One,
                    Conv2D => SpatialRank::Two,
                    _ => SpatialRank::Three,
                };
                layer(
                    self::Layer::Conv(ConvAttrs {
                        rank,
                        in_channels: d.in_channels,
                        out_channels: d.out_channels,
                        kernel: d.kernel,
                        stride: d.stride,
                        padding: padding_from_doc(d.padding, path)?,
                    }),
                    d.activation,
                )?
            }
            MaxPool1D | MaxPool2D | MaxPool3D | AvgPool1D | AvgPool2D | AvgPool3D => {
                let d: PoolDoc = attrs(attributes, path)?;
                let (op, rank) = match lk {
                    MaxPool1D => (PoolOp::Max, SpatialRank::One),
                    MaxPool2D => (PoolOp::Max, SpatialRank::Two),
                    MaxPool3D => (PoolOp::Max, SpatialRank::Three),
                    AvgPool1D => (PoolOp::Avg, SpatialRank::One),
                    AvgPool2D => (PoolOp::Avg, SpatialRank::Two),
                    _ => (PoolOp::Avg, SpatialRank::Three),
                };
                layer(
                    self::Layer::Pool(PoolAttrs {
                        op,
                        rank,
                        kernel: d.kernel,
                        stride: d.stride,
                        padding: padding_from_doc(d.padding, path)?,
                    }),
                    d.activation,
                )?
            }
            Flatten => {
                let d: PlainDoc = attrs(attributes, path)?;
                layer(self::Layer::Flatten, d.activation)?
            }
            Dropout => {
                let d: DropoutDoc = attrs(attributes, path)?;
                layer(self::Layer::Dropout(DropoutAttrs { rate: d.rate }), d.activation)?
            }
            Embedding => {
                let d: EmbeddingDoc = attrs(attributes, path)?;
                layer(
                    self::Layer::Embedding(EmbeddingAttrs {
                        vocab_size: d.vocab_size,
                        embedding_dim: d.embedding_dim,
                    }),
                    d.activation,
                )?
            }
            SimpleRNN | LSTM | GRU => {
                let d: RecurrentDoc = attrs(attributes, path)?;
                let cell = match lk {
                    SimpleRNN => RecurrentCell::Simple,
                    LSTM => RecurrentCell::Lstm,
                    _ => RecurrentCell::Gru,
                };
                layer(
                    self::Layer::Recurrent(RecurrentAttrs {
                        cell,
                        input_size: d.input_size,
                        hidden_size: d.hidden_size,
                        return_sequences: d.return_sequences,
                        bidirectional: d.bidirectional,
                    }),
                    d.activation,
                )?
            }
        }
    } else {
        let op = match kind.as_str() {
            "permute" => {
                let d: PermuteDoc = attrs(attributes, path)?;
                TensorOp::Permute { order: d.order }
            }
            "reshape" => {
                let d: ReshapeDoc = attrs(attributes, path)?;
                TensorOp::Reshape { shape: d.shape }
            }
            "transpose" => {
                let d: TransposeDoc = attrs(attributes, path)?;
                TensorOp::Transpose { dim0: d.dim0, dim1: d.dim1 }
            }
            "concatenate" => {
                let d: ConcatDoc = attrs(attributes, path)?;
                TensorOp::Concatenate { axis: d.axis }
            }
            "add" | "multiply" | "matmul" => {
                let _: EmptyDoc = attrs(attributes, path)?;
                match kind.as_str() {
                    "add" => TensorOp::Add,
                    "multiply" => TensorOp::Multiply,
                    _ => TensorOp::Matmul,
                }
            }
            "sub_nn" => {
                let d: SubNnDoc = attrs(attributes, path)?;
                return Ok(ModuleSpec {
                    name,
                    kind: ModuleKind::SubNN(d.network),
                    inputs,
                    span,
                });
            }
            other => return Err(field_err(&format!("{path}.kind"), format!("unknown module kind {other:?}"))),
        };
        ModuleKind::TensorOp(op)
    };
    Ok(ModuleSpec {
        name,
        kind: module_kind,
        inputs,
        span,
    })
}

fn config_from_doc(c: ConfigDoc) -> Result<TrainingConfig, PivotError> {
    let optimizer = Optimizer::parse(&c.optimizer)
        .ok_or_else(|| field_err("config.optimizer", format!("unknown optimizer {:?}", c.optimizer)))?;
    let loss = Loss::parse(&c.loss).ok_or_else(|| field_err("config.loss", format!("unknown loss {:?}", c.loss)))?;
    let metrics = c
        .metrics
        .iter()
        .map(|m| Metric::parse(m).ok_or_else(|| field_err("config.metrics", format!("unknown metric {m:?}"))))
        .collect::<Result<_, _>>()?;
    Ok(TrainingConfig {
        optimizer,
        learning_rate: c.learning_rate,
        loss,
        batch_size: c.batch_size,
        epochs: c.epochs,
        metrics,
    })
}

fn dataset_from_doc(i: usize, d: DatasetDoc) -> Result<DatasetRef, PivotError> {
    let task = match d.task.as_str() {
        "classification" => Task::Classification,
        "regression" => Task::Regression,
        other => return Err(field_err(&format!("datasets[{i}].task"), format!("unknown task {other:?}"))),
    };
    let input_format = match d.input_format.as_str() {
        "images" => InputFormat::Images,
        "sequences" => InputFormat::Sequences,
        other => {
            return Err(field_err(
                &format!("datasets[{i}].input_format"),
                format!("unknown input format {other:?}"),
            ))
        }
    };
    Ok(DatasetRef {
        name: d.name,
        path: d.path,
        task,
        input_format,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> PivotNN {
        let mut nn = PivotNN::new("net");
        nn.input_shape = Some(TensorShape::batched(&[8, 8, 3]));
        nn.modules = vec![
            ModuleSpec::layer(
                "conv",
                Layer::Conv(ConvAttrs {
                    rank: SpatialRank::Two,
                    in_channels: None,
                    out_channels: 4,
                    kernel: vec![3, 3],
                    stride: vec![1, 1],
                    padding: Padding::Same,
                }),
                ActivationRef::Literal(Activation::Relu),
                INPUT,
            )
            .with_span(Some(Span::new(4, 9))),
            ModuleSpec::layer("flat", Layer::Flatten, ActivationRef::None, "conv"),
            ModuleSpec::layer(
                "head",
                Layer::Linear(LinearAttrs {
                    in_features: Some(256),
                    out_features: 2,
                }),
                ActivationRef::Dynamic("actv".into()),
                "flat",
            ),
        ];
        nn.config = Some(TrainingConfig {
            optimizer: Optimizer::Adam,
            learning_rate: 0.001,
            loss: Loss::CrossEntropy,
            batch_size: 32,
            epochs: 3,
            metrics: vec![Metric::Accuracy],
        });
        nn
    }

    #[test]
    fn round_trips() {
        let nn = sample();
        let bytes = serialize(&nn).unwrap();
        assert_eq!(deserialize(&bytes).unwrap(), nn);
        assert_eq!(serialize(&nn).unwrap(), bytes);
    }

    #[test]
    fn empty_module_list_is_rejected() {
        let doc = br#"{"schema_version": 1, "name": "x", "modules": []}"#;
        match deserialize(doc) {
            Err(PivotError::Invalid(d)) => assert!(!d.is_empty()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let doc = b"{\n  \"schema_version\": 1,\n  \"name\": \n}";
        match deserialize(doc) {
            Err(PivotError::Malformed { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_attribute_names_the_module_path() {
        let doc = br#"{"schema_version": 1, "name": "x", "modules": [
            {"name": "a", "kind": "Linear", "inputs": ["INPUT"], "attributes": {"units": 3}}]}"#;
        let err = deserialize(doc).unwrap_err().to_string();
        assert!(err.starts_with("modules[0].attributes"), "{err}");
    }

    #[test]
    fn rejects_unknown_schema_version() {
        let doc = br#"{"schema_version": 7, "name": "x", "modules": []}"#;
        assert!(matches!(deserialize(doc), Err(PivotError::Version(7))));
    }
}
