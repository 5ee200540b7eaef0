//! Symbolic shape propagation in the channel-last canonical layout, and
//! inference of the input-dimension attributes channel-last sources omit.

use thiserror::Error;

use crate::pivot::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("input shape {0} must be batch first with known feature dimensions")]
    BadInputShape(TensorShape),
    #[error("module `{module}`: shape mismatch: {detail}")]
    ShapeMismatch { module: String, detail: String },
    #[error("module `{module}`: dimension below 1: {detail}")]
    NegativeDim { module: String, detail: String },
    #[error("module `{module}`: declared {attribute}={declared} but the traced input gives {inferred}")]
    ConflictingAttribute {
        module: String,
        attribute: &'static str,
        declared: u32,
        inferred: u64,
    },
    #[error("module `{module}`: needs a known dimension where the batch dimension is")]
    UnresolvedBatch { module: String },
    #[error("no input shape: declare it in the source or pass one explicitly")]
    MissingInputShape,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleShapes {
    pub inputs: Vec<TensorShape>,
    pub output: TensorShape,
}

/// Per-module shapes of one network, in module order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ShapeAnnotation {
    pub modules: Vec<(String, ModuleShapes)>,
    /// Annotations of the sub-networks, traced with the shape at their call site.
    pub sub_networks: Vec<(String, ShapeAnnotation)>,
}

impl ShapeAnnotation {
    pub fn get(&self, module: &str) -> Option<&ModuleShapes> {
        self.modules.iter().find(|(n, _)| n == module).map(|(_, s)| s)
    }

    pub fn sub_network(&self, name: &str) -> Option<&ShapeAnnotation> {
        self.sub_networks.iter().find(|(n, _)| n == name).map(|(_, a)| a)
    }

    /// Output shape of the network's terminal module.
    pub fn output(&self) -> Option<&TensorShape> {
        self.modules.last().map(|(_, s)| &s.output)
    }
}

fn mismatch(module: &str, detail: impl Into<String>) -> ShapeError {
    ShapeError::ShapeMismatch {
        module: module.to_string(),
        detail: detail.into(),
    }
}

fn known(module: &str, d: Dim) -> Result<u64, ShapeError> {
    match d {
        Dim::Known(n) => Ok(n),
        Dim::Batch => Err(ShapeError::UnresolvedBatch {
            module: module.to_string(),
        }),
    }
}

/// Output length of a sliding window over `n` input positions.
fn window(module: &str, n: u64, kernel: u32, stride: u32, padding: &Padding, i: usize) -> Result<u64, ShapeError> {
    let (k, s) = (kernel as u64, stride as u64);
    let out = match padding {
        Padding::Same => n.div_ceil(s),
        Padding::Valid | Padding::Explicit(_) => {
            let pad = match padding {
                Padding::Explicit(p) => 2 * *p.get(i).unwrap_or(&0) as u64,
                _ => 0,
            };
            if n + pad < k {
                return Err(mismatch(
                    module,
                    format!("kernel {k} is larger than spatial dimension {n} (padding {pad})"),
                ));
            }
            (n + pad - k) / s + 1
        }
    };
    if out < 1 {
        return Err(ShapeError::NegativeDim {
            module: module.to_string(),
            detail: format!("window over {n} gives {out}"),
        });
    }
    Ok(out)
}

fn spatial(
    module: &str,
    input: &TensorShape,
    rank: SpatialRank,
    kernel: &[u32],
    stride: &[u32],
    padding: &Padding,
    channels: Option<u32>,
) -> Result<TensorShape, ShapeError> {
    if input.rank() != rank.tensor_rank() {
        return Err(mismatch(
            module,
            format!("expects a rank-{} input, got {input}", rank.tensor_rank()),
        ));
    }
    let mut dims = input.dims.clone();
    for i in 0..rank.dims() {
        let n = known(module, dims[i + 1])?;
        dims[i + 1] = Dim::Known(window(module, n, kernel[i], stride[i], padding, i)?);
    }
    if let Some(c) = channels {
        *dims.last_mut().expect("rank >= 3") = Dim::Known(c as u64);
    }
    Ok(TensorShape::new(dims))
}

fn feature_product(module: &str, s: &TensorShape) -> Result<u64, ShapeError> {
    s.dims[1..].iter().try_fold(1u64, |acc, &d| Ok(acc * known(module, d)?))
}

fn layer_output(module: &str, layer: &Layer, x: &TensorShape) -> Result<TensorShape, ShapeError> {
    match layer {
        Layer::Linear(l) => {
            if x.rank() < 2 {
                return Err(mismatch(module, format!("linear layer needs a batched input, got {x}")));
            }
            known(module, x.last().expect("rank >= 2"))?;
            let mut dims = x.dims.clone();
            *dims.last_mut().expect("rank >= 2") = Dim::Known(l.out_features as u64);
            Ok(TensorShape::new(dims))
        }
        Layer::Conv(c) => spatial(module, x, c.rank, &c.kernel, &c.stride, &c.padding, Some(c.out_channels)),
        Layer::Pool(p) => spatial(module, x, p.rank, &p.kernel, &p.stride, &p.padding, None),
        Layer::Flatten => {
            if x.rank() < 2 {
                return Err(mismatch(module, format!("flatten needs a batched input, got {x}")));
            }
            Ok(TensorShape::new(vec![Dim::Batch, Dim::Known(feature_product(module, x)?)]))
        }
        Layer::Dropout(_) => Ok(x.clone()),
        Layer::Embedding(e) => {
            if x.rank() != 2 {
                return Err(mismatch(module, format!("embedding expects (B, T), got {x}")));
            }
            let mut dims = x.dims.clone();
            dims.push(Dim::Known(e.embedding_dim as u64));
            Ok(TensorShape::new(dims))
        }
        Layer::Recurrent(r) => {
            if x.rank() != 3 {
                return Err(mismatch(module, format!("recurrent layer expects (B, T, F), got {x}")));
            }
            let h = Dim::Known(r.hidden_size as u64 * r.directions() as u64);
            Ok(TensorShape::new(if r.return_sequences {
                vec![x.dims[0], x.dims[1], h]
            } else {
                vec![x.dims[0], h]
            }))
        }
    }
}

fn op_output(module: &str, op: &TensorOp, xs: &[TensorShape]) -> Result<TensorShape, ShapeError> {
    let x = &xs[0];
    match op {
        TensorOp::Permute { order } => {
            if order.len() != x.rank() || order.first() != Some(&0) {
                return Err(mismatch(module, format!("permutation {order:?} does not fit {x} with batch first")));
            }
            Ok(TensorShape::new(order.iter().map(|&i| x.dims[i]).collect()))
        }
        TensorOp::Reshape { shape } => {
            let have = feature_product(module, x)?;
            let want: u64 = shape.iter().map(|&d| d as u64).product();
            if have != want {
                return Err(mismatch(module, format!("cannot reshape {x} ({have} elements) to {shape:?}")));
            }
            let mut dims = vec![Dim::Batch];
            dims.extend(shape.iter().map(|&d| Dim::Known(d as u64)));
            Ok(TensorShape::new(dims))
        }
        TensorOp::Transpose { dim0, dim1 } => {
            if *dim0 >= x.rank() || *dim1 >= x.rank() || *dim0 == 0 || *dim1 == 0 {
                return Err(mismatch(module, format!("transpose ({dim0}, {dim1}) does not fit {x}")));
            }
            let mut dims = x.dims.clone();
            dims.swap(*dim0, *dim1);
            Ok(TensorShape::new(dims))
        }
        TensorOp::Concatenate { axis } => {
            let rank = x.rank() as i64;
            let a = if *axis < 0 { rank + axis } else { *axis };
            if a <= 0 || a >= rank {
                return Err(mismatch(module, format!("axis {axis} is not a feature axis of {x}")));
            }
            let a = a as usize;
            let mut total = 0;
            for s in xs {
                if s.rank() != x.rank() || (0..x.rank()).any(|i| i != a && s.dims[i] != x.dims[i]) {
                    return Err(mismatch(module, format!("{s} and {x} disagree outside axis {axis}")));
                }
                total += known(module, s.dims[a])?;
            }
            let mut dims = x.dims.clone();
            dims[a] = Dim::Known(total);
            Ok(TensorShape::new(dims))
        }
        TensorOp::Add | TensorOp::Multiply => {
            if xs.iter().any(|s| s != x) {
                return Err(mismatch(module, format!("{} needs identical shapes", op.op_name())));
            }
            Ok(x.clone())
        }
        TensorOp::Matmul => {
            let (a, b) = (x, &xs[1]);
            let r = a.rank();
            if r < 3 || b.rank() != r || a.dims[..r - 2] != b.dims[..r - 2] || a.dims[r - 1] != b.dims[r - 2] {
                return Err(mismatch(module, format!("cannot multiply {a} by {b}")));
            }
            let mut dims = a.dims.clone();
            dims[r - 1] = b.dims[r - 1];
            Ok(TensorShape::new(dims))
        }
    }
}

/// Traces `input_shape` through `nn`, annotating every module.
pub fn propagate(nn: &PivotNN, input_shape: &TensorShape) -> Result<ShapeAnnotation, ShapeError> {
    let valid_input = input_shape.dims.first() == Some(&Dim::Batch)
        && input_shape.rank() >= 2
        && input_shape.dims[1..].iter().all(|d| matches!(d, Dim::Known(n) if *n >= 1));
    if !valid_input {
        return Err(ShapeError::BadInputShape(input_shape.clone()));
    }
    let mut ann = ShapeAnnotation::default();
    for m in &nn.modules {
        let inputs = m
            .inputs
            .iter()
            .map(|i| {
                if i == INPUT {
                    Ok(input_shape.clone())
                } else {
                    ann.get(i)
                        .map(|s| s.output.clone())
                        .ok_or_else(|| mismatch(&m.name, format!("input `{i}` has no shape yet")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let output = match &m.kind {
            ModuleKind::Layer(spec) => layer_output(&m.name, &spec.layer, &inputs[0])?,
            ModuleKind::TensorOp(op) => op_output(&m.name, op, &inputs)?,
            ModuleKind::SubNN(target) => {
                let sub = nn
                    .sub_network(target)
                    .ok_or_else(|| mismatch(&m.name, format!("unknown sub-network `{target}`")))?;
                let sub_ann = propagate(sub, &inputs[0])?;
                let out = sub_ann
                    .output()
                    .cloned()
                    .ok_or_else(|| mismatch(&m.name, format!("sub-network `{target}` is empty")))?;
                match ann.sub_network(target) {
                    Some(prev) if *prev != sub_ann => {
                        return Err(mismatch(&m.name, format!("sub-network `{target}` is used with different shapes")))
                    }
                    Some(_) => {}
                    None => ann.sub_networks.push((target.clone(), sub_ann)),
                }
                out
            }
        };
        ann.modules.push((m.name.clone(), ModuleShapes { inputs, output }));
    }
    Ok(ann)
}

fn fill(
    module: &str,
    attribute: &'static str,
    slot: &mut Option<u32>,
    input: &TensorShape,
) -> Result<(), ShapeError> {
    let inferred = known(module, input.last().ok_or_else(|| mismatch(module, "scalar input"))?)?;
    match *slot {
        Some(declared) if declared as u64 != inferred => Err(ShapeError::ConflictingAttribute {
            module: module.to_string(),
            attribute,
            declared,
            inferred,
        }),
        Some(_) => Ok(()),
        None => {
            *slot = Some(u32::try_from(inferred).map_err(|_| mismatch(module, "input dimension too large"))?);
            Ok(())
        }
    }
}

/// Fills absent `in_features`, `in_channels` and `input_size` from `ann`
/// and checks declared ones against it.
pub fn infer_missing_inputs(nn: &PivotNN, ann: &ShapeAnnotation) -> Result<PivotNN, ShapeError> {
    let mut out = nn.clone();
    for m in &mut out.modules {
        let name = m.name.clone();
        let Some(spec) = m.as_layer_mut() else { continue };
        let shapes = ann
            .get(&name)
            .ok_or_else(|| mismatch(&name, "module missing from the shape annotation"))?;
        let x = &shapes.inputs[0];
        match &mut spec.layer {
            Layer::Linear(l) => fill(&name, "in_features", &mut l.in_features, x)?,
            Layer::Conv(c) => fill(&name, "in_channels", &mut c.in_channels, x)?,
            Layer::Recurrent(r) => fill(&name, "input_size", &mut r.input_size, x)?,
            _ => {}
        }
    }
    for sub in &mut out.sub_networks {
        if let Some(sub_ann) = ann.sub_network(&sub.name) {
            *sub = infer_missing_inputs(sub, sub_ann)?;
        }
    }
    Ok(out)
}

/// Propagates from `input_shape` (or the network's own) and fills missing
/// input dimensions.
pub fn annotate(nn: &PivotNN, input_shape: Option<&TensorShape>) -> Result<(PivotNN, ShapeAnnotation), ShapeError> {
    let shape = input_shape.or(nn.input_shape.as_ref()).ok_or(ShapeError::MissingInputShape)?;
    let ann = propagate(nn, shape)?;
    let filled = infer_missing_inputs(nn, &ann)?;
    Ok((filled, ann))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv(out: u32, k: u32, s: u32, padding: Padding) -> Layer {
        Layer::Conv(ConvAttrs {
            rank: SpatialRank::Two,
            in_channels: None,
            out_channels: out,
            kernel: vec![k, k],
            stride: vec![s, s],
            padding,
        })
    }

    fn chain(layers: Vec<Layer>) -> PivotNN {
        let mut nn = PivotNN::new("n");
        let mut prev = INPUT.to_string();
        for (i, l) in layers.into_iter().enumerate() {
            let name = format!("m{i}");
            nn.modules.push(ModuleSpec::layer(&name, l, ActivationRef::None, &prev));
            prev = name;
        }
        nn
    }

    #[test]
    fn valid_and_same_conv() {
        let nn = chain(vec![conv(32, 3, 1, Padding::Valid), conv(8, 3, 2, Padding::Same)]);
        let ann = propagate(&nn, &TensorShape::batched(&[32, 32, 3])).unwrap();
        assert_eq!(ann.get("m0").unwrap().output, TensorShape::batched(&[30, 30, 32]));
        assert_eq!(ann.get("m1").unwrap().output, TensorShape::batched(&[15, 15, 8]));
    }

    #[test]
    fn kernel_larger_than_input_is_a_mismatch() {
        let nn = chain(vec![conv(4, 3, 1, Padding::Valid)]);
        let err = propagate(&nn, &TensorShape::batched(&[2, 2, 1])).unwrap_err();
        assert!(matches!(err, ShapeError::ShapeMismatch { .. }));
    }

    #[test]
    fn dropout_preserves_shape() {
        let nn = chain(vec![Layer::Dropout(DropoutAttrs { rate: 0.5 })]);
        let ann = propagate(&nn, &TensorShape::batched(&[128])).unwrap();
        assert_eq!(ann.get("m0").unwrap().output, TensorShape::batched(&[128]));
    }

    #[test]
    fn conflicting_in_features() {
        let nn = chain(vec![
            Layer::Flatten,
            Layer::Linear(LinearAttrs {
                in_features: Some(512),
                out_features: 10,
            }),
        ]);
        let ann = propagate(&nn, &TensorShape::batched(&[4, 4, 64])).unwrap();
        let err = infer_missing_inputs(&nn, &ann).unwrap_err();
        assert_eq!(
            err,
            ShapeError::ConflictingAttribute {
                module: "m1".into(),
                attribute: "in_features",
                declared: 512,
                inferred: 1024
            }
        );
    }

    #[test]
    fn inference_is_idempotent() {
        let nn = chain(vec![
            conv(8, 3, 1, Padding::Same),
            Layer::Flatten,
            Layer::Linear(LinearAttrs {
                in_features: None,
                out_features: 2,
            }),
        ]);
        let ann = propagate(&nn, &TensorShape::batched(&[4, 4, 3])).unwrap();
        let once = infer_missing_inputs(&nn, &ann).unwrap();
        assert_eq!(infer_missing_inputs(&once, &ann).unwrap(), once);
        let Layer::Linear(l) = &once.modules[2].as_layer().unwrap().layer else { panic!() };
        assert_eq!(l.in_features, Some(128));
    }
}
