//! Channel-last (Keras) emitters.

use std::collections::HashSet;

use super::names::sanitize;
use super::plan::{GenPlan, PlanRecord};
use super::py::{self, Code};
use super::{dynamic_symbols, header, scaffold, CodegenError, EmitOptions, EmitTarget};
use crate::frontend::Style;
use crate::pivot::*;

pub(super) fn emit(plan: &GenPlan, nn: &PivotNN, target: EmitTarget, opts: &EmitOptions) -> Result<String, CodegenError> {
    let mut code = Code::default();
    code.line(0, header(nn, target, opts));
    code.line(0, "import tensorflow as tf");
    code.line(0, "from tensorflow import keras");
    code.line(0, "from tensorflow.keras import layers");
    let input_shape = match target.style {
        Style::Sequential => None,
        Style::Subclassing => nn.input_shape.as_ref().and_then(|s| s.feature_dims()),
    };
    let datasets = opts.emit_training && !nn.datasets.is_empty();
    if input_shape.is_some() || datasets {
        code.blank();
    }
    if let Some(dims) = input_shape {
        code.line(0, format!("INPUT_SHAPE = {}", py::tuple(&dims)));
    }
    if datasets {
        scaffold::datasets(&mut code, &nn.datasets);
    }
    match target.style {
        Style::Sequential => sequential(&mut code, plan, nn)?,
        Style::Subclassing => {
            let mut done = HashSet::new();
            class(&mut code, plan, nn, &mut done)?;
        }
    }
    if let Some(c) = nn.config.as_ref().filter(|_| opts.emit_training) {
        scaffold::keras_train(&mut code, nn, c);
    }
    Ok(code.finish())
}

fn activation_value(a: &ActivationRef) -> Option<String> {
    match a {
        ActivationRef::None => None,
        ActivationRef::Literal(a) => Some(py::string(a.as_str())),
        ActivationRef::Dynamic(s) => Some(sanitize(s)),
    }
}

/// Whether the layer constructor takes the activation as a keyword.
fn embeds_activation(layer: &Layer) -> bool {
    matches!(layer, Layer::Linear(_) | Layer::Conv(_))
}

fn padding(module: &str, p: &Padding) -> Result<&'static str, CodegenError> {
    match p {
        Padding::Valid => Ok("\"valid\""),
        Padding::Same => Ok("\"same\""),
        Padding::Explicit(v) if v.iter().all(|&x| x == 0) => Ok("\"valid\""),
        Padding::Explicit(v) => Err(CodegenError::UnsupportedPadding {
            module: module.to_string(),
            detail: format!("explicit padding {v:?} has no channel-last keyword equivalent"),
        }),
    }
}

fn rnn_class(cell: RecurrentCell) -> &'static str {
    match cell {
        RecurrentCell::Simple => "SimpleRNN",
        RecurrentCell::Lstm => "LSTM",
        RecurrentCell::Gru => "GRU",
    }
}

/// Keras constructor for a layer; `extra` keywords go last.
fn layer_ctor(module: &str, spec: &LayerSpec, extra: &[String]) -> Result<String, CodegenError> {
    let mut kw: Vec<String> = Vec::new();
    let class = match &spec.layer {
        Layer::Linear(l) => {
            kw.push(format!("units={}", l.out_features));
            "Dense".to_string()
        }
        Layer::Conv(c) => {
            kw.push(format!("filters={}", c.out_channels));
            kw.push(format!("kernel_size={}", py::tuple(&c.kernel)));
            kw.push(format!("strides={}", py::tuple(&c.stride)));
            kw.push(format!("padding={}", padding(module, &c.padding)?));
            format!("Conv{}D", c.rank.dims())
        }
        Layer::Pool(p) => {
            kw.push(format!("pool_size={}", py::tuple(&p.kernel)));
            kw.push(format!("strides={}", py::tuple(&p.stride)));
            kw.push(format!("padding={}", padding(module, &p.padding)?));
            let op = match p.op {
                PoolOp::Max => "MaxPooling",
                PoolOp::Avg => "AveragePooling",
            };
            format!("{op}{}D", p.rank.dims())
        }
        Layer::Flatten => "Flatten".to_string(),
        Layer::Dropout(d) => {
            kw.push(format!("rate={}", py::float(d.rate)));
            "Dropout".to_string()
        }
        Layer::Embedding(e) => {
            kw.push(format!("input_dim={}", e.vocab_size));
            kw.push(format!("output_dim={}", e.embedding_dim));
            "Embedding".to_string()
        }
        Layer::Recurrent(r) => {
            let mut inner = vec![format!("units={}", r.hidden_size)];
            if r.return_sequences {
                inner.push("return_sequences=True".into());
            }
            let cell = format!("layers.{}({})", rnn_class(r.cell), py::join(&inner));
            if !r.bidirectional {
                let mut all = inner;
                all.extend_from_slice(extra);
                return Ok(format!("layers.{}({})", rnn_class(r.cell), py::join(&all)));
            }
            let mut all = vec![cell];
            all.extend_from_slice(extra);
            return Ok(format!("layers.Bidirectional({})", py::join(&all)));
        }
    };
    if embeds_activation(&spec.layer) {
        if let Some(a) = activation_value(&spec.activation) {
            kw.push(format!("activation={a}"));
        }
    }
    kw.extend_from_slice(extra);
    Ok(format!("layers.{class}({})", py::join(&kw)))
}

/// `layers.Activation(..)` for activations the layer cannot carry itself.
fn separate_activation(spec: &LayerSpec) -> Option<String> {
    if embeds_activation(&spec.layer) {
        return None;
    }
    activation_value(&spec.activation).map(|a| format!("layers.Activation({a})"))
}

fn unsupported_op(r: &PlanRecord, detail: impl Into<String>) -> CodegenError {
    CodegenError::UnsupportedOp {
        module: r.module.clone(),
        detail: detail.into(),
    }
}

fn sequential(code: &mut Code, plan: &GenPlan, nn: &PivotNN) -> Result<(), CodegenError> {
    let mut entries = Vec::new();
    if let Some(dims) = nn.input_shape.as_ref().and_then(|s| s.feature_dims()) {
        entries.push(format!("keras.Input(shape={})", py::tuple(&dims)));
    }
    for r in &plan.records {
        let name = format!("name={}", py::string(&r.emitted_name));
        match &r.definition {
            ModuleKind::Layer(spec) => {
                entries.push(layer_ctor(&r.module, spec, std::slice::from_ref(&name))?);
                entries.extend(separate_activation(spec));
            }
            ModuleKind::TensorOp(TensorOp::Permute { order }) if order.first() == Some(&0) => {
                entries.push(format!("layers.Permute({}, {name})", py::tuple(&order[1..])));
            }
            ModuleKind::TensorOp(TensorOp::Reshape { shape }) => {
                entries.push(format!("layers.Reshape({}, {name})", py::tuple(shape)));
            }
            ModuleKind::TensorOp(op) => {
                return Err(unsupported_op(
                    r,
                    format!("`{}` has no sequential layer form; use subclassing style", op.op_name()),
                ))
            }
            ModuleKind::SubNN(sub) => {
                return Err(unsupported_op(
                    r,
                    format!("sub-network `{sub}` cannot be nested in a sequential container"),
                ))
            }
        }
    }
    let dynamic = dynamic_symbols(nn);
    let depth = usize::from(!dynamic.is_empty());
    code.section();
    if !dynamic.is_empty() {
        let params: Vec<String> = dynamic.iter().map(|s| sanitize(s)).collect();
        code.line(0, format!("def build_model({}):", py::join(&params)));
    }
    code.line(depth, "model = keras.Sequential(");
    code.line(depth + 1, "[");
    for e in &entries {
        code.line(depth + 2, format!("{e},"));
    }
    code.line(depth + 1, "],");
    code.line(depth + 1, format!("name={},", py::string(&nn.name)));
    code.line(depth, ")");
    if !dynamic.is_empty() {
        code.line(1, "return model");
    }
    Ok(())
}

/// Emits `nn`'s class after the classes of its sub-networks.
fn class(code: &mut Code, plan: &GenPlan, nn: &PivotNN, done: &mut HashSet<String>) -> Result<(), CodegenError> {
    if !done.insert(nn.name.clone()) {
        return Ok(());
    }
    for (sub, sub_plan) in nn.sub_networks.iter().zip(&plan.sub_plans) {
        class(code, sub_plan, sub, done)?;
    }
    let mut plan = plan.clone();
    let dynamic: Vec<String> = dynamic_symbols(nn).iter().map(|s| sanitize(s)).collect();
    let mut init = Vec::new();
    let mut call = Vec::new();
    for r in plan.records.clone() {
        let attr = &r.emitted_name;
        let out = &r.output_var;
        match &r.definition {
            ModuleKind::Layer(spec) => {
                init.push(format!("self.{attr} = {}", layer_ctor(&r.module, spec, &[])?));
                let mut expr = format!("self.{attr}({})", r.input_vars[0]);
                if let Some(act) = separate_activation(spec) {
                    let act_attr = plan.helper_name(&format!("{attr}_act"));
                    init.push(format!("self.{act_attr} = {act}"));
                    expr = format!("self.{act_attr}({expr})");
                }
                call.push(format!("{out} = {expr}"));
            }
            ModuleKind::SubNN(sub) => {
                let params = nn
                    .sub_network(sub)
                    .map(|s| dynamic_symbols(s).iter().map(|d| sanitize(d)).collect::<Vec<_>>())
                    .unwrap_or_default();
                init.push(format!("self.{attr} = {}({})", sanitize(sub), py::join(&params)));
                call.push(format!("{out} = self.{attr}({})", r.input_vars[0]));
            }
            ModuleKind::TensorOp(op) => {
                let ins = &r.input_vars;
                let expr = match op {
                    TensorOp::Permute { order } => format!("tf.transpose({}, perm={})", ins[0], py::list(order)),
                    TensorOp::Reshape { shape } => {
                        let mut dims = vec!["-1".to_string()];
                        dims.extend(shape.iter().map(|d| d.to_string()));
                        format!("tf.reshape({}, {})", ins[0], py::list(&dims))
                    }
                    TensorOp::Transpose { dim0, dim1 } => {
                        format!("tf.experimental.numpy.swapaxes({}, {dim0}, {dim1})", ins[0])
                    }
                    TensorOp::Concatenate { axis } => format!("tf.concat({}, axis={axis})", py::list(ins)),
                    TensorOp::Add => format!("{} + {}", ins[0], ins[1]),
                    TensorOp::Multiply => format!("{} * {}", ins[0], ins[1]),
                    TensorOp::Matmul => format!("tf.matmul({}, {})", ins[0], ins[1]),
                };
                call.push(format!("{out} = {expr}"));
            }
        }
    }
    code.section();
    code.line(0, format!("class {}(keras.Model):", sanitize(&nn.name)));
    let mut params = vec!["self".to_string()];
    params.extend(dynamic);
    code.line(1, format!("def __init__({}):", py::join(&params)));
    code.line(2, "super().__init__()");
    for l in &init {
        code.line(2, l);
    }
    code.blank();
    code.line(1, format!("def call(self, {}):", plan.input_var));
    for l in &call {
        code.line(2, l);
    }
    code.line(2, format!("return {}", plan.output_var));
    Ok(())
}
