//! Channel-first (PyTorch) emitters.

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
    if target.style == Style::Sequential {
        code.line(0, "from collections import OrderedDict");
        code.blank();
    }
    code.line(0, "import torch");
    code.line(0, "from torch import nn");
    let training = opts.emit_training.then_some(nn.config.as_ref()).flatten();
    code.blank();
    if let Some(dims) = nn.input_shape.as_ref().and_then(|s| s.feature_dims()) {
        code.line(0, format!("INPUT_SHAPE = {}", py::tuple(&dims)));
    }
    if let Some(c) = training {
        scaffold::torch_metrics(&mut code, c);
    }
    if opts.emit_training && !nn.datasets.is_empty() {
        scaffold::datasets(&mut code, &nn.datasets);
    }
    if !dynamic_symbols(nn).is_empty() {
        resolver(&mut code);
    }
    match target.style {
        Style::Sequential => sequential(&mut code, plan, nn)?,
        Style::Subclassing => {
            let mut done = HashSet::new();
            class(&mut code, plan, nn, &mut done)?;
        }
    }
    if let Some(c) = training {
        scaffold::torch_train(&mut code, nn, c);
    }
    Ok(code.finish())
}

fn resolver(code: &mut Code) {
    code.section();
    code.line(0, "def resolve_activation(name, dim=-1):");
    code.line(1, "if name is None or name == \"linear\":");
    code.line(2, "return nn.Identity()");
    for (n, ctor) in [
        ("relu", "nn.ReLU()"),
        ("sigmoid", "nn.Sigmoid()"),
        ("tanh", "nn.Tanh()"),
        ("softmax", "nn.Softmax(dim=dim)"),
        ("leaky_relu", "nn.LeakyReLU(0.2)"),
    ] {
        code.line(1, format!("if name == {}:", py::string(n)));
        code.line(2, format!("return {ctor}"));
    }
    code.line(1, "raise ValueError(\"unsupported activation: \" + str(name))");
}

fn missing(module: &str, attribute: &'static str) -> CodegenError {
    CodegenError::MissingInputDims {
        module: module.to_string(),
        attribute,
    }
}

fn conv_padding(module: &str, c: &ConvAttrs) -> Result<String, CodegenError> {
    match &c.padding {
        Padding::Valid => Ok("0".into()),
        Padding::Same if c.stride.iter().all(|&s| s == 1) => Ok("\"same\"".into()),
        Padding::Same => Err(CodegenError::SamePaddingWithStride {
            module: module.to_string(),
            stride: c.stride.clone(),
        }),
        Padding::Explicit(p) => Ok(py::tuple(p)),
    }
}

fn pool_padding(module: &str, p: &PoolAttrs) -> Result<Option<String>, CodegenError> {
    match &p.padding {
        Padding::Valid => Ok(None),
        Padding::Explicit(v) => Ok(Some(py::tuple(v))),
        Padding::Same if p.stride.iter().any(|&s| s > 1) => Err(CodegenError::SamePaddingWithStride {
            module: module.to_string(),
            stride: p.stride.clone(),
        }),
        Padding::Same => Err(CodegenError::UnsupportedPadding {
            module: module.to_string(),
            detail: "same pooling padding has no exact channel-first equivalent".into(),
        }),
    }
}

fn rnn_class(cell: RecurrentCell) -> &'static str {
    match cell {
        RecurrentCell::Simple => "RNN",
        RecurrentCell::Lstm => "LSTM",
        RecurrentCell::Gru => "GRU",
    }
}

fn layer_ctor(module: &str, layer: &Layer) -> Result<String, CodegenError> {
    Ok(match layer {
        Layer::Linear(l) => format!(
            "nn.Linear(in_features={}, out_features={})",
            l.in_features.ok_or_else(|| missing(module, "in_features"))?,
            l.out_features
        ),
        Layer::Conv(c) => format!(
            "nn.Conv{}d(in_channels={}, out_channels={}, kernel_size={}, stride={}, padding={})",
            c.rank.dims(),
            c.in_channels.ok_or_else(|| missing(module, "in_channels"))?,
            c.out_channels,
            py::tuple(&c.kernel),
            py::tuple(&c.stride),
            conv_padding(module, c)?
        ),
        Layer::Pool(p) => {
            let class = match p.op {
                PoolOp::Max => "MaxPool",
                PoolOp::Avg => "AvgPool",
            };
            let mut kw = vec![format!("kernel_size={}", py::tuple(&p.kernel)), format!("stride={}", py::tuple(&p.stride))];
            if let Some(pad) = pool_padding(module, p)? {
                kw.push(format!("padding={pad}"));
            }
            format!("nn.{class}{}d({})", p.rank.dims(), py::join(&kw))
        }
        Layer::Flatten => "nn.Flatten()".into(),
        Layer::Dropout(d) => format!("nn.Dropout(p={})", py::float(d.rate)),
        Layer::Embedding(e) => format!(
            "nn.Embedding(num_embeddings={}, embedding_dim={})",
            e.vocab_size, e.embedding_dim
        ),
        Layer::Recurrent(r) => {
            let mut kw = vec![
                format!("input_size={}", r.input_size.ok_or_else(|| missing(module, "input_size"))?),
                format!("hidden_size={}", r.hidden_size),
                "batch_first=True".to_string(),
            ];
            if r.bidirectional {
                kw.push("bidirectional=True".into());
            }
            format!("nn.{}({})", rnn_class(r.cell), py::join(&kw))
        }
    })
}

/// Activation module; softmax normalizes over channels inside a channel-first run.
fn activation_ctor(a: &ActivationRef, channel_first: bool) -> Option<String> {
    match a {
        ActivationRef::None => None,
        ActivationRef::Literal(a) => Some(match a {
            Activation::Relu => "nn.ReLU()".into(),
            Activation::Sigmoid => "nn.Sigmoid()".into(),
            Activation::Tanh => "nn.Tanh()".into(),
            Activation::Softmax => format!("nn.Softmax(dim={})", if channel_first { 1 } else { -1 }),
            Activation::LeakyRelu => "nn.LeakyReLU(0.2)".into(),
        }),
        ActivationRef::Dynamic(s) if channel_first => Some(format!("resolve_activation({}, 1)", sanitize(s))),
        ActivationRef::Dynamic(s) => Some(format!("resolve_activation({})", sanitize(s))),
    }
}

fn permute_method(x: &str, op: &TensorOp) -> String {
    match op {
        TensorOp::Permute { order } => format!("{x}.permute({})", py::join(order)),
        _ => unreachable!("layout ops are permutes"),
    }
}

fn unsupported_op(r: &PlanRecord, detail: impl Into<String>) -> CodegenError {
    CodegenError::UnsupportedOp {
        module: r.module.clone(),
        detail: detail.into(),
    }
}

fn permute_helper(op: &TensorOp) -> String {
    match op {
        TensorOp::Permute { order } => format!("Permute({})", py::join(order)),
        _ => unreachable!("layout ops are permutes"),
    }
}

fn sequential(code: &mut Code, plan: &GenPlan, nn: &PivotNN) -> Result<(), CodegenError> {
    let mut plan = plan.clone();
    let channel_first = plan.channel_first_records();
    let mut entries: Vec<(String, String)> = Vec::new();
    let (mut uses_permute, mut uses_reshape) = (false, false);
    for (r, &cf) in plan.records.clone().iter().zip(&channel_first) {
        let name = &r.emitted_name;
        for op in &r.pre_ops {
            entries.push((plan.helper_name(&format!("{name}_to_cf")), permute_helper(op)));
            uses_permute = true;
        }
        match &r.definition {
            ModuleKind::Layer(spec) => {
                if matches!(spec.layer, Layer::Recurrent(_)) {
                    return Err(unsupported_op(
                        r,
                        "recurrent layers return (output, state) and cannot be chained in a sequential container",
                    ));
                }
                entries.push((name.clone(), layer_ctor(&r.module, &spec.layer)?));
                if let Some(act) = activation_ctor(&spec.activation, cf) {
                    entries.push((plan.helper_name(&format!("{name}_act")), act));
                }
            }
            ModuleKind::TensorOp(op @ TensorOp::Permute { .. }) => {
                entries.push((name.clone(), permute_helper(op)));
                uses_permute = true;
            }
            ModuleKind::TensorOp(TensorOp::Reshape { shape }) => {
                entries.push((name.clone(), format!("Reshape({})", py::join(shape))));
                uses_reshape = true;
            }
            ModuleKind::TensorOp(op) => {
                return Err(unsupported_op(
                    r,
                    format!("`{}` has no sequential module form; use subclassing style", op.op_name()),
                ))
            }
            ModuleKind::SubNN(sub) => {
                return Err(unsupported_op(
                    r,
                    format!("sub-network `{sub}` cannot be nested in a sequential container"),
                ))
            }
        }
        for op in &r.post_ops {
            entries.push((plan.helper_name(&format!("{name}_to_cl")), permute_helper(op)));
            uses_permute = true;
        }
    }
    if uses_permute {
        helper_class(code, "Permute", "dims", "return x.permute(*self.dims)");
    }
    if uses_reshape {
        helper_class(code, "Reshape", "shape", "return x.reshape(x.size(0), *self.shape)");
    }
    let var = sanitize(&nn.name);
    let dynamic: Vec<String> = dynamic_symbols(nn).iter().map(|s| sanitize(s)).collect();
    let depth = usize::from(!dynamic.is_empty());
    code.section();
    if !dynamic.is_empty() {
        code.line(0, format!("def build_model({}):", py::join(&dynamic)));
    }
    code.line(depth, format!("{var} = nn.Sequential(OrderedDict(["));
    for (key, ctor) in &entries {
        code.line(depth + 1, format!("({}, {ctor}),", py::string(key)));
    }
    code.line(depth, "]))");
    if !dynamic.is_empty() {
        code.line(1, format!("return {var}"));
    }
    Ok(())
}

fn helper_class(code: &mut Code, name: &str, field: &str, body: &str) {
    code.section();
    code.line(0, format!("class {name}(nn.Module):"));
    code.line(1, format!("def __init__(self, *{field}):"));
    code.line(2, "super().__init__()");
    code.line(2, format!("self.{field} = {field}"));
    code.blank();
    code.line(1, "def forward(self, x):");
    code.line(2, body);
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
    let channel_first = plan.channel_first_records();
    let dynamic: Vec<String> = dynamic_symbols(nn).iter().map(|s| sanitize(s)).collect();
    let mut init = Vec::new();
    let mut forward = Vec::new();
    for (r, &cf) in plan.records.clone().iter().zip(&channel_first) {
        let attr = &r.emitted_name;
        let out = &r.output_var;
        let mut input = r.input_vars.first().cloned().unwrap_or_default();
        for op in &r.pre_ops {
            input = permute_method(&input, op);
        }
        let mut expr = match &r.definition {
            ModuleKind::Layer(spec) => {
                init.push(format!("self.{attr} = {}", layer_ctor(&r.module, &spec.layer)?));
                let act = activation_ctor(&spec.activation, cf).map(|a| {
                    let act_attr = plan.helper_name(&format!("{attr}_act"));
                    init.push(format!("self.{act_attr} = {a}"));
                    act_attr
                });
                if let Layer::Recurrent(rnn) = &spec.layer {
                    forward.push(format!("{out}, _ = self.{attr}({input})"));
                    if !rnn.return_sequences {
                        let h = rnn.hidden_size;
                        forward.push(if rnn.bidirectional {
                            format!("{out} = torch.cat(({out}[:, -1, :{h}], {out}[:, 0, {h}:]), dim=-1)")
                        } else {
                            format!("{out} = {out}[:, -1, :]")
                        });
                    }
                    match act {
                        Some(a) => format!("self.{a}({out})"),
                        None => {
                            debug_assert!(r.post_ops.is_empty());
                            continue;
                        }
                    }
                } else {
                    let call = format!("self.{attr}({input})");
                    match act {
                        Some(a) => format!("self.{a}({call})"),
                        None => call,
                    }
                }
            }
            ModuleKind::SubNN(sub) => {
                let params = nn
                    .sub_network(sub)
                    .map(|s| dynamic_symbols(s).iter().map(|d| sanitize(d)).collect::<Vec<_>>())
                    .unwrap_or_default();
                init.push(format!("self.{attr} = {}({})", sanitize(sub), py::join(&params)));
                format!("self.{attr}({input})")
            }
            ModuleKind::TensorOp(op) => {
                let ins = &r.input_vars;
                match op {
                    TensorOp::Permute { order } => format!("{input}.permute({})", py::join(order)),
                    TensorOp::Reshape { shape } => {
                        let mut dims = vec!["-1".to_string()];
                        dims.extend(shape.iter().map(|d| d.to_string()));
                        format!("{input}.reshape({})", py::join(&dims))
                    }
                    TensorOp::Transpose { dim0, dim1 } => format!("{input}.transpose({dim0}, {dim1})"),
                    TensorOp::Concatenate { axis } => format!("torch.cat({}, dim={axis})", py::tuple(ins)),
                    TensorOp::Add => format!("{} + {}", ins[0], ins[1]),
                    TensorOp::Multiply => format!("{} * {}", ins[0], ins[1]),
                    TensorOp::Matmul => format!("torch.matmul({}, {})", ins[0], ins[1]),
                }
            }
        };
        for op in &r.post_ops {
            expr = permute_method(&expr, op);
        }
        forward.push(format!("{out} = {expr}"));
    }
    code.section();
    code.line(0, format!("class {}(nn.Module):", sanitize(&nn.name)));
    let mut params = vec!["self".to_string()];
    params.extend(dynamic);
    code.line(1, format!("def __init__({}):", py::join(&params)));
    code.line(2, "super().__init__()");
    for l in &init {
        code.line(2, l);
    }
    code.blank();
    code.line(1, format!("def forward(self, {}):", plan.input_var));
    for l in &forward {
        code.line(2, l);
    }
    code.line(2, format!("return {}", plan.output_var));
    Ok(())
}
