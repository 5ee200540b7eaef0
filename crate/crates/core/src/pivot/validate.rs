use std::collections::HashSet;
use std::fmt;

use super::model::*;

/// Invariant a [`Diagnostic`] reports as violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    EmptyNetwork,
    InvalidName,
    DuplicateName,
    UnknownInput,
    CycleOrForwardRef,
    NoInputConsumer,
    MultipleOutputs,
    InputArity,
    AttributeRange,
    PermuteOrder,
    ShapeForm,
    UnknownSubNetwork,
    ConfigRange,
    DatasetPath,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::EmptyNetwork => "EmptyNetwork",
            Rule::InvalidName => "InvalidName",
            Rule::DuplicateName => "DuplicateName",
            Rule::UnknownInput => "UnknownInput",
            Rule::CycleOrForwardRef => "CycleOrForwardRef",
            Rule::NoInputConsumer => "NoInputConsumer",
            Rule::MultipleOutputs => "MultipleOutputs",
            Rule::InputArity => "InputArity",
            Rule::AttributeRange => "AttributeRange",
            Rule::PermuteOrder => "PermuteOrder",
            Rule::ShapeForm => "ShapeForm",
            Rule::UnknownSubNetwork => "UnknownSubNetwork",
            Rule::ConfigRange => "ConfigRange",
            Rule::DatasetPath => "DatasetPath",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Dotted path of sub-network names, empty for the top-level network.
    pub network: String,
    pub module: Option<String>,
    pub rule: Rule,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule.as_str())?;
        match (&self.module, self.network.is_empty()) {
            (Some(m), true) => write!(f, " at `{m}`")?,
            (Some(m), false) => write!(f, " at `{}.{m}`", self.network)?,
            (None, false) => write!(f, " in `{}`", self.network)?,
            (None, true) => {}
        }
        write!(f, ": {}", self.message)
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c == '_' || c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c == '_' || c.is_ascii_alphanumeric())
}

/// Checks every structural invariant of `nn` and its sub-networks.
///
/// Returns an empty list iff the network is well formed. Never panics.
pub fn validate(nn: &PivotNN) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    validate_into(nn, "", &mut out);
    out
}

struct Sink<'a> {
    network: &'a str,
    out: &'a mut Vec<Diagnostic>,
}

impl Sink<'_> {
    fn push(&mut self, module: Option<&str>, rule: Rule, message: impl Into<String>) {
        self.out.push(Diagnostic {
            network: self.network.to_string(),
            module: module.map(str::to_string),
            rule,
            message: message.into(),
        });
    }
}

fn validate_into(nn: &PivotNN, path: &str, out: &mut Vec<Diagnostic>) {
    let mut sink = Sink { network: path, out };

    if !is_identifier(&nn.name) {
        sink.push(None, Rule::InvalidName, format!("network name {:?} is not an identifier", nn.name));
    }
    if nn.modules.is_empty() {
        sink.push(None, Rule::EmptyNetwork, "network has no modules");
    }

    let all_names: HashSet<&str> = nn.modules.iter().map(|m| m.name.as_str()).collect();
    let mut seen: HashSet<&str> = HashSet::new();
    let mut input_consumed = false;

    for m in &nn.modules {
        let name = m.name.as_str();
        if !is_identifier(name) || name == INPUT {
            sink.push(Some(name), Rule::InvalidName, format!("module name {name:?} is not a usable identifier"));
        }
        if !seen.insert(name) && !name.is_empty() {
            sink.push(Some(name), Rule::DuplicateName, "module name declared more than once");
        }
        for input in &m.inputs {
            if input == INPUT {
                input_consumed = true;
            } else if input == name {
                sink.push(Some(name), Rule::CycleOrForwardRef, "module consumes its own output");
            } else if !seen.contains(input.as_str()) {
                if all_names.contains(input.as_str()) {
                    sink.push(
                        Some(name),
                        Rule::CycleOrForwardRef,
                        format!("input `{input}` is declared after its consumer"),
                    );
                } else {
                    sink.push(Some(name), Rule::UnknownInput, format!("input `{input}` does not exist"));
                }
            }
        }
        check_arity(m, &mut sink);
        check_kind(m, nn, &mut sink);
    }

    if !nn.modules.is_empty() && !input_consumed {
        sink.push(None, Rule::NoInputConsumer, "no module consumes INPUT");
    }
    let terminals = nn.terminals();
    if terminals.len() > 1 {
        let names: Vec<&str> = terminals.iter().map(|m| m.name.as_str()).collect();
        sink.push(
            None,
            Rule::MultipleOutputs,
            format!("network has {} terminal modules: {}", names.len(), names.join(", ")),
        );
    }

    if let Some(shape) = &nn.input_shape {
        if !shape.is_well_formed() || shape.dims.first() != Some(&Dim::Batch) {
            sink.push(None, Rule::ShapeForm, format!("input shape {shape} must be batch-first with positive dims"));
        }
    }
    if let Some(cfg) = &nn.config {
        if !(cfg.learning_rate > 0.0 && cfg.learning_rate.is_finite()) {
            sink.push(None, Rule::ConfigRange, "learning_rate must be positive");
        }
        if cfg.batch_size < 1 {
            sink.push(None, Rule::ConfigRange, "batch_size must be at least 1");
        }
        if cfg.epochs < 1 {
            sink.push(None, Rule::ConfigRange, "epochs must be at least 1");
        }
    }
    for ds in &nn.datasets {
        if ds.path.is_empty() {
            sink.push(None, Rule::DatasetPath, format!("dataset `{}` has an empty path", ds.name));
        }
        if !is_identifier(&ds.name) {
            sink.push(None, Rule::InvalidName, format!("dataset name {:?} is not an identifier", ds.name));
        }
    }

    let mut sub_names = HashSet::new();
    for sub in &nn.sub_networks {
        if !sub_names.insert(sub.name.as_str()) {
            sink.push(None, Rule::DuplicateName, format!("sub-network `{}` declared twice", sub.name));
        }
    }
    for sub in &nn.sub_networks {
        let sub_path = if path.is_empty() {
            sub.name.clone()
        } else {
            format!("{path}.{}", sub.name)
        };
        validate_into(sub, &sub_path, sink.out);
    }
}

fn check_arity(m: &ModuleSpec, sink: &mut Sink<'_>) {
    let n = m.inputs.len();
    let name = m.name.as_str();
    match &m.kind {
        ModuleKind::TensorOp(op) => match op.arity() {
            Some(k) if n != k => {
                sink.push(Some(name), Rule::InputArity, format!("{} takes {k} input(s), got {n}", op.op_name()))
            }
            None if n < 2 => sink.push(Some(name), Rule::InputArity, "concatenate needs at least 2 inputs"),
            _ => {}
        },
        _ if n != 1 => sink.push(Some(name), Rule::InputArity, format!("expected exactly 1 input, got {n}")),
        _ => {}
    }
}

fn check_kind(m: &ModuleSpec, nn: &PivotNN, sink: &mut Sink<'_>) {
    let name = Some(m.name.as_str());
    match &m.kind {
        ModuleKind::Layer(spec) => {
            if let ActivationRef::Dynamic(sym) = &spec.activation {
                if !is_identifier(sym) {
                    sink.push(name, Rule::InvalidName, format!("dynamic activation symbol {sym:?} is not an identifier"));
                }
            }
            check_layer(&spec.layer, name, sink);
        }
        ModuleKind::TensorOp(op) => check_op(op, name, sink),
        ModuleKind::SubNN(target) => {
            if nn.sub_network(target).is_none() {
                sink.push(name, Rule::UnknownSubNetwork, format!("sub-network `{target}` is not defined"));
            }
        }
    }
}

fn positive(value: u32, attr: &str, module: Option<&str>, sink: &mut Sink<'_>) {
    if value < 1 {
        sink.push(module, Rule::AttributeRange, format!("{attr} must be >= 1"));
    }
}

fn check_tuple(values: &[u32], rank: SpatialRank, attr: &str, module: Option<&str>, sink: &mut Sink<'_>) {
    if values.len() != rank.dims() {
        sink.push(
            module,
            Rule::AttributeRange,
            format!("{attr} has {} entries, expected {}", values.len(), rank.dims()),
        );
    }
    if values.iter().any(|&v| v < 1) {
        sink.push(module, Rule::AttributeRange, format!("{attr} entries must be >= 1"));
    }
}

fn check_padding(p: &Padding, rank: SpatialRank, module: Option<&str>, sink: &mut Sink<'_>) {
    if let Padding::Explicit(values) = p {
        if values.len() != rank.dims() {
            sink.push(
                module,
                Rule::AttributeRange,
                format!("padding has {} entries, expected {}", values.len(), rank.dims()),
            );
        }
    }
}

fn check_layer(layer: &Layer, module: Option<&str>, sink: &mut Sink<'_>) {
    match layer {
        Layer::Linear(l) => {
            if let Some(v) = l.in_features {
                positive(v, "in_features", module, sink);
            }
            positive(l.out_features, "out_features", module, sink);
        }
        Layer::Conv(c) => {
            if let Some(v) = c.in_channels {
                positive(v, "in_channels", module, sink);
            }
            positive(c.out_channels, "out_channels", module, sink);
            check_tuple(&c.kernel, c.rank, "kernel", module, sink);
            check_tuple(&c.stride, c.rank, "stride", module, sink);
            check_padding(&c.padding, c.rank, module, sink);
        }
        Layer::Pool(p) => {
            check_tuple(&p.kernel, p.rank, "kernel", module, sink);
            check_tuple(&p.stride, p.rank, "stride", module, sink);
            check_padding(&p.padding, p.rank, module, sink);
        }
        Layer::Flatten => {}
        Layer::Dropout(d) => {
            if !(0.0..1.0).contains(&d.rate) {
                sink.push(module, Rule::AttributeRange, format!("dropout rate {} outside [0, 1)", d.rate));
            }
        }
        Layer::Embedding(e) => {
            positive(e.vocab_size, "vocab_size", module, sink);
            positive(e.embedding_dim, "embedding_dim", module, sink);
        }
        Layer::Recurrent(r) => {
            if let Some(v) = r.input_size {
                positive(v, "input_size", module, sink);
            }
            positive(r.hidden_size, "hidden_size", module, sink);
        }
    }
}

fn check_op(op: &TensorOp, module: Option<&str>, sink: &mut Sink<'_>) {
    match op {
        TensorOp::Permute { order } => {
            let mut sorted = order.clone();
            sorted.sort_unstable();
            if sorted.iter().enumerate().any(|(i, &v)| i != v) || order.is_empty() {
                sink.push(module, Rule::PermuteOrder, format!("{order:?} is not a permutation of 0..{}", order.len()));
            }
        }
        TensorOp::Reshape { shape } => {
            if shape.is_empty() || shape.iter().any(|&d| d < 1) {
                sink.push(module, Rule::AttributeRange, "reshape target dims must be >= 1");
            }
        }
        TensorOp::Transpose { dim0, dim1 } => {
            if dim0 == dim1 {
                sink.push(module, Rule::AttributeRange, "transpose dims must differ");
            }
        }
        TensorOp::Concatenate { .. } | TensorOp::Add | TensorOp::Multiply | TensorOp::Matmul => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear(name: &str, out: u32, input: &str) -> ModuleSpec {
        ModuleSpec::layer(
            name,
            Layer::Linear(LinearAttrs { in_features: None, out_features: out }),
            ActivationRef::None,
            input,
        )
    }

    fn chain() -> PivotNN {
        let mut nn = PivotNN::new("mlp");
        nn.modules = vec![linear("a", 32, INPUT), linear("b", 16, "a"), linear("c", 10, "b")];
        nn
    }

    fn rules(nn: &PivotNN) -> Vec<Rule> {
        validate(nn).into_iter().map(|d| d.rule).collect()
    }

    #[test]
    fn well_formed_chain_is_clean() {
        assert!(validate(&chain()).is_empty());
    }

    #[test]
    fn forward_reference_is_reported_at_the_consumer() {
        let mut nn = chain();
        nn.modules[0].inputs = vec!["c".into()];
        nn.modules[1].inputs = vec![INPUT.into()];
        let diags = validate(&nn);
        let fwd = diags.iter().find(|d| d.rule == Rule::CycleOrForwardRef).unwrap();
        assert_eq!(fwd.module.as_deref(), Some("a"));
    }

    #[test]
    fn dropout_rate_out_of_range() {
        let mut nn = chain();
        nn.modules.push(ModuleSpec::layer(
            "drop",
            Layer::Dropout(DropoutAttrs { rate: 1.5 }),
            ActivationRef::None,
            "c",
        ));
        let diags = validate(&nn);
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule, Rule::AttributeRange);
        assert_eq!(diags[0].module.as_deref(), Some("drop"));
    }

    #[test]
    fn empty_network_is_rejected() {
        assert_eq!(rules(&PivotNN::new("empty")), vec![Rule::EmptyNetwork]);
    }

    #[test]
    fn two_terminals_are_rejected() {
        let mut nn = chain();
        nn.modules.push(linear("d", 4, "b"));
        assert_eq!(rules(&nn), vec![Rule::MultipleOutputs]);
    }

    #[test]
    fn concatenate_needs_two_inputs() {
        let mut nn = chain();
        nn.modules.push(ModuleSpec::new(
            "cat",
            ModuleKind::TensorOp(TensorOp::Concatenate { axis: -1 }),
            vec!["c".into()],
        ));
        assert_eq!(rules(&nn), vec![Rule::InputArity]);
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let mut nn = chain();
        nn.modules[2].inputs = vec!["c".into()];
        assert!(rules(&nn).contains(&Rule::CycleOrForwardRef));
    }
}
