//! Dataflow graph built while walking source code, folded into pivot modules.

use std::collections::HashSet;

use super::{ExtractError, Note};
use crate::pivot::*;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum GOp {
    Input,
    Layer(LayerSpec),
    /// Standalone activation, folded into its producing layer.
    Act(ActivationRef),
    Op(TensorOp),
    Sub(String),
}

#[derive(Debug, Clone)]
pub(crate) struct GNode {
    pub name: String,
    pub op: GOp,
    pub inputs: Vec<usize>,
    pub span: Span,
    /// Name was generated rather than taken from the source.
    pub auto: bool,
}

#[derive(Debug)]
pub(crate) struct Graph {
    pub nodes: Vec<GNode>,
    taken: HashSet<String>,
}

pub(crate) const INPUT_NODE: usize = 0;

pub(crate) fn snake_kind(op: &GOp) -> String {
    match op {
        GOp::Input => "input".into(),
        GOp::Act(_) => "activation".into(),
        GOp::Op(t) => t.op_name().into(),
        GOp::Sub(class) => snake(class),
        GOp::Layer(l) => match l.layer.kind() {
            LayerKind::MaxPool1D => "max_pool1d".into(),
            LayerKind::MaxPool2D => "max_pool2d".into(),
            LayerKind::MaxPool3D => "max_pool3d".into(),
            LayerKind::AvgPool1D => "avg_pool1d".into(),
            LayerKind::AvgPool2D => "avg_pool2d".into(),
            LayerKind::AvgPool3D => "avg_pool3d".into(),
            LayerKind::SimpleRNN => "simple_rnn".into(),
            k => k.as_str().to_ascii_lowercase(),
        },
    }
}

/// `CamelCase` to `camel_case`.
pub(crate) fn snake(s: &str) -> String {
    let mut out = String::new();
    for (i, c) in s.chars().enumerate() {
        if c.is_ascii_uppercase() {
            if i > 0 && !out.ends_with('_') {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

impl Graph {
    /// A graph holding only the input node. `reserved` names are never
    /// handed out as generated names.
    pub fn new(reserved: impl IntoIterator<Item = String>) -> Self {
        Graph {
            nodes: vec![GNode {
                name: INPUT.into(),
                op: GOp::Input,
                inputs: Vec::new(),
                span: Span::new(0, 0),
                auto: false,
            }],
            taken: reserved.into_iter().collect(),
        }
    }

    /// First of `base`, `base_1`, `base_2`, ... not yet in use.
    pub fn fresh(&self, base: &str) -> String {
        if !self.is_taken(base) {
            return base.to_string();
        }
        (1..)
            .map(|i| format!("{base}_{i}"))
            .find(|n| !self.is_taken(n))
            .expect("unbounded counter")
    }

    fn is_taken(&self, name: &str) -> bool {
        self.taken.contains(name) || self.nodes.iter().any(|n| n.name == name)
    }

    /// Adds a node. Explicit names are used verbatim (the caller checks
    /// uniqueness); otherwise a fresh name is derived from the kind.
    pub fn add(&mut self, name: Option<String>, op: GOp, inputs: Vec<usize>, span: Span) -> usize {
        let auto = name.is_none();
        let name = name.unwrap_or_else(|| self.fresh(&snake_kind(&op)));
        self.taken.insert(name.clone());
        self.nodes.push(GNode {
            name,
            op,
            inputs,
            span,
            auto,
        });
        self.nodes.len() - 1
    }

    /// Gives an auto-named node the name of the variable it was assigned to.
    pub fn adopt_name(&mut self, id: usize, name: &str) {
        if id == INPUT_NODE || !self.nodes[id].auto || self.nodes.iter().any(|n| n.name == name) {
            return;
        }
        if self.taken.contains(name) {
            return;
        }
        self.taken.remove(&self.nodes[id].name);
        self.nodes[id].name = name.to_string();
        self.nodes[id].auto = false;
        self.taken.insert(name.to_string());
    }

    pub fn has_explicit(&self, name: &str) -> bool {
        self.nodes.iter().any(|n| n.name == name)
    }

    /// Folds standalone activations into the layers producing their input and
    /// emits the module list. `output` is the node returned by the network.
    pub fn into_pivot(mut self, name: &str, mut output: usize) -> Result<PivotNN, ExtractError> {
        let mut removed = vec![false; self.nodes.len()];
        for a in 0..self.nodes.len() {
            let GOp::Act(act) = self.nodes[a].op.clone() else {
                continue;
            };
            let span = self.nodes[a].span;
            let p = self.nodes[a].inputs[0];
            let fail = |detail: String| ExtractError::ActivationPlacement { detail, span };
            let consumers = (0..self.nodes.len())
                .filter(|&n| !removed[n] && self.nodes[n].inputs.contains(&p))
                .count();
            let producer = self.nodes[p].name.clone();
            match &mut self.nodes[p].op {
                GOp::Layer(spec) if spec.activation.is_none() && consumers == 1 && output != p => {
                    spec.activation = act;
                }
                GOp::Layer(spec) if !spec.activation.is_none() => {
                    return Err(fail(format!("layer `{producer}` already has an activation")))
                }
                GOp::Layer(_) => {
                    return Err(fail(format!(
                        "the output of `{producer}` is used both with and without the activation"
                    )))
                }
                _ => {
                    return Err(fail(format!(
                        "an activation must directly follow a layer, not `{producer}`"
                    )))
                }
            }
            removed[a] = true;
            for n in &mut self.nodes {
                for i in &mut n.inputs {
                    if *i == a {
                        *i = p;
                    }
                }
            }
            if output == a {
                output = p;
            }
        }
        let _ = output;
        let mut nn = PivotNN::new(name);
        for (i, node) in self.nodes.iter().enumerate() {
            if removed[i] || node.op == GOp::Input {
                continue;
            }
            let kind = match &node.op {
                GOp::Layer(spec) => ModuleKind::Layer(spec.clone()),
                GOp::Op(op) => ModuleKind::TensorOp(op.clone()),
                GOp::Sub(class) => ModuleKind::SubNN(class.clone()),
                GOp::Input | GOp::Act(_) => unreachable!(),
            };
            let inputs = node.inputs.iter().map(|&i| self.nodes[i].name.clone()).collect();
            nn.modules.push(ModuleSpec::new(node.name.clone(), kind, inputs).with_span(Some(node.span)));
        }
        Ok(nn)
    }
}

/// Removes the layout permute pairs a channel-first source wraps around its
/// conv/pool runs. A source with conv/pool layers but no such pairs is
/// assumed to feed channel-first tensors; its declared input shape is
/// rotated to the canonical channel-last order and a note is recorded.
pub(crate) fn normalize_channel_first(nn: &mut PivotNN, notes: &mut Vec<Note>) {
    let sensitive = nn
        .modules
        .iter()
        .find(|m| m.as_layer().is_some_and(|l| l.layer.channel_sensitive_rank().is_some()))
        .map(|m| m.span);
    let (stripped, pairs) = crate::codegen::strip_layout_permutes_counted(nn);
    *nn = stripped;
    if let (Some(span), 0) = (sensitive, pairs) {
        if let Some(shape) = &mut nn.input_shape {
            if shape.rank() >= 3 {
                let channels = shape.dims.remove(1);
                shape.dims.push(channels);
            }
        }
        notes.push(Note {
            span,
            message: "conv/pool layers receive channel-first tensors without layout permutes; \
                      the input shape was read as channel-first and flatten order may differ after migration"
                .into(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(units: u32) -> GOp {
        GOp::Layer(LayerSpec {
            layer: Layer::Linear(LinearAttrs {
                in_features: None,
                out_features: units,
            }),
            activation: ActivationRef::None,
        })
    }

    #[test]
    fn activation_folds_into_producer() {
        let mut g = Graph::new(Vec::new());
        let s = Span::new(1, 1);
        let fc = g.add(Some("fc".into()), dense(4), vec![INPUT_NODE], s);
        let act = g.add(None, GOp::Act(ActivationRef::Literal(Activation::Relu)), vec![fc], s);
        let out = g.add(Some("out".into()), dense(2), vec![act], s);
        let nn = g.into_pivot("net", out).unwrap();
        assert_eq!(nn.modules.len(), 2);
        assert_eq!(nn.modules[1].inputs, vec!["fc".to_string()]);
        assert_eq!(
            nn.modules[0].as_layer().unwrap().activation,
            ActivationRef::Literal(Activation::Relu)
        );
    }

    #[test]
    fn activation_after_tensor_op_is_rejected() {
        let mut g = Graph::new(Vec::new());
        let s = Span::new(1, 1);
        let a = g.add(Some("a".into()), dense(4), vec![INPUT_NODE], s);
        let b = g.add(Some("b".into()), dense(4), vec![INPUT_NODE], s);
        let add = g.add(None, GOp::Op(TensorOp::Add), vec![a, b], s);
        let act = g.add(None, GOp::Act(ActivationRef::Literal(Activation::Relu)), vec![add], s);
        assert!(matches!(g.into_pivot("net", act), Err(ExtractError::ActivationPlacement { .. })));
    }

    #[test]
    fn generated_names_skip_reserved() {
        let mut g = Graph::new(vec!["linear".to_string()]);
        let id = g.add(None, dense(3), vec![INPUT_NODE], Span::new(1, 1));
        assert_eq!(g.nodes[id].name, "linear_1");
        assert_eq!(snake("CnnRnn"), "cnn_rnn");
    }
}
