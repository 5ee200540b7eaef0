//! Structural comparison of pivot networks, ignoring source spans.

use std::fmt;

use super::model::*;

/// How strictly optional input-dimension attributes are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputDims {
    /// `None` on either side matches any value.
    Lenient,
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Difference {
    pub path: String,
    pub detail: String,
}

impl fmt::Display for Difference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.detail)
    }
}

/// Lists every structural difference between `left` and `right`.
///
/// Spans are ignored. Channel-layout permute pairs wrapping conv/pool runs
/// are stripped from both sides first, so a network and the same network
/// with injected layout permutes compare equal.
pub fn differences(left: &PivotNN, right: &PivotNN, dims: InputDims) -> Vec<Difference> {
    let left = crate::codegen::strip_layout_permutes(left);
    let right = crate::codegen::strip_layout_permutes(right);
    let mut out = Vec::new();
    diff_networks(&left, &right, dims, "", &mut out);
    out
}

pub fn structurally_equal(left: &PivotNN, right: &PivotNN, dims: InputDims) -> bool {
    differences(left, right, dims).is_empty()
}

fn push(out: &mut Vec<Difference>, path: String, detail: impl Into<String>) {
    out.push(Difference {
        path,
        detail: detail.into(),
    });
}

fn diff_networks(l: &PivotNN, r: &PivotNN, dims: InputDims, prefix: &str, out: &mut Vec<Difference>) {
    if l.name != r.name {
        push(out, format!("{prefix}name"), format!("{:?} != {:?}", l.name, r.name));
    }
    if l.input_shape != r.input_shape {
        push(
            out,
            format!("{prefix}input_shape"),
            format!("{:?} != {:?}", l.input_shape, r.input_shape),
        );
    }
    if l.modules.len() != r.modules.len() {
        let names = |n: &PivotNN| n.modules.iter().map(|m| m.name.clone()).collect::<Vec<_>>();
        push(
            out,
            format!("{prefix}modules"),
            format!("{} modules {:?} != {} modules {:?}", l.modules.len(), names(l), r.modules.len(), names(r)),
        );
    }
    for (a, b) in l.modules.iter().zip(&r.modules) {
        let path = format!("{prefix}{}", a.name);
        if a.name != b.name {
            push(out, path.clone(), format!("name differs from {:?}", b.name));
        }
        if a.inputs != b.inputs {
            push(out, path.clone(), format!("inputs {:?} != {:?}", a.inputs, b.inputs));
        }
        match (&a.kind, &b.kind) {
            (ModuleKind::Layer(x), ModuleKind::Layer(y)) => {
                if x.activation != y.activation {
                    push(out, path.clone(), format!("activation {:?} != {:?}", x.activation, y.activation));
                }
                if !layers_match(&x.layer, &y.layer, dims) {
                    push(out, path, format!("{:?} != {:?}", x.layer, y.layer));
                }
            }
            (x, y) if x != y => push(out, path, format!("{x:?} != {y:?}")),
            _ => {}
        }
    }
    if l.config != r.config {
        push(out, format!("{prefix}config"), format!("{:?} != {:?}", l.config, r.config));
    }
    if l.datasets != r.datasets {
        push(out, format!("{prefix}datasets"), format!("{:?} != {:?}", l.datasets, r.datasets));
    }
    if l.sub_networks.len() != r.sub_networks.len() {
        push(
            out,
            format!("{prefix}sub_networks"),
            format!("{} != {}", l.sub_networks.len(), r.sub_networks.len()),
        );
    }
    for (a, b) in l.sub_networks.iter().zip(&r.sub_networks) {
        diff_networks(a, b, dims, &format!("{prefix}{}.", a.name), out);
    }
}

fn opt_match(a: Option<u32>, b: Option<u32>, dims: InputDims) -> bool {
    match dims {
        InputDims::Exact => a == b,
        InputDims::Lenient => a.is_none() || b.is_none() || a == b,
    }
}

fn layers_match(a: &Layer, b: &Layer, dims: InputDims) -> bool {
    match (a, b) {
        (Layer::Linear(x), Layer::Linear(y)) => {
            x.out_features == y.out_features && opt_match(x.in_features, y.in_features, dims)
        }
        (Layer::Conv(x), Layer::Conv(y)) => {
            x.rank == y.rank
                && x.out_channels == y.out_channels
                && x.kernel == y.kernel
                && x.stride == y.stride
                && x.padding == y.padding
                && opt_match(x.in_channels, y.in_channels, dims)
        }
        (Layer::Recurrent(x), Layer::Recurrent(y)) => {
            x.cell == y.cell
                && x.hidden_size == y.hidden_size
                && x.return_sequences == y.return_sequences
                && x.bidirectional == y.bidirectional
                && opt_match(x.input_size, y.input_size, dims)
        }
        _ => a == b,
    }
}
