//! Target code generation: planning, layout permutes and the four emitters.

mod names;
mod permute;
mod plan;
mod pt;
mod py;
mod scaffold;
mod tf;

use std::collections::BTreeSet;

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use crate::frontend::Dialect as EmitTarget;
use crate::frontend::{Framework, Style};
use crate::pivot::*;
use crate::shape::ShapeAnnotation;
pub(crate) use permute::strip_layout_permutes_counted;
pub use permute::{compose, strip_layout_permutes, to_channel_first, to_channel_last};
pub use plan::{build_plan, plan_permutes, GenPlan, PlanRecord, INPUT_VAR};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodegenError {
    #[error("network `{network}` is not a chain of single-input modules; sequential style cannot express it, use subclassing")]
    NonChainForSequential { network: String },
    #[error("module `{module}`: `{attribute}` is unknown; provide an input shape so it can be inferred")]
    MissingInputDims { module: String, attribute: &'static str },
    #[error("module `{module}`: same padding with stride {stride:?} has no exact channel-first equivalent")]
    SamePaddingWithStride { module: String, stride: Vec<u32> },
    #[error("module `{module}`: {detail}")]
    UnsupportedPadding { module: String, detail: String },
    #[error("module `{module}`: {detail}")]
    UnsupportedOp { module: String, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOptions {
    /// Emit the training scaffold and dataset table when the pivot has them.
    pub emit_training: bool,
    /// Source description for the header line, e.g. `tf/sequential`.
    pub source: String,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            emit_training: true,
            source: "pivot".into(),
        }
    }
}

/// Hex SHA-256 of the serialized pivot document.
pub fn pivot_digest(nn: &PivotNN) -> String {
    let bytes = serialize(nn).unwrap_or_default();
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub(crate) fn header(nn: &PivotNN, target: EmitTarget, opts: &EmitOptions) -> String {
    format!(
        "# Generated by nnport {TOOL_VERSION}: {} -> {target}, pivot sha256 {}",
        opts.source,
        pivot_digest(nn)
    )
}

/// Runtime-resolved activation symbols of `nn` and its sub-networks, sorted.
pub(crate) fn dynamic_symbols(nn: &PivotNN) -> Vec<String> {
    let mut out = BTreeSet::new();
    collect_dynamic(nn, &mut out);
    out.into_iter().collect()
}

fn collect_dynamic(nn: &PivotNN, out: &mut BTreeSet<String>) {
    for m in &nn.modules {
        if let Some(ActivationRef::Dynamic(s)) = m.as_layer().map(|l| &l.activation) {
            out.insert(s.clone());
        }
    }
    for sub in &nn.sub_networks {
        collect_dynamic(sub, out);
    }
}

/// Renders `plan` (built from `nn`) as target source code.
pub fn emit(plan: &GenPlan, nn: &PivotNN, target: EmitTarget, opts: &EmitOptions) -> Result<String, CodegenError> {
    if target.style == Style::Sequential && !nn.is_chain() {
        return Err(CodegenError::NonChainForSequential {
            network: nn.name.clone(),
        });
    }
    match target.framework {
        Framework::ChannelLast => tf::emit(plan, nn, target, opts),
        Framework::ChannelFirst => pt::emit(plan, nn, target, opts),
    }
}

/// Plans, places layout permutes and emits in one step.
pub fn generate(
    nn: &PivotNN,
    ann: &ShapeAnnotation,
    target: EmitTarget,
    opts: &EmitOptions,
) -> Result<String, CodegenError> {
    let plan = plan_permutes(build_plan(nn, ann), target);
    emit(&plan, nn, target, opts)
}
