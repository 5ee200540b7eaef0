//! Emission plans: one record per module, in execution order, with the
//! variables it reads and defines and the layout permutes around it.

use std::collections::HashMap;

use super::names::Names;
use super::permute::{to_channel_first, to_channel_last};
use super::EmitTarget;
use crate::frontend::Framework;
use crate::pivot::*;
use crate::shape::ShapeAnnotation;

/// Variable holding the network input in generated forward methods.
pub const INPUT_VAR: &str = "inputs";

#[derive(Debug, Clone, PartialEq)]
pub struct PlanRecord {
    pub module: String,
    pub definition: ModuleKind,
    pub input_vars: Vec<String>,
    pub output_var: String,
    /// Applied to the single input before the module.
    pub pre_ops: Vec<TensorOp>,
    /// Applied to the module's (activated) output.
    pub post_ops: Vec<TensorOp>,
    pub emitted_name: String,
    pub output_shape: Option<TensorShape>,
    pub span: Option<Span>,
}

impl PlanRecord {
    pub fn layer(&self) -> Option<&LayerSpec> {
        match &self.definition {
            ModuleKind::Layer(l) => Some(l),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenPlan {
    pub network: String,
    pub input_var: String,
    pub records: Vec<PlanRecord>,
    pub output_var: String,
    /// Plans of the sub-networks, in declaration order.
    pub sub_plans: Vec<GenPlan>,
    /// Helper identifiers (activation attributes, permute keys) are claimed
    /// from this allocator so they never collide with module names.
    names: Names,
}

impl GenPlan {
    /// A fresh helper identifier derived from `base`.
    pub fn helper_name(&mut self, base: &str) -> String {
        self.names.claim(base)
    }

    /// Positions of records of channel-sensitive layers that run on
    /// channel-first tensors (between a pre permute and its inverse).
    pub fn channel_first_records(&self) -> Vec<bool> {
        let mut inside = false;
        self.records
            .iter()
            .map(|r| {
                if !r.pre_ops.is_empty() && r.layer().is_some_and(|l| l.layer.channel_sensitive_rank().is_some()) {
                    inside = true;
                }
                let here = inside && r.layer().is_some_and(|l| l.layer.channel_sensitive_rank().is_some());
                if !r.post_ops.is_empty() {
                    inside = false;
                }
                here
            })
            .collect()
    }
}

/// Orders records by the pivot's (topological) module order and resolves
/// module references into variable names.
pub fn build_plan(nn: &PivotNN, ann: &ShapeAnnotation) -> GenPlan {
    let mut names = Names::default();
    let mut vars: HashMap<&str, String> = HashMap::new();
    vars.insert(INPUT, INPUT_VAR.to_string());
    let mut records = Vec::with_capacity(nn.modules.len());
    for m in &nn.modules {
        let emitted = names.claim(&m.name);
        vars.insert(&m.name, emitted.clone());
        records.push(PlanRecord {
            module: m.name.clone(),
            definition: m.kind.clone(),
            input_vars: m.inputs.iter().map(|i| vars[i.as_str()].clone()).collect(),
            output_var: emitted.clone(),
            pre_ops: Vec::new(),
            post_ops: Vec::new(),
            emitted_name: emitted,
            output_shape: ann.get(&m.name).map(|s| s.output.clone()),
            span: m.span,
        });
    }
    let output_var = records.last().map(|r| r.output_var.clone()).unwrap_or_else(|| INPUT_VAR.to_string());
    let sub_plans = nn
        .sub_networks
        .iter()
        .map(|sub| {
            let empty = ShapeAnnotation::default();
            build_plan(sub, ann.sub_network(&sub.name).unwrap_or(&empty))
        })
        .collect();
    GenPlan {
        network: nn.name.clone(),
        input_var: INPUT_VAR.to_string(),
        records,
        output_var,
        sub_plans,
        names,
    }
}

fn sensitive_rank(r: &PlanRecord) -> Option<SpatialRank> {
    r.layer()?.layer.channel_sensitive_rank()
}

/// Wraps every maximal run of chained conv/pool records in a
/// channel-last to channel-first permute and its inverse. No-op for
/// channel-last targets.
pub fn plan_permutes(mut plan: GenPlan, target: EmitTarget) -> GenPlan {
    plan.sub_plans = plan.sub_plans.into_iter().map(|p| plan_permutes(p, target)).collect();
    if target.framework != Framework::ChannelFirst {
        return plan;
    }
    let consumers = |plan: &GenPlan, var: &str| plan.records.iter().filter(|r| r.input_vars.iter().any(|v| v == var)).count();
    let mut i = 0;
    while i < plan.records.len() {
        let Some(rank) = sensitive_rank(&plan.records[i]) else {
            i += 1;
            continue;
        };
        let mut end = i;
        while end + 1 < plan.records.len() {
            let next = &plan.records[end + 1];
            let chained = next.input_vars.len() == 1
                && next.input_vars[0] == plan.records[end].output_var
                && consumers(&plan, &plan.records[end].output_var) == 1;
            if chained && sensitive_rank(next) == Some(rank) {
                end += 1;
            } else {
                break;
            }
        }
        let r = rank.tensor_rank();
        plan.records[i].pre_ops.push(TensorOp::Permute { order: to_channel_first(r) });
        plan.records[end].post_ops.push(TensorOp::Permute { order: to_channel_last(r) });
        i = end + 1;
    }
    plan
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{Dialect, Style};

    fn conv() -> Layer {
        Layer::Conv(ConvAttrs {
            rank: SpatialRank::Two,
            in_channels: Some(3),
            out_channels: 4,
            kernel: vec![3, 3],
            stride: vec![1, 1],
            padding: Padding::Same,
        })
    }

    fn pool() -> Layer {
        Layer::Pool(PoolAttrs {
            op: PoolOp::Max,
            rank: SpatialRank::Two,
            kernel: vec![2, 2],
            stride: vec![2, 2],
            padding: Padding::Valid,
        })
    }

    fn chain(layers: Vec<(&str, Layer)>) -> PivotNN {
        let mut nn = PivotNN::new("net");
        let mut prev = INPUT.to_string();
        for (name, l) in layers {
            nn.modules.push(ModuleSpec::layer(name, l, ActivationRef::None, &prev));
            prev = name.to_string();
        }
        nn
    }

    #[test]
    fn one_pair_wraps_a_conv_pool_run() {
        let nn = chain(vec![("c1", conv()), ("p1", pool()), ("c2", conv()), ("flat", Layer::Flatten)]);
        let plan = build_plan(&nn, &ShapeAnnotation::default());
        let target = Dialect::new(Framework::ChannelFirst, Style::Subclassing);
        let plan = plan_permutes(plan, target);
        let pre: Vec<usize> = plan.records.iter().map(|r| r.pre_ops.len()).collect();
        let post: Vec<usize> = plan.records.iter().map(|r| r.post_ops.len()).collect();
        assert_eq!(pre, [1, 0, 0, 0]);
        assert_eq!(post, [0, 0, 1, 0]);
        assert_eq!(plan.channel_first_records(), [true, true, true, false]);
    }

    #[test]
    fn channel_last_target_is_unchanged() {
        let nn = chain(vec![("c1", conv())]);
        let plan = build_plan(&nn, &ShapeAnnotation::default());
        let target = Dialect::new(Framework::ChannelLast, Style::Subclassing);
        assert_eq!(plan_permutes(plan.clone(), target), plan);
    }

    #[test]
    fn input_vars_follow_edges() {
        let nn = chain(vec![("a", Layer::Flatten), ("b", Layer::Flatten), ("c", Layer::Flatten)]);
        let plan = build_plan(&nn, &ShapeAnnotation::default());
        let ins: Vec<&str> = plan.records.iter().map(|r| r.input_vars[0].as_str()).collect();
        assert_eq!(ins, ["inputs", "a", "b"]);
    }
}
