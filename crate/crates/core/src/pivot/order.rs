use super::model::{PivotNN, INPUT};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrderError {
    #[error("module `{module}` consumes `{input}` before it is produced")]
    NotTopological { module: String, input: String },
}

/// Execution order of the network, which is its declaration order.
///
/// Fails if some module reads a producer declared after it.
pub fn topo_order(nn: &PivotNN) -> Result<Vec<&str>, OrderError> {
    let mut produced = std::collections::HashSet::new();
    let mut order = Vec::with_capacity(nn.modules.len());
    for m in &nn.modules {
        for input in &m.inputs {
            if input != INPUT && !produced.contains(input.as_str()) {
                return Err(OrderError::NotTopological {
                    module: m.name.clone(),
                    input: input.clone(),
                });
            }
        }
        produced.insert(m.name.as_str());
        order.push(m.name.as_str());
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pivot::model::*;

    fn node(name: &str, inputs: &[&str]) -> ModuleSpec {
        let kind = if inputs.len() > 1 {
            ModuleKind::TensorOp(TensorOp::Concatenate { axis: -1 })
        } else {
            ModuleKind::Layer(LayerSpec {
                layer: Layer::Flatten,
                activation: ActivationRef::None,
            })
        };
        ModuleSpec::new(name, kind, inputs.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn chain_keeps_declaration_order() {
        let mut nn = PivotNN::new("n");
        nn.modules = vec![node("a", &[INPUT]), node("b", &["a"]), node("c", &["b"])];
        assert_eq!(topo_order(&nn).unwrap(), vec!["a", "b", "c"]);
    }

    #[test]
    fn diamond_breaks_ties_by_declaration() {
        let mut nn = PivotNN::new("n");
        nn.modules = vec![
            node("a", &[INPUT]),
            node("b", &["a"]),
            node("c", &["a"]),
            node("concat", &["b", "c"]),
        ];
        assert_eq!(topo_order(&nn).unwrap(), vec!["a", "b", "c", "concat"]);
    }

    #[test]
    fn forward_reference_fails() {
        let mut nn = PivotNN::new("n");
        nn.modules = vec![node("a", &["b"]), node("b", &[INPUT])];
        assert!(topo_order(&nn).is_err());
    }
}
