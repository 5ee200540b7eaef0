//! Layout permutes between the channel-last canonical order and the
//! channel-first order conv/pool layers expect on the channel-first side.

use crate::pivot::*;

/// `[0, r-1, 1, ..., r-2]`: channel-last to channel-first for a rank-`r` tensor.
pub fn to_channel_first(rank: usize) -> Vec<usize> {
    let mut order = vec![0, rank - 1];
    order.extend(1..rank - 1);
    order
}

/// `[0, 2, ..., r-1, 1]`: channel-first back to channel-last.
pub fn to_channel_last(rank: usize) -> Vec<usize> {
    let mut order = vec![0];
    order.extend(2..rank);
    order.push(1);
    order
}

/// Composition `apply(second, apply(first, x))` as a single order.
pub fn compose(first: &[usize], second: &[usize]) -> Vec<usize> {
    second.iter().map(|&i| first[i]).collect()
}

fn permute_order(m: &ModuleSpec) -> Option<&[usize]> {
    match m.as_tensor_op() {
        Some(TensorOp::Permute { order }) => Some(order),
        _ => None,
    }
}

fn sensitive_rank(m: &ModuleSpec) -> Option<usize> {
    m.as_layer()?.layer.channel_sensitive_rank().map(|r| r.tensor_rank())
}

/// Finds one `Permute(cf) -> conv/pool run -> Permute(cl)` pattern.
/// Returns the indices of the opening and closing permutes.
fn find_pair(nn: &PivotNN) -> Option<(usize, usize)> {
    let index = |name: &str| nn.modules.iter().position(|m| m.name == name);
    let sole_consumer = |name: &str| -> Option<usize> {
        let mut it = nn.consumers(name);
        let first = it.next()?;
        if it.next().is_some() {
            return None;
        }
        index(&first.name)
    };
    for (open, m) in nn.modules.iter().enumerate() {
        let Some(order) = permute_order(m) else { continue };
        let rank = order.len();
        if !(3..=5).contains(&rank) || order != to_channel_first(rank).as_slice() || m.inputs.len() != 1 {
            continue;
        }
        let mut cur = open;
        let mut run = 0;
        while let Some(next) = sole_consumer(&nn.modules[cur].name) {
            let nm = &nn.modules[next];
            if nm.inputs.len() != 1 {
                break;
            }
            if sensitive_rank(nm) == Some(rank) {
                cur = next;
                run += 1;
                continue;
            }
            if run > 0 && permute_order(nm) == Some(to_channel_last(rank).as_slice()) {
                return Some((open, next));
            }
            break;
        }
    }
    None
}

/// Removes every layout permute pair wrapping a conv/pool run, in this
/// network and its sub-networks. Returns the rewritten network and the
/// number of pairs removed.
pub(crate) fn strip_layout_permutes_counted(nn: &PivotNN) -> (PivotNN, usize) {
    let mut out = nn.clone();
    let mut count = 0;
    while let Some((open, close)) = find_pair(&out) {
        let open_name = out.modules[open].name.clone();
        let open_input = out.modules[open].inputs[0].clone();
        let close_name = out.modules[close].name.clone();
        let close_input = out.modules[close].inputs[0].clone();
        for m in &mut out.modules {
            for i in &mut m.inputs {
                if *i == open_name {
                    *i = open_input.clone();
                } else if *i == close_name {
                    *i = close_input.clone();
                }
            }
        }
        out.modules.remove(close);
        out.modules.remove(open);
        count += 1;
    }
    for sub in &mut out.sub_networks {
        let (s, n) = strip_layout_permutes_counted(sub);
        *sub = s;
        count += n;
    }
    (out, count)
}

/// Removes layout permute pairs; see [`strip_layout_permutes_counted`].
pub fn strip_layout_permutes(nn: &PivotNN) -> PivotNN {
    strip_layout_permutes_counted(nn).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_are_inverse() {
        for rank in 3..=5 {
            let id: Vec<usize> = (0..rank).collect();
            assert_eq!(compose(&to_channel_first(rank), &to_channel_last(rank)), id);
        }
        assert_eq!(to_channel_first(4), vec![0, 3, 1, 2]);
        assert_eq!(to_channel_last(4), vec![0, 2, 3, 1]);
    }

    #[test]
    fn wrapped_run_is_stripped() {
        let mut nn = PivotNN::new("n");
        let conv = Layer::Conv(ConvAttrs {
            rank: SpatialRank::Two,
            in_channels: None,
            out_channels: 4,
            kernel: vec![3, 3],
            stride: vec![1, 1],
            padding: Padding::Valid,
        });
        nn.modules.push(ModuleSpec::new(
            "p1",
            ModuleKind::TensorOp(TensorOp::Permute { order: vec![0, 3, 1, 2] }),
            vec![INPUT.into()],
        ));
        nn.modules.push(ModuleSpec::layer("c", conv, ActivationRef::None, "p1"));
        nn.modules.push(ModuleSpec::new(
            "p2",
            ModuleKind::TensorOp(TensorOp::Permute { order: vec![0, 2, 3, 1] }),
            vec!["c".into()],
        ));
        nn.modules.push(ModuleSpec::layer("f", Layer::Flatten, ActivationRef::None, "p2"));
        let (out, n) = strip_layout_permutes_counted(&nn);
        assert_eq!(n, 1);
        assert_eq!(out.modules.len(), 2);
        assert_eq!(out.modules[0].inputs, vec![INPUT.to_string()]);
        assert_eq!(out.modules[1].inputs, vec!["c".to_string()]);
    }
}
