//! Extraction of sequential containers into module chains.

use super::graph::{GOp, Graph, INPUT_NODE};
use super::layers::{classify, Ctor, Scope};
use super::{unsupported, Ctx, ExtractError, Note};
use crate::frontend::ast::*;
use crate::frontend::dialect::{is_sequential_ctor, Framework};
use crate::frontend::symbols::SymbolTable;
use crate::pivot::*;

/// A container construction and the statements that may extend it.
struct Site<'a> {
    call: &'a Expr,
    var: Option<String>,
    /// Statements following the construction in the same body.
    rest: &'a [Stmt],
    scope_body: Option<(&'a [Param], &'a [Stmt])>,
}

fn site_at<'a>(ctx: &Ctx<'a>, body: &'a [Stmt], i: usize, scope_body: Option<(&'a [Param], &'a [Stmt])>) -> Option<Site<'a>> {
    let (call, var) = match &body[i].kind {
        StmtKind::Assign { targets, value } => (value, targets.first().and_then(|t| t.as_name())),
        StmtKind::Return(Some(value)) | StmtKind::Expr(value) => (value, None),
        _ => return None,
    };
    let ExprKind::Call { func, .. } = &call.kind else { return None };
    if !ctx.imports.resolve(func).is_some_and(|p| is_sequential_ctor(&p, ctx.fw)) {
        return None;
    }
    Some(Site {
        call,
        var: var.map(str::to_string),
        rest: &body[i + 1..],
        scope_body,
    })
}

/// Container constructions at top level and directly inside top-level functions.
fn find_sites<'a>(ctx: &Ctx<'a>) -> Vec<Site<'a>> {
    let mut sites = Vec::new();
    let top = &ctx.tree.body;
    for (i, stmt) in top.iter().enumerate() {
        match &stmt.kind {
            StmtKind::FunctionDef { params, body, .. } => {
                sites.extend((0..body.len()).filter_map(|j| site_at(ctx, body, j, Some((params, body)))));
            }
            StmtKind::ClassDef { .. } => {}
            _ => sites.extend(site_at(ctx, top, i, None)),
        }
    }
    sites
}

pub(super) fn extract(ctx: &Ctx, notes: &mut Vec<Note>) -> Result<PivotNN, ExtractError> {
    let sites = find_sites(ctx);
    let Some(site) = sites.last() else {
        return Err(ExtractError::NoModel);
    };
    if sites.len() > 1 {
        notes.push(Note {
            span: Some(site.call.span),
            message: format!("{} sequential containers found; extracting the last one", sites.len()),
        });
    }
    let fn_table;
    let scope = match site.scope_body {
        Some((params, body)) => {
            let names: Vec<&str> = params.iter().map(|p| p.name.as_str()).collect();
            fn_table = SymbolTable::for_scope(body, &names, &[&ctx.globals]);
            Scope {
                chain: vec![&fn_table, &ctx.globals],
            }
        }
        None => Scope {
            chain: vec![&ctx.globals],
        },
    };

    let ExprKind::Call { args, keywords, .. } = &site.call.kind else { unreachable!() };
    let mut entries: Vec<(Option<String>, &Expr)> = Vec::new();
    let mut net_name = None;
    for k in keywords {
        match (k.name.as_deref(), ctx.fw) {
            (Some("name"), Framework::ChannelLast) => {
                net_name = Some(
                    k.value
                        .as_str()
                        .ok_or_else(|| unsupported("container name must be a string literal", k.value.span))?
                        .to_string(),
                );
            }
            (Some("layers"), Framework::ChannelLast) => list_entries(&k.value, &mut entries)?,
            (name, _) => {
                return Err(unsupported(
                    format!("sequential container keyword `{}`", name.unwrap_or("**")),
                    k.value.span,
                ))
            }
        }
    }
    match ctx.fw {
        Framework::ChannelLast => match args.as_slice() {
            [] => {}
            [list] => list_entries(list, &mut entries)?,
            _ => return Err(unsupported("sequential container takes a single list of layers", site.call.span)),
        },
        Framework::ChannelFirst => match args.as_slice() {
            [one] if is_ordered_dict(ctx, one) => dict_entries(one, &mut entries)?,
            _ => {
                for a in args {
                    entries.push((None, a));
                }
            }
        },
    }
    if let Some(var) = &site.var {
        for stmt in site.rest {
            let StmtKind::Expr(e) = &stmt.kind else { continue };
            let ExprKind::Call { func, args, .. } = &e.kind else { continue };
            if let ExprKind::Attribute { value, attr } = &func.kind {
                if attr == "add" && value.as_name() == Some(var.as_str()) {
                    let [layer] = args.as_slice() else {
                        return Err(unsupported("`.add()` takes one layer", e.span));
                    };
                    entries.push((None, layer));
                }
            }
        }
    }
    if entries.is_empty() {
        return Err(unsupported("empty sequential container", site.call.span));
    }

    let name = match ctx.fw {
        Framework::ChannelLast => net_name.or_else(|| site.var.clone()),
        Framework::ChannelFirst => site.var.clone(),
    }
    .unwrap_or_else(|| "model".to_string());

    let mut classified = Vec::with_capacity(entries.len());
    for (key, e) in entries {
        let ctor = classify(ctx, e, &scope)?.ok_or_else(|| ExtractError::UnsupportedLayer {
            name: callee(e),
            span: e.span,
        })?;
        classified.push((key, e, ctor));
    }
    let reserved: Vec<String> = classified
        .iter()
        .filter_map(|(k, _, c)| match c {
            Ctor::Layer { name: Some(n), .. } | Ctor::Op(_, Some(n)) => Some(n.clone()),
            _ => k.clone(),
        })
        .collect();
    let mut graph = Graph::new(reserved);
    let mut prev = INPUT_NODE;
    let mut input_shape = None;
    for (key, e, ctor) in classified {
        match ctor {
            Ctor::Input(dims) => {
                if prev != INPUT_NODE {
                    return Err(unsupported("input placeholder must come first", e.span));
                }
                input_shape = Some(dims);
            }
            Ctor::Layer {
                layer,
                activation,
                name,
                input_shape: declared,
            } => {
                if matches!(layer, Layer::Recurrent(_)) && ctx.fw == Framework::ChannelFirst {
                    return Err(unsupported(
                        "recurrent layers return (output, state) and cannot be chained in a sequential container",
                        e.span,
                    ));
                }
                if prev == INPUT_NODE && declared.is_some() {
                    input_shape = declared;
                }
                let name = key.or(name);
                if let Some(n) = &name {
                    if graph.has_explicit(n) {
                        return Err(unsupported(format!("duplicate layer name `{n}`"), e.span));
                    }
                }
                prev = graph.add(name, GOp::Layer(LayerSpec { layer, activation }), vec![prev], e.span);
            }
            Ctor::Activation(a) => {
                prev = graph.add(None, GOp::Act(a), vec![prev], e.span);
            }
            Ctor::Op(op @ (TensorOp::Permute { .. } | TensorOp::Reshape { .. } | TensorOp::Transpose { .. }), name) => {
                prev = graph.add(key.or(name), GOp::Op(op), vec![prev], e.span);
            }
            Ctor::Op(op, _) => {
                return Err(unsupported(
                    format!("`{}` joins several tensors and needs subclassing style", op.op_name()),
                    e.span,
                ))
            }
            Ctor::Sub(class) => {
                return Err(unsupported(
                    format!("model class `{class}` nested in a sequential container"),
                    e.span,
                ))
            }
        }
    }
    let mut nn = graph.into_pivot(&name, prev)?;
    nn.input_shape = input_shape.map(|d| TensorShape::batched(&d));
    Ok(nn)
}

fn list_entries<'a>(list: &'a Expr, out: &mut Vec<(Option<String>, &'a Expr)>) -> Result<(), ExtractError> {
    match &list.kind {
        ExprKind::List(items) | ExprKind::Tuple(items) => {
            out.extend(items.iter().map(|i| (None, i)));
            Ok(())
        }
        _ => Err(unsupported("sequential layers must be a literal list", list.span)),
    }
}

fn is_ordered_dict(ctx: &Ctx, e: &Expr) -> bool {
    matches!(&e.kind, ExprKind::Call { func, .. }
        if ctx.imports.resolve(func).as_deref() == Some("collections.OrderedDict"))
}

fn dict_entries<'a>(call: &'a Expr, out: &mut Vec<(Option<String>, &'a Expr)>) -> Result<(), ExtractError> {
    let bad = || unsupported("OrderedDict entries must be (\"name\", layer) pairs", call.span);
    let ExprKind::Call { args, .. } = &call.kind else { unreachable!() };
    let [ExprKind::List(items) | ExprKind::Tuple(items)] = args.iter().map(|a| &a.kind).collect::<Vec<_>>()[..] else {
        return Err(bad());
    };
    for item in items {
        let ExprKind::Tuple(pair) = &item.kind else { return Err(bad()) };
        let [key, value] = pair.as_slice() else { return Err(bad()) };
        let key = key.as_str().ok_or_else(bad)?;
        out.push((Some(key.to_string()), value));
    }
    Ok(())
}

fn callee(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Call { func, .. } => func.dotted().unwrap_or_else(|| "<call>".into()),
        _ => "<expression>".into(),
    }
}

#[cfg(test)]
mod tests {
    use crate::frontend::{extract, parse_source, Dialect, Framework, Style};
    use crate::pivot::*;

    fn run(src: &str, fw: Framework) -> PivotNN {
        let tree = parse_source(src).unwrap();
        extract(&tree, Dialect::new(fw, Style::Sequential)).unwrap().nn
    }

    #[test]
    fn keras_add_calls_form_a_chain() {
        let src = "from tensorflow.keras import layers, models\n\nmodel = models.Sequential()\nmodel.add(layers.Dense(16, activation=\"relu\", input_shape=(8,)))\nmodel.add(layers.Dense(2))\n";
        let nn = run(src, Framework::ChannelLast);
        assert_eq!(nn.name, "model");
        assert_eq!(nn.modules.len(), 2);
        assert!(nn.is_chain());
        assert_eq!(nn.input_shape, Some(TensorShape::batched(&[8])));
    }

    #[test]
    fn torch_ordered_dict_keys_become_names() {
        let src = "from collections import OrderedDict\nimport torch.nn as nn\n\nNet = nn.Sequential(OrderedDict([\n    (\"fc\", nn.Linear(8, 4)),\n    (\"fc_act\", nn.ReLU()),\n    (\"out\", nn.Linear(4, 2)),\n]))\n";
        let nn = run(src, Framework::ChannelFirst);
        assert_eq!(nn.name, "Net");
        let names: Vec<_> = nn.modules.iter().map(|m| m.name.as_str()).collect();
        assert_eq!(names, ["fc", "out"]);
        assert_eq!(
            nn.modules[0].as_layer().unwrap().activation,
            ActivationRef::Literal(Activation::Relu)
        );
    }

    #[test]
    fn joins_are_rejected() {
        let src = "from tensorflow.keras import layers, models\nmodel = models.Sequential([layers.Dense(4), layers.Add()])\n";
        let tree = parse_source(src).unwrap();
        assert!(extract(&tree, Dialect::new(Framework::ChannelLast, Style::Sequential)).is_err());
    }
}
