//! Extraction of model classes: constructor bindings plus forward dataflow.

use std::collections::HashMap;

use super::graph::{GOp, Graph, INPUT_NODE};
use super::layers::{classify, functional_activation, Ctor, Scope};
use super::{unsupported, Ctx, ExtractError, Note, MAX_NESTING};
use crate::frontend::ast::*;
use crate::frontend::dialect::{forward_names, has_method, Framework};
use crate::frontend::symbols::{const_eval, Const, SymbolTable};
use crate::pivot::*;

pub(super) fn extract(ctx: &Ctx, notes: &mut Vec<Note>) -> Result<PivotNN, ExtractError> {
    let root = root_class(ctx, notes)?;
    extract_class(ctx, &root, 0)
}

fn method<'a>(class: &'a Stmt, names: &[&str]) -> Option<(&'a [Param], &'a [Stmt], Span)> {
    let StmtKind::ClassDef { body, .. } = &class.kind else {
        return None;
    };
    body.iter().find_map(|s| match &s.kind {
        StmtKind::FunctionDef { name, params, body, .. } if names.contains(&name.as_str()) => {
            Some((params.as_slice(), body.as_slice(), s.span))
        }
        _ => None,
    })
}

/// Model classes instantiated inside another model class's constructor.
fn nested_classes(ctx: &Ctx, class: &Stmt) -> Vec<String> {
    let mut out = Vec::new();
    if let Some((_, body, _)) = method(class, &["__init__"]) {
        walk_body_exprs(body, &mut |e| {
            if let ExprKind::Call { func, .. } = &e.kind {
                if let Some(n) = func.as_name() {
                    if ctx.classes.iter().any(|c| c == n) {
                        out.push(n.to_string());
                    }
                }
            }
        });
    }
    out
}

fn root_class(ctx: &Ctx, notes: &mut Vec<Note>) -> Result<String, ExtractError> {
    let fw = ctx.fw;
    let candidates: Vec<&Stmt> = ctx
        .tree
        .body
        .iter()
        .filter(|s| match &s.kind {
            StmtKind::ClassDef { name, .. } => {
                ctx.classes.contains(name) && has_method(s, &["__init__"]) && has_method(s, forward_names(fw))
            }
            _ => false,
        })
        .collect();
    let nested: Vec<String> = candidates.iter().flat_map(|c| nested_classes(ctx, c)).collect();
    let roots: Vec<(&str, Span)> = candidates
        .iter()
        .filter_map(|s| match &s.kind {
            StmtKind::ClassDef { name, .. } if !nested.contains(name) => Some((name.as_str(), s.span)),
            _ => None,
        })
        .collect();
    match roots.as_slice() {
        [] => Err(ExtractError::NoModel),
        [(only, _)] => Ok(only.to_string()),
        _ => {
            // Prefer the class the script instantiates last at top level.
            let mut chosen = None;
            for stmt in &ctx.tree.body {
                let value = match &stmt.kind {
                    StmtKind::Assign { value, .. } => value,
                    StmtKind::Expr(e) => e,
                    _ => continue,
                };
                if let ExprKind::Call { func, .. } = &value.kind {
                    if let Some(n) = func.as_name() {
                        if roots.iter().any(|(r, _)| *r == n) {
                            chosen = Some(n.to_string());
                        }
                    }
                }
            }
            let (last, span) = roots[roots.len() - 1];
            let chosen = chosen.unwrap_or_else(|| last.to_string());
            notes.push(Note {
                span: Some(span),
                message: format!(
                    "{} independent model classes found; extracting `{chosen}`",
                    roots.len()
                ),
            });
            Ok(chosen)
        }
    }
}

#[derive(Debug, Clone)]
enum Binding {
    Ctor(Ctor),
    /// A call this extractor does not understand; an error only if used.
    Opaque(String, Span),
}

#[derive(Debug, Clone, PartialEq)]
enum Val {
    Tensor(usize),
    /// `(output, state)` tuple returned by a channel-first recurrent layer.
    RnnTuple(usize),
    /// Full output sequence of a channel-first recurrent layer.
    Seq(usize),
    /// Recurrent state, which the pivot model does not represent.
    Hidden,
    /// `out[:, -1, :H]`: forward half of a bidirectional last step.
    ForwardLast(usize, i64),
    /// `out[:, 0, H:]`: backward half of a bidirectional last step.
    BackwardFirst(usize, i64),
    Seqn(Vec<Val>),
    /// Non-tensor parameter such as `training`.
    Flag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RnnUse {
    Sequence,
    LastStep,
}

struct Forward<'c, 'a> {
    ctx: &'c Ctx<'a>,
    scope: Scope<'c>,
    graph: Graph,
    bindings: HashMap<String, Binding>,
    calls: HashMap<String, usize>,
    env: HashMap<String, Val>,
    rnn_use: HashMap<usize, RnnUse>,
    input_shape: Option<Vec<u64>>,
}

fn extract_class(ctx: &Ctx, class_name: &str, depth: usize) -> Result<PivotNN, ExtractError> {
    if depth > MAX_NESTING {
        return Err(ExtractError::NestingTooDeep);
    }
    let class = ctx.class(class_name).ok_or(ExtractError::NoModel)?;
    let StmtKind::ClassDef { body: class_body, .. } = &class.kind else {
        unreachable!()
    };
    let class_syms = SymbolTable::for_scope(
        &class_body
            .iter()
            .filter(|s| !matches!(s.kind, StmtKind::FunctionDef { .. }))
            .cloned()
            .collect::<Vec<_>>(),
        &[],
        &[&ctx.globals],
    );
    let (init_params, init_body, _) = method(class, &["__init__"]).ok_or(ExtractError::NoModel)?;
    let init_param_names: Vec<&str> = init_params.iter().skip(1).map(|p| p.name.as_str()).collect();
    let init_syms = SymbolTable::for_scope(init_body, &init_param_names, &[&class_syms, &ctx.globals]);
    let (fwd_params, fwd_body, fwd_span) = method(class, forward_names(ctx.fw)).ok_or(ExtractError::NoModel)?;
    let fwd_param_names: Vec<&str> = fwd_params.iter().skip(1).map(|p| p.name.as_str()).collect();
    let fwd_syms = SymbolTable::for_scope(fwd_body, &fwd_param_names, &[]);

    // Constructor: attribute bindings.
    let init_scope = Scope {
        chain: vec![&init_syms, &class_syms, &ctx.globals],
    };
    let mut bindings = HashMap::new();
    let mut sub_networks: Vec<PivotNN> = Vec::new();
    for stmt in init_body {
        let StmtKind::Assign { targets, value } = &stmt.kind else {
            continue;
        };
        let [target] = targets.as_slice() else { continue };
        let Some(attr) = target.dotted().and_then(|d| d.strip_prefix("self.").map(str::to_string)) else {
            continue;
        };
        if attr.contains('.') || !matches!(value.kind, ExprKind::Call { .. }) {
            continue;
        }
        match classify(ctx, value, &init_scope)? {
            Some(Ctor::Sub(sub)) => {
                if !sub_networks.iter().any(|n| n.name == sub) {
                    let nested = extract_class(ctx, &sub, depth + 1)?;
                    sub_networks.push(nested);
                }
                bindings.insert(attr, Binding::Ctor(Ctor::Sub(sub)));
            }
            Some(ctor) => {
                bindings.insert(attr, Binding::Ctor(ctor));
            }
            None => {
                let ExprKind::Call { func, .. } = &value.kind else { unreachable!() };
                let name = func.dotted().unwrap_or_else(|| "<call>".into());
                bindings.insert(attr, Binding::Opaque(name, value.span));
            }
        }
    }

    // Forward pass.
    let reserved: Vec<String> = bindings.keys().cloned().collect();
    let mut fwd = Forward {
        ctx,
        scope: Scope {
            chain: vec![&fwd_syms, &init_syms, &class_syms, &ctx.globals],
        },
        graph: Graph::new(reserved),
        bindings,
        calls: HashMap::new(),
        env: HashMap::new(),
        rnn_use: HashMap::new(),
        input_shape: None,
    };
    let mut tensor_param = false;
    for p in fwd_params.iter().skip(1) {
        if p.kind != ParamKind::Normal {
            continue;
        }
        if !tensor_param {
            fwd.env.insert(p.name.clone(), Val::Tensor(INPUT_NODE));
            tensor_param = true;
        } else if p.default.is_some() {
            fwd.env.insert(p.name.clone(), Val::Flag);
        } else {
            return Err(unsupported("networks with more than one input tensor", fwd_span));
        }
    }
    if !tensor_param {
        return Err(unsupported("forward method without an input tensor", fwd_span));
    }
    let output = fwd.run(fwd_body)?.ok_or_else(|| unsupported("forward method does not return a tensor", fwd_span))?;
    let output = fwd.tensor(output, fwd_span)?;
    fwd.apply_rnn_uses();
    let input_shape = fwd.input_shape.clone();
    let mut nn = fwd.graph.into_pivot(class_name, output)?;
    nn.input_shape = input_shape.map(|d| TensorShape::batched(&d));
    nn.sub_networks = sub_networks;
    Ok(nn)
}

fn full_slice(e: &Expr) -> bool {
    matches!(
        &e.kind,
        ExprKind::Slice {
            lower: None,
            upper: None,
            step: None
        }
    )
}

impl Forward<'_, '_> {
    fn run(&mut self, body: &[Stmt]) -> Result<Option<Val>, ExtractError> {
        for stmt in body {
            match &stmt.kind {
                StmtKind::Pass => {}
                StmtKind::Expr(e) if matches!(e.kind, ExprKind::Str(_)) => {}
                StmtKind::Expr(e) if self.is_print(e) => {}
                StmtKind::Assign { targets, value } => {
                    let before = self.graph.nodes.len();
                    let v = self.eval(value)?;
                    for t in targets {
                        self.assign(t, v.clone(), before)?;
                    }
                }
                StmtKind::AugAssign { target, op, value } => {
                    let name = target
                        .as_name()
                        .ok_or_else(|| unsupported("augmented assignment to a non-variable", stmt.span))?;
                    let left = self.lookup(name, target.span)?;
                    let right = self.eval(value)?;
                    let v = self.binop(*op, left, right, stmt.span)?;
                    self.env.insert(name.to_string(), v);
                }
                StmtKind::Return(Some(e)) => return self.eval(e).map(Some),
                StmtKind::Return(None) => return Ok(None),
                StmtKind::If { .. } | StmtKind::For { .. } | StmtKind::While { .. } => {
                    return Err(unsupported("control flow in the forward pass", stmt.span))
                }
                _ => return Err(unsupported("statement in the forward pass", stmt.span)),
            }
        }
        Ok(None)
    }

    fn is_print(&self, e: &Expr) -> bool {
        matches!(&e.kind, ExprKind::Call { func, .. } if func.as_name() == Some("print"))
    }

    fn assign(&mut self, target: &Expr, v: Val, before: usize) -> Result<(), ExtractError> {
        match (&target.kind, v) {
            (ExprKind::Name(n), v) => {
                if let Val::Tensor(id) | Val::Seq(id) = v {
                    if id >= before {
                        self.graph.adopt_name(id, n);
                    }
                }
                self.env.insert(n.clone(), v);
                Ok(())
            }
            (ExprKind::Tuple(items), Val::RnnTuple(id)) if items.len() == 2 => {
                self.assign(&items[0], Val::Seq(id), before)?;
                self.bind_hidden(&items[1]);
                Ok(())
            }
            (ExprKind::Tuple(items), Val::Seqn(vals)) if items.len() == vals.len() => {
                for (t, v) in items.iter().zip(vals) {
                    self.assign(t, v, before)?;
                }
                Ok(())
            }
            _ => Err(unsupported("assignment target", target.span)),
        }
    }

    fn bind_hidden(&mut self, target: &Expr) {
        match &target.kind {
            ExprKind::Name(n) => {
                self.env.insert(n.clone(), Val::Hidden);
            }
            ExprKind::Tuple(items) => {
                for i in items {
                    self.bind_hidden(i);
                }
            }
            _ => {}
        }
    }

    fn lookup(&self, name: &str, span: Span) -> Result<Val, ExtractError> {
        self.env.get(name).cloned().ok_or_else(|| ExtractError::UnresolvedDataflow {
            name: name.to_string(),
            span,
        })
    }

    /// Converts a value used as a layer input into a graph node.
    fn tensor(&mut self, v: Val, span: Span) -> Result<usize, ExtractError> {
        match v {
            Val::Tensor(id) => Ok(id),
            Val::Seq(id) => {
                self.mark_rnn(id, RnnUse::Sequence, span)?;
                Ok(id)
            }
            Val::RnnTuple(_) => Err(unsupported(
                "a recurrent layer's (output, state) tuple must be unpacked or indexed",
                span,
            )),
            Val::Hidden => Err(unsupported("recurrent hidden state is not supported", span)),
            Val::ForwardLast(..) | Val::BackwardFirst(..) => Err(unsupported(
                "half of a bidirectional last step must be concatenated with the other half",
                span,
            )),
            Val::Seqn(_) => Err(unsupported("a tuple is not a tensor", span)),
            Val::Flag => Err(unsupported("a flag parameter is not a tensor", span)),
        }
    }

    fn mark_rnn(&mut self, id: usize, usage: RnnUse, span: Span) -> Result<(), ExtractError> {
        match self.rnn_use.insert(id, usage) {
            Some(prev) if prev != usage => Err(unsupported(
                format!(
                    "the output of `{}` is used both as a full sequence and as its last step",
                    self.graph.nodes[id].name
                ),
                span,
            )),
            _ => Ok(()),
        }
    }

    fn apply_rnn_uses(&mut self) {
        for (&id, &usage) in &self.rnn_use {
            if let GOp::Layer(LayerSpec {
                layer: Layer::Recurrent(r),
                ..
            }) = &mut self.graph.nodes[id].op
            {
                r.return_sequences = usage == RnnUse::Sequence;
            }
        }
    }

    fn recurrent(&self, id: usize) -> Option<&RecurrentAttrs> {
        match &self.graph.nodes[id].op {
            GOp::Layer(LayerSpec {
                layer: Layer::Recurrent(r),
                ..
            }) => Some(r),
            _ => None,
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Val, ExtractError> {
        match &e.kind {
            ExprKind::Name(n) => self.lookup(n, e.span),
            ExprKind::Call { .. } => self.call(e),
            ExprKind::BinOp { left, op, right } => {
                let l = self.eval(left)?;
                let r = self.eval(right)?;
                self.binop(*op, l, r, e.span)
            }
            ExprKind::Subscript { value, index } => {
                let v = self.eval(value)?;
                self.subscript(v, index, e.span)
            }
            ExprKind::Tuple(items) | ExprKind::List(items) => {
                let vals = items.iter().map(|i| self.eval(i)).collect::<Result<_, _>>()?;
                Ok(Val::Seqn(vals))
            }
            _ => Err(unsupported("expression in the forward pass", e.span)),
        }
    }

    fn binop(&mut self, op: BinOp, l: Val, r: Val, span: Span) -> Result<Val, ExtractError> {
        let op = match op {
            BinOp::Add => TensorOp::Add,
            BinOp::Mul => TensorOp::Multiply,
            BinOp::MatMul => TensorOp::Matmul,
            _ => return Err(unsupported("arithmetic operator on tensors", span)),
        };
        let a = self.tensor(l, span)?;
        let b = self.tensor(r, span)?;
        Ok(Val::Tensor(self.graph.add(None, GOp::Op(op), vec![a, b], span)))
    }

    fn subscript(&mut self, v: Val, index: &Expr, span: Span) -> Result<Val, ExtractError> {
        match v {
            Val::RnnTuple(id) => match index.as_int() {
                Some(0) => Ok(Val::Seq(id)),
                Some(1) => Ok(Val::Hidden),
                _ => Err(unsupported("index into a recurrent output tuple", span)),
            },
            Val::Seqn(items) => match index.as_int() {
                Some(i) if (0..items.len() as i64).contains(&i) => Ok(items[i as usize].clone()),
                _ => Err(unsupported("tuple index", span)),
            },
            Val::Seq(id) => {
                let ExprKind::Tuple(items) = &index.kind else {
                    return Err(unsupported("slice of a recurrent output", span));
                };
                if items.len() < 2 || items.len() > 3 || !full_slice(&items[0]) {
                    return Err(unsupported("slice of a recurrent output", span));
                }
                let feature = items.get(2);
                let bidirectional = self.recurrent(id).is_some_and(|r| r.bidirectional);
                match (items[1].as_int(), feature.map(|f| &f.kind)) {
                    (Some(-1), None) => self.last_step(id, bidirectional, span),
                    (Some(-1), Some(_)) if full_slice(feature.unwrap()) => self.last_step(id, bidirectional, span),
                    (
                        Some(-1),
                        Some(ExprKind::Slice {
                            lower: None,
                            upper: Some(h),
                            step: None,
                        }),
                    ) => Ok(Val::ForwardLast(id, self.const_int(h, span)?)),
                    (
                        Some(0),
                        Some(ExprKind::Slice {
                            lower: Some(h),
                            upper: None,
                            step: None,
                        }),
                    ) => Ok(Val::BackwardFirst(id, self.const_int(h, span)?)),
                    _ => Err(unsupported("slice of a recurrent output", span)),
                }
            }
            _ => Err(unsupported("subscript of a tensor", span)),
        }
    }

    fn last_step(&mut self, id: usize, bidirectional: bool, span: Span) -> Result<Val, ExtractError> {
        if bidirectional {
            return Err(unsupported(
                "the last step of a bidirectional layer must concatenate out[:, -1, :H] and out[:, 0, H:]",
                span,
            ));
        }
        self.mark_rnn(id, RnnUse::LastStep, span)?;
        Ok(Val::Tensor(id))
    }

    fn const_int(&self, e: &Expr, span: Span) -> Result<i64, ExtractError> {
        const_eval(e, &self.scope.chain)
            .and_then(|c| c.as_int())
            .ok_or_else(|| unsupported("expected an integer constant", span))
    }

    fn call(&mut self, e: &Expr) -> Result<Val, ExtractError> {
        let ExprKind::Call { func, args, keywords } = &e.kind else { unreachable!() };
        let span = e.span;

        // self.attr(x)
        if let ExprKind::Attribute { value, attr } = &func.kind {
            if value.as_name() == Some("self") {
                return self.call_binding(attr, args, keywords, span);
            }
        }
        // Inline construct-and-call: layers.Concatenate()([a, b]), resolve_activation(a)(x)
        if let ExprKind::Call { .. } = &func.kind {
            let ctor = classify(self.ctx, func, &self.scope)?.ok_or_else(|| {
                ExtractError::UnsupportedLayer {
                    name: callee_name(func),
                    span: func.span,
                }
            })?;
            return self.apply_ctor(ctor, None, args, keywords, span);
        }
        if let Some(path) = self.ctx.imports.resolve(func) {
            return self.functional(&path, args, keywords, span);
        }
        if let ExprKind::Attribute { value, attr } = &func.kind {
            let receiver = self.eval(value)?;
            return self.method(receiver, attr, args, keywords, span);
        }
        Err(unsupported(format!("call to `{}` in the forward pass", callee_name(func)), span))
    }

    fn call_binding(&mut self, attr: &str, args: &[Expr], keywords: &[Keyword], span: Span) -> Result<Val, ExtractError> {
        let binding = self.bindings.get(attr).cloned().ok_or_else(|| ExtractError::UnresolvedDataflow {
            name: format!("self.{attr}"),
            span,
        })?;
        let ctor = match binding {
            Binding::Ctor(c) => c,
            Binding::Opaque(name, s) => return Err(ExtractError::UnsupportedLayer { name, span: s }),
        };
        let count = self.calls.entry(attr.to_string()).or_insert(0);
        *count += 1;
        let n = *count;
        let name = match &ctor {
            Ctor::Layer { layer, .. } if n > 1 && !layer.is_stateless() => {
                return Err(unsupported(
                    format!("layer `{attr}` has parameters and is applied more than once"),
                    span,
                ))
            }
            Ctor::Sub(_) if n > 1 => {
                return Err(unsupported(format!("sub-network `{attr}` is applied more than once"), span))
            }
            Ctor::Layer { .. } | Ctor::Sub(_) if n > 1 => Some(self.graph.fresh(attr)),
            Ctor::Layer { .. } | Ctor::Sub(_) => {
                if self.graph.has_explicit(attr) {
                    Some(self.graph.fresh(attr))
                } else {
                    Some(attr.to_string())
                }
            }
            _ => None,
        };
        self.apply_ctor(ctor, name, args, keywords, span)
    }

    fn apply_ctor(
        &mut self,
        ctor: Ctor,
        name: Option<String>,
        args: &[Expr],
        keywords: &[Keyword],
        span: Span,
    ) -> Result<Val, ExtractError> {
        for k in keywords {
            if k.name.as_deref() != Some("training") {
                return Err(unsupported(
                    format!("keyword `{}` when applying a layer", k.name.as_deref().unwrap_or("**")),
                    span,
                ));
            }
        }
        let [arg] = args else {
            return Err(unsupported("a layer must be applied to exactly one argument", span));
        };
        let input = self.eval(arg)?;
        match ctor {
            Ctor::Layer {
                layer,
                activation,
                input_shape,
                ..
            } => {
                let is_rnn = matches!(layer, Layer::Recurrent(_));
                let x = self.tensor(input, span)?;
                if x == INPUT_NODE && input_shape.is_some() {
                    self.input_shape = input_shape;
                }
                let id = self.graph.add(name, GOp::Layer(LayerSpec { layer, activation }), vec![x], span);
                if is_rnn && self.ctx.fw == Framework::ChannelFirst {
                    Ok(Val::RnnTuple(id))
                } else {
                    Ok(Val::Tensor(id))
                }
            }
            Ctor::Activation(act) => {
                let x = self.tensor(input, span)?;
                Ok(Val::Tensor(self.graph.add(None, GOp::Act(act), vec![x], span)))
            }
            Ctor::Sub(class) => {
                let x = self.tensor(input, span)?;
                Ok(Val::Tensor(self.graph.add(name, GOp::Sub(class), vec![x], span)))
            }
            Ctor::Op(op, _) => {
                let inputs = match (&op, input) {
                    (TensorOp::Concatenate { .. } | TensorOp::Add | TensorOp::Multiply, Val::Seqn(items)) => {
                        items.into_iter().map(|v| self.tensor(v, span)).collect::<Result<Vec<_>, _>>()?
                    }
                    (_, v) => vec![self.tensor(v, span)?],
                };
                Ok(Val::Tensor(self.graph.add(name, GOp::Op(op), inputs, span)))
            }
            Ctor::Input(_) => Err(unsupported("input placeholder inside the forward pass", span)),
        }
    }

    fn positional_or(&self, args: &[Expr], keywords: &[Keyword], index: usize, names: &[&str]) -> Option<Expr> {
        keywords
            .iter()
            .find(|k| k.name.as_deref().is_some_and(|n| names.contains(&n)))
            .map(|k| k.value.clone())
            .or_else(|| args.get(index).cloned())
    }

    fn int_args(&self, exprs: &[Expr], span: Span) -> Result<Vec<i64>, ExtractError> {
        // A single tuple/list argument or a run of integer arguments.
        if let [one] = exprs {
            if let Some(Const::Tuple(items)) = const_eval(one, &self.scope.chain) {
                return items
                    .iter()
                    .map(|c| c.as_int().ok_or_else(|| unsupported("expected integer constants", span)))
                    .collect();
            }
        }
        exprs.iter().map(|e| self.const_int(e, span)).collect()
    }

    fn functional(&mut self, path: &str, args: &[Expr], keywords: &[Keyword], span: Span) -> Result<Val, ExtractError> {
        let first_tensor = |this: &mut Self| -> Result<usize, ExtractError> {
            let e = this
                .positional_or(args, keywords, 0, &["input", "x", "a"])
                .ok_or_else(|| unsupported(format!("`{path}` without an input"), span))?;
            let v = this.eval(&e)?;
            this.tensor(v, span)
        };
        match path {
            "torch.cat" | "torch.concat" | "torch.concatenate" | "tensorflow.concat" | "keras.layers.concatenate" => {
                let list = self
                    .positional_or(args, keywords, 0, &["tensors", "values", "inputs"])
                    .ok_or_else(|| unsupported("concatenation without inputs", span))?;
                let axis_expr = self.positional_or(args, keywords, 1, &["dim", "axis"]);
                let axis = match axis_expr {
                    Some(a) => self.const_int(&a, span)?,
                    None if path == "keras.layers.concatenate" => -1,
                    None => return Err(unsupported("concatenation needs an explicit axis", span)),
                };
                if axis == 0 {
                    return Err(unsupported("concatenation along the batch axis", span));
                }
                let Val::Seqn(items) = self.eval(&list)? else {
                    return Err(unsupported("concatenation expects a list of tensors", span));
                };
                if let [Val::ForwardLast(a, h), Val::BackwardFirst(b, h2)] = items.as_slice() {
                    let ok = a == b
                        && h == h2
                        && self.recurrent(*a).is_some_and(|r| r.bidirectional && r.hidden_size as i64 == *h);
                    if !ok || !matches!(axis, -1 | 1) {
                        return Err(unsupported("malformed bidirectional last-step concatenation", span));
                    }
                    let id = *a;
                    self.mark_rnn(id, RnnUse::LastStep, span)?;
                    return Ok(Val::Tensor(id));
                }
                let inputs = items.into_iter().map(|v| self.tensor(v, span)).collect::<Result<Vec<_>, _>>()?;
                Ok(Val::Tensor(self.graph.add(None, GOp::Op(TensorOp::Concatenate { axis }), inputs, span)))
            }
            "torch.add" | "tensorflow.add" | "tensorflow.math.add" | "torch.mul" | "torch.multiply"
            | "tensorflow.multiply" | "tensorflow.math.multiply" | "torch.matmul" | "tensorflow.matmul"
            | "tensorflow.linalg.matmul" => {
                let op = match path.rsplit('.').next() {
                    Some("add") => BinOp::Add,
                    Some("matmul") => BinOp::MatMul,
                    _ => BinOp::Mul,
                };
                let [a, b] = args else {
                    return Err(unsupported(format!("`{path}` expects two tensors"), span));
                };
                let (l, r) = (self.eval(a)?, self.eval(b)?);
                self.binop(op, l, r, span)
            }
            "keras.layers.add" | "keras.layers.multiply" => {
                let [list] = args else {
                    return Err(unsupported(format!("`{path}` expects a list of tensors"), span));
                };
                let Val::Seqn(items) = self.eval(list)? else {
                    return Err(unsupported(format!("`{path}` expects a list of tensors"), span));
                };
                let op = if path.ends_with("add") { TensorOp::Add } else { TensorOp::Multiply };
                let inputs = items.into_iter().map(|v| self.tensor(v, span)).collect::<Result<Vec<_>, _>>()?;
                Ok(Val::Tensor(self.graph.add(None, GOp::Op(op), inputs, span)))
            }
            "torch.permute" | "tensorflow.transpose" => {
                let x = first_tensor(self)?;
                let order = self
                    .positional_or(args, keywords, 1, &["dims", "perm"])
                    .ok_or_else(|| unsupported("transpose without an explicit permutation", span))?;
                let order = self.int_args(std::slice::from_ref(&order), span)?;
                self.permute(x, order, span)
            }
            "torch.transpose" | "tensorflow.experimental.numpy.swapaxes" => {
                let x = first_tensor(self)?;
                let dims = self.int_args(&args[1..], span)?;
                self.transpose(x, &dims, span)
            }
            "torch.reshape" | "tensorflow.reshape" => {
                let x = first_tensor(self)?;
                let shape = self
                    .positional_or(args, keywords, 1, &["shape"])
                    .ok_or_else(|| unsupported("reshape without a shape", span))?;
                self.reshape(x, std::slice::from_ref(&shape), span)
            }
            "torch.flatten" => {
                let x = first_tensor(self)?;
                let start = self.positional_or(args, keywords, 1, &["start_dim"]);
                self.flatten(x, start.as_ref(), span)
            }
            "torch.nn.functional.leaky_relu" => {
                let x = first_tensor(self)?;
                let slope = self.positional_or(args, keywords, 1, &["negative_slope"]);
                if slope.and_then(|s| const_eval(&s, &self.scope.chain)).and_then(|c| c.as_f64()) != Some(0.2) {
                    return Err(unsupported("leaky_relu needs an explicit slope of 0.2", span));
                }
                let act = ActivationRef::Literal(Activation::LeakyRelu);
                Ok(Val::Tensor(self.graph.add(None, GOp::Act(act), vec![x], span)))
            }
            _ => match functional_activation(path) {
                Some(a) => {
                    let x = first_tensor(self)?;
                    Ok(Val::Tensor(self.graph.add(None, GOp::Act(ActivationRef::Literal(a)), vec![x], span)))
                }
                None => Err(unsupported(format!("call to `{path}` in the forward pass"), span)),
            },
        }
    }

    fn method(&mut self, receiver: Val, name: &str, args: &[Expr], keywords: &[Keyword], span: Span) -> Result<Val, ExtractError> {
        if !keywords.is_empty() && !matches!(name, "flatten") {
            return Err(unsupported(format!("keyword arguments to `.{name}()`"), span));
        }
        match name {
            "contiguous" => Ok(receiver),
            "permute" => {
                let x = self.tensor(receiver, span)?;
                let order = self.int_args(args, span)?;
                self.permute(x, order, span)
            }
            "transpose" => {
                let x = self.tensor(receiver, span)?;
                let dims = self.int_args(args, span)?;
                self.transpose(x, &dims, span)
            }
            "view" | "reshape" => {
                let x = self.tensor(receiver, span)?;
                self.reshape(x, args, span)
            }
            "flatten" => {
                let x = self.tensor(receiver, span)?;
                let start = self.positional_or(args, keywords, 0, &["start_dim"]);
                self.flatten(x, start.as_ref(), span)
            }
            _ => Err(unsupported(format!("tensor method `.{name}()`"), span)),
        }
    }

    fn permute(&mut self, x: usize, order: Vec<i64>, span: Span) -> Result<Val, ExtractError> {
        let order = order
            .into_iter()
            .map(|i| usize::try_from(i).map_err(|_| unsupported("negative permutation index", span)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Val::Tensor(self.graph.add(None, GOp::Op(TensorOp::Permute { order }), vec![x], span)))
    }

    fn transpose(&mut self, x: usize, dims: &[i64], span: Span) -> Result<Val, ExtractError> {
        let [a, b] = dims else {
            return Err(unsupported("transpose expects two dimensions", span));
        };
        let (Ok(dim0), Ok(dim1)) = (usize::try_from(*a), usize::try_from(*b)) else {
            return Err(unsupported("negative transpose dimension", span));
        };
        if dim0 == 0 || dim1 == 0 {
            return Err(unsupported("transpose of the batch dimension", span));
        }
        Ok(Val::Tensor(self.graph.add(None, GOp::Op(TensorOp::Transpose { dim0, dim1 }), vec![x], span)))
    }

    fn is_batch_expr(&self, e: &Expr) -> bool {
        // x.size(0), x.shape[0], tf.shape(x)[0]
        match &e.kind {
            ExprKind::Call { func, args, .. } => {
                matches!(&func.kind, ExprKind::Attribute { attr, .. } if attr == "size")
                    && args.len() == 1
                    && args[0].as_int() == Some(0)
            }
            ExprKind::Subscript { value, index } => {
                index.as_int() == Some(0)
                    && match &value.kind {
                        ExprKind::Attribute { attr, .. } => attr == "shape",
                        ExprKind::Call { func, .. } => {
                            self.ctx.imports.resolve(func).as_deref() == Some("tensorflow.shape")
                        }
                        _ => false,
                    }
            }
            _ => false,
        }
    }

    fn reshape(&mut self, x: usize, args: &[Expr], span: Span) -> Result<Val, ExtractError> {
        let items: Vec<Expr> = match args {
            [one] => match &one.kind {
                ExprKind::Tuple(items) | ExprKind::List(items) => items.clone(),
                _ => args.to_vec(),
            },
            _ => args.to_vec(),
        };
        let Some((first, rest)) = items.split_first() else {
            return Err(unsupported("reshape without a shape", span));
        };
        let batch_expr = self.is_batch_expr(first);
        if !batch_expr && first.as_int() != Some(-1) {
            return Err(unsupported("reshape must keep the batch dimension first (-1 or x.size(0))", span));
        }
        let rest = rest.iter().map(|e| self.const_int(e, span)).collect::<Result<Vec<_>, _>>()?;
        if batch_expr && rest == [-1] {
            let flat = Layer::Flatten;
            let id = self.graph.add(
                None,
                GOp::Layer(LayerSpec {
                    layer: flat,
                    activation: ActivationRef::None,
                }),
                vec![x],
                span,
            );
            return Ok(Val::Tensor(id));
        }
        let shape = rest
            .iter()
            .map(|&d| u32::try_from(d).ok().filter(|&d| d >= 1))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| unsupported("reshape dimensions must be positive constants", span))?;
        Ok(Val::Tensor(self.graph.add(None, GOp::Op(TensorOp::Reshape { shape }), vec![x], span)))
    }

    fn flatten(&mut self, x: usize, start: Option<&Expr>, span: Span) -> Result<Val, ExtractError> {
        if start.map(|s| self.const_int(s, span)).transpose()? != Some(1) {
            return Err(unsupported("flatten must start at dimension 1", span));
        }
        let id = self.graph.add(
            None,
            GOp::Layer(LayerSpec {
                layer: Layer::Flatten,
                activation: ActivationRef::None,
            }),
            vec![x],
            span,
        );
        Ok(Val::Tensor(id))
    }
}

fn callee_name(func: &Expr) -> String {
    match &func.kind {
        ExprKind::Call { func, .. } => callee_name(func),
        _ => func.dotted().unwrap_or_else(|| "<expression>".into()),
    }
}

#[cfg(test)]
mod tests {
    use crate::frontend::{extract, parse_source, Dialect, Framework, Style};
    use crate::pivot::*;

    fn pt(src: &str) -> PivotNN {
        let tree = parse_source(src).unwrap();
        extract(&tree, Dialect::new(Framework::ChannelFirst, Style::Subclassing)).unwrap().nn
    }

    #[test]
    fn lstm_last_step_folds_into_return_sequences() {
        let src = "import torch\nfrom torch import nn\n\nclass Net(nn.Module):\n    def __init__(self):\n        super().__init__()\n        self.lstm = nn.LSTM(8, 16, batch_first=True)\n        self.fc = nn.Linear(16, 2)\n\n    def forward(self, x):\n        out, _ = self.lstm(x)\n        last = out[:, -1, :]\n        return self.fc(last)\n";
        let nn = pt(src);
        let Layer::Recurrent(r) = &nn.modules[0].as_layer().unwrap().layer else { panic!() };
        assert!(!r.return_sequences);
        assert_eq!(nn.modules[1].inputs, vec!["lstm".to_string()]);
    }

    #[test]
    fn bidirectional_last_step_concat_folds() {
        let src = "import torch\nfrom torch import nn\n\nclass Net(nn.Module):\n    def __init__(self):\n        super().__init__()\n        self.gru = nn.GRU(8, 4, batch_first=True, bidirectional=True)\n\n    def forward(self, x):\n        out, _ = self.gru(x)\n        return torch.cat((out[:, -1, :4], out[:, 0, 4:]), dim=-1)\n";
        let nn = pt(src);
        assert_eq!(nn.modules.len(), 1);
        let Layer::Recurrent(r) = &nn.modules[0].as_layer().unwrap().layer else { panic!() };
        assert!(r.bidirectional && !r.return_sequences);
    }

    #[test]
    fn use_before_definition_is_unresolved() {
        let src = "from torch import nn\n\nclass Net(nn.Module):\n    def __init__(self):\n        super().__init__()\n        self.fc = nn.Linear(4, 2)\n\n    def forward(self, x):\n        return self.fc(y)\n";
        let tree = parse_source(src).unwrap();
        let err = extract(&tree, Dialect::new(Framework::ChannelFirst, Style::Subclassing)).unwrap_err();
        assert!(matches!(err, crate::frontend::ExtractError::UnresolvedDataflow { .. }));
    }

    #[test]
    fn join_is_named_after_its_variable() {
        let src = "from tensorflow import keras\nfrom tensorflow.keras import layers\n\nclass Net(keras.Model):\n    def __init__(self):\n        super().__init__()\n        self.a = layers.Dense(4)\n        self.b = layers.Dense(4)\n        self.out = layers.Dense(1)\n\n    def call(self, inputs):\n        x = self.a(inputs)\n        y = self.b(inputs)\n        merged = x + y\n        return self.out(merged)\n";
        let tree = parse_source(src).unwrap();
        let nn = extract(&tree, Dialect::new(Framework::ChannelLast, Style::Subclassing)).unwrap().nn;
        assert_eq!(nn.modules[2].name, "merged");
        assert_eq!(nn.modules[2].inputs, vec!["a".to_string(), "b".to_string()]);
    }
}
