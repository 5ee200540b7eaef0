//! Constant tracking for identifiers used as layer arguments.

use std::collections::HashMap;

use super::ast::*;

/// Compile-time value of a single-assignment symbol.
#[derive(Debug, Clone, PartialEq)]
pub enum Const {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    None,
    Tuple(Vec<Const>),
}

impl Const {
    pub fn as_int(&self) -> Option<i64> {
        match self {
            Const::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Const::Int(i) => Some(*i as f64),
            Const::Float(f) => Some(*f),
            _ => None,
        }
    }
}

/// Identifier to constant value, or `None` (bottom) when the symbol is a
/// parameter, is assigned more than once, or is computed.
#[derive(Debug, Clone, Default)]
pub struct SymbolTable {
    entries: HashMap<String, Option<Const>>,
}

impl SymbolTable {
    /// Scans the assignments of one scope. Nested functions and classes are
    /// separate scopes and are skipped; `self.x = ...` is recorded as `self.x`.
    pub fn for_scope(body: &[Stmt], params: &[&str], outer: &[&SymbolTable]) -> Self {
        let mut table = SymbolTable::default();
        for p in params {
            table.entries.insert((*p).to_string(), None);
        }
        table.scan(body, outer, false);
        table
    }

    fn scan(&mut self, body: &[Stmt], outer: &[&SymbolTable], conditional: bool) {
        for stmt in body {
            match &stmt.kind {
                StmtKind::Assign { targets, value } => {
                    for t in targets {
                        let v = if conditional { None } else { self.eval_with(value, outer) };
                        self.bind_target(t, v);
                    }
                }
                StmtKind::AnnAssign {
                    target, value: Some(value), ..
                } => {
                    let v = if conditional { None } else { self.eval_with(value, outer) };
                    self.bind_target(target, v);
                }
                StmtKind::AugAssign { target, .. } => self.bind_target(target, None),
                StmtKind::For { target, body, orelse, .. } => {
                    self.bind_target(target, None);
                    self.scan(body, outer, true);
                    self.scan(orelse, outer, true);
                }
                StmtKind::If { body, orelse, .. } | StmtKind::While { body, orelse, .. } => {
                    self.scan(body, outer, true);
                    self.scan(orelse, outer, true);
                }
                StmtKind::With { items, body } => {
                    for (_, t) in items {
                        if let Some(t) = t {
                            self.bind_target(t, None);
                        }
                    }
                    self.scan(body, outer, conditional);
                }
                StmtKind::Try {
                    body,
                    handlers,
                    orelse,
                    finalbody,
                } => {
                    self.scan(body, outer, true);
                    for h in handlers {
                        self.scan(&h.body, outer, true);
                    }
                    self.scan(orelse, outer, true);
                    self.scan(finalbody, outer, conditional);
                }
                StmtKind::FunctionDef { name, .. } | StmtKind::ClassDef { name, .. } => {
                    self.bind(name.clone(), None);
                }
                StmtKind::Import(names) | StmtKind::ImportFrom { names, .. } => {
                    for a in names {
                        let local = a.asname.clone().unwrap_or_else(|| a.name.split('.').next().unwrap_or("").to_string());
                        self.bind(local, None);
                    }
                }
                _ => {}
            }
        }
    }

    fn bind_target(&mut self, target: &Expr, value: Option<Const>) {
        match &target.kind {
            ExprKind::Name(n) => self.bind(n.clone(), value),
            ExprKind::Attribute { .. } => {
                if let Some(d) = target.dotted() {
                    if d.starts_with("self.") {
                        self.bind(d, value);
                    }
                }
            }
            ExprKind::Tuple(items) | ExprKind::List(items) => {
                for i in items {
                    self.bind_target(i, None);
                }
            }
            ExprKind::Starred(inner) => self.bind_target(inner, None),
            _ => {}
        }
    }

    fn bind(&mut self, name: String, value: Option<Const>) {
        // A second assignment makes the symbol non-constant.
        match self.entries.get_mut(&name) {
            Some(slot) => *slot = None,
            None => {
                self.entries.insert(name, value);
            }
        }
    }

    fn eval_with(&self, e: &Expr, outer: &[&SymbolTable]) -> Option<Const> {
        let mut chain: Vec<&SymbolTable> = vec![self];
        chain.extend_from_slice(outer);
        const_eval(e, &chain)
    }

    /// `Some(Some(c))` for a constant, `Some(None)` for bottom, `None` if unbound.
    pub fn get(&self, name: &str) -> Option<&Option<Const>> {
        self.entries.get(name)
    }
}

/// Outcome of resolving a symbol through a chain of scopes.
#[derive(Debug, Clone, PartialEq)]
pub enum Lookup {
    Const(Const),
    Bottom,
    Unbound,
}

pub fn lookup(chain: &[&SymbolTable], name: &str) -> Lookup {
    for table in chain {
        match table.get(name) {
            Some(Some(c)) => return Lookup::Const(c.clone()),
            Some(None) => return Lookup::Bottom,
            None => {}
        }
    }
    Lookup::Unbound
}

/// Evaluates literal expressions and constant symbol references.
pub fn const_eval(e: &Expr, chain: &[&SymbolTable]) -> Option<Const> {
    match &e.kind {
        ExprKind::Int(i) => Some(Const::Int(*i)),
        ExprKind::Float(f) => Some(Const::Float(*f)),
        ExprKind::Str(s) => Some(Const::Str(s.clone())),
        ExprKind::Bool(b) => Some(Const::Bool(*b)),
        ExprKind::NoneLit => Some(Const::None),
        ExprKind::Tuple(items) | ExprKind::List(items) => {
            items.iter().map(|i| const_eval(i, chain)).collect::<Option<Vec<_>>>().map(Const::Tuple)
        }
        ExprKind::UnaryOp { op: UnaryOp::Neg, operand } => match const_eval(operand, chain)? {
            Const::Int(i) => Some(Const::Int(-i)),
            Const::Float(f) => Some(Const::Float(-f)),
            _ => None,
        },
        ExprKind::BinOp { left, op, right } => {
            let (l, r) = (const_eval(left, chain)?, const_eval(right, chain)?);
            match (l, r) {
                (Const::Int(a), Const::Int(b)) => match op {
                    BinOp::Add => a.checked_add(b).map(Const::Int),
                    BinOp::Sub => a.checked_sub(b).map(Const::Int),
                    BinOp::Mul => a.checked_mul(b).map(Const::Int),
                    BinOp::FloorDiv if b != 0 => Some(Const::Int(a.div_euclid(b))),
                    _ => None,
                },
                _ => None,
            }
        }
        ExprKind::Name(_) | ExprKind::Attribute { .. } => match lookup(chain, &e.dotted()?) {
            Lookup::Const(c) => Some(c),
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn table(src: &str) -> SymbolTable {
        let tree = parse_source(src).unwrap();
        SymbolTable::for_scope(&tree.body, &[], &[])
    }

    #[test]
    fn single_assignment_is_constant() {
        let t = table("actv = 'relu'\nh = 64\nk = h * 2\n");
        assert_eq!(t.get("actv"), Some(&Some(Const::Str("relu".into()))));
        assert_eq!(t.get("k"), Some(&Some(Const::Int(128))));
    }

    #[test]
    fn reassigned_and_computed_are_bottom() {
        let t = table("a = 'relu'\na = 'tanh'\nb = get_flag()\n");
        assert_eq!(t.get("a"), Some(&None));
        assert_eq!(t.get("b"), Some(&None));
    }

    #[test]
    fn conditional_assignment_is_bottom() {
        let t = table("if x:\n    a = 'relu'\n");
        assert_eq!(t.get("a"), Some(&None));
    }

    #[test]
    fn parameters_are_bottom() {
        let tree = parse_source("h = 3\n").unwrap();
        let t = SymbolTable::for_scope(&tree.body, &["actv"], &[]);
        assert_eq!(lookup(&[&t], "actv"), Lookup::Bottom);
        assert_eq!(lookup(&[&t], "missing"), Lookup::Unbound);
    }
}
