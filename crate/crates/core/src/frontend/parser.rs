//! Recursive-descent parser producing [`SyntaxTree`].

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::SyntaxError;
use crate::pivot::Span;

/// Parses a whole source file. Trailing unparsed input is an error.
pub fn parse_source(text: &str) -> Result<SyntaxTree, SyntaxError> {
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut body = Vec::new();
    while !p.at_eof() {
        if p.eat_newline() {
            continue;
        }
        body.extend(p.statement()?);
    }
    Ok(SyntaxTree { body })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

const AUG_OPS: &[(&str, BinOp)] = &[
    ("+=", BinOp::Add),
    ("-=", BinOp::Sub),
    ("*=", BinOp::Mul),
    ("@=", BinOp::MatMul),
    ("/=", BinOp::Div),
    ("//=", BinOp::FloorDiv),
    ("%=", BinOp::Mod),
    ("**=", BinOp::Pow),
    ("<<=", BinOp::LShift),
    (">>=", BinOp::RShift),
    ("|=", BinOp::BitOr),
    ("^=", BinOp::BitXor),
    ("&=", BinOp::BitAnd),
];

const KEYWORDS: &[&str] = &[
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class", "continue", "def", "del",
    "elif", "else", "except", "finally", "for", "from", "global", "if", "import", "in", "is", "lambda", "nonlocal",
    "not", "or", "pass", "raise", "return", "try", "while", "with", "yield",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        let i = (self.pos + off).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        let span = self.span();
        Err(SyntaxError {
            line: span.line,
            column: span.column,
            expected: format!("{}, found {}", expected.into(), self.peek().describe()),
        })
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<Span> {
        if self.is_op(op) {
            Ok(self.advance().span)
        } else {
            self.error(format!("`{op}`"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(format!("`{kw}`"))
        }
    }

    fn eat_newline(&mut self) -> bool {
        if matches!(self.peek(), Tok::Newline) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_newline(&mut self) -> PResult<()> {
        if self.eat_newline() || self.at_eof() {
            Ok(())
        } else {
            self.error("end of statement")
        }
    }

    fn identifier(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Name(n) if !is_keyword(&n) => {
                self.advance();
                Ok(n)
            }
            _ => self.error("an identifier"),
        }
    }

    // ----- statements -----

    fn statement(&mut self) -> PResult<Vec<Stmt>> {
        let span = self.span();
        let compound = match self.peek() {
            Tok::Name(n) => matches!(
                n.as_str(),
                "if" | "for" | "while" | "def" | "class" | "with" | "try"
            ),
            Tok::Op("@") => true,
            Tok::Indent => return self.error("a statement (unexpected indent)"),
            _ => false,
        };
        if compound {
            return Ok(vec![self.compound_statement(span)?]);
        }
        let mut stmts = vec![self.simple_statement()?];
        while self.eat_op(";") {
            if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                break;
            }
            stmts.push(self.simple_statement()?);
        }
        self.expect_newline()?;
        Ok(stmts)
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_op(":")?;
        if !self.eat_newline() {
            // single-line suite: `if x: y = 1`
            let mut stmts = vec![self.simple_statement()?];
            while self.eat_op(";") {
                if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                    break;
                }
                stmts.push(self.simple_statement()?);
            }
            self.expect_newline()?;
            return Ok(stmts);
        }
        if !matches!(self.peek(), Tok::Indent) {
            return self.error("an indented block");
        }
        self.advance();
        let mut body = Vec::new();
        while !matches!(self.peek(), Tok::Dedent | Tok::Eof) {
            if self.eat_newline() {
                continue;
            }
            body.extend(self.statement()?);
        }
        if matches!(self.peek(), Tok::Dedent) {
            self.advance();
        }
        Ok(body)
    }

    fn compound_statement(&mut self, span: Span) -> PResult<Stmt> {
        let mut decorators = Vec::new();
        while self.eat_op("@") {
            decorators.push(self.expression()?);
            self.expect_newline()?;
        }
        let kind = if self.eat_kw("if") {
            self.if_rest()?
        } else if self.eat_kw("for") {
            let target = self.target_list()?;
            self.expect_kw("in")?;
            let iter = self.expression_list()?;
            let body = self.block()?;
            let orelse = if self.eat_kw("else") { self.block()? } else { Vec::new() };
            StmtKind::For { target, iter, body, orelse }
        } else if self.eat_kw("while") {
            let test = self.named_expression()?;
            let body = self.block()?;
            let orelse = if self.eat_kw("else") { self.block()? } else { Vec::new() };
            StmtKind::While { test, body, orelse }
        } else if self.eat_kw("def") {
            let name = self.identifier()?;
            self.expect_op("(")?;
            let params = self.params(")")?;
            self.expect_op(")")?;
            let returns = if self.eat_op("->") { Some(self.expression()?) } else { None };
            let body = self.block()?;
            StmtKind::FunctionDef {
                name,
                params,
                returns,
                body,
                decorators,
            }
        } else if self.eat_kw("class") {
            let name = self.identifier()?;
            let (bases, keywords) = if self.eat_op("(") {
                let (a, k) = self.call_args()?;
                self.expect_op(")")?;
                (a, k)
            } else {
                (Vec::new(), Vec::new())
            };
            let body = self.block()?;
            StmtKind::ClassDef {
                name,
                bases,
                keywords,
                body,
                decorators,
            }
        } else if self.eat_kw("with") {
            let mut items = Vec::new();
            loop {
                let e = self.expression()?;
                let t = if self.eat_kw("as") { Some(self.target()?) } else { None };
                items.push((e, t));
                if !self.eat_op(",") {
                    break;
                }
            }
            let body = self.block()?;
            StmtKind::With { items, body }
        } else if self.eat_kw("try") {
            let body = self.block()?;
            let mut handlers = Vec::new();
            while self.eat_kw("except") {
                let ty = if self.is_op(":") { None } else { Some(self.expression()?) };
                let name = if self.eat_kw("as") { Some(self.identifier()?) } else { None };
                let body = self.block()?;
                handlers.push(ExceptHandler { ty, name, body });
            }
            let orelse = if self.eat_kw("else") { self.block()? } else { Vec::new() };
            let finalbody = if self.eat_kw("finally") { self.block()? } else { Vec::new() };
            if handlers.is_empty() && finalbody.is_empty() {
                return self.error("`except` or `finally`");
            }
            StmtKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            }
        } else {
            return self.error("`def` or `class` after decorator");
        };
        Ok(Stmt { kind, span })
    }

    fn if_rest(&mut self) -> PResult<StmtKind> {
        let test = self.named_expression()?;
        let body = self.block()?;
        let orelse = if self.is_kw("elif") {
            let span = self.advance().span;
            vec![Stmt {
                kind: self.if_rest()?,
                span,
            }]
        } else if self.eat_kw("else") {
            self.block()?
        } else {
            Vec::new()
        };
        Ok(StmtKind::If { test, body, orelse })
    }

    fn simple_statement(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Name(kw) if kw == "pass" => {
                self.advance();
                StmtKind::Pass
            }
            Tok::Name(kw) if kw == "break" => {
                self.advance();
                StmtKind::Break
            }
            Tok::Name(kw) if kw == "continue" => {
                self.advance();
                StmtKind::Continue
            }
            Tok::Name(kw) if kw == "return" => {
                self.advance();
                if matches!(self.peek(), Tok::Newline | Tok::Eof) || self.is_op(";") {
                    StmtKind::Return(None)
                } else {
                    StmtKind::Return(Some(self.expression_list()?))
                }
            }
            Tok::Name(kw) if kw == "raise" => {
                self.advance();
                if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                    StmtKind::Raise { exc: None, cause: None }
                } else {
                    let exc = Some(self.expression()?);
                    let cause = if self.eat_kw("from") { Some(self.expression()?) } else { None };
                    StmtKind::Raise { exc, cause }
                }
            }
            Tok::Name(kw) if kw == "assert" => {
                self.advance();
                let test = self.expression()?;
                let msg = if self.eat_op(",") { Some(self.expression()?) } else { None };
                StmtKind::Assert { test, msg }
            }
            Tok::Name(kw) if kw == "del" => {
                self.advance();
                let mut targets = vec![self.target()?];
                while self.eat_op(",") {
                    targets.push(self.target()?);
                }
                StmtKind::Delete(targets)
            }
            Tok::Name(kw) if kw == "global" || kw == "nonlocal" => {
                self.advance();
                let mut names = vec![self.identifier()?];
                while self.eat_op(",") {
                    names.push(self.identifier()?);
                }
                if kw == "global" {
                    StmtKind::Global(names)
                } else {
                    StmtKind::Nonlocal(names)
                }
            }
            Tok::Name(kw) if kw == "import" => {
                self.advance();
                let mut names = Vec::new();
                loop {
                    let name = self.dotted_name()?;
                    let asname = if self.eat_kw("as") { Some(self.identifier()?) } else { None };
                    names.push(Alias { name, asname });
                    if !self.eat_op(",") {
                        break;
                    }
                }
                StmtKind::Import(names)
            }
            Tok::Name(kw) if kw == "from" => {
                self.advance();
                let mut level = 0;
                loop {
                    if self.eat_op(".") {
                        level += 1;
                    } else if self.eat_op("...") {
                        level += 3;
                    } else {
                        break;
                    }
                }
                let module = if self.is_kw("import") { String::new() } else { self.dotted_name()? };
                self.expect_kw("import")?;
                let mut names = Vec::new();
                if self.eat_op("*") {
                    names.push(Alias {
                        name: "*".into(),
                        asname: None,
                    });
                } else {
                    let paren = self.eat_op("(");
                    loop {
                        if paren && self.is_op(")") {
                            break;
                        }
                        let name = self.identifier()?;
                        let asname = if self.eat_kw("as") { Some(self.identifier()?) } else { None };
                        names.push(Alias { name, asname });
                        if !self.eat_op(",") {
                            break;
                        }
                    }
                    if paren {
                        self.expect_op(")")?;
                    }
                }
                StmtKind::ImportFrom { module, level, names }
            }
            _ => return self.expression_statement(span),
        };
        Ok(Stmt { kind, span })
    }

    fn dotted_name(&mut self) -> PResult<String> {
        let mut name = self.identifier()?;
        while self.eat_op(".") {
            name.push('.');
            name.push_str(&self.identifier()?);
        }
        Ok(name)
    }

    fn expression_statement(&mut self, span: Span) -> PResult<Stmt> {
        let first = self.star_expressions()?;
        if self.eat_op(":") {
            let annotation = self.expression()?;
            let value = if self.eat_op("=") { Some(self.star_expressions()?) } else { None };
            check_target(&first)?;
            return Ok(Stmt {
                kind: StmtKind::AnnAssign {
                    target: first,
                    annotation,
                    value,
                },
                span,
            });
        }
        if let Tok::Op(op) = self.peek().clone() {
            if let Some(&(_, bin)) = AUG_OPS.iter().find(|(o, _)| *o == op) {
                self.advance();
                check_target(&first)?;
                let value = self.star_expressions()?;
                return Ok(Stmt {
                    kind: StmtKind::AugAssign {
                        target: first,
                        op: bin,
                        value,
                    },
                    span,
                });
            }
        }
        if self.is_op("=") {
            let mut targets = vec![first];
            let mut value;
            loop {
                self.expect_op("=")?;
                value = self.star_expressions()?;
                if self.is_op("=") {
                    targets.push(value);
                } else {
                    break;
                }
            }
            for t in &targets {
                check_target(t)?;
            }
            return Ok(Stmt {
                kind: StmtKind::Assign { targets, value },
                span,
            });
        }
        Ok(Stmt {
            kind: StmtKind::Expr(first),
            span,
        })
    }

    fn params(&mut self, close: &str) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        while !self.is_op(close) {
            if self.eat_op("**") {
                let name = self.identifier()?;
                let annotation = self.param_annotation(close)?;
                params.push(Param {
                    name,
                    kind: ParamKind::KwArgs,
                    annotation,
                    default: None,
                });
            } else if self.eat_op("*") {
                if self.is_op(",") || self.is_op(close) {
                    params.push(Param {
                        name: "*".into(),
                        kind: ParamKind::Marker,
                        annotation: None,
                        default: None,
                    });
                } else {
                    let name = self.identifier()?;
                    let annotation = self.param_annotation(close)?;
                    params.push(Param {
                        name,
                        kind: ParamKind::VarArgs,
                        annotation,
                        default: None,
                    });
                }
            } else if self.eat_op("/") {
                params.push(Param {
                    name: "/".into(),
                    kind: ParamKind::Marker,
                    annotation: None,
                    default: None,
                });
            } else {
                let name = self.identifier()?;
                let annotation = self.param_annotation(close)?;
                let default = if self.eat_op("=") { Some(self.expression()?) } else { None };
                params.push(Param {
                    name,
                    kind: ParamKind::Normal,
                    annotation,
                    default,
                });
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(params)
    }

    fn param_annotation(&mut self, close: &str) -> PResult<Option<Expr>> {
        // lambda parameters cannot be annotated; their list ends with `:`
        if close == ")" && self.eat_op(":") {
            Ok(Some(self.expression()?))
        } else {
            Ok(None)
        }
    }

    // ----- expressions -----

    fn target(&mut self) -> PResult<Expr> {
        let e = self.or_expr()?;
        check_target(&e)?;
        Ok(e)
    }

    fn target_list(&mut self) -> PResult<Expr> {
        let span = self.span();
        let first = self.star_or(Self::or_expr)?;
        if !self.is_op(",") {
            check_target(&first)?;
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.is_kw("in") || self.is_op("=") {
                break;
            }
            items.push(self.star_or(Self::or_expr)?);
        }
        let e = Expr {
            kind: ExprKind::Tuple(items),
            span,
        };
        check_target(&e)?;
        Ok(e)
    }

    fn star_or(&mut self, f: fn(&mut Self) -> PResult<Expr>) -> PResult<Expr> {
        let span = self.span();
        if self.eat_op("*") {
            let inner = self.or_expr()?;
            return Ok(Expr {
                kind: ExprKind::Starred(Box::new(inner)),
                span,
            });
        }
        f(self)
    }

    /// Comma-separated expressions forming an implicit tuple (assignment values, returns).
    fn star_expressions(&mut self) -> PResult<Expr> {
        let span = self.span();
        let first = self.star_or(Self::expression)?;
        if !self.is_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.ends_expression_list() {
                break;
            }
            items.push(self.star_or(Self::expression)?);
        }
        Ok(Expr {
            kind: ExprKind::Tuple(items),
            span,
        })
    }

    fn ends_expression_list(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Eof)
            || self.is_op("=")
            || self.is_op(")")
            || self.is_op(":")
            || self.is_op(";")
            || AUG_OPS.iter().any(|(o, _)| self.is_op(o))
    }

    fn expression_list(&mut self) -> PResult<Expr> {
        self.star_expressions()
    }

    fn named_expression(&mut self) -> PResult<Expr> {
        let span = self.span();
        if matches!(self.peek(), Tok::Name(_)) && matches!(self.peek_at(1), Tok::Op(":=")) {
            return Err(SyntaxError {
                line: span.line,
                column: span.column,
                expected: "an expression (assignment expressions are not supported)".into(),
            });
        }
        self.expression()
    }

    fn expression(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat_kw("lambda") {
            let params = self.params(":")?;
            self.expect_op(":")?;
            let body = self.expression()?;
            return Ok(Expr {
                kind: ExprKind::Lambda {
                    params,
                    body: Box::new(body),
                },
                span,
            });
        }
        let body = self.disjunction()?;
        if self.is_kw("if") {
            self.advance();
            let test = self.disjunction()?;
            self.expect_kw("else")?;
            let orelse = self.expression()?;
            return Ok(Expr {
                kind: ExprKind::IfExp {
                    test: Box::new(test),
                    body: Box::new(body),
                    orelse: Box::new(orelse),
                },
                span,
            });
        }
        Ok(body)
    }

    fn disjunction(&mut self) -> PResult<Expr> {
        self.bool_chain("or", BoolOp::Or, Self::conjunction)
    }

    fn conjunction(&mut self) -> PResult<Expr> {
        self.bool_chain("and", BoolOp::And, Self::inversion)
    }

    fn bool_chain(&mut self, kw: &str, op: BoolOp, next: fn(&mut Self) -> PResult<Expr>) -> PResult<Expr> {
        let span = self.span();
        let first = next(self)?;
        if !self.is_kw(kw) {
            return Ok(first);
        }
        let mut values = vec![first];
        while self.eat_kw(kw) {
            values.push(next(self)?);
        }
        Ok(Expr {
            kind: ExprKind::BoolOp { op, values },
            span,
        })
    }

    fn inversion(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat_kw("not") {
            let operand = self.inversion()?;
            return Ok(Expr {
                kind: ExprKind::UnaryOp {
                    op: UnaryOp::Not,
                    operand: Box::new(operand),
                },
                span,
            });
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let span = self.span();
        let left = self.or_expr()?;
        let mut ops = Vec::new();
        let mut comparators = Vec::new();
        loop {
            let op = match self.peek() {
                Tok::Op("==") => CmpOp::Eq,
                Tok::Op("!=") => CmpOp::NotEq,
                Tok::Op("<") => CmpOp::Lt,
                Tok::Op("<=") => CmpOp::LtE,
                Tok::Op(">") => CmpOp::Gt,
                Tok::Op(">=") => CmpOp::GtE,
                Tok::Name(n) if n == "in" => CmpOp::In,
                Tok::Name(n) if n == "is" => {
                    if matches!(self.peek_at(1), Tok::Name(m) if m == "not") {
                        self.advance();
                        CmpOp::IsNot
                    } else {
                        CmpOp::Is
                    }
                }
                Tok::Name(n) if n == "not" && matches!(self.peek_at(1), Tok::Name(m) if m == "in") => {
                    self.advance();
                    CmpOp::NotIn
                }
                _ => break,
            };
            self.advance();
            ops.push(op);
            comparators.push(self.or_expr()?);
        }
        if ops.is_empty() {
            return Ok(left);
        }
        Ok(Expr {
            kind: ExprKind::Compare {
                left: Box::new(left),
                ops,
                comparators,
            },
            span,
        })
    }

    fn binary_level(&mut self, table: &[(&str, BinOp)], next: fn(&mut Self) -> PResult<Expr>) -> PResult<Expr> {
        let span = self.span();
        let mut left = next(self)?;
        'outer: loop {
            for (tok, op) in table {
                if self.is_op(tok) {
                    self.advance();
                    let right = next(self)?;
                    left = Expr {
                        kind: ExprKind::BinOp {
                            left: Box::new(left),
                            op: *op,
                            right: Box::new(right),
                        },
                        span,
                    };
                    continue 'outer;
                }
            }
            break;
        }
        Ok(left)
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        self.binary_level(&[("|", BinOp::BitOr)], Self::xor_expr)
    }

    fn xor_expr(&mut self) -> PResult<Expr> {
        self.binary_level(&[("^", BinOp::BitXor)], Self::and_expr)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        self.binary_level(&[("&", BinOp::BitAnd)], Self::shift_expr)
    }

    fn shift_expr(&mut self) -> PResult<Expr> {
        self.binary_level(&[("<<", BinOp::LShift), (">>", BinOp::RShift)], Self::sum)
    }

    fn sum(&mut self) -> PResult<Expr> {
        self.binary_level(&[("+", BinOp::Add), ("-", BinOp::Sub)], Self::term)
    }

    fn term(&mut self) -> PResult<Expr> {
        self.binary_level(
            &[
                ("*", BinOp::Mul),
                ("@", BinOp::MatMul),
                ("//", BinOp::FloorDiv),
                ("/", BinOp::Div),
                ("%", BinOp::Mod),
            ],
            Self::factor,
        )
    }

    fn factor(&mut self) -> PResult<Expr> {
        let span = self.span();
        let op = match self.peek() {
            Tok::Op("-") => Some(UnaryOp::Neg),
            Tok::Op("+") => Some(UnaryOp::Pos),
            Tok::Op("~") => Some(UnaryOp::Invert),
            _ => None,
        };
        if let Some(op) = op {
            self.advance();
            let operand = self.factor()?;
            return Ok(Expr {
                kind: ExprKind::UnaryOp {
                    op,
                    operand: Box::new(operand),
                },
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.is_kw("await") {
            return self.error("an expression (`await` is not supported)");
        }
        let base = self.primary()?;
        if self.eat_op("**") {
            let exp = self.factor()?;
            return Ok(Expr {
                kind: ExprKind::BinOp {
                    left: Box::new(base),
                    op: BinOp::Pow,
                    right: Box::new(exp),
                },
                span,
            });
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        loop {
            let span = e.span;
            if self.eat_op(".") {
                let attr = match self.peek().clone() {
                    Tok::Name(n) => {
                        self.advance();
                        n
                    }
                    _ => return self.error("an attribute name"),
                };
                e = Expr {
                    kind: ExprKind::Attribute {
                        value: Box::new(e),
                        attr,
                    },
                    span,
                };
            } else if self.eat_op("(") {
                let (args, keywords) = self.call_args()?;
                self.expect_op(")")?;
                e = Expr {
                    kind: ExprKind::Call {
                        func: Box::new(e),
                        args,
                        keywords,
                    },
                    span,
                };
            } else if self.eat_op("[") {
                let index = self.subscript_list()?;
                self.expect_op("]")?;
                e = Expr {
                    kind: ExprKind::Subscript {
                        value: Box::new(e),
                        index: Box::new(index),
                    },
                    span,
                };
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn call_args(&mut self) -> PResult<(Vec<Expr>, Vec<Keyword>)> {
        let mut args = Vec::new();
        let mut keywords = Vec::new();
        while !self.is_op(")") {
            let span = self.span();
            if self.eat_op("**") {
                let value = self.expression()?;
                keywords.push(Keyword { name: None, value });
            } else if self.eat_op("*") {
                let value = self.expression()?;
                args.push(Expr {
                    kind: ExprKind::Starred(Box::new(value)),
                    span,
                });
            } else if matches!(self.peek(), Tok::Name(_)) && matches!(self.peek_at(1), Tok::Op("=")) {
                let name = self.identifier()?;
                self.expect_op("=")?;
                let value = self.expression()?;
                keywords.push(Keyword {
                    name: Some(name),
                    value,
                });
            } else {
                let value = self.expression()?;
                if self.is_kw("for") {
                    let generators = self.comprehension_clauses()?;
                    args.push(Expr {
                        kind: ExprKind::GeneratorExp {
                            elt: Box::new(value),
                            generators,
                        },
                        span,
                    });
                } else {
                    if !keywords.is_empty() {
                        return Err(SyntaxError {
                            line: span.line,
                            column: span.column,
                            expected: "keyword argument (positional argument follows keyword argument)".into(),
                        });
                    }
                    args.push(value);
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok((args, keywords))
    }

    fn subscript_list(&mut self) -> PResult<Expr> {
        let span = self.span();
        let first = self.subscript_item()?;
        if !self.is_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.is_op("]") {
                break;
            }
            items.push(self.subscript_item()?);
        }
        Ok(Expr {
            kind: ExprKind::Tuple(items),
            span,
        })
    }

    fn subscript_item(&mut self) -> PResult<Expr> {
        let span = self.span();
        let lower = if self.is_op(":") { None } else { Some(self.expression()?) };
        if !self.is_op(":") {
            return lower.map_or_else(|| self.error("an index"), Ok);
        }
        self.advance();
        let upper = if self.is_op(":") || self.is_op(",") || self.is_op("]") {
            None
        } else {
            Some(Box::new(self.expression()?))
        };
        let step = if self.eat_op(":") && !(self.is_op(",") || self.is_op("]")) {
            Some(Box::new(self.expression()?))
        } else {
            None
        };
        Ok(Expr {
            kind: ExprKind::Slice {
                lower: lower.map(Box::new),
                upper,
                step,
            },
            span,
        })
    }

    fn comprehension_clauses(&mut self) -> PResult<Vec<Comprehension>> {
        let mut gens = Vec::new();
        while self.eat_kw("for") {
            let target = self.target_list()?;
            self.expect_kw("in")?;
            let iter = self.disjunction()?;
            let mut ifs = Vec::new();
            while self.eat_kw("if") {
                ifs.push(self.disjunction()?);
            }
            gens.push(Comprehension { target, iter, ifs });
        }
        Ok(gens)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let span = self.span();
        let tok = self.peek().clone();
        let kind = match tok {
            Tok::Name(n) => match n.as_str() {
                "None" => {
                    self.advance();
                    ExprKind::NoneLit
                }
                "True" | "False" => {
                    self.advance();
                    ExprKind::Bool(n == "True")
                }
                _ if is_keyword(&n) => return self.error("an expression"),
                _ => {
                    self.advance();
                    ExprKind::Name(n)
                }
            },
            Tok::Int(i) => {
                self.advance();
                ExprKind::Int(i)
            }
            Tok::Float(f) => {
                self.advance();
                ExprKind::Float(f)
            }
            Tok::Str(s) => {
                self.advance();
                let mut s = s;
                while let Tok::Str(more) = self.peek().clone() {
                    self.advance();
                    s.push_str(&more);
                }
                ExprKind::Str(s)
            }
            Tok::Op("...") => {
                self.advance();
                ExprKind::Ellipsis
            }
            Tok::Op("(") => {
                self.advance();
                if self.eat_op(")") {
                    ExprKind::Tuple(Vec::new())
                } else {
                    let first = self.star_or(Self::expression)?;
                    if self.is_kw("for") {
                        let generators = self.comprehension_clauses()?;
                        self.expect_op(")")?;
                        return Ok(Expr {
                            kind: ExprKind::GeneratorExp {
                                elt: Box::new(first),
                                generators,
                            },
                            span,
                        });
                    }
                    if self.eat_op(")") {
                        return Ok(first);
                    }
                    let mut items = vec![first];
                    while self.eat_op(",") {
                        if self.is_op(")") {
                            break;
                        }
                        items.push(self.star_or(Self::expression)?);
                    }
                    self.expect_op(")")?;
                    ExprKind::Tuple(items)
                }
            }
            Tok::Op("[") => {
                self.advance();
                if self.eat_op("]") {
                    ExprKind::List(Vec::new())
                } else {
                    let first = self.star_or(Self::expression)?;
                    if self.is_kw("for") {
                        let generators = self.comprehension_clauses()?;
                        self.expect_op("]")?;
                        return Ok(Expr {
                            kind: ExprKind::ListComp {
                                elt: Box::new(first),
                                generators,
                            },
                            span,
                        });
                    }
                    let mut items = vec![first];
                    while self.eat_op(",") {
                        if self.is_op("]") {
                            break;
                        }
                        items.push(self.star_or(Self::expression)?);
                    }
                    self.expect_op("]")?;
                    ExprKind::List(items)
                }
            }
            Tok::Op("{") => {
                self.advance();
                return self.brace_atom(span);
            }
            _ => return self.error("an expression"),
        };
        Ok(Expr { kind, span })
    }

    fn brace_atom(&mut self, span: Span) -> PResult<Expr> {
        if self.eat_op("}") {
            return Ok(Expr {
                kind: ExprKind::Dict(Vec::new()),
                span,
            });
        }
        if self.eat_op("**") {
            let v = self.or_expr()?;
            let mut items = vec![(None, v)];
            self.dict_rest(&mut items)?;
            return Ok(Expr {
                kind: ExprKind::Dict(items),
                span,
            });
        }
        let first = self.star_or(Self::expression)?;
        if self.eat_op(":") {
            let value = self.expression()?;
            if self.is_kw("for") {
                let generators = self.comprehension_clauses()?;
                self.expect_op("}")?;
                return Ok(Expr {
                    kind: ExprKind::DictComp {
                        key: Box::new(first),
                        value: Box::new(value),
                        generators,
                    },
                    span,
                });
            }
            let mut items = vec![(Some(first), value)];
            self.dict_rest(&mut items)?;
            return Ok(Expr {
                kind: ExprKind::Dict(items),
                span,
            });
        }
        if self.is_kw("for") {
            let generators = self.comprehension_clauses()?;
            self.expect_op("}")?;
            return Ok(Expr {
                kind: ExprKind::SetComp {
                    elt: Box::new(first),
                    generators,
                },
                span,
            });
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.is_op("}") {
                break;
            }
            items.push(self.star_or(Self::expression)?);
        }
        self.expect_op("}")?;
        Ok(Expr {
            kind: ExprKind::Set(items),
            span,
        })
    }

    fn dict_rest(&mut self, items: &mut Vec<(Option<Expr>, Expr)>) -> PResult<()> {
        while self.eat_op(",") {
            if self.is_op("}") {
                break;
            }
            if self.eat_op("**") {
                items.push((None, self.or_expr()?));
            } else {
                let k = self.expression()?;
                self.expect_op(":")?;
                let v = self.expression()?;
                items.push((Some(k), v));
            }
        }
        self.expect_op("}")?;
        Ok(())
    }
}

fn check_target(e: &Expr) -> PResult<()> {
    match &e.kind {
        ExprKind::Name(_) | ExprKind::Attribute { .. } | ExprKind::Subscript { .. } => Ok(()),
        ExprKind::Tuple(items) | ExprKind::List(items) => items.iter().try_for_each(check_target),
        ExprKind::Starred(inner) => check_target(inner),
        _ => Err(SyntaxError {
            line: e.span.line,
            column: e.span.column,
            expected: "an assignable target".into(),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn body(src: &str) -> Vec<Stmt> {
        parse_source(src).unwrap().body
    }

    #[test]
    fn empty_file_has_empty_body() {
        assert!(body("").is_empty());
        assert!(body("\n# only a comment\n\n").is_empty());
    }

    #[test]
    fn dense_call_keeps_keywords() {
        let b = body("x = layers.Dense(units=10, activation='relu')\n");
        let StmtKind::Assign { value, .. } = &b[0].kind else { panic!() };
        let ExprKind::Call { func, keywords, .. } = &value.kind else { panic!() };
        assert_eq!(func.dotted().as_deref(), Some("layers.Dense"));
        let names: Vec<_> = keywords.iter().map(|k| k.name.clone().unwrap()).collect();
        assert_eq!(names, vec!["units", "activation"]);
    }

    #[test]
    fn class_with_methods() {
        let src = "class Net(nn.Module):\n    def __init__(self):\n        super().__init__()\n\n    def forward(self, x):\n        return x\n";
        let b = body(src);
        let StmtKind::ClassDef { name, body, .. } = &b[0].kind else { panic!() };
        assert_eq!(name, "Net");
        assert_eq!(body.len(), 2);
    }

    #[test]
    fn slices_and_tuple_targets() {
        let b = body("out, _ = self.lstm(x)\ny = out[:, -1, :]\n");
        let StmtKind::Assign { targets, .. } = &b[0].kind else { panic!() };
        assert!(matches!(targets[0].kind, ExprKind::Tuple(ref t) if t.len() == 2));
        let StmtKind::Assign { value, .. } = &b[1].kind else { panic!() };
        let ExprKind::Subscript { index, .. } = &value.kind else { panic!() };
        assert!(matches!(index.kind, ExprKind::Tuple(ref t) if t.len() == 3));
    }

    #[test]
    fn control_flow_and_comprehensions() {
        let src = "for epoch in range(3):\n    for a, b in loader:\n        if a:\n            pass\n        elif b:\n            continue\n        else:\n            break\nz = [i * 2 for i in range(4) if i]\nd = {'a': 1, **e}\nwith torch.no_grad():\n    pass\n";
        assert_eq!(body(src).len(), 4);
    }

    #[test]
    fn unbalanced_bracket_is_reported() {
        let err = parse_source("a = 1\nb = (2,\nc = 3\n").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn trailing_garbage_is_an_error() {
        assert!(parse_source("x = 1 2\n").is_err());
        assert!(parse_source("def f(:\n    pass\n").is_err());
    }

    #[test]
    fn decorators_and_defaults() {
        let src = "@tf.function\ndef call(self, inputs, training=None, *args, **kw) -> int:\n    return inputs\n";
        let b = body(src);
        let StmtKind::FunctionDef { params, decorators, .. } = &b[0].kind else { panic!() };
        assert_eq!(params.len(), 5);
        assert_eq!(decorators.len(), 1);
    }

    #[test]
    fn lambda_and_conditional() {
        body("f = lambda x, y=2: x if y else -x\n");
    }
}
