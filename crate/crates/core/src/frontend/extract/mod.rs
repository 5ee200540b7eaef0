//! Lifting a parsed source file into a [`PivotNN`].
//!
//! One extractor per dialect: the sequential and subclassing walkers are
//! shared between frameworks, and the per-framework differences live in the
//! constructor tables of [`layers`].

mod config;
mod graph;
mod layers;
mod sequential;
mod subclass;

use thiserror::Error;

use super::ast::*;
use super::dialect::{model_classes, Dialect, Framework, Imports, Style};
use super::symbols::{const_eval, Const, SymbolTable};
use crate::pivot::{validate, Diagnostic, PivotNN, Span, TensorShape};

/// Deepest chain of nested model classes accepted.
pub const MAX_NESTING: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("no supported framework namespace is imported")]
    UnknownDialect,
    #[error("both the channel-last and the channel-first framework are imported")]
    MixedDialect,
    #[error("no model class or sequential container found")]
    NoModel,
    #[error("{span}: unsupported layer `{name}`")]
    UnsupportedLayer { name: String, span: Span },
    #[error("{span}: `{layer}` argument `{attribute}`: {detail}")]
    UnsupportedAttribute {
        layer: String,
        attribute: String,
        detail: String,
        span: Span,
    },
    #[error("{span}: `{name}` is used before it is defined")]
    UnresolvedDataflow { name: String, span: Span },
    #[error("{span}: unsupported construct: {detail}")]
    UnsupportedConstruct { detail: String, span: Span },
    #[error("{span}: {detail}")]
    ActivationPlacement { detail: String, span: Span },
    #[error("model classes nested deeper than {MAX_NESTING} levels")]
    NestingTooDeep,
    #[error("extracted network is invalid: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

impl ExtractError {
    pub fn span(&self) -> Option<Span> {
        match self {
            ExtractError::UnsupportedLayer { span, .. }
            | ExtractError::UnsupportedAttribute { span, .. }
            | ExtractError::UnresolvedDataflow { span, .. }
            | ExtractError::UnsupportedConstruct { span, .. }
            | ExtractError::ActivationPlacement { span, .. } => Some(*span),
            _ => None,
        }
    }
}

/// Non-fatal observation made during extraction.
#[derive(Debug, Clone, PartialEq)]
pub struct Note {
    pub span: Option<Span>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Extraction {
    pub nn: PivotNN,
    pub notes: Vec<Note>,
}

pub(crate) fn unsupported(detail: impl Into<String>, span: Span) -> ExtractError {
    ExtractError::UnsupportedConstruct {
        detail: detail.into(),
        span,
    }
}

/// Shared, read-only state for one source file.
pub(crate) struct Ctx<'a> {
    pub tree: &'a SyntaxTree,
    pub imports: Imports,
    pub fw: Framework,
    pub globals: SymbolTable,
    pub classes: Vec<String>,
}

impl<'a> Ctx<'a> {
    fn new(tree: &'a SyntaxTree, fw: Framework) -> Self {
        let imports = Imports::collect(tree);
        let classes = model_classes(tree, &imports, fw);
        Ctx {
            globals: SymbolTable::for_scope(&tree.body, &[], &[]),
            tree,
            imports,
            fw,
            classes,
        }
    }

    pub fn class(&self, name: &str) -> Option<&'a Stmt> {
        self.tree
            .body
            .iter()
            .find(|s| matches!(&s.kind, StmtKind::ClassDef { name: n, .. } if n == name))
    }

    /// True for a class defined in this file under `name`, used for the
    /// inline permute/reshape helpers of generated sequential code.
    pub fn defines_class(&self, name: &str) -> bool {
        self.class(name).is_some()
    }
}

pub fn extract(tree: &SyntaxTree, dialect: Dialect) -> Result<Extraction, ExtractError> {
    let ctx = Ctx::new(tree, dialect.framework);
    let mut notes = Vec::new();
    let mut nn = match dialect.style {
        Style::Sequential => sequential::extract(&ctx, &mut notes)?,
        Style::Subclassing => subclass::extract(&ctx, &mut notes)?,
    };
    if nn.input_shape.is_none() {
        nn.input_shape = module_input_shape(&ctx);
    }
    if dialect.framework == Framework::ChannelFirst {
        graph::normalize_channel_first(&mut nn, &mut notes);
    }
    let (config, datasets) = config::extract(&ctx, &mut notes)?;
    nn.config = config;
    nn.datasets = datasets;
    let diags = validate(&nn);
    if !diags.is_empty() {
        return Err(ExtractError::Invalid(diags));
    }
    Ok(Extraction { nn, notes })
}

/// Input shape declared at module level: an `INPUT_SHAPE` constant,
/// `model.build((None, ...))`, or an input placeholder call.
fn module_input_shape(ctx: &Ctx) -> Option<TensorShape> {
    if let Some(Some(Const::Tuple(items))) = ctx.globals.get("INPUT_SHAPE") {
        if let Some(dims) = const_dims(items) {
            return Some(TensorShape::batched(&dims));
        }
    }
    let mut found = None;
    walk_body_exprs(&ctx.tree.body, &mut |e| {
        if found.is_some() {
            return;
        }
        let ExprKind::Call { func, args, keywords } = &e.kind else {
            return;
        };
        if let ExprKind::Attribute { attr, .. } = &func.kind {
            if attr == "build" && args.len() == 1 {
                if let Some(Const::Tuple(items)) = const_eval(&args[0], &[&ctx.globals]) {
                    if items.first() == Some(&Const::None) {
                        found = const_dims(&items[1..]).map(|d| TensorShape::batched(&d));
                    }
                }
                return;
            }
        }
        if let Some(path) = ctx.imports.resolve(func) {
            if matches!(path.as_str(), "keras.Input" | "keras.layers.Input") {
                let shape = keywords
                    .iter()
                    .find(|k| k.name.as_deref() == Some("shape"))
                    .map(|k| &k.value)
                    .or(args.first());
                if let Some(Const::Tuple(items)) = shape.and_then(|s| const_eval(s, &[&ctx.globals])) {
                    found = const_dims(&items).map(|d| TensorShape::batched(&d));
                }
            }
        }
    });
    found
}

pub(crate) fn const_dims(items: &[Const]) -> Option<Vec<u64>> {
    items
        .iter()
        .map(|c| match c {
            Const::Int(i) if *i >= 1 => Some(*i as u64),
            _ => None,
        })
        .collect()
}
