//! End-to-end pipeline: parse, extract, annotate shapes, plan and emit.

use thiserror::Error;

use crate::codegen::{self, CodegenError, EmitOptions, EmitTarget};
use crate::frontend::{self, detect_dialect, Dialect, ExtractError, Framework, Style, SyntaxError};
use crate::pivot::{deserialize, PivotError, PivotNN, Span, TensorShape};
use crate::shape::{self, ShapeAnnotation, ShapeError};

#[derive(Debug, Error)]
pub enum MigrateError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error(transparent)]
    Pivot(#[from] PivotError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
}

impl MigrateError {
    /// Stable diagnostic code.
    pub fn code(&self) -> &'static str {
        match self {
            MigrateError::Syntax(_) => "E010",
            MigrateError::Extract(e) => match e {
                ExtractError::UnknownDialect => "E020",
                ExtractError::MixedDialect => "E021",
                ExtractError::NoModel => "E022",
                ExtractError::UnsupportedLayer { .. } => "E023",
                ExtractError::UnsupportedAttribute { .. } => "E024",
                ExtractError::UnresolvedDataflow { .. } => "E025",
                ExtractError::UnsupportedConstruct { .. } => "E026",
                ExtractError::ActivationPlacement { .. } => "E027",
                ExtractError::NestingTooDeep => "E028",
                ExtractError::Invalid(_) => "E029",
            },
            MigrateError::Pivot(e) => match e {
                PivotError::Invalid(_) => "E030",
                PivotError::Malformed { .. } => "E031",
                PivotError::Field { .. } => "E032",
                PivotError::Version(_) => "E033",
            },
            MigrateError::Shape(e) => match e {
                ShapeError::BadInputShape(_) => "E040",
                ShapeError::ShapeMismatch { .. } => "E041",
                ShapeError::NegativeDim { .. } => "E042",
                ShapeError::ConflictingAttribute { .. } => "E043",
                ShapeError::UnresolvedBatch { .. } => "E044",
                ShapeError::MissingInputShape => "E045",
            },
            MigrateError::Codegen(e) => match e {
                CodegenError::NonChainForSequential { .. } => "E050",
                CodegenError::MissingInputDims { .. } => "E051",
                CodegenError::SamePaddingWithStride { .. } => "E052",
                CodegenError::UnsupportedPadding { .. } => "E053",
                CodegenError::UnsupportedOp { .. } => "E054",
            },
        }
    }

    /// Variant name, e.g. `NonChainForSequential`.
    pub fn name(&self) -> String {
        let debug = match self {
            MigrateError::Syntax(_) => return "SyntaxError".into(),
            MigrateError::Extract(e) => format!("{e:?}"),
            MigrateError::Pivot(e) => format!("{e:?}"),
            MigrateError::Shape(e) => format!("{e:?}"),
            MigrateError::Codegen(e) => format!("{e:?}"),
        };
        debug
            .split(|c: char| !c.is_alphanumeric())
            .next()
            .unwrap_or_default()
            .to_string()
    }

    /// Module the error is about, for errors raised after extraction.
    pub fn module(&self) -> Option<&str> {
        match self {
            MigrateError::Shape(
                ShapeError::ShapeMismatch { module, .. }
                | ShapeError::NegativeDim { module, .. }
                | ShapeError::ConflictingAttribute { module, .. }
                | ShapeError::UnresolvedBatch { module },
            )
            | MigrateError::Codegen(
                CodegenError::MissingInputDims { module, .. }
                | CodegenError::SamePaddingWithStride { module, .. }
                | CodegenError::UnsupportedPadding { module, .. }
                | CodegenError::UnsupportedOp { module, .. },
            ) => Some(module),
            _ => None,
        }
    }
}

/// A pipeline error with the source position it refers to, when known.
#[derive(Debug, Error)]
#[error("{error}")]
pub struct Failure {
    #[source]
    pub error: MigrateError,
    pub span: Option<Span>,
}

impl Failure {
    pub fn code(&self) -> &'static str {
        self.error.code()
    }

    fn located(error: MigrateError, nn: Option<&PivotNN>) -> Self {
        let span = match &error {
            MigrateError::Syntax(e) => Some(Span::new(e.line, e.column)),
            MigrateError::Extract(e) => e.span(),
            other => other.module().zip(nn).and_then(|(m, nn)| module_span(nn, m)),
        };
        Failure { error, span }
    }
}

impl<E: Into<MigrateError>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::located(e.into(), None)
    }
}

fn module_span(nn: &PivotNN, module: &str) -> Option<Span> {
    nn.module(module)
        .and_then(|m| m.span)
        .or_else(|| nn.sub_networks.iter().find_map(|s| module_span(s, module)))
}

/// Non-fatal pipeline observation.
#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub code: &'static str,
    pub span: Option<Span>,
    pub message: String,
}

/// Where the pivot comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SourceSpec {
    /// `None` detects the framework from the imports.
    pub framework: Option<Framework>,
    /// `None` detects the style from the model definition.
    pub style: Option<Style>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub source: SourceSpec,
    pub target: EmitTarget,
    /// Overrides the input shape declared in the source (batch first).
    pub input_shape: Option<TensorShape>,
    pub emit: EmitOptions,
}

impl Request {
    pub fn new(target: EmitTarget) -> Self {
        Request {
            source: SourceSpec::default(),
            target,
            input_shape: None,
            emit: EmitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Migration {
    /// Dialect the source was read as; `None` for pivot documents.
    pub source_dialect: Option<Dialect>,
    /// Extracted pivot with input-dimension attributes filled in.
    pub pivot: PivotNN,
    pub shapes: ShapeAnnotation,
    pub code: String,
    pub warnings: Vec<Warning>,
}

/// Parses `text` and resolves the source dialect.
pub fn read_source(text: &str, source: SourceSpec) -> Result<(PivotNN, Dialect, Vec<Warning>), Failure> {
    let tree = frontend::parse_source(text)?;
    let mut warnings = Vec::new();
    let dialect = match (source.framework, source.style) {
        (Some(framework), Some(style)) => Dialect::new(framework, style),
        (fw, style) => {
            let detected = detect_dialect(&tree)?;
            if let Some(note) = detected.note {
                warnings.push(Warning {
                    code: "W001",
                    span: None,
                    message: note,
                });
            }
            Dialect::new(
                fw.unwrap_or(detected.dialect.framework),
                style.unwrap_or(detected.dialect.style),
            )
        }
    };
    let extraction = frontend::extract(&tree, dialect)?;
    warnings.extend(extraction.notes.into_iter().map(|n| Warning {
        code: "W002",
        span: n.span,
        message: n.message,
    }));
    Ok((extraction.nn, dialect, warnings))
}

/// Annotates `nn` (when an input shape is known), plans and emits.
pub fn migrate_pivot(
    nn: &PivotNN,
    source_dialect: Option<Dialect>,
    req: &Request,
    mut warnings: Vec<Warning>,
) -> Result<Migration, Failure> {
    let locate = |e: MigrateError| Failure::located(e, Some(nn));
    let (pivot, shapes) = match req.input_shape.as_ref().or(nn.input_shape.as_ref()) {
        Some(shape) => {
            let (mut filled, ann) = shape::annotate(nn, Some(shape)).map_err(|e| locate(e.into()))?;
            if req.input_shape.is_some() {
                filled.input_shape = req.input_shape.clone();
            }
            (filled, ann)
        }
        None => {
            warnings.push(Warning {
                code: "W003",
                span: None,
                message: "no input shape declared or given; shapes are not checked".into(),
            });
            (nn.clone(), ShapeAnnotation::default())
        }
    };
    let code = codegen::generate(&pivot, &shapes, req.target, &req.emit).map_err(|e| locate(e.into()))?;
    Ok(Migration {
        source_dialect,
        pivot,
        shapes,
        code,
        warnings,
    })
}

/// Migrates Python source text.
pub fn migrate_source(text: &str, req: &Request) -> Result<Migration, Failure> {
    let (nn, dialect, warnings) = read_source(text, req.source)?;
    let mut req = req.clone();
    if req.emit.source == EmitOptions::default().source {
        req.emit.source = dialect.to_string();
    }
    migrate_pivot(&nn, Some(dialect), &req, warnings)
}

/// Migrates a serialized pivot document.
pub fn migrate_document(bytes: &[u8], req: &Request) -> Result<Migration, Failure> {
    let nn = deserialize(bytes)?;
    migrate_pivot(&nn, None, req, Vec::new())
}
