//! Constructor tables: framework layer calls to pivot layers.

use super::{unsupported, Ctx, ExtractError};
use crate::frontend::ast::*;
use crate::frontend::dialect::{is_sequential_ctor, Framework};
use crate::frontend::symbols::{const_eval, lookup, Const, Lookup, SymbolTable};
use crate::pivot::*;

/// What a constructor call builds.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Ctor {
    Layer {
        layer: Layer,
        activation: ActivationRef,
        /// Explicit `name=` keyword.
        name: Option<String>,
        /// Batch-less input shape declared on the layer.
        input_shape: Option<Vec<u64>>,
    },
    Activation(ActivationRef),
    /// Tensor op with its explicit `name=` keyword.
    Op(TensorOp, Option<String>),
    /// Input placeholder carrying a batch-less shape.
    Input(Vec<u64>),
    /// Instance of a model class defined in the same file.
    Sub(String),
}

/// Symbol scopes used to resolve constructor arguments, innermost first.
pub(crate) struct Scope<'a> {
    pub chain: Vec<&'a SymbolTable>,
}

impl Scope<'_> {
    fn eval(&self, e: &Expr) -> Option<Const> {
        const_eval(e, &self.chain)
    }
}

/// Keyword-normalized call arguments.
struct Args<'e> {
    layer: String,
    span: Span,
    bound: Vec<(String, &'e Expr)>,
}

impl<'e> Args<'e> {
    fn bind(layer: &str, call: &'e Expr, params: &[&str]) -> Result<Self, ExtractError> {
        let ExprKind::Call { args, keywords, .. } = &call.kind else {
            unreachable!("Args::bind on a non-call");
        };
        let mut out = Args {
            layer: layer.to_string(),
            span: call.span,
            bound: Vec::new(),
        };
        if args.len() > params.len() {
            return Err(out.error("*", format!("takes at most {} positional arguments", params.len())));
        }
        for (i, a) in args.iter().enumerate() {
            if matches!(a.kind, ExprKind::Starred(_)) {
                return Err(out.error("*", "star arguments are not supported"));
            }
            out.bound.push((params[i].to_string(), a));
        }
        for k in keywords {
            let Some(name) = &k.name else {
                return Err(out.error("**", "keyword unpacking is not supported"));
            };
            if !params.contains(&name.as_str()) {
                return Err(out.error(name, "unsupported argument"));
            }
            if out.bound.iter().any(|(n, _)| n == name) {
                return Err(out.error(name, "given more than once"));
            }
            out.bound.push((name.clone(), &k.value));
        }
        Ok(out)
    }

    fn error(&self, attribute: &str, detail: impl Into<String>) -> ExtractError {
        ExtractError::UnsupportedAttribute {
            layer: self.layer.clone(),
            attribute: attribute.to_string(),
            detail: detail.into(),
            span: self.span,
        }
    }

    fn take(&mut self, name: &str) -> Option<&'e Expr> {
        let i = self.bound.iter().position(|(n, _)| n == name)?;
        Some(self.bound.remove(i).1)
    }

    fn required(&mut self, name: &str) -> Result<&'e Expr, ExtractError> {
        self.take(name).ok_or_else(|| self.error(name, "missing required argument"))
    }

    /// Every remaining argument must equal the framework default it is listed with.
    fn finish(self, scope: &Scope, defaults: &[(&str, Const)]) -> Result<(), ExtractError> {
        for (name, e) in &self.bound {
            let allowed = defaults.iter().find(|(n, _)| n == name).map(|(_, c)| c);
            let value = scope.eval(e);
            match (allowed, value) {
                (Some(want), Some(got)) if const_matches(want, &got) => {}
                (Some(want), _) => {
                    return Err(self.error(name, format!("only the default value {} is supported", show(want))))
                }
                (None, _) => return Err(self.error(name, "unsupported argument")),
            }
        }
        Ok(())
    }

    fn pos_int(&self, name: &str, e: &Expr, scope: &Scope) -> Result<u32, ExtractError> {
        match scope.eval(e) {
            Some(Const::Int(i)) if i >= 1 && i <= u32::MAX as i64 => Ok(i as u32),
            _ => Err(self.error(name, "expected a positive integer constant")),
        }
    }

    fn int_list(&self, name: &str, e: &Expr, scope: &Scope, rank: usize, min: i64) -> Result<Vec<u32>, ExtractError> {
        let bad = || self.error(name, format!("expected an integer or a {rank}-tuple of integers >= {min}"));
        let one = |c: &Const| match c {
            Const::Int(i) if *i >= min && *i <= u32::MAX as i64 => Ok(*i as u32),
            _ => Err(bad()),
        };
        match scope.eval(e) {
            Some(Const::Int(i)) => Ok(vec![one(&Const::Int(i))?; rank]),
            Some(Const::Tuple(items)) if items.len() == rank => items.iter().map(one).collect(),
            _ => Err(bad()),
        }
    }

    fn fraction(&self, name: &str, e: &Expr, scope: &Scope) -> Result<f64, ExtractError> {
        match scope.eval(e).as_ref().and_then(Const::as_f64) {
            Some(f) if (0.0..1.0).contains(&f) => Ok(f),
            _ => Err(self.error(name, "expected a constant rate in [0, 1)")),
        }
    }

    fn boolean(&self, name: &str, e: &Expr, scope: &Scope) -> Result<bool, ExtractError> {
        match scope.eval(e) {
            Some(Const::Bool(b)) => Ok(b),
            _ => Err(self.error(name, "expected a boolean constant")),
        }
    }

    fn string(&self, name: &str, e: &Expr, scope: &Scope) -> Result<String, ExtractError> {
        match scope.eval(e) {
            Some(Const::Str(s)) => Ok(s),
            _ => Err(self.error(name, "expected a string constant")),
        }
    }

    fn shape(&self, name: &str, e: &Expr, scope: &Scope) -> Result<Vec<u64>, ExtractError> {
        match scope.eval(e) {
            Some(Const::Tuple(items)) => {
                super::const_dims(&items).ok_or_else(|| self.error(name, "expected a tuple of positive integers"))
            }
            Some(Const::Int(i)) if i >= 1 => Ok(vec![i as u64]),
            _ => Err(self.error(name, "expected a tuple of positive integers")),
        }
    }
}

fn const_matches(want: &Const, got: &Const) -> bool {
    match (want, got) {
        (Const::Float(a), b) => b.as_f64() == Some(*a),
        // A default of `1` also admits `(1, 1)` style tuples.
        (Const::Int(a), Const::Tuple(items)) => items.iter().all(|i| i == &Const::Int(*a)),
        (Const::Str(a), Const::Str(b)) => a.eq_ignore_ascii_case(b),
        _ => want == got,
    }
}

fn show(c: &Const) -> String {
    match c {
        Const::Str(s) => format!("{s:?}"),
        Const::Int(i) => i.to_string(),
        Const::Float(f) => f.to_string(),
        Const::Bool(b) => if *b { "True" } else { "False" }.to_string(),
        Const::None => "None".into(),
        Const::Tuple(items) => format!("({})", items.iter().map(show).collect::<Vec<_>>().join(", ")),
    }
}

/// Resolves an `activation=` style argument.
///
/// String constants become literals; anything whose value is only known at
/// runtime becomes a dynamic reference named after its last identifier.
pub(crate) fn activation_arg(ctx: &Ctx, e: &Expr, scope: &Scope, layer: &str) -> Result<ActivationRef, ExtractError> {
    let bad = |detail: String| ExtractError::UnsupportedAttribute {
        layer: layer.to_string(),
        attribute: "activation".into(),
        detail,
        span: e.span,
    };
    let literal = |s: &str| -> Result<ActivationRef, ExtractError> {
        match s {
            "linear" | "" => Ok(ActivationRef::None),
            _ => Activation::parse(s)
                .map(ActivationRef::Literal)
                .ok_or_else(|| bad(format!("activation {s:?} is not supported"))),
        }
    };
    match &e.kind {
        ExprKind::Str(s) => return literal(s),
        ExprKind::NoneLit => return Ok(ActivationRef::None),
        _ => {}
    }
    if let Some(path) = ctx.imports.resolve(e) {
        if let Some(a) = functional_activation(&path) {
            return Ok(ActivationRef::Literal(a));
        }
    }
    let Some(dotted) = e.dotted() else {
        return Err(bad("expected a string or a symbol".into()));
    };
    match lookup(&scope.chain, &dotted) {
        Lookup::Const(Const::Str(s)) => literal(&s),
        Lookup::Const(Const::None) => Ok(ActivationRef::None),
        Lookup::Const(_) => Err(bad(format!("`{dotted}` is not a string"))),
        Lookup::Bottom | Lookup::Unbound => {
            let symbol = dotted.rsplit('.').next().unwrap_or(&dotted).to_string();
            Ok(ActivationRef::Dynamic(symbol))
        }
    }
}

/// Functional activation by canonical path, e.g. `torch.relu`, `tensorflow.nn.relu`.
pub(crate) fn functional_activation(path: &str) -> Option<Activation> {
    let (prefix, last) = path.rsplit_once('.')?;
    let known_prefix = matches!(
        prefix,
        "torch" | "torch.nn.functional" | "tensorflow" | "tensorflow.nn" | "tensorflow.math" | "keras.activations"
    );
    if !known_prefix {
        return None;
    }
    match last {
        "relu" => Some(Activation::Relu),
        "sigmoid" => Some(Activation::Sigmoid),
        "tanh" => Some(Activation::Tanh),
        "softmax" => Some(Activation::Softmax),
        _ => None,
    }
}

/// Names of inline helper functions that map a runtime string to an activation.
pub(crate) const RESOLVER_NAMES: &[&str] = &["resolve_activation", "get_activation"];

fn padding_string(args: &Args, e: &Expr, scope: &Scope) -> Result<Padding, ExtractError> {
    match args.string("padding", e, scope)?.to_ascii_lowercase().as_str() {
        "valid" => Ok(Padding::Valid),
        "same" => Ok(Padding::Same),
        other => Err(args.error("padding", format!("padding {other:?} is not supported"))),
    }
}

/// Classifies a call expression. `Ok(None)` means the call is not a
/// constructor this extractor knows about at all (not framework code).
pub(crate) fn classify(ctx: &Ctx, call: &Expr, scope: &Scope) -> Result<Option<Ctor>, ExtractError> {
    let ExprKind::Call { func, args, .. } = &call.kind else {
        return Ok(None);
    };
    if let Some(name) = func.as_name() {
        if ctx.classes.iter().any(|c| c == name) {
            return Ok(Some(Ctor::Sub(name.to_string())));
        }
        if RESOLVER_NAMES.contains(&name) {
            // An optional second argument selects the softmax axis.
            let (&[ref arg] | &[ref arg, _]) = args.as_slice() else {
                return Err(unsupported(format!("`{name}` takes an activation name and an optional axis"), call.span));
            };
            return Ok(Some(Ctor::Activation(activation_arg(ctx, arg, scope, name)?)));
        }
        if ctx.fw == Framework::ChannelFirst && (name == "Permute" || name == "Reshape") && ctx.defines_class(name) {
            return helper_op(name, call, scope).map(Some);
        }
    }
    let Some(path) = ctx.imports.resolve(func) else {
        return Ok(None);
    };
    if is_sequential_ctor(&path, ctx.fw) {
        return Err(ExtractError::UnsupportedLayer {
            name: path,
            span: call.span,
        });
    }
    let ctor = match ctx.fw {
        Framework::ChannelLast => keras_ctor(ctx, &path, call, scope)?,
        Framework::ChannelFirst => torch_ctor(ctx, &path, call, scope)?,
    };
    match ctor {
        Some(c) => Ok(Some(c)),
        None if is_framework_path(&path) => Err(ExtractError::UnsupportedLayer {
            name: path,
            span: call.span,
        }),
        None => Ok(None),
    }
}

fn is_framework_path(path: &str) -> bool {
    matches!(path.split('.').next(), Some("keras" | "tensorflow" | "torch" | "torchvision"))
}

fn helper_op(name: &str, call: &Expr, scope: &Scope) -> Result<Ctor, ExtractError> {
    let ExprKind::Call { args, keywords, .. } = &call.kind else { unreachable!() };
    let bad = || unsupported(format!("`{name}` expects constant integer arguments"), call.span);
    if !keywords.is_empty() {
        return Err(bad());
    }
    let ints: Vec<i64> = args
        .iter()
        .map(|a| scope.eval(a).and_then(|c| c.as_int()))
        .collect::<Option<_>>()
        .ok_or_else(bad)?;
    if name == "Permute" {
        let order = ints.iter().map(|&i| usize::try_from(i).map_err(|_| bad())).collect::<Result<_, _>>()?;
        Ok(Ctor::Op(TensorOp::Permute { order }, None))
    } else {
        let shape = ints.iter().map(|&i| u32::try_from(i).map_err(|_| bad())).collect::<Result<_, _>>()?;
        Ok(Ctor::Op(TensorOp::Reshape { shape }, None))
    }
}

fn rank_suffix(s: &str) -> Option<(&str, SpatialRank)> {
    for (suffix, rank) in [
        ("1D", SpatialRank::One),
        ("2D", SpatialRank::Two),
        ("3D", SpatialRank::Three),
        ("1d", SpatialRank::One),
        ("2d", SpatialRank::Two),
        ("3d", SpatialRank::Three),
    ] {
        if let Some(stem) = s.strip_suffix(suffix) {
            return Some((stem, rank));
        }
    }
    None
}

fn layer(layer: Layer, activation: ActivationRef, name: Option<String>, input_shape: Option<Vec<u64>>) -> Ctor {
    Ctor::Layer {
        layer,
        activation,
        name,
        input_shape,
    }
}

// ----- channel-last framework -----

const KERAS_COMMON: &[&str] = &["name", "input_shape", "dtype", "trainable"];

fn keras_params<'a>(own: &[&'a str]) -> Vec<&'a str> {
    let mut p = own.to_vec();
    p.extend_from_slice(KERAS_COMMON);
    p
}

/// Reads the keyword arguments every keras layer accepts.
fn keras_common(args: &mut Args, scope: &Scope) -> Result<(Option<String>, Option<Vec<u64>>), ExtractError> {
    let name = match args.take("name") {
        Some(e) => Some(args.string("name", e, scope)?),
        None => None,
    };
    let input_shape = match args.take("input_shape") {
        Some(e) => Some(args.shape("input_shape", e, scope)?),
        None => None,
    };
    if let Some(e) = args.take("trainable") {
        if !args.boolean("trainable", e, scope)? {
            return Err(args.error("trainable", "frozen layers are not supported"));
        }
    }
    if let Some(e) = args.take("dtype") {
        let d = args.string("dtype", e, scope)?;
        if d != "float32" {
            return Err(args.error("dtype", "only float32 is supported"));
        }
    }
    Ok((name, input_shape))
}

fn keras_ctor(ctx: &Ctx, path: &str, call: &Expr, scope: &Scope) -> Result<Option<Ctor>, ExtractError> {
    if matches!(path, "keras.Input" | "keras.layers.Input") {
        let mut args = Args::bind(path, call, &["shape", "batch_size", "name", "dtype"])?;
        let shape = args.required("shape")?;
        let shape = args.shape("shape", shape, scope)?;
        args.take("name");
        args.take("dtype");
        args.finish(scope, &[("batch_size", Const::None)])?;
        return Ok(Some(Ctor::Input(shape)));
    }
    let Some(class) = path.strip_prefix("keras.layers.") else {
        return Ok(None);
    };
    let d = |s: &str| Const::Str(s.into());
    let ctor = match class {
        "InputLayer" => {
            let mut args = Args::bind(class, call, &["shape", "input_shape", "batch_size", "name", "dtype"])?;
            let shape = match (args.take("shape"), args.take("input_shape")) {
                (Some(e), None) | (None, Some(e)) => args.shape("shape", e, scope)?,
                _ => return Err(args.error("shape", "expected exactly one of `shape` and `input_shape`")),
            };
            args.take("name");
            args.take("dtype");
            args.finish(scope, &[("batch_size", Const::None)])?;
            Ctor::Input(shape)
        }
        "Dense" => {
            let mut args = Args::bind(class, call, &keras_params(&["units", "activation", "use_bias", "input_dim"]))?;
            let units = args.required("units")?;
            let out_features = args.pos_int("units", units, scope)?;
            let activation = match args.take("activation") {
                Some(e) => activation_arg(ctx, e, scope, class)?,
                None => ActivationRef::None,
            };
            let (name, mut input_shape) = keras_common(&mut args, scope)?;
            if let Some(e) = args.take("input_dim") {
                input_shape = Some(vec![args.pos_int("input_dim", e, scope)? as u64]);
            }
            args.finish(scope, &[("use_bias", Const::Bool(true))])?;
            layer(
                Layer::Linear(LinearAttrs {
                    in_features: None,
                    out_features,
                }),
                activation,
                name,
                input_shape,
            )
        }
        "Flatten" => {
            let mut args = Args::bind(class, call, &keras_params(&["data_format"]))?;
            let (name, input_shape) = keras_common(&mut args, scope)?;
            args.finish(scope, &[("data_format", d("channels_last"))])?;
            layer(Layer::Flatten, ActivationRef::None, name, input_shape)
        }
        "Dropout" => {
            let mut args = Args::bind(class, call, &keras_params(&["rate", "noise_shape", "seed"]))?;
            let rate = args.required("rate")?;
            let rate = args.fraction("rate", rate, scope)?;
            args.take("seed");
            let (name, input_shape) = keras_common(&mut args, scope)?;
            args.finish(scope, &[("noise_shape", Const::None)])?;
            layer(Layer::Dropout(DropoutAttrs { rate }), ActivationRef::None, name, input_shape)
        }
        "Embedding" => {
            let mut args = Args::bind(class, call, &keras_params(&["input_dim", "output_dim", "input_length", "mask_zero"]))?;
            let vocab = args.required("input_dim")?;
            let vocab_size = args.pos_int("input_dim", vocab, scope)?;
            let dim = args.required("output_dim")?;
            let embedding_dim = args.pos_int("output_dim", dim, scope)?;
            let (name, mut input_shape) = keras_common(&mut args, scope)?;
            if let Some(e) = args.take("input_length") {
                input_shape = Some(vec![args.pos_int("input_length", e, scope)? as u64]);
            }
            args.finish(scope, &[("mask_zero", Const::Bool(false))])?;
            layer(
                Layer::Embedding(EmbeddingAttrs {
                    vocab_size,
                    embedding_dim,
                }),
                ActivationRef::None,
                name,
                input_shape,
            )
        }
        "SimpleRNN" | "LSTM" | "GRU" => keras_recurrent(class, call, scope, false)?,
        "Bidirectional" => {
            let mut args = Args::bind(class, call, &keras_params(&["layer", "merge_mode"]))?;
            let inner = args.required("layer")?;
            let ExprKind::Call { func, .. } = &inner.kind else {
                return Err(args.error("layer", "expected a recurrent layer constructor"));
            };
            let inner_class = ctx
                .imports
                .resolve(func)
                .and_then(|p| p.strip_prefix("keras.layers.").map(str::to_string))
                .filter(|c| matches!(c.as_str(), "SimpleRNN" | "LSTM" | "GRU"))
                .ok_or_else(|| args.error("layer", "expected a recurrent layer constructor"))?;
            let Ctor::Layer {
                layer: inner_layer,
                input_shape: inner_shape,
                ..
            } = keras_recurrent(&inner_class, inner, scope, true)?
            else {
                unreachable!()
            };
            let (name, input_shape) = keras_common(&mut args, scope)?;
            args.finish(scope, &[("merge_mode", d("concat"))])?;
            let Layer::Recurrent(mut r) = inner_layer else { unreachable!() };
            r.bidirectional = true;
            layer(Layer::Recurrent(r), ActivationRef::None, name, input_shape.or(inner_shape))
        }
        "Activation" => {
            let mut args = Args::bind(class, call, &keras_params(&["activation"]))?;
            let a = args.required("activation")?;
            let act = activation_arg(ctx, a, scope, class)?;
            keras_common(&mut args, scope)?;
            args.finish(scope, &[])?;
            Ctor::Activation(act)
        }
        "ReLU" => {
            let args = Args::bind(class, call, &keras_params(&["max_value", "negative_slope", "threshold"]))?;
            let mut args = args;
            keras_common(&mut args, scope)?;
            args.finish(
                scope,
                &[
                    ("max_value", Const::None),
                    ("negative_slope", Const::Float(0.0)),
                    ("threshold", Const::Float(0.0)),
                ],
            )?;
            Ctor::Activation(ActivationRef::Literal(Activation::Relu))
        }
        "Softmax" => {
            let mut args = Args::bind(class, call, &keras_params(&["axis"]))?;
            keras_common(&mut args, scope)?;
            args.finish(scope, &[("axis", Const::Int(-1))])?;
            Ctor::Activation(ActivationRef::Literal(Activation::Softmax))
        }
        "LeakyReLU" => {
            let mut args = Args::bind(class, call, &keras_params(&["negative_slope", "alpha"]))?;
            let slope = args
                .take("negative_slope")
                .or_else(|| args.take("alpha"))
                .ok_or_else(|| args.error("negative_slope", "the slope must be given explicitly as 0.2"))?;
            if scope.eval(slope).and_then(|c| c.as_f64()) != Some(0.2) {
                return Err(args.error("negative_slope", "only a slope of 0.2 is supported"));
            }
            keras_common(&mut args, scope)?;
            args.finish(scope, &[])?;
            Ctor::Activation(ActivationRef::Literal(Activation::LeakyRelu))
        }
        "Permute" => {
            let mut args = Args::bind(class, call, &keras_params(&["dims"]))?;
            let dims = args.required("dims")?;
            let dims = args.shape("dims", dims, scope)?;
            let (name, _) = keras_common(&mut args, scope)?;
            args.finish(scope, &[])?;
            let mut order = vec![0usize];
            order.extend(dims.iter().map(|&d| d as usize));
            Ctor::Op(TensorOp::Permute { order }, name)
        }
        "Reshape" => {
            let mut args = Args::bind(class, call, &keras_params(&["target_shape"]))?;
            let t = args.required("target_shape")?;
            let shape = args.shape("target_shape", t, scope)?;
            let (name, _) = keras_common(&mut args, scope)?;
            args.finish(scope, &[])?;
            Ctor::Op(
                TensorOp::Reshape {
                    shape: shape.iter().map(|&d| d as u32).collect(),
                },
                name,
            )
        }
        "Concatenate" => {
            let mut args = Args::bind(class, call, &keras_params(&["axis"]))?;
            let axis = match args.take("axis") {
                Some(e) => scope
                    .eval(e)
                    .and_then(|c| c.as_int())
                    .ok_or_else(|| args.error("axis", "expected an integer constant"))?,
                None => -1,
            };
            let (name, _) = keras_common(&mut args, scope)?;
            args.finish(scope, &[])?;
            Ctor::Op(TensorOp::Concatenate { axis }, name)
        }
        "Add" | "Multiply" => {
            let mut args = Args::bind(class, call, &keras_params(&[]))?;
            let (name, _) = keras_common(&mut args, scope)?;
            args.finish(scope, &[])?;
            Ctor::Op(if class == "Add" { TensorOp::Add } else { TensorOp::Multiply }, name)
        }
        _ => {
            let Some((stem, rank)) = rank_suffix(class) else {
                return Ok(None);
            };
            match stem {
                "Conv" | "Convolution" => keras_conv(ctx, class, rank, call, scope)?,
                "MaxPooling" | "MaxPool" => keras_pool(class, PoolOp::Max, rank, call, scope)?,
                "AveragePooling" | "AvgPool" => keras_pool(class, PoolOp::Avg, rank, call, scope)?,
                _ => return Ok(None),
            }
        }
    };
    Ok(Some(ctor))
}

fn keras_conv(ctx: &Ctx, class: &str, rank: SpatialRank, call: &Expr, scope: &Scope) -> Result<Ctor, ExtractError> {
    let mut args = Args::bind(
        class,
        call,
        &keras_params(&[
            "filters",
            "kernel_size",
            "strides",
            "padding",
            "data_format",
            "dilation_rate",
            "groups",
            "activation",
            "use_bias",
        ]),
    )?;
    let n = rank.dims();
    let filters = args.required("filters")?;
    let out_channels = args.pos_int("filters", filters, scope)?;
    let k = args.required("kernel_size")?;
    let kernel = args.int_list("kernel_size", k, scope, n, 1)?;
    let stride = match args.take("strides") {
        Some(e) => args.int_list("strides", e, scope, n, 1)?,
        None => vec![1; n],
    };
    let padding = match args.take("padding") {
        Some(e) => padding_string(&args, e, scope)?,
        None => Padding::Valid,
    };
    let activation = match args.take("activation") {
        Some(e) => activation_arg(ctx, e, scope, class)?,
        None => ActivationRef::None,
    };
    let (name, input_shape) = keras_common(&mut args, scope)?;
    args.finish(
        scope,
        &[
            ("data_format", Const::Str("channels_last".into())),
            ("dilation_rate", Const::Int(1)),
            ("groups", Const::Int(1)),
            ("use_bias", Const::Bool(true)),
        ],
    )?;
    Ok(layer(
        Layer::Conv(ConvAttrs {
            rank,
            in_channels: None,
            out_channels,
            kernel,
            stride,
            padding,
        }),
        activation,
        name,
        input_shape,
    ))
}

fn keras_pool(class: &str, op: PoolOp, rank: SpatialRank, call: &Expr, scope: &Scope) -> Result<Ctor, ExtractError> {
    let mut args = Args::bind(class, call, &keras_params(&["pool_size", "strides", "padding", "data_format"]))?;
    let n = rank.dims();
    let kernel = match args.take("pool_size") {
        Some(e) => args.int_list("pool_size", e, scope, n, 1)?,
        None => vec![2; n],
    };
    let stride = match args.take("strides") {
        Some(e) if scope.eval(e) == Some(Const::None) => kernel.clone(),
        Some(e) => args.int_list("strides", e, scope, n, 1)?,
        None => kernel.clone(),
    };
    let padding = match args.take("padding") {
        Some(e) => padding_string(&args, e, scope)?,
        None => Padding::Valid,
    };
    let (name, input_shape) = keras_common(&mut args, scope)?;
    args.finish(scope, &[("data_format", Const::Str("channels_last".into()))])?;
    Ok(layer(
        Layer::Pool(PoolAttrs {
            op,
            rank,
            kernel,
            stride,
            padding,
        }),
        ActivationRef::None,
        name,
        input_shape,
    ))
}

fn keras_recurrent(class: &str, call: &Expr, scope: &Scope, wrapped: bool) -> Result<Ctor, ExtractError> {
    let mut args = Args::bind(
        class,
        call,
        &keras_params(&[
            "units",
            "activation",
            "recurrent_activation",
            "use_bias",
            "return_sequences",
            "return_state",
            "go_backwards",
            "dropout",
            "recurrent_dropout",
            "reset_after",
        ]),
    )?;
    let cell = match class {
        "SimpleRNN" => RecurrentCell::Simple,
        "LSTM" => RecurrentCell::Lstm,
        _ => RecurrentCell::Gru,
    };
    let units = args.required("units")?;
    let hidden_size = args.pos_int("units", units, scope)?;
    let return_sequences = match args.take("return_sequences") {
        Some(e) => args.boolean("return_sequences", e, scope)?,
        None => false,
    };
    let (name, input_shape) = keras_common(&mut args, scope)?;
    if wrapped && name.is_some() {
        return Err(args.error("name", "name the Bidirectional wrapper instead of the wrapped layer"));
    }
    let mut defaults = vec![
        ("activation", Const::Str("tanh".into())),
        ("use_bias", Const::Bool(true)),
        ("return_state", Const::Bool(false)),
        ("go_backwards", Const::Bool(false)),
        ("dropout", Const::Float(0.0)),
        ("recurrent_dropout", Const::Float(0.0)),
    ];
    if cell != RecurrentCell::Simple {
        defaults.push(("recurrent_activation", Const::Str("sigmoid".into())));
    }
    if cell == RecurrentCell::Gru {
        defaults.push(("reset_after", Const::Bool(true)));
    }
    args.finish(scope, &defaults)?;
    Ok(layer(
        Layer::Recurrent(RecurrentAttrs {
            cell,
            input_size: None,
            hidden_size,
            return_sequences,
            bidirectional: false,
        }),
        ActivationRef::None,
        name,
        input_shape,
    ))
}

// ----- channel-first framework -----

fn torch_ctor(ctx: &Ctx, path: &str, call: &Expr, scope: &Scope) -> Result<Option<Ctor>, ExtractError> {
    let Some(class) = path.strip_prefix("torch.nn.") else {
        return Ok(None);
    };
    let ctor = match class {
        "Linear" => {
            let mut args = Args::bind(class, call, &["in_features", "out_features", "bias", "device", "dtype"])?;
            let i = args.required("in_features")?;
            let in_features = Some(args.pos_int("in_features", i, scope)?);
            let o = args.required("out_features")?;
            let out_features = args.pos_int("out_features", o, scope)?;
            args.finish(scope, &[("bias", Const::Bool(true)), ("device", Const::None), ("dtype", Const::None)])?;
            layer(
                Layer::Linear(LinearAttrs {
                    in_features,
                    out_features,
                }),
                ActivationRef::None,
                None,
                None,
            )
        }
        "Flatten" => {
            let args = Args::bind(class, call, &["start_dim", "end_dim"])?;
            args.finish(scope, &[("start_dim", Const::Int(1)), ("end_dim", Const::Int(-1))])?;
            layer(Layer::Flatten, ActivationRef::None, None, None)
        }
        "Dropout" => {
            let mut args = Args::bind(class, call, &["p", "inplace"])?;
            let rate = match args.take("p") {
                Some(e) => args.fraction("p", e, scope)?,
                None => 0.5,
            };
            args.take("inplace");
            args.finish(scope, &[])?;
            layer(Layer::Dropout(DropoutAttrs { rate }), ActivationRef::None, None, None)
        }
        "Embedding" => {
            let mut args = Args::bind(class, call, &["num_embeddings", "embedding_dim", "padding_idx", "max_norm"])?;
            let n = args.required("num_embeddings")?;
            let vocab_size = args.pos_int("num_embeddings", n, scope)?;
            let d = args.required("embedding_dim")?;
            let embedding_dim = args.pos_int("embedding_dim", d, scope)?;
            args.finish(scope, &[("padding_idx", Const::None), ("max_norm", Const::None)])?;
            layer(
                Layer::Embedding(EmbeddingAttrs {
                    vocab_size,
                    embedding_dim,
                }),
                ActivationRef::None,
                None,
                None,
            )
        }
        "RNN" | "LSTM" | "GRU" => torch_recurrent(class, call, scope)?,
        "ReLU" => {
            let mut args = Args::bind(class, call, &["inplace"])?;
            args.take("inplace");
            args.finish(scope, &[])?;
            Ctor::Activation(ActivationRef::Literal(Activation::Relu))
        }
        "Sigmoid" | "Tanh" => {
            Args::bind(class, call, &[])?.finish(scope, &[])?;
            Ctor::Activation(ActivationRef::Literal(if class == "Tanh" {
                Activation::Tanh
            } else {
                Activation::Sigmoid
            }))
        }
        "Softmax" => {
            let mut args = Args::bind(class, call, &["dim"])?;
            let dim = args.required("dim")?;
            if !matches!(scope.eval(dim), Some(Const::Int(-1 | 1))) {
                return Err(args.error("dim", "only the feature axis (dim=-1 or dim=1) is supported"));
            }
            args.finish(scope, &[])?;
            Ctor::Activation(ActivationRef::Literal(Activation::Softmax))
        }
        "LeakyReLU" => {
            let mut args = Args::bind(class, call, &["negative_slope", "inplace"])?;
            let slope = args
                .take("negative_slope")
                .ok_or_else(|| args.error("negative_slope", "the slope must be given explicitly as 0.2"))?;
            if scope.eval(slope).and_then(|c| c.as_f64()) != Some(0.2) {
                return Err(args.error("negative_slope", "only a slope of 0.2 is supported"));
            }
            args.take("inplace");
            args.finish(scope, &[])?;
            Ctor::Activation(ActivationRef::Literal(Activation::LeakyRelu))
        }
        _ => {
            let _ = ctx;
            let Some((stem, rank)) = rank_suffix(class) else {
                return Ok(None);
            };
            match stem {
                "Conv" => torch_conv(class, rank, call, scope)?,
                "MaxPool" => torch_pool(class, PoolOp::Max, rank, call, scope)?,
                "AvgPool" => torch_pool(class, PoolOp::Avg, rank, call, scope)?,
                _ => return Ok(None),
            }
        }
    };
    Ok(Some(ctor))
}

/// Explicit symmetric padding mapped onto the pivot's normalized forms.
fn normalize_padding(pad: Vec<u32>, kernel: &[u32], stride: &[u32], allow_same: bool) -> Padding {
    if pad.iter().all(|&p| p == 0) {
        Padding::Valid
    } else if allow_same && stride.iter().all(|&s| s == 1) && pad.iter().zip(kernel).all(|(&p, &k)| 2 * p + 1 == k) {
        Padding::Same
    } else {
        Padding::Explicit(pad)
    }
}

fn torch_conv(class: &str, rank: SpatialRank, call: &Expr, scope: &Scope) -> Result<Ctor, ExtractError> {
    let mut args = Args::bind(
        class,
        call,
        &[
            "in_channels",
            "out_channels",
            "kernel_size",
            "stride",
            "padding",
            "dilation",
            "groups",
            "bias",
            "padding_mode",
        ],
    )?;
    let n = rank.dims();
    let i = args.required("in_channels")?;
    let in_channels = Some(args.pos_int("in_channels", i, scope)?);
    let o = args.required("out_channels")?;
    let out_channels = args.pos_int("out_channels", o, scope)?;
    let k = args.required("kernel_size")?;
    let kernel = args.int_list("kernel_size", k, scope, n, 1)?;
    let stride = match args.take("stride") {
        Some(e) => args.int_list("stride", e, scope, n, 1)?,
        None => vec![1; n],
    };
    let padding = match args.take("padding") {
        Some(e) if matches!(scope.eval(e), Some(Const::Str(_))) => padding_string(&args, e, scope)?,
        Some(e) => normalize_padding(args.int_list("padding", e, scope, n, 0)?, &kernel, &stride, true),
        None => Padding::Valid,
    };
    args.finish(
        scope,
        &[
            ("dilation", Const::Int(1)),
            ("groups", Const::Int(1)),
            ("bias", Const::Bool(true)),
            ("padding_mode", Const::Str("zeros".into())),
        ],
    )?;
    Ok(layer(
        Layer::Conv(ConvAttrs {
            rank,
            in_channels,
            out_channels,
            kernel,
            stride,
            padding,
        }),
        ActivationRef::None,
        None,
        None,
    ))
}

fn torch_pool(class: &str, op: PoolOp, rank: SpatialRank, call: &Expr, scope: &Scope) -> Result<Ctor, ExtractError> {
    let params: &[&str] = match op {
        PoolOp::Max => &["kernel_size", "stride", "padding", "dilation", "return_indices", "ceil_mode"],
        PoolOp::Avg => &["kernel_size", "stride", "padding", "ceil_mode", "count_include_pad", "divisor_override"],
    };
    let mut args = Args::bind(class, call, params)?;
    let n = rank.dims();
    let k = args.required("kernel_size")?;
    let kernel = args.int_list("kernel_size", k, scope, n, 1)?;
    let stride = match args.take("stride") {
        Some(e) if scope.eval(e) == Some(Const::None) => kernel.clone(),
        Some(e) => args.int_list("stride", e, scope, n, 1)?,
        None => kernel.clone(),
    };
    let padding = match args.take("padding") {
        Some(e) => normalize_padding(args.int_list("padding", e, scope, n, 0)?, &kernel, &stride, false),
        None => Padding::Valid,
    };
    let mut defaults = vec![("ceil_mode", Const::Bool(false))];
    match op {
        PoolOp::Max => {
            defaults.push(("dilation", Const::Int(1)));
            defaults.push(("return_indices", Const::Bool(false)));
        }
        PoolOp::Avg => {
            defaults.push(("count_include_pad", Const::Bool(true)));
            defaults.push(("divisor_override", Const::None));
        }
    }
    args.finish(scope, &defaults)?;
    Ok(layer(
        Layer::Pool(PoolAttrs {
            op,
            rank,
            kernel,
            stride,
            padding,
        }),
        ActivationRef::None,
        None,
        None,
    ))
}

fn torch_recurrent(class: &str, call: &Expr, scope: &Scope) -> Result<Ctor, ExtractError> {
    let mut params = vec!["input_size", "hidden_size", "num_layers"];
    if class == "RNN" {
        params.push("nonlinearity");
    }
    params.extend(["bias", "batch_first", "dropout", "bidirectional"]);
    let mut args = Args::bind(class, call, &params)?;
    let cell = match class {
        "RNN" => RecurrentCell::Simple,
        "LSTM" => RecurrentCell::Lstm,
        _ => RecurrentCell::Gru,
    };
    let i = args.required("input_size")?;
    let input_size = Some(args.pos_int("input_size", i, scope)?);
    let h = args.required("hidden_size")?;
    let hidden_size = args.pos_int("hidden_size", h, scope)?;
    let bidirectional = match args.take("bidirectional") {
        Some(e) => args.boolean("bidirectional", e, scope)?,
        None => false,
    };
    match args.take("batch_first") {
        Some(e) if args.boolean("batch_first", e, scope)? => {}
        _ => return Err(args.error("batch_first", "recurrent layers must be declared with batch_first=True")),
    }
    args.finish(
        scope,
        &[
            ("num_layers", Const::Int(1)),
            ("nonlinearity", Const::Str("tanh".into())),
            ("bias", Const::Bool(true)),
            ("dropout", Const::Float(0.0)),
        ],
    )?;
    Ok(layer(
        Layer::Recurrent(RecurrentAttrs {
            cell,
            input_size,
            hidden_size,
            // The full output sequence; a last-step slice in the forward pass clears this.
            return_sequences: true,
            bidirectional,
        }),
        ActivationRef::None,
        None,
        None,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn ctor(fw: Framework, header: &str, expr: &str) -> Result<Option<Ctor>, ExtractError> {
        let src = format!("{header}\nx = {expr}\n");
        let tree = parse_source(&src).unwrap();
        let ctx = Ctx::new(&tree, fw);
        let StmtKind::Assign { value, .. } = &tree.body.last().unwrap().kind else { panic!() };
        let globals = ctx.globals.clone();
        classify(&ctx, value, &Scope { chain: vec![&globals] })
    }

    const TF: &str = "from tensorflow.keras import layers";
    const PT: &str = "import torch.nn as nn";

    #[test]
    fn dense_maps_units_and_activation() {
        let c = ctor(Framework::ChannelLast, TF, "layers.Dense(units=10, activation='relu')").unwrap().unwrap();
        let Ctor::Layer { layer, activation, .. } = c else { panic!() };
        assert_eq!(
            layer,
            Layer::Linear(LinearAttrs {
                in_features: None,
                out_features: 10
            })
        );
        assert_eq!(activation, ActivationRef::Literal(Activation::Relu));
    }

    #[test]
    fn dynamic_activation_from_computed_symbol() {
        let header = format!("{TF}\nactv = get_flag()");
        let c = ctor(Framework::ChannelLast, &header, "layers.Dense(64, activation=actv)").unwrap().unwrap();
        let Ctor::Layer { activation, .. } = c else { panic!() };
        assert_eq!(activation, ActivationRef::Dynamic("actv".into()));
    }

    #[test]
    fn constant_symbol_resolves_to_literal() {
        let header = format!("{TF}\nactv = 'tanh'");
        let c = ctor(Framework::ChannelLast, &header, "layers.Dense(64, activation=actv)").unwrap().unwrap();
        let Ctor::Layer { activation, .. } = c else { panic!() };
        assert_eq!(activation, ActivationRef::Literal(Activation::Tanh));
    }

    #[test]
    fn torch_conv_padding_normalizes_to_same() {
        let c = ctor(Framework::ChannelFirst, PT, "nn.Conv2d(3, 64, kernel_size=3, padding=1)").unwrap().unwrap();
        let Ctor::Layer {
            layer: Layer::Conv(conv), ..
        } = c
        else {
            panic!()
        };
        assert_eq!(conv.padding, Padding::Same);
        assert_eq!(conv.stride, vec![1, 1]);
        assert_eq!(conv.in_channels, Some(3));
    }

    #[test]
    fn pool_stride_defaults_to_kernel() {
        let c = ctor(Framework::ChannelFirst, PT, "nn.MaxPool2d(2)").unwrap().unwrap();
        let Ctor::Layer {
            layer: Layer::Pool(p), ..
        } = c
        else {
            panic!()
        };
        assert_eq!(p.stride, vec![2, 2]);
        let c = ctor(Framework::ChannelLast, TF, "layers.MaxPooling2D((3, 3))").unwrap().unwrap();
        let Ctor::Layer {
            layer: Layer::Pool(p), ..
        } = c
        else {
            panic!()
        };
        assert_eq!(p.stride, vec![3, 3]);
    }

    #[test]
    fn unsupported_arguments_fail_loudly() {
        assert!(matches!(
            ctor(Framework::ChannelFirst, PT, "nn.Linear(3, 4, bias=False)"),
            Err(ExtractError::UnsupportedAttribute { .. })
        ));
        assert!(matches!(
            ctor(Framework::ChannelFirst, PT, "nn.LSTM(3, 4)"),
            Err(ExtractError::UnsupportedAttribute { .. })
        ));
        assert!(matches!(
            ctor(Framework::ChannelLast, TF, "layers.Conv2D(3, 3, dilation_rate=2)"),
            Err(ExtractError::UnsupportedAttribute { .. })
        ));
    }

    #[test]
    fn unknown_framework_layer_is_unsupported() {
        assert!(matches!(
            ctor(Framework::ChannelFirst, PT, "nn.BatchNorm2d(3)"),
            Err(ExtractError::UnsupportedLayer { .. })
        ));
        assert_eq!(ctor(Framework::ChannelFirst, PT, "helper(3)").unwrap(), None);
    }

    #[test]
    fn bidirectional_wraps_recurrent() {
        let c = ctor(Framework::ChannelLast, TF, "layers.Bidirectional(layers.GRU(32))").unwrap().unwrap();
        let Ctor::Layer {
            layer: Layer::Recurrent(r), ..
        } = c
        else {
            panic!()
        };
        assert!(r.bidirectional);
        assert_eq!(r.cell, RecurrentCell::Gru);
        assert!(!r.return_sequences);
    }
}
