//! Training hyperparameters and dataset references.

use super::{unsupported, Ctx, ExtractError, Note};
use crate::frontend::ast::*;
use crate::frontend::dialect::Framework;
use crate::frontend::symbols::{const_eval, Const};
use crate::pivot::*;

pub const DEFAULT_BATCH_SIZE: u32 = 32;
pub const DEFAULT_EPOCHS: u32 = 1;

/// Learning rate an optimizer uses when none is given, per source framework.
pub fn default_learning_rate(opt: Optimizer, fw: Framework) -> f64 {
    match (opt, fw) {
        (Optimizer::Sgd, Framework::ChannelLast) => 0.01,
        (Optimizer::Sgd, Framework::ChannelFirst) => 1e-3,
        (Optimizer::RmsProp, Framework::ChannelFirst) => 1e-2,
        _ => 1e-3,
    }
}

#[derive(Default)]
struct Found {
    optimizer: Option<(Optimizer, Option<f64>)>,
    loss: Option<Loss>,
    batch_size: Option<u32>,
    epochs: Option<u32>,
    metrics: Vec<Metric>,
}

fn keyword<'a>(keywords: &'a [Keyword], name: &str) -> Option<&'a Expr> {
    keywords.iter().find(|k| k.name.as_deref() == Some(name)).map(|k| &k.value)
}

fn class_name(path: &str) -> &str {
    path.rsplit('.').next().unwrap_or(path)
}

fn loss_from_name(name: &str) -> Option<Loss> {
    match name {
        "sparse_categorical_crossentropy"
        | "categorical_crossentropy"
        | "SparseCategoricalCrossentropy"
        | "CategoricalCrossentropy"
        | "CrossEntropyLoss"
        | "NLLLoss" => Some(Loss::CrossEntropy),
        "binary_crossentropy" | "BinaryCrossentropy" | "BCELoss" | "BCEWithLogitsLoss" => {
            Some(Loss::BinaryCrossEntropy)
        }
        "mse" | "mean_squared_error" | "MeanSquaredError" | "MSELoss" => Some(Loss::Mse),
        _ => None,
    }
}

impl Found {
    fn positive_int(&self, ctx: &Ctx, e: &Expr, what: &str) -> Result<u32, ExtractError> {
        const_eval(e, &[&ctx.globals])
            .and_then(|c| c.as_int())
            .and_then(|i| u32::try_from(i).ok())
            .filter(|&i| i >= 1)
            .ok_or_else(|| unsupported(format!("{what} must be a positive integer constant"), e.span))
    }

    fn rate(&self, ctx: &Ctx, e: &Expr) -> Result<f64, ExtractError> {
        const_eval(e, &[&ctx.globals])
            .and_then(|c| c.as_f64())
            .filter(|&r| r > 0.0)
            .ok_or_else(|| unsupported("learning rate must be a positive constant", e.span))
    }

    fn metric(&mut self, ctx: &Ctx, e: &Expr, notes: &mut Vec<Note>) {
        let metric = match &e.kind {
            ExprKind::Str(s) => Metric::parse(s).or(match s.as_str() {
                "acc" | "f1" | "f1_score" => Metric::parse(if s == "acc" { "accuracy" } else { "f1-score" }),
                _ => None,
            }),
            ExprKind::Call { func, .. } => ctx
                .imports
                .resolve(func)
                .and_then(|p| match class_name(&p) {
                    "F1Score" => Some(Metric::F1Score),
                    "Accuracy" | "SparseCategoricalAccuracy" | "CategoricalAccuracy" => Some(Metric::Accuracy),
                    _ => None,
                }),
            _ => None,
        };
        match metric {
            Some(m) if !self.metrics.contains(&m) => self.metrics.push(m),
            Some(_) => {}
            None => notes.push(Note {
                span: Some(e.span),
                message: "metric outside {accuracy, f1-score} ignored".into(),
            }),
        }
    }

    fn visit_call(&mut self, ctx: &Ctx, e: &Expr, notes: &mut Vec<Note>) -> Result<(), ExtractError> {
        let ExprKind::Call { func, args, keywords } = &e.kind else {
            return Ok(());
        };
        let path = ctx.imports.resolve(func);
        match (ctx.fw, path.as_deref()) {
            (Framework::ChannelFirst, Some(p)) if p.starts_with("torch.optim.") && !p.contains("lr_scheduler") => {
                let opt = Optimizer::parse(class_name(p))
                    .ok_or_else(|| unsupported(format!("optimizer `{p}`"), e.span))?;
                let lr = keyword(keywords, "lr").or(args.get(1)).map(|l| self.rate(ctx, l)).transpose()?;
                self.optimizer = Some((opt, lr));
            }
            (Framework::ChannelFirst, Some(p)) if p.starts_with("torch.nn.") && p.ends_with("Loss") => {
                self.loss = Some(
                    loss_from_name(class_name(p)).ok_or_else(|| unsupported(format!("loss `{p}`"), e.span))?,
                );
            }
            (Framework::ChannelFirst, Some("torch.utils.data.DataLoader")) => {
                if let Some(b) = keyword(keywords, "batch_size").or(args.get(1)) {
                    self.batch_size = Some(self.positive_int(ctx, b, "batch size")?);
                }
            }
            (Framework::ChannelLast, _) => {
                let ExprKind::Attribute { attr, .. } = &func.kind else {
                    return Ok(());
                };
                match attr.as_str() {
                    "compile" if path.is_none() => self.compile(ctx, keywords, notes)?,
                    "fit" if path.is_none() => {
                        if let Some(b) = keyword(keywords, "batch_size") {
                            self.batch_size = Some(self.positive_int(ctx, b, "batch size")?);
                        }
                        if let Some(n) = keyword(keywords, "epochs") {
                            self.epochs = Some(self.positive_int(ctx, n, "epoch count")?);
                        }
                    }
                    _ => {}
                }
            }
            _ => {}
        }
        Ok(())
    }

    fn compile(&mut self, ctx: &Ctx, keywords: &[Keyword], notes: &mut Vec<Note>) -> Result<(), ExtractError> {
        if let Some(o) = keyword(keywords, "optimizer") {
            let (name, lr) = match &o.kind {
                ExprKind::Str(s) => (s.clone(), None),
                ExprKind::Call { func, keywords, args } => {
                    let p = ctx
                        .imports
                        .resolve(func)
                        .ok_or_else(|| unsupported("optimizer expression", o.span))?;
                    let lr = keyword(keywords, "learning_rate").or(keyword(keywords, "lr")).or(args.first());
                    (class_name(&p).to_string(), lr.map(|l| self.rate(ctx, l)).transpose()?)
                }
                _ => return Err(unsupported("optimizer expression", o.span)),
            };
            let opt = Optimizer::parse(&name).ok_or_else(|| unsupported(format!("optimizer `{name}`"), o.span))?;
            self.optimizer = Some((opt, lr));
        }
        if let Some(l) = keyword(keywords, "loss") {
            let name = match &l.kind {
                ExprKind::Str(s) => s.clone(),
                ExprKind::Call { func, .. } => ctx
                    .imports
                    .resolve(func)
                    .map(|p| class_name(&p).to_string())
                    .ok_or_else(|| unsupported("loss expression", l.span))?,
                _ => return Err(unsupported("loss expression", l.span)),
            };
            self.loss = Some(loss_from_name(&name).ok_or_else(|| unsupported(format!("loss `{name}`"), l.span))?);
        }
        if let Some(m) = keyword(keywords, "metrics") {
            match &m.kind {
                ExprKind::List(items) | ExprKind::Tuple(items) => {
                    for i in items {
                        self.metric(ctx, i, notes);
                    }
                }
                _ => return Err(unsupported("metrics must be a literal list", m.span)),
            }
        }
        Ok(())
    }
}

/// `for epoch in range(N)` at any depth.
fn epoch_loop(ctx: &Ctx) -> Option<u32> {
    let mut found = None;
    walk_stmts(&ctx.tree.body, &mut |s| {
        if let StmtKind::For { iter, .. } = &s.kind {
            if let ExprKind::Call { func, args, .. } = &iter.kind {
                if func.as_name() == Some("range") && args.len() == 1 {
                    if let Some(n) = const_eval(&args[0], &[&ctx.globals]).and_then(|c| c.as_int()) {
                        if found.is_none() && n >= 1 {
                            found = u32::try_from(n).ok();
                        }
                    }
                }
            }
        }
    });
    found
}

pub(super) fn extract(
    ctx: &Ctx,
    notes: &mut Vec<Note>,
) -> Result<(Option<TrainingConfig>, Vec<DatasetRef>), ExtractError> {
    let mut found = Found::default();
    let mut calls = Vec::new();
    walk_body_exprs(&ctx.tree.body, &mut |e| {
        if matches!(e.kind, ExprKind::Call { .. }) {
            calls.push(e);
        }
    });
    for call in calls {
        found.visit_call(ctx, call, notes)?;
    }
    if ctx.fw == Framework::ChannelFirst {
        found.epochs = epoch_loop(ctx);
        if let Some(Some(Const::Tuple(items))) = ctx.globals.get("METRICS") {
            for item in items {
                match item {
                    Const::Str(s) => match Metric::parse(s) {
                        Some(m) if !found.metrics.contains(&m) => found.metrics.push(m),
                        Some(_) => {}
                        None => notes.push(Note {
                            span: None,
                            message: format!("metric `{s}` ignored"),
                        }),
                    },
                    _ => notes.push(Note {
                        span: None,
                        message: "non-string METRICS entry ignored".into(),
                    }),
                }
            }
        }
    }

    let config = match (found.optimizer, found.loss) {
        (Some((opt, lr)), Some(loss)) => Some(TrainingConfig {
            optimizer: opt,
            learning_rate: lr.unwrap_or_else(|| default_learning_rate(opt, ctx.fw)),
            loss,
            batch_size: found.batch_size.unwrap_or(DEFAULT_BATCH_SIZE),
            epochs: found.epochs.unwrap_or(DEFAULT_EPOCHS),
            metrics: found.metrics,
        }),
        (None, None) => None,
        _ => {
            notes.push(Note {
                span: None,
                message: "training setup lacks an optimizer or a loss; no training configuration extracted".into(),
            });
            None
        }
    };
    Ok((config, datasets(ctx)?))
}

fn datasets(ctx: &Ctx) -> Result<Vec<DatasetRef>, ExtractError> {
    for stmt in &ctx.tree.body {
        let StmtKind::Assign { targets, value } = &stmt.kind else { continue };
        if targets.len() == 1 && targets[0].as_name() == Some("DATASETS") {
            return dataset_dict(value);
        }
    }
    // Idiomatic loaders assigned to a variable.
    let mut out = Vec::new();
    walk_stmts(&ctx.tree.body, &mut |s| {
        let StmtKind::Assign { targets, value } = &s.kind else { return };
        let [target] = targets.as_slice() else { return };
        let Some(name) = target.as_name() else { return };
        let ExprKind::Call { func, args, keywords } = &value.kind else { return };
        let Some(path) = ctx.imports.resolve(func) else { return };
        let (format, key) = match path.as_str() {
            "keras.utils.image_dataset_from_directory" | "keras.preprocessing.image_dataset_from_directory" => {
                (InputFormat::Images, "directory")
            }
            "keras.utils.text_dataset_from_directory" | "keras.preprocessing.text_dataset_from_directory" => {
                (InputFormat::Sequences, "directory")
            }
            "torchvision.datasets.ImageFolder" => (InputFormat::Images, "root"),
            _ => return,
        };
        let Some(dir) = keyword(keywords, key).or(args.first()).and_then(|e| e.as_str()) else {
            return;
        };
        if !dir.is_empty() && !out.iter().any(|d: &DatasetRef| d.name == name) {
            out.push(DatasetRef {
                name: name.to_string(),
                path: dir.to_string(),
                task: Task::Classification,
                input_format: format,
            });
        }
    });
    Ok(out)
}

/// `{"name": ("path", "classification", "images"), ...}`
fn dataset_dict(value: &Expr) -> Result<Vec<DatasetRef>, ExtractError> {
    let bad = |span| unsupported("DATASETS entries must be \"name\": (\"path\", task, input format)", span);
    let ExprKind::Dict(items) = &value.kind else {
        return Err(bad(value.span));
    };
    let mut out = Vec::new();
    for (key, entry) in items {
        let name = key.as_ref().and_then(|k| k.as_str()).ok_or_else(|| bad(entry.span))?;
        let ExprKind::Tuple(fields) = &entry.kind else { return Err(bad(entry.span)) };
        let [path, task, format] = fields.as_slice() else { return Err(bad(entry.span)) };
        let task = match task.as_str() {
            Some("classification") => Task::Classification,
            Some("regression") => Task::Regression,
            _ => return Err(bad(task.span)),
        };
        let input_format = match format.as_str() {
            Some("images") => InputFormat::Images,
            Some("sequences") => InputFormat::Sequences,
            _ => return Err(bad(format.span)),
        };
        out.push(DatasetRef {
            name: name.to_string(),
            path: path.as_str().ok_or_else(|| bad(path.span))?.to_string(),
            task,
            input_format,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use crate::frontend::{extract, parse_source, Dialect, Framework, Style};
    use crate::pivot::*;

    #[test]
    fn keras_compile_and_fit() {
        let src = "from tensorflow import keras\nfrom tensorflow.keras import layers\nmodel = keras.Sequential([layers.Dense(2, input_shape=(4,))])\nmodel.compile(optimizer=keras.optimizers.Adam(learning_rate=0.0005), loss=\"sparse_categorical_crossentropy\", metrics=[\"accuracy\"])\nmodel.fit(x, y, batch_size=64, epochs=10)\n";
        let tree = parse_source(src).unwrap();
        let nn = extract(&tree, Dialect::new(Framework::ChannelLast, Style::Sequential)).unwrap().nn;
        let c = nn.config.unwrap();
        assert_eq!(c.optimizer, Optimizer::Adam);
        assert_eq!(c.learning_rate, 0.0005);
        assert_eq!(c.loss, Loss::CrossEntropy);
        assert_eq!((c.batch_size, c.epochs), (64, 10));
        assert_eq!(c.metrics, vec![Metric::Accuracy]);
    }

    #[test]
    fn torch_loop_with_defaults() {
        let src = "import torch\nfrom torch import nn\nnet = nn.Sequential(nn.Linear(4, 2))\nopt = torch.optim.SGD(net.parameters())\ncrit = nn.MSELoss()\nfor epoch in range(3):\n    pass\nDATASETS = {\"train\": (\"data/train\", \"regression\", \"sequences\")}\n";
        let tree = parse_source(src).unwrap();
        let nn = extract(&tree, Dialect::new(Framework::ChannelFirst, Style::Sequential)).unwrap().nn;
        let c = nn.config.unwrap();
        assert_eq!(c.learning_rate, 1e-3);
        assert_eq!((c.loss, c.batch_size, c.epochs), (Loss::Mse, 32, 3));
        assert_eq!(nn.datasets[0].task, Task::Regression);
    }
}
