//! Dataset table and minimal train/evaluate scaffold in each target idiom.

use super::py::{self, Code};
use crate::pivot::*;

fn task_str(t: Task) -> &'static str {
    match t {
        Task::Classification => "classification",
        Task::Regression => "regression",
    }
}

fn format_str(f: InputFormat) -> &'static str {
    match f {
        InputFormat::Images => "images",
        InputFormat::Sequences => "sequences",
    }
}

pub(crate) fn datasets(code: &mut Code, datasets: &[DatasetRef]) {
    if datasets.is_empty() {
        return;
    }
    code.line(0, "DATASETS = {");
    for d in datasets {
        code.line(
            1,
            format!(
                "{}: ({}, {}, {}),",
                py::string(&d.name),
                py::string(&d.path),
                py::string(task_str(d.task)),
                py::string(format_str(d.input_format))
            ),
        );
    }
    code.line(0, "}");
}

fn terminal_activation(nn: &PivotNN) -> Option<Activation> {
    match nn.output()?.as_layer()?.activation {
        ActivationRef::Literal(a) => Some(a),
        _ => None,
    }
}

fn keras_optimizer(o: Optimizer) -> &'static str {
    match o {
        Optimizer::Sgd => "SGD",
        Optimizer::Adam => "Adam",
        Optimizer::AdamW => "AdamW",
        Optimizer::RmsProp => "RMSprop",
    }
}

pub(crate) fn keras_train(code: &mut Code, nn: &PivotNN, c: &TrainingConfig) {
    let act = terminal_activation(nn);
    let loss = match c.loss {
        Loss::CrossEntropy => format!(
            "keras.losses.SparseCategoricalCrossentropy(from_logits={})",
            py::boolean(act != Some(Activation::Softmax))
        ),
        Loss::BinaryCrossEntropy => format!(
            "keras.losses.BinaryCrossentropy(from_logits={})",
            py::boolean(act != Some(Activation::Sigmoid))
        ),
        Loss::Mse => "keras.losses.MeanSquaredError()".into(),
    };
    let metrics: Vec<&str> = c
        .metrics
        .iter()
        .map(|m| match m {
            Metric::Accuracy => "\"accuracy\"",
            Metric::F1Score => "keras.metrics.F1Score()",
        })
        .collect();
    code.section();
    code.line(0, "def train(model, x, y):");
    code.line(1, "model.compile(");
    code.line(
        2,
        format!(
            "optimizer=keras.optimizers.{}(learning_rate={}),",
            keras_optimizer(c.optimizer),
            py::float(c.learning_rate)
        ),
    );
    code.line(2, format!("loss={loss},"));
    if !metrics.is_empty() {
        code.line(2, format!("metrics={},", py::list(&metrics)));
    }
    code.line(1, ")");
    code.line(1, format!("model.fit(x, y, batch_size={}, epochs={})", c.batch_size, c.epochs));
    code.line(1, "return model.evaluate(x, y)");
}

fn torch_optimizer(o: Optimizer) -> &'static str {
    match o {
        Optimizer::Sgd => "SGD",
        Optimizer::Adam => "Adam",
        Optimizer::AdamW => "AdamW",
        Optimizer::RmsProp => "RMSprop",
    }
}

/// `METRICS = (...)`, emitted with the module-level constants.
pub(crate) fn torch_metrics(code: &mut Code, c: &TrainingConfig) {
    let names: Vec<String> = c.metrics.iter().map(|m| py::string(m.as_str())).collect();
    code.line(0, format!("METRICS = {}", if names.is_empty() { "()".into() } else { py::tuple(&names) }));
}

pub(crate) fn torch_train(code: &mut Code, nn: &PivotNN, c: &TrainingConfig) {
    let act = terminal_activation(nn);
    let (criterion, output) = match c.loss {
        Loss::CrossEntropy if act == Some(Activation::Softmax) => ("nn.NLLLoss()", "torch.log(model(x))"),
        Loss::CrossEntropy => ("nn.CrossEntropyLoss()", "model(x)"),
        Loss::BinaryCrossEntropy if act == Some(Activation::Sigmoid) => ("nn.BCELoss()", "model(x)"),
        Loss::BinaryCrossEntropy => ("nn.BCEWithLogitsLoss()", "model(x)"),
        Loss::Mse => ("nn.MSELoss()", "model(x)"),
    };
    code.section();
    code.line(0, "def make_loader(dataset):");
    code.line(
        1,
        format!("return torch.utils.data.DataLoader(dataset, batch_size={}, shuffle=True)", c.batch_size),
    );
    code.section();
    code.line(0, "def train(model, loader):");
    code.line(
        1,
        format!(
            "optimizer = torch.optim.{}(model.parameters(), lr={})",
            torch_optimizer(c.optimizer),
            py::float(c.learning_rate)
        ),
    );
    code.line(1, format!("criterion = {criterion}"));
    code.line(1, format!("for epoch in range({}):", c.epochs));
    code.line(2, "model.train()");
    code.line(2, "for x, y in loader:");
    code.line(3, "optimizer.zero_grad()");
    code.line(3, format!("loss = criterion({output}, y)"));
    code.line(3, "loss.backward()");
    code.line(3, "optimizer.step()");
    code.line(1, "return model");
}
