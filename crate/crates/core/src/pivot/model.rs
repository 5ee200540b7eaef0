use std::fmt;

/// Reserved producer name for the network input tensor.
pub const INPUT: &str = "INPUT";

/// Line/column of the source construct a module was lifted from (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct Span {
    pub line: u32,
    pub column: u32,
}

impl Span {
    pub fn new(line: u32, column: u32) -> Self {
        Span { line, column }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

/// Framework-independent description of a network.
///
/// `modules` is stored in execution order; every module only consumes
/// [`INPUT`] or modules declared before it.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotNN {
    pub name: String,
    pub modules: Vec<ModuleSpec>,
    pub config: Option<TrainingConfig>,
    pub datasets: Vec<DatasetRef>,
    /// Channel-last input shape, batch first.
    pub input_shape: Option<TensorShape>,
    /// Networks referenced by [`ModuleKind::SubNN`] modules.
    pub sub_networks: Vec<PivotNN>,
}

impl PivotNN {
    pub fn new(name: impl Into<String>) -> Self {
        PivotNN {
            name: name.into(),
            modules: Vec::new(),
            config: None,
            datasets: Vec::new(),
            input_shape: None,
            sub_networks: Vec::new(),
        }
    }

    pub fn module(&self, name: &str) -> Option<&ModuleSpec> {
        self.modules.iter().find(|m| m.name == name)
    }

    pub fn sub_network(&self, name: &str) -> Option<&PivotNN> {
        self.sub_networks.iter().find(|n| n.name == name)
    }

    /// Names of the modules that consume `name`.
    pub fn consumers<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a ModuleSpec> + 'a {
        self.modules
            .iter()
            .filter(move |m| m.inputs.iter().any(|i| i == name))
    }

    /// Modules no other module consumes.
    pub fn terminals(&self) -> Vec<&ModuleSpec> {
        self.modules
            .iter()
            .filter(|m| self.consumers(&m.name).next().is_none())
            .collect()
    }

    /// The single terminal module, if the network has exactly one.
    pub fn output(&self) -> Option<&ModuleSpec> {
        match self.terminals().as_slice() {
            [only] => Some(only),
            _ => None,
        }
    }

    /// True when every module has a single input that is the previous module.
    pub fn is_chain(&self) -> bool {
        self.modules.iter().enumerate().all(|(i, m)| {
            let expected = if i == 0 { INPUT } else { self.modules[i - 1].name.as_str() };
            m.inputs.len() == 1 && m.inputs[0] == expected
        }) && self.modules.iter().enumerate().all(|(i, m)| {
            i + 1 == self.modules.len() || self.consumers(&m.name).count() == 1
        })
    }

    pub fn layer_count(&self) -> usize {
        self.modules.iter().filter(|m| m.as_layer().is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModuleSpec {
    pub name: String,
    pub kind: ModuleKind,
    pub inputs: Vec<String>,
    pub span: Option<Span>,
}

impl ModuleSpec {
    pub fn new(name: impl Into<String>, kind: ModuleKind, inputs: Vec<String>) -> Self {
        ModuleSpec {
            name: name.into(),
            kind,
            inputs,
            span: None,
        }
    }

    pub fn layer(name: impl Into<String>, layer: Layer, activation: ActivationRef, input: &str) -> Self {
        Self::new(
            name,
            ModuleKind::Layer(LayerSpec { layer, activation }),
            vec![input.to_string()],
        )
    }

    pub fn with_span(mut self, span: Option<Span>) -> Self {
        self.span = span;
        self
    }

    pub fn as_layer(&self) -> Option<&LayerSpec> {
        match &self.kind {
            ModuleKind::Layer(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_layer_mut(&mut self) -> Option<&mut LayerSpec> {
        match &mut self.kind {
            ModuleKind::Layer(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_tensor_op(&self) -> Option<&TensorOp> {
        match &self.kind {
            ModuleKind::TensorOp(op) => Some(op),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModuleKind {
    Layer(LayerSpec),
    TensorOp(TensorOp),
    /// Instance of the named entry in [`PivotNN::sub_networks`].
    SubNN(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerSpec {
    pub layer: Layer,
    pub activation: ActivationRef,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SpatialRank {
    One,
    Two,
    Three,
}

impl SpatialRank {
    pub fn dims(self) -> usize {
        match self {
            SpatialRank::One => 1,
            SpatialRank::Two => 2,
            SpatialRank::Three => 3,
        }
    }

    pub fn from_dims(dims: usize) -> Option<Self> {
        match dims {
            1 => Some(SpatialRank::One),
            2 => Some(SpatialRank::Two),
            3 => Some(SpatialRank::Three),
            _ => None,
        }
    }

    /// Rank of the tensor a layer of this spatial rank consumes (batch + spatial + channels).
    pub fn tensor_rank(self) -> usize {
        self.dims() + 2
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Padding {
    Valid,
    Same,
    /// Symmetric zero padding per spatial dimension.
    Explicit(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Linear(LinearAttrs),
    Conv(ConvAttrs),
    Pool(PoolAttrs),
    Flatten,
    Dropout(DropoutAttrs),
    Embedding(EmbeddingAttrs),
    Recurrent(RecurrentAttrs),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearAttrs {
    pub in_features: Option<u32>,
    pub out_features: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvAttrs {
    pub rank: SpatialRank,
    pub in_channels: Option<u32>,
    pub out_channels: u32,
    pub kernel: Vec<u32>,
    pub stride: Vec<u32>,
    pub padding: Padding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PoolOp {
    Max,
    Avg,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoolAttrs {
    pub op: PoolOp,
    pub rank: SpatialRank,
    pub kernel: Vec<u32>,
    pub stride: Vec<u32>,
    pub padding: Padding,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropoutAttrs {
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingAttrs {
    pub vocab_size: u32,
    pub embedding_dim: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecurrentCell {
    Simple,
    Lstm,
    Gru,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentAttrs {
    pub cell: RecurrentCell,
    pub input_size: Option<u32>,
    pub hidden_size: u32,
    pub return_sequences: bool,
    pub bidirectional: bool,
}

impl RecurrentAttrs {
    pub fn directions(&self) -> u32 {
        if self.bidirectional {
            2
        } else {
            1
        }
    }
}

/// Concrete layer type, as named in pivot documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayerKind {
    Linear,
    Conv1D,
    Conv2D,
    Conv3D,
    MaxPool1D,
    MaxPool2D,
    MaxPool3D,
    AvgPool1D,
    AvgPool2D,
    AvgPool3D,
    Flatten,
    Dropout,
    Embedding,
    SimpleRNN,
    LSTM,
    GRU,
}

impl LayerKind {
    pub const ALL: [LayerKind; 16] = [
        LayerKind::Linear,
        LayerKind::Conv1D,
        LayerKind::Conv2D,
        LayerKind::Conv3D,
        LayerKind::MaxPool1D,
        LayerKind::MaxPool2D,
        LayerKind::MaxPool3D,
        LayerKind::AvgPool1D,
        LayerKind::AvgPool2D,
        LayerKind::AvgPool3D,
        LayerKind::Flatten,
        LayerKind::Dropout,
        LayerKind::Embedding,
        LayerKind::SimpleRNN,
        LayerKind::LSTM,
        LayerKind::GRU,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Linear => "Linear",
            LayerKind::Conv1D => "Conv1D",
            LayerKind::Conv2D => "Conv2D",
            LayerKind::Conv3D => "Conv3D",
            LayerKind::MaxPool1D => "MaxPool1D",
            LayerKind::MaxPool2D => "MaxPool2D",
            LayerKind::MaxPool3D => "MaxPool3D",
            LayerKind::AvgPool1D => "AvgPool1D",
            LayerKind::AvgPool2D => "AvgPool2D",
            LayerKind::AvgPool3D => "AvgPool3D",
            LayerKind::Flatten => "Flatten",
            LayerKind::Dropout => "Dropout",
            LayerKind::Embedding => "Embedding",
            LayerKind::SimpleRNN => "SimpleRNN",
            LayerKind::LSTM => "LSTM",
            LayerKind::GRU => "GRU",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        LayerKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Layer {
    pub fn kind(&self) -> LayerKind {
        use SpatialRank::*;
        match self {
            Layer::Linear(_) => LayerKind::Linear,
            Layer::Conv(c) => match c.rank {
                One => LayerKind::Conv1D,
                Two => LayerKind::Conv2D,
                Three => LayerKind::Conv3D,
            },
            Layer::Pool(p) => match (p.op, p.rank) {
                (PoolOp::Max, One) => LayerKind::MaxPool1D,
                (PoolOp::Max, Two) => LayerKind::MaxPool2D,
                (PoolOp::Max, Three) => LayerKind::MaxPool3D,
                (PoolOp::Avg, One) => LayerKind::AvgPool1D,
                (PoolOp::Avg, Two) => LayerKind::AvgPool2D,
                (PoolOp::Avg, Three) => LayerKind::AvgPool3D,
            },
            Layer::Flatten => LayerKind::Flatten,
            Layer::Dropout(_) => LayerKind::Dropout,
            Layer::Embedding(_) => LayerKind::Embedding,
            Layer::Recurrent(r) => match r.cell {
                RecurrentCell::Simple => LayerKind::SimpleRNN,
                RecurrentCell::Lstm => LayerKind::LSTM,
                RecurrentCell::Gru => LayerKind::GRU,
            },
        }
    }

    /// Spatial rank of conv and pool layers, the layers whose memory layout
    /// differs between the two channel conventions.
    pub fn channel_sensitive_rank(&self) -> Option<SpatialRank> {
        match self {
            Layer::Conv(c) => Some(c.rank),
            Layer::Pool(p) => Some(p.rank),
            _ => None,
        }
    }

    /// True for layers without learnable parameters.
    pub fn is_stateless(&self) -> bool {
        matches!(self, Layer::Pool(_) | Layer::Flatten | Layer::Dropout(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Softmax,
    LeakyRelu,
}

impl Activation {
    pub const ALL: [Activation; 5] = [
        Activation::Relu,
        Activation::Sigmoid,
        Activation::Tanh,
        Activation::Softmax,
        Activation::LeakyRelu,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
            Activation::Softmax => "softmax",
            Activation::LeakyRelu => "leaky_relu",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Activation::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Activation applied to a layer output.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum ActivationRef {
    #[default]
    None,
    Literal(Activation),
    /// Name of a source symbol whose value is only known at runtime.
    Dynamic(String),
}

impl ActivationRef {
    pub fn is_none(&self) -> bool {
        matches!(self, ActivationRef::None)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TensorOp {
    /// Full dimension order, batch included.
    Permute { order: Vec<usize> },
    /// Target shape without the batch dimension.
    Reshape { shape: Vec<u32> },
    Transpose { dim0: usize, dim1: usize },
    Concatenate { axis: i64 },
    Add,
    Multiply,
    Matmul,
}

impl TensorOp {
    pub fn op_name(&self) -> &'static str {
        match self {
            TensorOp::Permute { .. } => "permute",
            TensorOp::Reshape { .. } => "reshape",
            TensorOp::Transpose { .. } => "transpose",
            TensorOp::Concatenate { .. } => "concatenate",
            TensorOp::Add => "add",
            TensorOp::Multiply => "multiply",
            TensorOp::Matmul => "matmul",
        }
    }

    /// Number of inputs the op takes; `None` for variadic ops.
    pub fn arity(&self) -> Option<usize> {
        match self {
            TensorOp::Permute { .. } | TensorOp::Reshape { .. } | TensorOp::Transpose { .. } => Some(1),
            TensorOp::Add | TensorOp::Multiply | TensorOp::Matmul => Some(2),
            TensorOp::Concatenate { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dim {
    Batch,
    Known(u64),
}

impl fmt::Display for Dim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dim::Batch => f.write_str("B"),
            Dim::Known(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorShape {
    pub dims: Vec<Dim>,
}

impl TensorShape {
    pub fn new(dims: Vec<Dim>) -> Self {
        TensorShape { dims }
    }

    /// Batch followed by the given known dimensions.
    pub fn batched(dims: &[u64]) -> Self {
        let mut all = Vec::with_capacity(dims.len() + 1);
        all.push(Dim::Batch);
        all.extend(dims.iter().map(|&d| Dim::Known(d)));
        TensorShape { dims: all }
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn last(&self) -> Option<Dim> {
        self.dims.last().copied()
    }

    /// Known dims after the batch dimension, or `None` if any is symbolic.
    pub fn feature_dims(&self) -> Option<Vec<u64>> {
        let rest = match self.dims.first() {
            Some(Dim::Batch) => &self.dims[1..],
            _ => &self.dims[..],
        };
        rest.iter()
            .map(|d| match d {
                Dim::Known(n) => Some(*n),
                Dim::Batch => None,
            })
            .collect()
    }

    /// At most one batch dimension, and only in front.
    pub fn is_well_formed(&self) -> bool {
        self.dims
            .iter()
            .enumerate()
            .all(|(i, d)| !matches!(d, Dim::Batch) || i == 0)
            && self.dims.iter().all(|d| !matches!(d, Dim::Known(0)))
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, d) in self.dims.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Optimizer {
    Sgd,
    Adam,
    AdamW,
    RmsProp,
}

impl Optimizer {
    pub fn as_str(self) -> &'static str {
        match self {
            Optimizer::Sgd => "sgd",
            Optimizer::Adam => "adam",
            Optimizer::AdamW => "adamw",
            Optimizer::RmsProp => "rmsprop",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sgd" => Some(Optimizer::Sgd),
            "adam" => Some(Optimizer::Adam),
            "adamw" => Some(Optimizer::AdamW),
            "rmsprop" => Some(Optimizer::RmsProp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Loss {
    CrossEntropy,
    BinaryCrossEntropy,
    Mse,
}

impl Loss {
    pub fn as_str(self) -> &'static str {
        match self {
            Loss::CrossEntropy => "crossentropy",
            Loss::BinaryCrossEntropy => "binary_crossentropy",
            Loss::Mse => "mse",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "crossentropy" => Some(Loss::CrossEntropy),
            "binary_crossentropy" => Some(Loss::BinaryCrossEntropy),
            "mse" => Some(Loss::Mse),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Accuracy,
    F1Score,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::F1Score => "f1-score",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "accuracy" => Some(Metric::Accuracy),
            "f1-score" => Some(Metric::F1Score),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub optimizer: Optimizer,
    pub learning_rate: f64,
    pub loss: Loss,
    pub batch_size: u32,
    pub epochs: u32,
    pub metrics: Vec<Metric>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    Classification,
    Regression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputFormat {
    Images,
    Sequences,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRef {
    pub name: String,
    pub path: String,
    pub task: Task,
    pub input_format: InputFormat,
}
