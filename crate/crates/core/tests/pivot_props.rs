use nnport::pivot::*;
use proptest::prelude::*;

fn rank() -> impl Strategy<Value = SpatialRank> {
    prop_oneof![Just(SpatialRank::One), Just(SpatialRank::Two), Just(SpatialRank::Three)]
}

fn padding(rank: SpatialRank) -> impl Strategy<Value = Padding> {
    prop_oneof![
        Just(Padding::Valid),
        Just(Padding::Same),
        prop::collection::vec(0u32..4, rank.dims()).prop_map(Padding::Explicit),
    ]
}

fn activation() -> impl Strategy<Value = ActivationRef> {
    prop_oneof![
        Just(ActivationRef::None),
        prop::sample::select(Activation::ALL.to_vec()).prop_map(ActivationRef::Literal),
        "[a-z][a-z0-9_]{0,6}".prop_map(ActivationRef::Dynamic),
    ]
}

fn layer() -> impl Strategy<Value = Layer> {
    let conv = rank().prop_flat_map(|r| {
        (
            prop::option::of(1u32..512),
            1u32..512,
            prop::collection::vec(1u32..8, r.dims()),
            prop::collection::vec(1u32..4, r.dims()),
            padding(r),
        )
            .prop_map(move |(in_channels, out_channels, kernel, stride, padding)| {
                Layer::Conv(ConvAttrs { rank: r, in_channels, out_channels, kernel, stride, padding })
            })
    });
    let pool = (rank(), prop_oneof![Just(PoolOp::Max), Just(PoolOp::Avg)]).prop_flat_map(|(r, op)| {
        (prop::collection::vec(1u32..5, r.dims()), prop::collection::vec(1u32..5, r.dims()), padding(r))
            .prop_map(move |(kernel, stride, padding)| Layer::Pool(PoolAttrs { op, rank: r, kernel, stride, padding }))
    });
    let cell = prop_oneof![Just(RecurrentCell::Simple), Just(RecurrentCell::Lstm), Just(RecurrentCell::Gru)];
    prop_oneof![
        (prop::option::of(1u32..4096), 1u32..4096)
            .prop_map(|(in_features, out_features)| Layer::Linear(LinearAttrs { in_features, out_features })),
        conv,
        pool,
        Just(Layer::Flatten),
        (0.0f64..1.0).prop_map(|rate| Layer::Dropout(DropoutAttrs { rate })),
        (1u32..50_000, 1u32..1024)
            .prop_map(|(vocab_size, embedding_dim)| Layer::Embedding(EmbeddingAttrs { vocab_size, embedding_dim })),
        (cell, prop::option::of(1u32..512), 1u32..512, any::<bool>(), any::<bool>()).prop_map(
            |(cell, input_size, hidden_size, return_sequences, bidirectional)| {
                Layer::Recurrent(RecurrentAttrs { cell, input_size, hidden_size, return_sequences, bidirectional })
            }
        ),
    ]
}

/// A step either appends a layer, or joins the last two producers.
#[derive(Debug, Clone)]
enum Step {
    Layer(Layer, ActivationRef, Option<(u32, u32)>),
    Unary(TensorOp),
    Join(TensorOp),
}

fn step() -> impl Strategy<Value = Step> {
    prop_oneof![
        4 => (layer(), activation(), prop::option::of((1u32..500, 1u32..80))).prop_map(|(l, a, s)| Step::Layer(l, a, s)),
        1 => prop_oneof![
            Just(vec![0usize, 2, 1]).prop_map(|order| TensorOp::Permute { order }),
            prop::collection::vec(1u32..64, 1..4).prop_map(|shape| TensorOp::Reshape { shape }),
            Just(TensorOp::Transpose { dim0: 1, dim1: 2 }),
        ]
        .prop_map(Step::Unary),
        1 => prop_oneof![
            Just(TensorOp::Add),
            Just(TensorOp::Multiply),
            Just(TensorOp::Matmul),
            (-3i64..3).prop_map(|axis| TensorOp::Concatenate { axis }),
        ]
        .prop_map(Step::Join),
    ]
}

fn network() -> impl Strategy<Value = PivotNN> {
    let config = (
        prop_oneof![Just(Optimizer::Sgd), Just(Optimizer::Adam), Just(Optimizer::AdamW), Just(Optimizer::RmsProp)],
        1e-6f64..1.0,
        prop_oneof![Just(Loss::CrossEntropy), Just(Loss::BinaryCrossEntropy), Just(Loss::Mse)],
        1u32..1024,
        1u32..100,
        prop::sample::subsequence(vec![Metric::Accuracy, Metric::F1Score], 0..=2),
    )
        .prop_map(|(optimizer, learning_rate, loss, batch_size, epochs, metrics)| TrainingConfig {
            optimizer,
            learning_rate,
            loss,
            batch_size,
            epochs,
            metrics,
        });
    let dataset = ("[a-z][a-z0-9_]{0,8}", "[a-z/]{1,12}", any::<bool>(), any::<bool>()).prop_map(|(name, path, c, i)| {
        DatasetRef {
            name,
            path,
            task: if c { Task::Classification } else { Task::Regression },
            input_format: if i { InputFormat::Images } else { InputFormat::Sequences },
        }
    });
    (
        "[A-Za-z_][A-Za-z0-9_]{0,10}",
        prop::collection::vec(step(), 1..12),
        prop::option::of(config),
        prop::collection::vec(dataset, 0..3).prop_map(|mut ds| {
            ds.sort_by(|a, b| a.name.cmp(&b.name));
            ds.dedup_by(|a, b| a.name == b.name);
            ds
        }),
        prop::option::of(prop::collection::vec(1u64..256, 1..4)),
    )
        .prop_map(|(name, steps, config, datasets, input)| {
            let mut nn = PivotNN::new(name);
            let mut last = INPUT.to_string();
            let mut before_last: Option<String> = None;
            for (i, step) in steps.into_iter().enumerate() {
                let name = format!("m{i}");
                let module = match step {
                    Step::Layer(layer, act, span) => {
                        ModuleSpec::layer(&name, layer, act, &last).with_span(span.map(|(l, c)| Span::new(l, c)))
                    }
                    Step::Unary(op) => ModuleSpec::new(&name, ModuleKind::TensorOp(op), vec![last.clone()]),
                    Step::Join(op) => match &before_last {
                        Some(b) => ModuleSpec::new(&name, ModuleKind::TensorOp(op), vec![b.clone(), last.clone()]),
                        None => continue,
                    },
                };
                nn.modules.push(module);
                before_last = Some(std::mem::replace(&mut last, name));
            }
            if nn.modules.is_empty() {
                nn.modules.push(ModuleSpec::layer("m0", Layer::Flatten, ActivationRef::None, INPUT));
            }
            nn.config = config;
            nn.datasets = datasets;
            nn.input_shape = input.map(|d| TensorShape::batched(&d));
            nn
        })
}

proptest! {
    #[test]
    fn generated_networks_are_valid(nn in network()) {
        prop_assert_eq!(validate(&nn), vec![]);
    }

    #[test]
    fn serialize_then_deserialize_is_identity(nn in network()) {
        let bytes = serialize(&nn).unwrap();
        let back = deserialize(&bytes).unwrap();
        prop_assert_eq!(&back, &nn);
        prop_assert_eq!(serialize(&back).unwrap(), bytes);
    }
}

fn base() -> PivotNN {
    let mut nn = PivotNN::new("Net");
    nn.modules = vec![
        ModuleSpec::layer(
            "conv",
            Layer::Conv(ConvAttrs {
                rank: SpatialRank::Two,
                in_channels: None,
                out_channels: 8,
                kernel: vec![3, 3],
                stride: vec![1, 1],
                padding: Padding::Valid,
            }),
            ActivationRef::Literal(Activation::Relu),
            INPUT,
        ),
        ModuleSpec::new("swap", ModuleKind::TensorOp(TensorOp::Permute { order: vec![0, 2, 1, 3] }), vec!["conv".into()]),
        ModuleSpec::layer("flat", Layer::Flatten, ActivationRef::None, "swap"),
        ModuleSpec::layer("drop", Layer::Dropout(DropoutAttrs { rate: 0.5 }), ActivationRef::None, "flat"),
        ModuleSpec::layer(
            "fc",
            Layer::Linear(LinearAttrs { in_features: None, out_features: 10 }),
            ActivationRef::None,
            "drop",
        ),
        ModuleSpec::new("sum", ModuleKind::TensorOp(TensorOp::Add), vec!["fc".into(), "fc".into()]),
    ];
    nn.input_shape = Some(TensorShape::batched(&[28, 28, 1]));
    nn.config = Some(TrainingConfig {
        optimizer: Optimizer::Adam,
        learning_rate: 0.001,
        loss: Loss::CrossEntropy,
        batch_size: 32,
        epochs: 1,
        metrics: vec![Metric::Accuracy],
    });
    nn.datasets = vec![DatasetRef {
        name: "mnist".into(),
        path: "data/mnist".into(),
        task: Task::Classification,
        input_format: InputFormat::Images,
    }];
    nn
}

fn layer_mut<'a>(nn: &'a mut PivotNN, name: &str) -> &'a mut Layer {
    let m = nn.modules.iter_mut().find(|m| m.name == name).unwrap();
    &mut m.as_layer_mut().unwrap().layer
}

#[test]
fn each_invariant_is_caught_by_a_single_mutation() {
    assert!(validate(&base()).is_empty(), "{:?}", validate(&base()));
    type Mutation = fn(&mut PivotNN);
    let mutations: Vec<(Rule, Mutation)> = vec![
        (Rule::EmptyNetwork, |nn| nn.modules.clear()),
        (Rule::InvalidName, |nn| nn.name = "2net".into()),
        (Rule::DuplicateName, |nn| {
            nn.modules.insert(4, ModuleSpec::layer("drop", Layer::Flatten, ActivationRef::None, "flat"))
        }),
        (Rule::UnknownInput, |nn| nn.modules[5].inputs = vec!["fc".into(), "ghost".into()]),
        (Rule::CycleOrForwardRef, |nn| nn.modules[5].inputs = vec!["fc".into(), "sum".into()]),
        // the first module has to read from somewhere else
        (Rule::NoInputConsumer, |nn| nn.modules[0].inputs = vec!["ghost".into()]),
        (Rule::MultipleOutputs, |nn| {
            nn.modules.push(ModuleSpec::layer("extra", Layer::Flatten, ActivationRef::None, "drop"))
        }),
        (Rule::InputArity, |nn| nn.modules[5].inputs = vec!["fc".into()]),
        (Rule::AttributeRange, |nn| {
            if let Layer::Conv(c) = layer_mut(nn, "conv") {
                c.kernel = vec![3];
            }
        }),
        (Rule::PermuteOrder, |nn| nn.modules[1].kind = ModuleKind::TensorOp(TensorOp::Permute { order: vec![0, 2, 2, 3] })),
        (Rule::ShapeForm, |nn| nn.input_shape = Some(TensorShape::new(vec![Dim::Known(28), Dim::Batch]))),
        (Rule::UnknownSubNetwork, |nn| {
            nn.modules.insert(1, ModuleSpec::new("block", ModuleKind::SubNN("Block".into()), vec!["conv".into()]));
            nn.modules[2].inputs = vec!["block".into()];
        }),
        (Rule::ConfigRange, |nn| nn.config.as_mut().unwrap().batch_size = 0),
        (Rule::DatasetPath, |nn| nn.datasets[0].path.clear()),
    ];
    for (rule, mutate) in mutations {
        let mut nn = base();
        mutate(&mut nn);
        let rules: Vec<Rule> = validate(&nn).into_iter().map(|d| d.rule).collect();
        let expected = match rule {
            Rule::NoInputConsumer => vec![Rule::UnknownInput, rule],
            _ => vec![rule],
        };
        assert_eq!(rules, expected, "mutation for {rule:?}");
        let bytes = serialize(&nn);
        if let Ok(bytes) = bytes {
            assert!(deserialize(&bytes).is_err(), "{rule:?} document accepted");
        }
    }
}
