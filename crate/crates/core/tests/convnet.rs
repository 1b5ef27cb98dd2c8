use churnstack::convnet::{
    backward_and_step, build_custom_cnn, numeric_gradient_check, train, train_on, weights_from_text, weights_to_text,
    ConvNet, LayerSpec, Sgd, Shape, TrainConfig, CONV_BLOCKS,
};
use churnstack::imaging::FeatureImage;
use churnstack::tabular::Class;
use churnstack::Error;
use rand::Rng;

fn random_input(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = churnstack::rng::seeded(seed);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

/// Class is encoded by which half of the image is bright.
fn separable_images(n: usize, size: usize) -> (Vec<FeatureImage>, Vec<Class>) {
    let mut rng = churnstack::rng::seeded(5);
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for i in 0..n {
        let churn = i % 2 == 0;
        let pixels = (0..size * size)
            .map(|p| {
                let top = p / size < size / 2;
                let base = if top == churn { 0.8 } else { 0.2 };
                base + 0.1 * rng.random::<f64>()
            })
            .collect();
        images.push(FeatureImage {
            size,
            pixels,
            source_index: i,
        });
        labels.push(if churn { Class::Churner } else { Class::NonChurner });
    }
    (images, labels)
}

#[test]
fn gradient_check_full_network() {
    for seed in 0..3 {
        let net = build_custom_cnn(32, seed).unwrap();
        let x = random_input(seed + 100, 32 * 32);
        for label in 0..2 {
            let err = numeric_gradient_check(&net, &x, label, 1e-5).unwrap();
            assert!(err <= 1e-4, "seed {seed} label {label}: {err:e}");
        }
    }
}

#[test]
fn gradient_check_dense_only() {
    let net = ConvNet::build(
        Shape::new(1, 1, 7),
        &[LayerSpec::Dense { nout: 2 }, LayerSpec::Softmax],
        9,
    )
    .unwrap();
    let x = random_input(1, 7);
    for label in 0..2 {
        assert!(numeric_gradient_check(&net, &x, label, 1e-5).unwrap() <= 1e-6);
    }
}

#[test]
fn frozen_layers_do_not_change() {
    let (images, labels) = separable_images(16, 32);
    let mut net = build_custom_cnn(32, 1).unwrap();
    net.set_frozen_prefix(CONV_BLOCKS).unwrap();
    let before = net.clone();
    train(
        &mut net,
        &images,
        &labels,
        &TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    for (i, (a, b)) in before.layers().iter().zip(net.layers()).enumerate() {
        if i < CONV_BLOCKS {
            assert_eq!(a, b, "layer {i} moved");
        } else if a.param_count() > 0 {
            assert_ne!(a, b, "layer {i} did not train");
        }
    }
}

#[test]
fn zero_momentum_is_plain_gradient_descent() {
    let net = build_custom_cnn(32, 2).unwrap();
    let x = random_input(3, 32 * 32);
    let cfg = TrainConfig {
        momentum: 0.0,
        learning_rate: 0.05,
        ..TrainConfig::default()
    };
    let mut grads = net.zero_gradients();
    net.accumulate_gradients(&x, Class::Churner.index(), &mut grads, 0)
        .unwrap();

    let mut stepped = net.clone();
    let mut opt = Sgd::new(&stepped);
    backward_and_step(&mut stepped, &mut opt, &[&x], &[Class::Churner], &cfg).unwrap();

    for (li, g) in grads.iter().enumerate() {
        let Some((gw, gb)) = g else { continue };
        let (w0, b0) = net.layers()[li].params().unwrap();
        let (w1, b1) = stepped.layers()[li].params().unwrap();
        for ((p0, p1), g) in w0.iter().chain(b0).zip(w1.iter().chain(b1)).zip(gw.iter().chain(gb)) {
            assert!((p1 - (p0 - cfg.learning_rate * g)).abs() <= 1e-15);
        }
    }
}

#[test]
fn learns_separable_images() {
    let (images, labels) = separable_images(20, 32);
    let mut net = build_custom_cnn(32, 4).unwrap();
    let cfg = TrainConfig {
        epochs: 50,
        batch_size: 4,
        ..TrainConfig::default()
    };
    let curve = train(&mut net, &images, &labels, &cfg).unwrap();
    assert!(curve.last().unwrap() < curve.first().unwrap());
    let acc = churnstack::convnet::accuracy_on(&net, &images, &labels).unwrap();
    assert_eq!(acc, 1.0);
}

#[test]
fn training_is_deterministic() {
    let (images, labels) = separable_images(12, 32);
    let cfg = TrainConfig {
        epochs: 2,
        seed: 17,
        ..TrainConfig::default()
    };
    let run = || {
        let mut net = build_custom_cnn(32, 8).unwrap();
        let curve = train(&mut net, &images, &labels, &cfg).unwrap();
        (weights_to_text(&net), curve)
    };
    assert_eq!(run(), run());
}

#[test]
fn zero_epochs_leave_weights_untouched() {
    let (images, labels) = separable_images(6, 32);
    let mut net = build_custom_cnn(32, 0).unwrap();
    let before = net.clone();
    let curve = train(
        &mut net,
        &images,
        &labels,
        &TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        },
    )
    .unwrap();
    assert!(curve.is_empty());
    assert_eq!(net, before);
}

#[test]
fn single_class_training_is_rejected() {
    let x = random_input(0, 32 * 32);
    let mut net = build_custom_cnn(32, 0).unwrap();
    let err = train_on(&mut net, &[&x], &[Class::Churner], &TrainConfig::default());
    assert!(matches!(err, Err(Error::InvalidInput(_))));
}

#[test]
fn weight_text_round_trip_and_shape_mismatch() {
    let net = build_custom_cnn(32, 6).unwrap();
    let text = weights_to_text(&net);
    assert!(text.starts_with("TLDEEPE-CNN v1"));
    let mut copy = build_custom_cnn(32, 7).unwrap();
    weights_from_text(&mut copy, &text).unwrap();
    assert_eq!(weights_to_text(&copy), text);

    let mut other = ConvNet::build(
        Shape::new(32, 32, 1),
        &[
            LayerSpec::Conv {
                kh: 5,
                kw: 5,
                cout: 6,
                stride: 1,
                pad: 0,
            },
            LayerSpec::Relu,
            LayerSpec::MaxPool { h: 2, w: 2, stride: 2 },
            LayerSpec::Dense { nout: 2 },
            LayerSpec::Softmax,
        ],
        0,
    )
    .unwrap();
    assert!(matches!(
        weights_from_text(&mut other, &text),
        Err(Error::ShapeMismatch { layer: 0, .. })
    ));
}
