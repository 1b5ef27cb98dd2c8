// Pretrain on a plentiful source domain, then fine-tune on a small target
// with the convolutional layers frozen.

use churnstack::convnet::{
    accuracy_on, build_custom_cnn, save_weights, train, transfer_finetune, TrainConfig, CONV_BLOCKS,
};
use churnstack::imaging::convert_dataset;
use churnstack::stacker::{generate_synthetic, pretrain_reference, SyntheticSpec};
use churnstack::tabular::Preprocessor;

fn main() {
    let source = SyntheticSpec {
        n: 600,
        d: 16,
        churn_rate: 0.5,
        separation: 2.5632,
        noise: 1.0,
        seed: 10,
        direction_seed: 4,
        shift: 0.5,
    };
    let target = SyntheticSpec {
        n: 120,
        seed: 20,
        shift: 0.0,
        ..source.clone()
    };

    let cfg = TrainConfig {
        epochs: 3,
        ..TrainConfig::default()
    };
    let pretrained = pretrain_reference(&generate_synthetic(&source).unwrap(), 32, 0.95, &cfg).expect("pretrain");
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("pretrained.weights");
    save_weights(&pretrained, &path).expect("save");

    let (_, data) = Preprocessor::fit(&generate_synthetic(&target).unwrap(), 0.95).expect("preprocess");
    let images = convert_dataset(&data, 32).expect("images");
    let (tuned, curve) = transfer_finetune(&path, &images, data.labels(), CONV_BLOCKS, &cfg).expect("finetune");
    println!(
        "fine-tune loss {:?}",
        curve.iter().map(|l| format!("{l:.3}")).collect::<Vec<_>>()
    );

    let mut scratch = build_custom_cnn(32, cfg.seed).expect("net");
    train(&mut scratch, &images, data.labels(), &cfg).expect("train");
    println!(
        "target accuracy: transfer {:.3}, scratch {:.3}",
        accuracy_on(&tuned, &images, data.labels()).unwrap(),
        accuracy_on(&scratch, &images, data.labels()).unwrap()
    );
}
