// Train the reference CNN on synthetic churn images and save its weights.

use churnstack::convnet::{accuracy_on, build_custom_cnn, load_weights, save_weights, train, TrainConfig};
use churnstack::imaging::convert_dataset;
use churnstack::stacker::{generate_synthetic, SyntheticSpec};
use churnstack::tabular::Preprocessor;

fn main() {
    let spec = SyntheticSpec {
        n: 300,
        d: 12,
        churn_rate: 0.5,
        separation: 3.0,
        noise: 1.0,
        seed: 1,
        direction_seed: 2,
        shift: 0.0,
    };
    let raw = generate_synthetic(&spec).expect("synthetic");
    let (_, data) = Preprocessor::fit(&raw, 0.95).expect("preprocess");
    let images = convert_dataset(&data, 32).expect("images");

    let mut net = build_custom_cnn(32, 7).expect("net");
    println!("{} parameters", net.param_count());
    let cfg = TrainConfig {
        epochs: 5,
        ..TrainConfig::default()
    };
    let curve = train(&mut net, &images, data.labels(), &cfg).expect("train");
    for (e, loss) in curve.iter().enumerate() {
        println!("epoch {}: loss {loss:.4}", e + 1);
    }
    println!(
        "training accuracy {:.3}",
        accuracy_on(&net, &images, data.labels()).expect("accuracy")
    );

    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("cnn.weights");
    save_weights(&net, &path).expect("save");
    let mut copy = build_custom_cnn(32, 0).expect("net");
    load_weights(&mut copy, &path).expect("load");
    assert_eq!(
        copy.predict_proba(&images[0].pixels).unwrap(),
        net.predict_proba(&images[0].pixels).unwrap()
    );
    println!("weights round-trip through {}", path.display());
}
