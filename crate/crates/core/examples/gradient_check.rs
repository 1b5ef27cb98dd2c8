// Compare backpropagated gradients with central differences.

use churnstack::convnet::{build_custom_cnn, numeric_gradient_check};
use rand::Rng;

fn main() {
    let net = build_custom_cnn(32, 0).expect("net");
    for (i, s) in net.shapes().expect("shapes").iter().enumerate() {
        println!("layer {i}: {}x{}x{}", s.h, s.w, s.c);
    }
    let mut rng = churnstack::rng::seeded(100);
    let x: Vec<f64> = (0..32 * 32).map(|_| rng.random::<f64>()).collect();
    for label in 0..2 {
        let err = numeric_gradient_check(&net, &x, label, 1e-5).expect("check");
        println!("label {label}: max relative error {err:.2e}");
    }
}
