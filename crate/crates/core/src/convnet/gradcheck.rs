use super::net::ConvNet;
use crate::error::Result;

/// Compares analytic gradients with central differences
/// `(L(theta + h) - L(theta - h)) / 2h` for every parameter and returns the
/// largest `|a - n| / max(|a|, |n|, 1e-8)`.
pub fn numeric_gradient_check(net: &ConvNet, x: &[f64], label: usize, h: f64) -> Result<f64> {
    let mut analytic = net.zero_gradients();
    net.accumulate_gradients(x, label, &mut analytic, 0)?;
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for (li, g) in analytic.iter().enumerate() {
        let Some((gw, gb)) = g.as_ref() else {
            continue;
        };
        let grads: Vec<f64> = gw.iter().chain(gb).copied().collect();
        let n_weights = gw.len();
        for (k, a) in grads.into_iter().enumerate() {
            let orig = read_param(&probe, li, k, n_weights);
            write_param(&mut probe, li, k, n_weights, orig + h);
            let plus = probe.loss(x, label)?;
            write_param(&mut probe, li, k, n_weights, orig - h);
            let minus = probe.loss(x, label)?;
            write_param(&mut probe, li, k, n_weights, orig);
            let numeric = (plus - minus) / (2.0 * h);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    Ok(worst)
}

fn read_param(net: &ConvNet, layer: usize, k: usize, n_weights: usize) -> f64 {
    let (w, b) = net.layers()[layer].params().expect("parametric layer");
    if k < n_weights {
        w[k]
    } else {
        b[k - n_weights]
    }
}

fn write_param(net: &mut ConvNet, layer: usize, k: usize, n_weights: usize, v: f64) {
    let (w, b) = net.layers_mut()[layer].params_mut().expect("parametric layer");
    if k < n_weights {
        w[k] = v;
    } else {
        b[k - n_weights] = v;
    }
}
