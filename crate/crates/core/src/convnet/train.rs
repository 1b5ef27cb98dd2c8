use std::path::Path;

use rand::seq::SliceRandom;

use super::io::load_weights;
use super::net::{build_custom_cnn, ConvNet, Gradients};
use crate::error::{Error, Result};
use crate::imaging::FeatureImage;
use crate::rng::seeded;
use crate::tabular::Class;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.01,
            momentum: 0.9,
            epochs: 10,
            batch_size: 32,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::invalid("momentum must lie in [0, 1)"));
        }
        if self.batch_size == 0 {
            return Err(Error::invalid("batch size must be at least 1"));
        }
        Ok(())
    }
}

/// SGD with momentum: `v <- m v - lr g`, `theta <- theta + v`.
#[derive(Clone, Debug)]
pub struct Sgd {
    velocity: Gradients,
}

impl Sgd {
    pub fn new(net: &ConvNet) -> Self {
        Sgd {
            velocity: net.zero_gradients(),
        }
    }
}

/// One optimizer step on a mini-batch. Gradients are averaged over the batch
/// and only layers at index `>= frozen_prefix` are updated. Returns the mean loss.
pub fn backward_and_step(
    net: &mut ConvNet,
    opt: &mut Sgd,
    inputs: &[&[f64]],
    labels: &[Class],
    cfg: &TrainConfig,
) -> Result<f64> {
    if inputs.is_empty() || inputs.len() != labels.len() {
        return Err(Error::invalid("batch must be non-empty with one label per input"));
    }
    let frozen = net.frozen_prefix();
    let mut grads = net.zero_gradients();
    let mut total = 0.0;
    for (x, y) in inputs.iter().zip(labels) {
        total += net.accumulate_gradients(x, y.index(), &mut grads, frozen)?;
    }
    let n = inputs.len() as f64;
    let loss = total / n;
    if !loss.is_finite() {
        return Err(Error::Diverged(format!("loss became {loss}")));
    }
    for (i, (layer, (g, v))) in net
        .layers_mut()
        .iter_mut()
        .zip(grads.iter().zip(opt.velocity.iter_mut()))
        .enumerate()
    {
        if i < frozen {
            continue;
        }
        let (Some((gw, gb)), Some((vw, vb)), Some((pw, pb))) = (g, v.as_mut(), layer.params_mut()) else {
            continue;
        };
        for ((p, v), g) in pw
            .iter_mut()
            .zip(vw.iter_mut())
            .zip(gw)
            .chain(pb.iter_mut().zip(vb.iter_mut()).zip(gb))
        {
            let g = g / n;
            if !g.is_finite() {
                return Err(Error::Diverged(format!("non-finite gradient in layer {i}")));
            }
            *v = cfg.momentum * *v - cfg.learning_rate * g;
            *p += *v;
        }
    }
    Ok(loss)
}

/// Mini-batch training over shuffled epochs. Returns the mean loss per epoch.
pub fn train(net: &mut ConvNet, images: &[FeatureImage], labels: &[Class], cfg: &TrainConfig) -> Result<Vec<f64>> {
    let inputs: Vec<&[f64]> = images.iter().map(|im| im.pixels.as_slice()).collect();
    train_on(net, &inputs, labels, cfg)
}

pub fn train_on(net: &mut ConvNet, inputs: &[&[f64]], labels: &[Class], cfg: &TrainConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    if inputs.len() != labels.len() {
        return Err(Error::invalid("one label per input required"));
    }
    if Class::BOTH.iter().any(|c| !labels.contains(c)) {
        return Err(Error::invalid("training data must contain both classes"));
    }
    let mut rng = seeded(cfg.seed);
    let mut opt = Sgd::new(net);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut curve = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let xs: Vec<&[f64]> = chunk.iter().map(|&i| inputs[i]).collect();
            let ys: Vec<Class> = chunk.iter().map(|&i| labels[i]).collect();
            sum += backward_and_step(net, &mut opt, &xs, &ys, cfg)? * chunk.len() as f64;
        }
        curve.push(sum / inputs.len() as f64);
    }
    Ok(curve)
}

/// Loads pretrained weights into a fresh reference network, freezes the first
/// `frozen_prefix` layers and trains the rest on the target data.
pub fn transfer_finetune(
    pretrained: &Path,
    images: &[FeatureImage],
    labels: &[Class],
    frozen_prefix: usize,
    cfg: &TrainConfig,
) -> Result<(ConvNet, Vec<f64>)> {
    let size = images
        .first()
        .map(|im| im.size)
        .ok_or_else(|| Error::invalid("no target images"))?;
    let mut net = build_custom_cnn(size, cfg.seed)?;
    load_weights(&mut net, pretrained)?;
    net.set_frozen_prefix(frozen_prefix)?;
    let curve = train(&mut net, images, labels, cfg)?;
    Ok((net, curve))
}

pub fn accuracy_on(net: &ConvNet, images: &[FeatureImage], labels: &[Class]) -> Result<f64> {
    let mut correct = 0usize;
    for (im, y) in images.iter().zip(labels) {
        let p = net.predict_proba(&im.pixels)?;
        let pred = if p[0] > p[1] { Class::Churner } else { Class::NonChurner };
        correct += usize::from(pred == *y);
    }
    Ok(correct as f64 / images.len().max(1) as f64)
}
