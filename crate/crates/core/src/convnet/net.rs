use rand_distr::{Distribution, Normal};

use super::layer::{softmax, softmax_cross_entropy, Conv2d, Dense, Layer, MaxPool, Shape};
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Architecture description used to build a [`ConvNet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerSpec {
    Conv {
        kh: usize,
        kw: usize,
        cout: usize,
        stride: usize,
        pad: usize,
    },
    Relu,
    MaxPool {
        h: usize,
        w: usize,
        stride: usize,
    },
    Dense {
        nout: usize,
    },
    Softmax,
}

/// Conv, relu and pool for both convolution blocks.
pub const CONV_BLOCKS: usize = 6;

pub const CUSTOM_CNN: [LayerSpec; 8] = [
    LayerSpec::Conv {
        kh: 3,
        kw: 3,
        cout: 6,
        stride: 1,
        pad: 0,
    },
    LayerSpec::Relu,
    LayerSpec::MaxPool { h: 2, w: 2, stride: 2 },
    LayerSpec::Conv {
        kh: 5,
        kw: 5,
        cout: 10,
        stride: 1,
        pad: 0,
    },
    LayerSpec::Relu,
    LayerSpec::MaxPool { h: 2, w: 2, stride: 2 },
    LayerSpec::Dense { nout: 2 },
    LayerSpec::Softmax,
];

#[derive(Clone, Debug, PartialEq)]
pub struct ConvNet {
    input_shape: Shape,
    layers: Vec<Layer>,
    frozen_prefix: usize,
}

/// Per-layer parameter gradients (`None` for parameter-free layers).
pub type Gradients = Vec<Option<(Vec<f64>, Vec<f64>)>>;

/// Activations recorded during a forward pass, needed for backprop.
struct Trace {
    /// `acts[i]` is the input to layer `i`; the last entry is the logits.
    acts: Vec<Vec<f64>>,
    shapes: Vec<Shape>,
    argmax: Vec<Option<Vec<usize>>>,
}

impl ConvNet {
    /// Builds a network with He-scaled Gaussian weights and zero biases.
    pub fn build(input: Shape, specs: &[LayerSpec], seed: u64) -> Result<ConvNet> {
        let mut rng = seeded(seed);
        let mut shape = input;
        let mut layers = Vec::with_capacity(specs.len());
        for spec in specs {
            let layer = match *spec {
                LayerSpec::Conv {
                    kh,
                    kw,
                    cout,
                    stride,
                    pad,
                } => {
                    let mut c = Conv2d::new(kh, kw, shape.c, cout, stride, pad);
                    let std = (2.0 / (kh * kw * shape.c) as f64).sqrt();
                    let normal = Normal::new(0.0, std).expect("positive std");
                    c.weights.iter_mut().for_each(|w| *w = normal.sample(&mut rng));
                    Layer::Conv(c)
                }
                LayerSpec::Relu => Layer::Relu,
                LayerSpec::MaxPool { h, w, stride } => Layer::MaxPool(MaxPool { h, w, stride }),
                LayerSpec::Dense { nout } => {
                    let mut d = Dense::new(shape.len(), nout);
                    let std = (2.0 / shape.len() as f64).sqrt();
                    let normal = Normal::new(0.0, std).expect("positive std");
                    d.weights.iter_mut().for_each(|w| *w = normal.sample(&mut rng));
                    Layer::Dense(d)
                }
                LayerSpec::Softmax => Layer::Softmax,
            };
            shape = layer.output_shape(shape)?;
            layers.push(layer);
        }
        ConvNet::from_layers(input, layers)
    }

    /// Validates a layer stack: shapes chain, exactly one softmax at the end,
    /// and two outputs.
    pub fn from_layers(input_shape: Shape, layers: Vec<Layer>) -> Result<ConvNet> {
        let net = ConvNet {
            input_shape,
            layers,
            frozen_prefix: 0,
        };
        let shapes = net.shapes()?;
        let softmaxes = net.layers.iter().filter(|l| matches!(l, Layer::Softmax)).count();
        if softmaxes != 1 || !matches!(net.layers.last(), Some(Layer::Softmax)) {
            return Err(Error::invalid("network must end in exactly one softmax layer"));
        }
        if shapes.last().map(Shape::len) != Some(2) {
            return Err(Error::invalid("network must produce two outputs"));
        }
        Ok(net)
    }

    pub fn input_shape(&self) -> Shape {
        self.input_shape
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn frozen_prefix(&self) -> usize {
        self.frozen_prefix
    }

    pub fn set_frozen_prefix(&mut self, f: usize) -> Result<()> {
        if f > self.layers.len() {
            return Err(Error::invalid(format!(
                "frozen prefix {f} exceeds layer count {}",
                self.layers.len()
            )));
        }
        self.frozen_prefix = f;
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(Layer::param_count).sum()
    }

    /// Input shape followed by the output shape of every layer.
    pub fn shapes(&self) -> Result<Vec<Shape>> {
        let mut out = vec![self.input_shape];
        let mut s = self.input_shape;
        for l in &self.layers {
            s = l.output_shape(s)?;
            out.push(s);
        }
        Ok(out)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_shape.len() {
            return Err(Error::invalid(format!(
                "input has {} values, network expects {}",
                x.len(),
                self.input_shape.len()
            )));
        }
        Ok(())
    }

    fn trace(&self, x: &[f64]) -> Result<Trace> {
        self.check_input(x)?;
        let body = &self.layers[..self.layers.len() - 1];
        let mut acts = Vec::with_capacity(body.len() + 1);
        let mut shapes = Vec::with_capacity(body.len() + 1);
        let mut argmax = Vec::with_capacity(body.len());
        let mut cur = x.to_vec();
        let mut shape = self.input_shape;
        for layer in body {
            let (next, arg) = match layer {
                Layer::Conv(c) => (c.forward(&cur, shape)?, None),
                Layer::Relu => (cur.iter().map(|v| v.max(0.0)).collect(), None),
                Layer::MaxPool(p) => {
                    let (y, a) = p.forward(&cur, shape)?;
                    (y, Some(a))
                }
                Layer::Dense(d) => (d.forward(&cur), None),
                Layer::Softmax => unreachable!("softmax is last"),
            };
            let next_shape = layer.output_shape(shape)?;
            acts.push(std::mem::replace(&mut cur, next));
            shapes.push(shape);
            argmax.push(arg);
            shape = next_shape;
        }
        acts.push(cur);
        shapes.push(shape);
        Ok(Trace { acts, shapes, argmax })
    }

    /// Pre-softmax outputs.
    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trace(x)?.acts.pop().expect("non-empty trace"))
    }

    /// Softmax outputs `[p_churn, p_nonchurn]`.
    pub fn predict_proba(&self, x: &[f64]) -> Result<[f64; 2]> {
        let p = softmax(&self.logits(x)?);
        Ok([p[0], p[1]])
    }

    pub fn loss(&self, x: &[f64], label: usize) -> Result<f64> {
        Ok(softmax_cross_entropy(&self.logits(x)?, label).1)
    }

    pub fn zero_gradients(&self) -> Gradients {
        self.layers
            .iter()
            .map(|l| l.params().map(|(w, b)| (vec![0.0; w.len()], vec![0.0; b.len()])))
            .collect()
    }

    /// Forward and backward pass for one sample. Parameter gradients of layers
    /// at index `>= stop_at` are added into `grads`; returns the loss.
    pub fn accumulate_gradients(&self, x: &[f64], label: usize, grads: &mut Gradients, stop_at: usize) -> Result<f64> {
        let trace = self.trace(x)?;
        let logits = trace.acts.last().expect("logits");
        let (_, loss, dlogits) = softmax_cross_entropy(logits, label);
        let mut delta = dlogits;
        let body = self.layers.len() - 1;
        for i in (stop_at..body).rev() {
            let input = &trace.acts[i];
            let shape = trace.shapes[i];
            let need_dx = i > stop_at;
            delta = match &self.layers[i] {
                Layer::Conv(c) => {
                    let (gw, gb) = grads[i].as_mut().expect("conv gradient slot");
                    let mut dx = if need_dx { vec![0.0; input.len()] } else { Vec::new() };
                    c.backward(input, shape, &delta, gw, gb, need_dx.then_some(dx.as_mut_slice()));
                    dx
                }
                Layer::Dense(d) => {
                    let (gw, gb) = grads[i].as_mut().expect("dense gradient slot");
                    let mut dx = if need_dx { vec![0.0; input.len()] } else { Vec::new() };
                    d.backward(input, &delta, gw, gb, need_dx.then_some(dx.as_mut_slice()));
                    dx
                }
                Layer::Relu => {
                    if !need_dx {
                        break;
                    }
                    input
                        .iter()
                        .zip(&delta)
                        .map(|(v, d)| if *v > 0.0 { *d } else { 0.0 })
                        .collect()
                }
                Layer::MaxPool(_) => {
                    if !need_dx {
                        break;
                    }
                    let mut dx = vec![0.0; input.len()];
                    for (&src, d) in trace.argmax[i].as_ref().expect("argmax").iter().zip(&delta) {
                        dx[src] += d;
                    }
                    dx
                }
                Layer::Softmax => unreachable!("softmax is last"),
            };
        }
        Ok(loss)
    }

    /// Zeroes the weights and biases of every dense layer.
    pub fn zero_dense_layers(&mut self) {
        for l in &mut self.layers {
            if let Layer::Dense(d) = l {
                d.weights.fill(0.0);
                d.bias.fill(0.0);
            }
        }
    }
}

/// The reference base learner: conv 3x3x6, relu, 2x2 max-pool, conv 5x5x10,
/// relu, 2x2 max-pool, dense to 2, softmax.
pub fn build_custom_cnn(input_size: usize, seed: u64) -> Result<ConvNet> {
    ConvNet::build(Shape::new(input_size, input_size, 1), &CUSTOM_CNN, seed)
}
