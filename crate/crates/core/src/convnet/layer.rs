use crate::error::{Error, Result};

/// Activation shape in channel-major (C, H, W) order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shape {
    pub c: usize,
    pub h: usize,
    pub w: usize,
}

impl Shape {
    pub const fn new(h: usize, w: usize, c: usize) -> Self {
        Shape { c, h, w }
    }

    pub fn len(&self) -> usize {
        self.c * self.h * self.w
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.h, self.w, self.c)
    }
}

/// Convolution with kernel stored as `[cout][cin][kh][kw]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv2d {
    pub kh: usize,
    pub kw: usize,
    pub cin: usize,
    pub cout: usize,
    pub stride: usize,
    pub pad: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv2d {
    pub fn new(kh: usize, kw: usize, cin: usize, cout: usize, stride: usize, pad: usize) -> Self {
        Conv2d {
            kh,
            kw,
            cin,
            cout,
            stride,
            pad,
            weights: vec![0.0; kh * kw * cin * cout],
            bias: vec![0.0; cout],
        }
    }

    #[inline]
    fn widx(&self, o: usize, c: usize, i: usize, j: usize) -> usize {
        ((o * self.cin + c) * self.kh + i) * self.kw + j
    }

    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        if input.c != self.cin {
            return Err(Error::invalid(format!(
                "conv expects {} input channels, got {}",
                self.cin, input.c
            )));
        }
        let ph = input.h + 2 * self.pad;
        let pw = input.w + 2 * self.pad;
        if self.kh > ph || self.kw > pw || self.stride == 0 {
            return Err(Error::invalid(format!(
                "kernel {}x{} does not fit padded input {ph}x{pw}",
                self.kh, self.kw
            )));
        }
        Ok(Shape {
            c: self.cout,
            h: (ph - self.kh) / self.stride + 1,
            w: (pw - self.kw) / self.stride + 1,
        })
    }

    /// Cross-correlation with zero padding.
    pub fn forward(&self, x: &[f64], input: Shape) -> Result<Vec<f64>> {
        let out = self.output_shape(input)?;
        let (oh, ow) = (out.h, out.w);
        let mut y = vec![0.0; out.len()];
        for o in 0..self.cout {
            let plane = &mut y[o * oh * ow..(o + 1) * oh * ow];
            plane.fill(self.bias[o]);
            for c in 0..self.cin {
                let xin = &x[c * input.h * input.w..(c + 1) * input.h * input.w];
                for i in 0..self.kh {
                    for j in 0..self.kw {
                        let wv = self.weights[self.widx(o, c, i, j)];
                        if self.stride == 1 && self.pad == 0 {
                            for oy in 0..oh {
                                let src = &xin[(oy + i) * input.w + j..(oy + i) * input.w + j + ow];
                                let dst = &mut plane[oy * ow..(oy + 1) * ow];
                                for (d, s) in dst.iter_mut().zip(src) {
                                    *d += wv * s;
                                }
                            }
                        } else {
                            for oy in 0..oh {
                                let iy = (oy * self.stride + i) as isize - self.pad as isize;
                                if iy < 0 || iy >= input.h as isize {
                                    continue;
                                }
                                for ox in 0..ow {
                                    let ix = (ox * self.stride + j) as isize - self.pad as isize;
                                    if ix < 0 || ix >= input.w as isize {
                                        continue;
                                    }
                                    plane[oy * ow + ox] += wv * xin[iy as usize * input.w + ix as usize];
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(y)
    }

    /// Accumulates parameter gradients into `gw`/`gb` and, when `dx` is given,
    /// the input gradient.
    pub fn backward(
        &self,
        x: &[f64],
        input: Shape,
        dy: &[f64],
        gw: &mut [f64],
        gb: &mut [f64],
        mut dx: Option<&mut [f64]>,
    ) {
        let out = self.output_shape(input).expect("shape checked in forward");
        let (oh, ow) = (out.h, out.w);
        for o in 0..self.cout {
            let dplane = &dy[o * oh * ow..(o + 1) * oh * ow];
            gb[o] += dplane.iter().sum::<f64>();
            for c in 0..self.cin {
                let xoff = c * input.h * input.w;
                for i in 0..self.kh {
                    for j in 0..self.kw {
                        let wi = self.widx(o, c, i, j);
                        let wv = self.weights[wi];
                        let mut acc = 0.0;
                        for oy in 0..oh {
                            let iy = (oy * self.stride + i) as isize - self.pad as isize;
                            if iy < 0 || iy >= input.h as isize {
                                continue;
                            }
                            let row = xoff + iy as usize * input.w;
                            let drow = &dplane[oy * ow..(oy + 1) * ow];
                            if self.stride == 1 && self.pad == 0 {
                                let src = &x[row + j..row + j + ow];
                                acc += drow.iter().zip(src).map(|(d, s)| d * s).sum::<f64>();
                                if let Some(dx) = dx.as_deref_mut() {
                                    for (t, d) in dx[row + j..row + j + ow].iter_mut().zip(drow) {
                                        *t += wv * d;
                                    }
                                }
                            } else {
                                for (ox, d) in drow.iter().enumerate() {
                                    let ix = (ox * self.stride + j) as isize - self.pad as isize;
                                    if ix < 0 || ix >= input.w as isize {
                                        continue;
                                    }
                                    let xi = row + ix as usize;
                                    acc += d * x[xi];
                                    if let Some(dx) = dx.as_deref_mut() {
                                        dx[xi] += wv * d;
                                    }
                                }
                            }
                        }
                        gw[wi] += acc;
                    }
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxPool {
    pub h: usize,
    pub w: usize,
    pub stride: usize,
}

impl MaxPool {
    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        if self.h > input.h || self.w > input.w || self.stride == 0 {
            return Err(Error::invalid(format!(
                "pool window {}x{} does not fit input {input}",
                self.h, self.w
            )));
        }
        Ok(Shape {
            c: input.c,
            h: (input.h - self.h) / self.stride + 1,
            w: (input.w - self.w) / self.stride + 1,
        })
    }

    /// Returns pooled values and, per output, the flat input index of the
    /// maximum. Ties resolve to the first position in row-major order.
    pub fn forward(&self, x: &[f64], input: Shape) -> Result<(Vec<f64>, Vec<usize>)> {
        let out = self.output_shape(input)?;
        let mut y = Vec::with_capacity(out.len());
        let mut arg = Vec::with_capacity(out.len());
        for c in 0..input.c {
            let base = c * input.h * input.w;
            for oy in 0..out.h {
                for ox in 0..out.w {
                    let mut best = base + oy * self.stride * input.w + ox * self.stride;
                    for i in 0..self.h {
                        for j in 0..self.w {
                            let idx = base + (oy * self.stride + i) * input.w + ox * self.stride + j;
                            if x[idx] > x[best] {
                                best = idx;
                            }
                        }
                    }
                    y.push(x[best]);
                    arg.push(best);
                }
            }
        }
        Ok((y, arg))
    }
}

/// Fully connected layer, weights stored `[nout][nin]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    pub nin: usize,
    pub nout: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn new(nin: usize, nout: usize) -> Self {
        Dense {
            nin,
            nout,
            weights: vec![0.0; nin * nout],
            bias: vec![0.0; nout],
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .chunks(self.nin)
            .zip(&self.bias)
            .map(|(row, b)| b + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
            .collect()
    }

    pub fn backward(&self, x: &[f64], dy: &[f64], gw: &mut [f64], gb: &mut [f64], dx: Option<&mut [f64]>) {
        for (o, d) in dy.iter().enumerate() {
            gb[o] += d;
            for (g, v) in gw[o * self.nin..(o + 1) * self.nin].iter_mut().zip(x) {
                *g += d * v;
            }
        }
        if let Some(dx) = dx {
            for (o, d) in dy.iter().enumerate() {
                for (t, w) in dx.iter_mut().zip(&self.weights[o * self.nin..(o + 1) * self.nin]) {
                    *t += d * w;
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Conv(Conv2d),
    Relu,
    MaxPool(MaxPool),
    Dense(Dense),
    Softmax,
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Conv(_) => "conv",
            Layer::Relu => "relu",
            Layer::MaxPool(_) => "maxpool",
            Layer::Dense(_) => "dense",
            Layer::Softmax => "softmax",
        }
    }

    pub fn output_shape(&self, input: Shape) -> Result<Shape> {
        match self {
            Layer::Conv(c) => c.output_shape(input),
            Layer::Relu | Layer::Softmax => Ok(input),
            Layer::MaxPool(p) => p.output_shape(input),
            Layer::Dense(d) => {
                if input.len() != d.nin {
                    return Err(Error::invalid(format!(
                        "dense expects {} inputs, got {}",
                        d.nin,
                        input.len()
                    )));
                }
                Ok(Shape { c: d.nout, h: 1, w: 1 })
            }
        }
    }

    pub fn params(&self) -> Option<(&[f64], &[f64])> {
        match self {
            Layer::Conv(c) => Some((&c.weights, &c.bias)),
            Layer::Dense(d) => Some((&d.weights, &d.bias)),
            _ => None,
        }
    }

    pub fn params_mut(&mut self) -> Option<(&mut [f64], &mut [f64])> {
        match self {
            Layer::Conv(c) => Some((&mut c.weights, &mut c.bias)),
            Layer::Dense(d) => Some((&mut d.weights, &mut d.bias)),
            _ => None,
        }
    }

    pub fn param_count(&self) -> usize {
        self.params().map_or(0, |(w, b)| w.len() + b.len())
    }
}

/// Numerically stable softmax.
pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Softmax probabilities, cross-entropy loss `-ln p[label]`, and the gradient
/// of the loss with respect to the logits.
pub fn softmax_cross_entropy(logits: &[f64], label: usize) -> (Vec<f64>, f64, Vec<f64>) {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    let probs = softmax(logits);
    let loss = lse - logits[label];
    let mut d = probs.clone();
    d[label] -= 1.0;
    (probs, loss, d)
}
