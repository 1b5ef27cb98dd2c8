//! Text weight files: a magic line, then per layer a header
//! `layer <index> <kind> <dims...>` followed by its parameters, one per line.
//! Conv kernels are written in kh x kw x cin x cout order and dense weights in
//! nin x nout order, each followed by the biases.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::layer::Layer;
use super::net::ConvNet;
use crate::error::{Error, Result};
use crate::textfmt::{fmt17, parse_f64};

pub const WEIGHT_MAGIC: &str = "TLDEEPE-CNN v1";

fn dims(layer: &Layer) -> Vec<usize> {
    match layer {
        Layer::Conv(c) => vec![c.kh, c.kw, c.cin, c.cout],
        Layer::MaxPool(p) => vec![p.h, p.w, p.stride],
        Layer::Dense(d) => vec![d.nin, d.nout],
        Layer::Relu | Layer::Softmax => vec![],
    }
}

fn dims_str(d: &[usize]) -> String {
    d.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
}

/// Parameters in file order.
fn file_order(layer: &Layer) -> Vec<f64> {
    match layer {
        Layer::Conv(c) => {
            let mut out = Vec::with_capacity(c.weights.len() + c.bias.len());
            for i in 0..c.kh {
                for j in 0..c.kw {
                    for ci in 0..c.cin {
                        for o in 0..c.cout {
                            out.push(c.weights[((o * c.cin + ci) * c.kh + i) * c.kw + j]);
                        }
                    }
                }
            }
            out.extend_from_slice(&c.bias);
            out
        }
        Layer::Dense(d) => {
            let mut out = Vec::with_capacity(d.weights.len() + d.bias.len());
            for i in 0..d.nin {
                for o in 0..d.nout {
                    out.push(d.weights[o * d.nin + i]);
                }
            }
            out.extend_from_slice(&d.bias);
            out
        }
        _ => Vec::new(),
    }
}

fn assign_file_order(layer: &mut Layer, vals: &[f64]) {
    match layer {
        Layer::Conv(c) => {
            let mut it = vals.iter();
            for i in 0..c.kh {
                for j in 0..c.kw {
                    for ci in 0..c.cin {
                        for o in 0..c.cout {
                            c.weights[((o * c.cin + ci) * c.kh + i) * c.kw + j] = *it.next().unwrap();
                        }
                    }
                }
            }
            c.bias.iter_mut().zip(it).for_each(|(b, v)| *b = *v);
        }
        Layer::Dense(d) => {
            let mut it = vals.iter();
            for i in 0..d.nin {
                for o in 0..d.nout {
                    d.weights[o * d.nin + i] = *it.next().unwrap();
                }
            }
            d.bias.iter_mut().zip(it).for_each(|(b, v)| *b = *v);
        }
        _ => {}
    }
}

pub fn weights_to_text(net: &ConvNet) -> String {
    let mut s = String::new();
    writeln!(s, "{WEIGHT_MAGIC}").unwrap();
    for (i, layer) in net.layers().iter().enumerate() {
        let d = dims(layer);
        if d.is_empty() {
            writeln!(s, "layer {i} {}", layer.kind()).unwrap();
        } else {
            writeln!(s, "layer {i} {} {}", layer.kind(), dims_str(&d)).unwrap();
        }
        for v in file_order(layer) {
            writeln!(s, "{}", fmt17(v)).unwrap();
        }
    }
    s
}

/// Loads parameters into `net`, whose architecture must match the file.
pub fn weights_from_text(net: &mut ConvNet, text: &str) -> Result<()> {
    let parse_err = |line: usize, message: String| Error::Parse {
        what: "weight file",
        line,
        message,
    };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    match lines.next() {
        Some((_, l)) if l == WEIGHT_MAGIC => {}
        _ => return Err(parse_err(1, format!("expected '{WEIGHT_MAGIC}'"))),
    }
    let mut staged = Vec::with_capacity(net.layers().len());
    for (i, layer) in net.layers().iter().enumerate() {
        let (ln, header) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("file ends before layer {i}")))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() < 3 || fields[0] != "layer" || fields[1] != i.to_string() {
            return Err(parse_err(ln, format!("expected header for layer {i}")));
        }
        let found_dims: Vec<usize> = fields[3..]
            .iter()
            .map(|f| f.parse().map_err(|_| parse_err(ln, format!("bad dimension '{f}'"))))
            .collect::<Result<_>>()?;
        let expected = format!("{} {}", layer.kind(), dims_str(&dims(layer)));
        let found = format!("{} {}", fields[2], dims_str(&found_dims));
        if expected != found {
            return Err(Error::ShapeMismatch {
                layer: i,
                expected: expected.trim_end().to_string(),
                found: found.trim_end().to_string(),
            });
        }
        let count = layer.param_count();
        let mut vals = Vec::with_capacity(count);
        for _ in 0..count {
            let (ln, l) = lines
                .next()
                .ok_or_else(|| parse_err(0, format!("file truncated inside layer {i}")))?;
            vals.push(parse_f64(l).ok_or_else(|| parse_err(ln, format!("bad value '{l}'")))?);
        }
        staged.push(vals);
    }
    if let Some((ln, l)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(parse_err(ln, format!("unexpected trailing content '{l}'")));
    }
    for (layer, vals) in net.layers_mut().iter_mut().zip(&staged) {
        assign_file_order(layer, vals);
    }
    Ok(())
}

pub fn save_weights(net: &ConvNet, path: &Path) -> Result<()> {
    fs::write(path, weights_to_text(net)).map_err(|e| Error::io(path, e))
}

pub fn load_weights(net: &mut ConvNet, path: &Path) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    weights_from_text(net, &text)
}
