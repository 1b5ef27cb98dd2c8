use rand::seq::SliceRandom;

use super::Class;
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Stratified two-way partition. Each class's indices are shuffled with the
/// seeded generator and `floor(fraction_a * n_class + 0.5)` of them go to A.
/// Both returned index lists are sorted ascending.
pub fn stratified_split(labels: &[Class], fraction_a: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction_a > 0.0 && fraction_a < 1.0) {
        return Err(Error::invalid(format!("split fraction {fraction_a} outside (0, 1)")));
    }
    let mut rng = seeded(seed);
    let mut a = Vec::new();
    let mut b = Vec::new();
    for class in Class::BOTH {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.is_empty() {
            return Err(Error::invalid(format!("no {class} rows to split")));
        }
        idx.shuffle(&mut rng);
        let take = (fraction_a * idx.len() as f64 + 0.5).floor() as usize;
        a.extend_from_slice(&idx[..take]);
        b.extend_from_slice(&idx[take..]);
    }
    a.sort_unstable();
    b.sort_unstable();
    Ok((a, b))
}
