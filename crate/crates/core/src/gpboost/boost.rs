use std::fmt::Write as _;

use super::evolve::{evolve_one_class, GpConfig, OneClassTask};
use super::program::{Columns, GpProgram};
use crate::error::{Error, Result};
use crate::tabular::Class;
use crate::textfmt::{fmt17, parse_f64};

/// Floor applied to a zero weighted error.
pub const MIN_ERROR: f64 = 1e-10;

pub const ENSEMBLE_MAGIC: &str = "TLDEEPE-GPA v1";

#[derive(Clone, Debug, PartialEq)]
pub struct Member {
    pub program: GpProgram,
    pub alpha: f64,
}

/// Per-class boosted one-class programs; prediction picks the class with the
/// largest alpha-weighted count of firing programs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoostedEnsemble {
    churner: Vec<Member>,
    nonchurner: Vec<Member>,
}

/// Diagnostics for one boosting round.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundRecord {
    pub class: Class,
    pub round: usize,
    pub accepted: bool,
    /// Weighted error before the update.
    pub error: f64,
    pub alpha: f64,
    /// Weighted error of the same program under the updated weights.
    pub post_update_error: f64,
    pub weight_sum: f64,
    pub min_weight: f64,
}

/// AdaBoost vote weight `0.5 ln((1 - e) / e)` with `e` floored at [`MIN_ERROR`].
pub fn vote_weight(error: f64) -> f64 {
    let e = error.max(MIN_ERROR);
    0.5 * ((1.0 - e) / e).ln()
}

fn round_seed(base: u64, class: Class, round: usize) -> u64 {
    let mut z = base ^ ((class.index() as u64 + 1) << 32) ^ round as u64;
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl BoostedEnsemble {
    pub fn new(churner: Vec<Member>, nonchurner: Vec<Member>) -> Self {
        BoostedEnsemble { churner, nonchurner }
    }

    pub fn members(&self, class: Class) -> &[Member] {
        match class {
            Class::Churner => &self.churner,
            Class::NonChurner => &self.nonchurner,
        }
    }

    fn members_mut(&mut self, class: Class) -> &mut Vec<Member> {
        match class {
            Class::Churner => &mut self.churner,
            Class::NonChurner => &mut self.nonchurner,
        }
    }

    /// Alpha-weighted vote `S_c = sum alpha_t [h_t(x) >= 0]`.
    pub fn class_sum(&self, class: Class, x: &[f64]) -> f64 {
        self.members(class)
            .iter()
            .filter(|m| m.program.fires(x))
            .map(|m| m.alpha)
            .sum()
    }

    /// Predicted class (ties go to non-churner) and the normalized margin
    /// `S_churn / sum(alpha_churn) - S_non / sum(alpha_non)` used for ROC.
    pub fn predict(&self, x: &[f64]) -> Result<(Class, f64)> {
        if self.churner.is_empty() || self.nonchurner.is_empty() {
            return Err(Error::invalid("ensemble has an empty class"));
        }
        let sc = self.class_sum(Class::Churner, x);
        let sn = self.class_sum(Class::NonChurner, x);
        let total = |c: Class| self.members(c).iter().map(|m| m.alpha).sum::<f64>();
        let class = if sc > sn { Class::Churner } else { Class::NonChurner };
        Ok((class, sc / total(Class::Churner) - sn / total(Class::NonChurner)))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{ENSEMBLE_MAGIC}\n");
        for class in Class::BOTH {
            for m in self.members(class) {
                writeln!(s, "class {} alpha {}", class.tag(), fmt17(m.alpha)).unwrap();
                writeln!(s, "{}", m.program.to_sexpr()).unwrap();
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |line: usize, m: String| Error::Parse {
            what: "ensemble file",
            line,
            message: m,
        };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, l)) if l == ENSEMBLE_MAGIC => {}
            _ => return Err(err(1, format!("expected '{ENSEMBLE_MAGIC}'"))),
        }
        let mut ens = BoostedEnsemble::default();
        while let Some((ln, header)) = lines.next() {
            let f: Vec<&str> = header.split_whitespace().collect();
            let (class, alpha) = match f.as_slice() {
                ["class", c, "alpha", a] => (
                    Class::from_tag(c).ok_or_else(|| err(ln, format!("unknown class '{c}'")))?,
                    parse_f64(a).ok_or_else(|| err(ln, format!("bad alpha '{a}'")))?,
                ),
                _ => return Err(err(ln, "expected 'class <name> alpha <value>'".into())),
            };
            let (pl, prog) = lines.next().ok_or_else(|| err(ln, "missing program line".into()))?;
            let program = GpProgram::parse(prog).map_err(|e| err(pl, e.to_string()))?;
            ens.members_mut(class).push(Member { program, alpha });
        }
        Ok(ens)
    }
}

pub fn adaboost_train(rows: &[Vec<f64>], labels: &[Class], cfg: &GpConfig) -> Result<BoostedEnsemble> {
    adaboost_train_traced(rows, labels, cfg).map(|(e, _)| e)
}

/// Runs one independent boosting chain per class, each starting from uniform
/// weights. A round whose best program has weighted error >= 0.5 is discarded
/// and the weights reset; a perfect program ends the chain.
pub fn adaboost_train_traced(
    rows: &[Vec<f64>],
    labels: &[Class],
    cfg: &GpConfig,
) -> Result<(BoostedEnsemble, Vec<RoundRecord>)> {
    cfg.validate()?;
    if rows.len() != labels.len() || rows.is_empty() {
        return Err(Error::invalid("need one label per row and at least one row"));
    }
    if Class::BOTH.iter().any(|c| !labels.contains(c)) {
        return Err(Error::invalid("boosting needs both classes present"));
    }
    let data = Columns::from_rows(rows)?;
    let n = rows.len();
    let mut ens = BoostedEnsemble::default();
    let mut trace = Vec::new();
    let mut fired = Vec::with_capacity(n);
    let mut scratch = super::program::EvalScratch::default();
    for class in Class::BOTH {
        let is_target: Vec<bool> = labels.iter().map(|&l| l == class).collect();
        let uniform = vec![1.0 / n as f64; n];
        let mut w = uniform.clone();
        for t in 0..cfg.elite_size {
            let round_cfg = GpConfig {
                seed: round_seed(cfg.seed, class, t),
                ..cfg.clone()
            };
            let task = OneClassTask {
                data: &data,
                is_target: &is_target,
                weights: &w,
            };
            let best = evolve_one_class(&task, &round_cfg)?;
            best.program.eval_columns(&data, &mut scratch, &mut fired);
            let miss: Vec<bool> = fired.iter().zip(&is_target).map(|(v, &t)| (*v >= 0.0) != t).collect();
            let error: f64 = w.iter().zip(&miss).filter(|(_, &m)| m).map(|(w, _)| w).sum();
            if error >= 0.5 {
                trace.push(RoundRecord {
                    class,
                    round: t,
                    accepted: false,
                    error,
                    alpha: 0.0,
                    post_update_error: error,
                    weight_sum: 1.0,
                    min_weight: 1.0 / n as f64,
                });
                w.clone_from(&uniform);
                continue;
            }
            let alpha = vote_weight(error);
            for (wi, &m) in w.iter_mut().zip(&miss) {
                *wi *= (if m { alpha } else { -alpha }).exp();
            }
            let z: f64 = w.iter().sum();
            w.iter_mut().for_each(|wi| *wi /= z);
            let post: f64 = w.iter().zip(&miss).filter(|(_, &m)| m).map(|(w, _)| w).sum();
            trace.push(RoundRecord {
                class,
                round: t,
                accepted: true,
                error,
                alpha,
                post_update_error: post,
                weight_sum: w.iter().sum(),
                min_weight: w.iter().copied().fold(f64::INFINITY, f64::min),
            });
            ens.members_mut(class).push(Member {
                program: best.program,
                alpha,
            });
            if error == 0.0 {
                break;
            }
        }
    }
    Ok((ens, trace))
}
