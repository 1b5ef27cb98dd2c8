//! Confusion-matrix statistics, ROC curves and AUC. Churners are the positive
//! class.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::tabular::Class;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl ConfusionCounts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn positives(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> usize {
        self.tn + self.fp
    }
}

pub fn confusion(predictions: &[Class], labels: &[Class]) -> Result<ConfusionCounts> {
    if predictions.len() != labels.len() || labels.is_empty() {
        return Err(Error::invalid(format!(
            "{} predictions for {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let mut c = ConfusionCounts::default();
    for (p, y) in predictions.iter().zip(labels) {
        match (p.is_churner(), y.is_churner()) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// `(TP + TN) / (TP + TN + FP + FN)`.
pub fn accuracy(c: &ConfusionCounts) -> Result<f64> {
    if c.total() == 0 {
        return Err(Error::invalid("accuracy of an empty confusion matrix"));
    }
    Ok((c.tp + c.tn) as f64 / c.total() as f64)
}

/// `TP / (TP + FN)`; `None` when there are no positives.
pub fn sensitivity(c: &ConfusionCounts) -> Option<f64> {
    (c.positives() > 0).then(|| c.tp as f64 / c.positives() as f64)
}

/// `TN / (TN + FP)`; `None` when there are no negatives.
pub fn specificity(c: &ConfusionCounts) -> Option<f64> {
    (c.negatives() > 0).then(|| c.tn as f64 / c.negatives() as f64)
}

fn check_scores(scores: &[f64], labels: &[Class]) -> Result<(usize, usize)> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("scores and labels differ in length"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("scores must be finite"));
    }
    let p = labels.iter().filter(|l| l.is_churner()).count();
    let n = labels.len() - p;
    if p == 0 || n == 0 {
        return Err(Error::invalid("ROC analysis needs both classes"));
    }
    Ok((p, n))
}

/// ROC points swept over distinct scores in descending order (tied scores
/// form one diagonal step) and the trapezoidal area under them.
pub fn roc_auc(scores: &[f64], labels: &[Class]) -> Result<(Vec<(f64, f64)>, f64)> {
    let (p, n) = check_scores(scores, labels)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let mut roc = vec![(0.0, 0.0)];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc2 = 0u128; // twice the area, in units of 1 / (p n)
    let mut i = 0;
    while i < order.len() {
        let s = scores[order[i]];
        let (tp0, fp0) = (tp, fp);
        while i < order.len() && scores[order[i]] == s {
            if labels[order[i]].is_churner() {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        auc2 += ((fp - fp0) * (tp + tp0)) as u128;
        roc.push((fp as f64 / n as f64, tp as f64 / p as f64));
    }
    let auc = auc2 as f64 / (2.0 * p as f64 * n as f64);
    Ok((roc, auc))
}

/// Mann-Whitney form: fraction of churner/non-churner pairs ranked correctly,
/// ties counting one half. Quadratic; used to cross-check [`roc_auc`].
pub fn pairwise_auc_oracle(scores: &[f64], labels: &[Class]) -> Result<f64> {
    let (p, n) = check_scores(scores, labels)?;
    let mut credit = 0.0;
    for (si, li) in scores.iter().zip(labels) {
        if !li.is_churner() {
            continue;
        }
        for (sj, lj) in scores.iter().zip(labels) {
            if lj.is_churner() {
                continue;
            }
            if si > sj {
                credit += 1.0;
            } else if si == sj {
                credit += 0.5;
            }
        }
    }
    Ok(credit / (p as f64 * n as f64))
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub counts: ConfusionCounts,
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub roc: Vec<(f64, f64)>,
    /// `None` when only one class is present.
    pub auc: Option<f64>,
}

pub fn evaluate(predictions: &[Class], scores: &[f64], labels: &[Class]) -> Result<EvalReport> {
    let counts = confusion(predictions, labels)?;
    let (roc, auc) = match roc_auc(scores, labels) {
        Ok((roc, auc)) => (roc, Some(auc)),
        Err(_) if check_scores(scores, labels).is_err() && scores.len() == labels.len() => (Vec::new(), None),
        Err(e) => return Err(e),
    };
    Ok(EvalReport {
        counts,
        accuracy: accuracy(&counts)?,
        sensitivity: sensitivity(&counts),
        specificity: specificity(&counts),
        roc,
        auc,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"))
}

impl EvalReport {
    pub fn to_text(&self) -> String {
        let c = &self.counts;
        let mut s = String::new();
        writeln!(s, "tp\t{}\nfp\t{}\ntn\t{}\nfn\t{}", c.tp, c.fp, c.tn, c.fn_).unwrap();
        writeln!(s, "accuracy\t{:.6}", self.accuracy).unwrap();
        writeln!(s, "sensitivity\t{}", opt(self.sensitivity)).unwrap();
        writeln!(s, "specificity\t{}", opt(self.specificity)).unwrap();
        writeln!(s, "auc\t{}", opt(self.auc)).unwrap();
        s
    }
}

/// Tab-separated fpr/tpr table with a header line.
pub fn roc_to_tsv(roc: &[(f64, f64)]) -> String {
    let mut s = String::from("fpr\ttpr\n");
    for (f, t) in roc {
        writeln!(s, "{f}\t{t}").unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use Class::{Churner as C, NonChurner as N};

    #[test]
    fn confusion_cases() {
        let all = vec![C; 4];
        assert_eq!(
            confusion(&all, &all).unwrap(),
            ConfusionCounts {
                tp: 4,
                ..Default::default()
            }
        );
        let labels = [C, N, C, N];
        let flipped = [N, C, N, C];
        let c = confusion(&flipped, &labels).unwrap();
        assert_eq!((c.tp, c.tn), (0, 0));
        assert!(confusion(&[C], &[C, N]).is_err());
    }

    #[test]
    fn eight_sample_tally() {
        let labels = [C, C, C, C, C, N, N, N];
        let preds = [C, C, C, N, N, C, N, N];
        let c = confusion(&preds, &labels).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 3,
                fp: 1,
                tn: 2,
                fn_: 2
            }
        );
        assert_eq!(accuracy(&c).unwrap(), 0.625);
        assert_eq!(sensitivity(&c), Some(0.6));
        assert_eq!(specificity(&c), Some(2.0 / 3.0));
    }

    #[test]
    fn degenerate_rates() {
        let c = ConfusionCounts {
            tn: 3,
            ..Default::default()
        };
        assert_eq!(sensitivity(&c), None);
        assert_eq!(specificity(&c), Some(1.0));
        assert!(accuracy(&ConfusionCounts::default()).is_err());
    }

    #[test]
    fn auc_examples() {
        let (roc, auc) = roc_auc(&[0.9, 0.8, 0.3, 0.1], &[C, C, N, N]).unwrap();
        assert_eq!(auc, 1.0);
        assert_eq!(roc.first(), Some(&(0.0, 0.0)));
        assert_eq!(roc.last(), Some(&(1.0, 1.0)));
        assert_eq!(roc_auc(&[0.4; 6], &[C, N, C, N, N, N]).unwrap().1, 0.5);
        assert_eq!(roc_auc(&[0.8, 0.4, 0.6, 0.2], &[C, C, N, N]).unwrap().1, 0.75);
        assert_eq!(pairwise_auc_oracle(&[0.8, 0.4, 0.6, 0.2], &[C, C, N, N]).unwrap(), 0.75);
        assert!(roc_auc(&[0.1, 0.2], &[C, C]).is_err());
    }

    #[test]
    fn report_marks_undefined() {
        let r = evaluate(&[N, N], &[0.1, 0.2], &[N, N]).unwrap();
        assert_eq!(r.auc, None);
        assert!(r.to_text().contains("sensitivity\tundefined"));
        assert!(r.to_text().contains("auc\tundefined"));
    }
}
