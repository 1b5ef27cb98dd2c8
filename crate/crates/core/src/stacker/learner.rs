use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::convnet::ConvNet;
use crate::error::{Error, Result};
use crate::imaging::FeatureImage;
use crate::tabular::Class;
use crate::textfmt::parse_f64;

/// A first-stage model that scores feature images with a churn probability.
pub trait BaseLearner {
    fn name(&self) -> &str;
    fn predict_churn(&self, image: &FeatureImage) -> Result<f64>;
}

/// A convolutional base learner. Prediction fails until a network is attached.
#[derive(Clone, Debug)]
pub struct CnnLearner {
    name: String,
    net: Option<ConvNet>,
}

impl CnnLearner {
    pub fn untrained(name: impl Into<String>) -> Self {
        CnnLearner {
            name: name.into(),
            net: None,
        }
    }

    pub fn trained(name: impl Into<String>, net: ConvNet) -> Self {
        CnnLearner {
            name: name.into(),
            net: Some(net),
        }
    }

    pub fn net(&self) -> Option<&ConvNet> {
        self.net.as_ref()
    }
}

impl BaseLearner for CnnLearner {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict_churn(&self, image: &FeatureImage) -> Result<f64> {
        let net = self
            .net
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("base learner '{}' has not been trained", self.name)))?;
        Ok(net.predict_proba(&image.pixels)?[Class::Churner.index()])
    }
}

/// Scores produced elsewhere, keyed by the image's source row index.
/// File format: header `row<TAB>score`, then one record per row.
#[derive(Clone, Debug)]
pub struct ExternalScores {
    name: String,
    scores: HashMap<usize, f64>,
}

impl ExternalScores {
    pub fn new(name: impl Into<String>, scores: HashMap<usize, f64>) -> Result<Self> {
        if scores.values().any(|s| !(0.0..=1.0).contains(s)) {
            return Err(Error::invalid("external scores must lie in [0, 1]"));
        }
        Ok(ExternalScores {
            name: name.into(),
            scores,
        })
    }

    pub fn from_tsv(name: impl Into<String>, text: &str) -> Result<Self> {
        let mut scores = HashMap::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let err = || Error::Parse {
                what: "score file",
                line: i + 1,
                message: format!("expected 'row<TAB>score', got '{line}'"),
            };
            let (row, score) = line.split_once('\t').ok_or_else(err)?;
            scores.insert(
                row.trim().parse().map_err(|_| err())?,
                parse_f64(score).ok_or_else(err)?,
            );
        }
        ExternalScores::new(name, scores)
    }

    pub fn load(name: impl Into<String>, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        ExternalScores::from_tsv(name, &text)
    }
}

impl BaseLearner for ExternalScores {
    fn name(&self) -> &str {
        &self.name
    }

    fn predict_churn(&self, image: &FeatureImage) -> Result<f64> {
        self.scores
            .get(&image.source_index)
            .copied()
            .ok_or_else(|| Error::invalid(format!("'{}' has no score for row {}", self.name, image.source_index)))
    }
}

/// Base-learner churn probabilities on the hold-out rows, one column per learner.
#[derive(Clone, Debug, PartialEq)]
pub struct PredictionSpace {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl PredictionSpace {
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn to_tsv(&self) -> String {
        let mut s = self.names.join("\t");
        s.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
            writeln!(s, "{}", cells.join("\t")).unwrap();
        }
        s
    }
}

pub fn build_prediction_space(learners: &[&dyn BaseLearner], images: &[FeatureImage]) -> Result<PredictionSpace> {
    let rows = images
        .iter()
        .map(|im| {
            learners
                .iter()
                .map(|l| {
                    let p = l.predict_churn(im)?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::invalid(format!(
                            "learner '{}' returned {p} outside [0, 1]",
                            l.name()
                        )));
                    }
                    Ok(p)
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PredictionSpace {
        names: learners.iter().map(|l| l.name().to_string()).collect(),
        rows,
    })
}

/// Original features followed by the prediction-space columns.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedDataset {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Class>,
    pub original_width: usize,
}

pub fn extend_features(
    names: &[String],
    rows: &[Vec<f64>],
    labels: &[Class],
    space: &PredictionSpace,
) -> Result<ExtendedDataset> {
    if rows.len() != space.rows.len() || rows.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} feature rows, {} prediction rows, {} labels",
            rows.len(),
            space.rows.len(),
            labels.len()
        )));
    }
    let rows = rows
        .iter()
        .zip(&space.rows)
        .map(|(r, p)| r.iter().chain(p).copied().collect())
        .collect();
    Ok(ExtendedDataset {
        names: names.iter().chain(&space.names).cloned().collect(),
        rows,
        labels: labels.to_vec(),
        original_width: names.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Constant(f64);

    impl BaseLearner for Constant {
        fn name(&self) -> &str {
            "const"
        }
        fn predict_churn(&self, _: &FeatureImage) -> Result<f64> {
            Ok(self.0)
        }
    }

    fn images(n: usize) -> Vec<FeatureImage> {
        (0..n)
            .map(|i| FeatureImage {
                size: 1,
                pixels: vec![i as f64 / n as f64],
                source_index: i,
            })
            .collect()
    }

    #[test]
    fn constant_learner_column() {
        let l = Constant(0.5);
        let ps = build_prediction_space(&[&l, &l, &l], &images(4)).unwrap();
        assert_eq!(ps.rows.len(), 4);
        assert!(ps.rows.iter().all(|r| r == &vec![0.5; 3]));
        assert_eq!(ps.to_tsv().lines().next(), Some("const\tconst\tconst"));
        assert!(build_prediction_space(&[&Constant(1.5)], &images(1)).is_err());
    }

    #[test]
    fn untrained_cnn_errors() {
        let l = CnnLearner::untrained("cnn");
        assert!(build_prediction_space(&[&l], &images(1)).is_err());
    }

    #[test]
    fn extension_widths() {
        let names: Vec<String> = (0..4).map(|i| format!("f{i}")).collect();
        let rows = vec![vec![0.1, 0.2, 0.3, 0.4], vec![0.5, 0.6, 0.7, 0.8]];
        let labels = vec![Class::Churner, Class::NonChurner];
        let l = Constant(0.25);
        let ps = build_prediction_space(&[&l, &l, &l], &images(2)).unwrap();
        let ext = extend_features(&names, &rows, &labels, &ps).unwrap();
        assert_eq!(ext.names.len(), 7);
        assert!(ext
            .rows
            .iter()
            .zip(&rows)
            .all(|(e, r)| &e[..4] == r.as_slice() && e.len() == 7));
        let empty = PredictionSpace {
            names: vec![],
            rows: vec![vec![]; 2],
        };
        assert_eq!(extend_features(&names, &rows, &labels, &empty).unwrap().rows, rows);
        assert!(extend_features(&names, &rows[..1], &labels, &ps).is_err());
    }

    #[test]
    fn external_scores_file() {
        let s = ExternalScores::from_tsv("ext", "row\tscore\n0\t0.25\n3\t1\n").unwrap();
        let ims = images(4);
        assert_eq!(s.predict_churn(&ims[3]).unwrap(), 1.0);
        assert!(s.predict_churn(&ims[1]).is_err());
        assert!(ExternalScores::from_tsv("ext", "row\tscore\n0\t2\n").is_err());
    }
}
