use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::tabular::{Class, Dataset};

/// Two isotropic Gaussian classes: non-churners centred at the origin,
/// churners at `separation * u` for a seeded random unit vector `u`. Every
/// sample is additionally offset by `shift` in each coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub churn_rate: f64,
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
    /// Seed for the class-mean direction; shared between source and target
    /// datasets of a transfer experiment.
    pub direction_seed: u64,
    pub shift: f64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.churn_rate > 0.0 && self.churn_rate < 1.0) {
            return Err(Error::invalid("churn rate must lie in (0, 1)"));
        }
        if self.noise.is_nan() || self.noise <= 0.0 {
            return Err(Error::invalid("noise must be positive"));
        }
        if self.n == 0 || self.d == 0 {
            return Err(Error::invalid("synthetic data needs n >= 1 and d >= 1"));
        }
        Ok(())
    }

    /// Separation giving the requested balanced Bayes accuracy.
    pub fn separation_for_bayes(accuracy: f64, noise: f64) -> f64 {
        let z = Normal::standard().inverse_cdf(accuracy);
        2.0 * noise * z
    }

    /// Bayes accuracy with equal priors, `Phi(separation / (2 noise))`.
    pub fn balanced_bayes_accuracy(&self) -> f64 {
        Normal::standard().cdf(self.separation / (2.0 * self.noise))
    }

    /// Best attainable AUC, `Phi(separation / (sqrt(2) noise))`.
    pub fn bayes_auc(&self) -> f64 {
        Normal::standard().cdf(self.separation / (std::f64::consts::SQRT_2 * self.noise))
    }
}

pub fn unit_direction(d: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    loop {
        let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let u = unit_direction(spec.d, spec.direction_seed);
    let mut rng = seeded(spec.seed);
    let mut rows = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let churn = rng.random_bool(spec.churn_rate);
        let row: Vec<f64> = u
            .iter()
            .map(|ui| {
                let mean = if churn { spec.separation * ui } else { 0.0 };
                let z: f64 = StandardNormal.sample(&mut rng);
                mean + spec.noise * z + spec.shift
            })
            .collect();
        rows.push(row);
        labels.push(if churn { Class::Churner } else { Class::NonChurner });
    }
    let names = (0..spec.d).map(|j| format!("f{j}")).collect();
    Dataset::from_matrix(names, rows, labels)
}
