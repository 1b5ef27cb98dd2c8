use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::tabular::{stratified_split, Class};

pub const TRAIN_FRACTION: f64 = 0.6;

/// Stratified A/B hold-out split: A trains the base learners, B feeds the
/// meta-classifier.
pub fn split_ab(labels: &[Class], fraction_a: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    stratified_split(labels, fraction_a, seed)
}

/// `k` disjoint stratified folds covering `0..labels.len()`. Each class is
/// shuffled and dealt round-robin, continuing where the previous class ended,
/// so per-class and total fold sizes differ by at most one.
pub fn kfold_indices(labels: &[Class], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > labels.len() {
        return Err(Error::invalid(format!(
            "cannot make {k} folds from {} samples",
            labels.len()
        )));
    }
    let mut rng = seeded(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for class in Class::BOTH {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if idx.len() < k {
            return Err(Error::invalid(format!(
                "only {} {class} samples for {k} folds",
                idx.len()
            )));
        }
        idx.shuffle(&mut rng);
        for i in idx {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Training indices for `fold`: everything outside it.
pub fn complement(folds: &[Vec<usize>], fold: usize) -> Vec<usize> {
    let mut out: Vec<usize> = folds
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != fold)
        .flat_map(|(_, f)| f.iter().copied())
        .collect();
    out.sort_unstable();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn balanced_twenty_into_ten() {
        let labels: Vec<Class> = (0..20).map(|i| Class::from_index(i % 2)).collect();
        let folds = kfold_indices(&labels, 10, 1).unwrap();
        for f in &folds {
            assert_eq!(f.len(), 2);
            assert_eq!(f.iter().filter(|&&i| labels[i].is_churner()).count(), 1);
        }
        assert_eq!(folds, kfold_indices(&labels, 10, 1).unwrap());
    }

    #[test]
    fn small_class_rejected() {
        let mut labels = vec![Class::NonChurner; 30];
        labels[0] = Class::Churner;
        assert!(kfold_indices(&labels, 10, 0).is_err());
    }

    #[test]
    fn ab_split_sizes() {
        let labels: Vec<Class> = (0..100).map(|i| Class::from_index(i % 2)).collect();
        let (a, b) = split_ab(&labels, TRAIN_FRACTION, 3).unwrap();
        assert_eq!((a.len(), b.len()), (60, 40));
        assert!(a.iter().all(|i| !b.contains(i)));
    }

    proptest! {
        #[test]
        fn folds_partition_and_balance(churners in 10usize..80, others in 10usize..80, k in 2usize..11, seed in any::<u64>()) {
            let labels: Vec<Class> = (0..churners + others)
                .map(|i| if i < churners { Class::Churner } else { Class::NonChurner })
                .collect();
            let folds = kfold_indices(&labels, k, seed).unwrap();
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            for class in Class::BOTH {
                let per: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| labels[i] == class).count()).collect();
                prop_assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
            }
            for f in 0..k {
                let train = complement(&folds, f);
                prop_assert!(train.iter().all(|i| !folds[f].contains(i)));
                prop_assert_eq!(train.len() + folds[f].len(), labels.len());
            }
        }
    }
}
