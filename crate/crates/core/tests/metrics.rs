use churnstack::metrics::{accuracy, confusion, pairwise_auc_oracle, roc_auc, sensitivity, specificity};
use churnstack::tabular::Class;
use proptest::prelude::*;

fn labelled(scores_and_labels: &[(u8, bool)]) -> (Vec<f64>, Vec<Class>) {
    scores_and_labels
        .iter()
        .map(|&(s, y)| (s as f64 / 8.0, if y { Class::Churner } else { Class::NonChurner }))
        .unzip()
}

fn both_classes() -> impl Strategy<Value = Vec<(u8, bool)>> {
    prop::collection::vec((0u8..9, any::<bool>()), 2..200)
        .prop_filter("both classes", |v| v.iter().any(|p| p.1) && v.iter().any(|p| !p.1))
}

proptest! {
    #[test]
    fn trapezoid_matches_pairwise_oracle(v in both_classes()) {
        let (s, y) = labelled(&v);
        let (_, auc) = roc_auc(&s, &y).unwrap();
        prop_assert!((auc - pairwise_auc_oracle(&s, &y).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn auc_ignores_monotone_transforms(v in both_classes()) {
        let (s, y) = labelled(&v);
        let t: Vec<f64> = s.iter().map(|x| (3.0 * x).exp() - 7.0).collect();
        prop_assert_eq!(roc_auc(&s, &y).unwrap().1, roc_auc(&t, &y).unwrap().1);
    }

    #[test]
    fn negated_scores_complement_auc(v in both_classes()) {
        let (s, y) = labelled(&v);
        let neg: Vec<f64> = s.iter().map(|x| -x).collect();
        let a = roc_auc(&s, &y).unwrap().1;
        let b = roc_auc(&neg, &y).unwrap().1;
        prop_assert!((a + b - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn roc_is_monotone_and_anchored(v in both_classes()) {
        let (s, y) = labelled(&v);
        let (roc, _) = roc_auc(&s, &y).unwrap();
        prop_assert_eq!(roc[0], (0.0, 0.0));
        prop_assert_eq!(*roc.last().unwrap(), (1.0, 1.0));
        for w in roc.windows(2) {
            prop_assert!(w[1].0 >= w[0].0 && w[1].1 >= w[0].1);
        }
    }

    #[test]
    fn accuracy_is_prevalence_weighted_rates(v in prop::collection::vec((any::<bool>(), any::<bool>()), 1..100)) {
        let preds: Vec<Class> = v.iter().map(|p| if p.0 { Class::Churner } else { Class::NonChurner }).collect();
        let labels: Vec<Class> = v.iter().map(|p| if p.1 { Class::Churner } else { Class::NonChurner }).collect();
        let c = confusion(&preds, &labels).unwrap();
        let n = c.total() as f64;
        let pos = c.positives() as f64;
        let neg = c.negatives() as f64;
        let recombined = sensitivity(&c).unwrap_or(0.0) * pos / n + specificity(&c).unwrap_or(0.0) * neg / n;
        prop_assert!((accuracy(&c).unwrap() - recombined).abs() <= 1e-15);
    }
}

#[test]
fn all_tied_scores_give_half() {
    let y = [Class::Churner, Class::NonChurner, Class::Churner];
    assert_eq!(roc_auc(&[0.3; 3], &y).unwrap().1, 0.5);
}

#[test]
fn single_class_is_an_error() {
    assert!(roc_auc(&[0.1, 0.2], &[Class::Churner; 2]).is_err());
    assert!(pairwise_auc_oracle(&[0.1, 0.2], &[Class::NonChurner; 2]).is_err());
}
