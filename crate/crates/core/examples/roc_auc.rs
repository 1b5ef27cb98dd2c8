// ROC curve, AUC and the confusion-matrix metrics for a scored hold-out set.

use churnstack::metrics::{evaluate, pairwise_auc_oracle, roc_to_tsv};
use churnstack::tabular::Class;

fn main() {
    let scores = [0.9, 0.8, 0.8, 0.6, 0.55, 0.4, 0.3, 0.2];
    let labels = [1, 1, 0, 1, 0, 0, 1, 0].map(|y| if y == 1 { Class::Churner } else { Class::NonChurner });
    let preds: Vec<Class> = scores
        .iter()
        .map(|&s| if s > 0.5 { Class::Churner } else { Class::NonChurner })
        .collect();
    let report = evaluate(&preds, &scores, &labels).expect("evaluate");
    print!("{}", report.to_text());
    print!("{}", roc_to_tsv(&report.roc));
    println!(
        "pairwise oracle AUC {:.6}",
        pairwise_auc_oracle(&scores, &labels).unwrap()
    );
}
