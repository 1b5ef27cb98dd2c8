// Generate a labelled Gaussian churn dataset with a known Bayes accuracy.

use churnstack::stacker::{generate_synthetic, SyntheticSpec};
use churnstack::tabular::write_numeric_csv;

fn main() {
    let separation = SyntheticSpec::separation_for_bayes(0.90, 1.0);
    let spec = SyntheticSpec {
        n: 1000,
        d: 20,
        churn_rate: 0.1,
        separation,
        noise: 1.0,
        seed: 0,
        direction_seed: 0,
        shift: 0.0,
    };
    let data = generate_synthetic(&spec).expect("synthetic");
    println!(
        "separation {separation:.4}, Bayes accuracy {:.4}, Bayes AUC {:.4}",
        spec.balanced_bayes_accuracy(),
        spec.bayes_auc()
    );
    println!(
        "{} churners of {}",
        data.class_count(churnstack::tabular::Class::Churner),
        data.n_rows()
    );

    let mut buf = Vec::new();
    write_numeric_csv(&data, "churn", &mut buf).expect("csv");
    let text = String::from_utf8(buf).unwrap();
    for line in text.lines().take(3) {
        println!("{line}");
    }
}
