// Boost evolved GP programs, one chain per class, and inspect the ensemble.

use churnstack::gpboost::{adaboost_train_traced, BoostedEnsemble, GpConfig};
use churnstack::stacker::{generate_synthetic, SyntheticSpec};

fn main() {
    let spec = SyntheticSpec {
        n: 400,
        d: 6,
        churn_rate: 0.3,
        separation: 3.0,
        noise: 1.0,
        seed: 5,
        direction_seed: 6,
        shift: 0.0,
    };
    let data = generate_synthetic(&spec).expect("synthetic");
    let rows = data.numeric_rows().expect("numeric");
    let cfg = GpConfig {
        population: 60,
        generations: 10,
        ..GpConfig::default()
    };
    let (ensemble, trace) = adaboost_train_traced(&rows, data.labels(), &cfg).expect("boost");
    for r in &trace {
        println!(
            "{} round {}: accepted={} error={:.4} alpha={:.4}",
            r.class, r.round, r.accepted, r.error, r.alpha
        );
    }

    let correct = rows
        .iter()
        .zip(data.labels())
        .filter(|(x, &y)| ensemble.predict(x).unwrap().0 == y)
        .count();
    println!("training accuracy {:.3}", correct as f64 / rows.len() as f64);

    let text = ensemble.to_text();
    println!("{}", text.lines().take(4).collect::<Vec<_>>().join("\n"));
    assert_eq!(BoostedEnsemble::from_text(&text).unwrap().to_text(), text);
}
