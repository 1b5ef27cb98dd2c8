// Hold-out stacking end to end: base CNNs on A, prediction space on B,
// 10-fold GP-AdaBoost on the extended features.

use churnstack::stacker::{generate_synthetic, run_pipeline, PipelineConfig, Seeds, SyntheticSpec};

fn main() {
    let spec = SyntheticSpec {
        n: 500,
        d: 20,
        churn_rate: 0.5,
        separation: 2.5632,
        noise: 1.0,
        seed: 3,
        direction_seed: 3,
        shift: 0.0,
    };
    let data = generate_synthetic(&spec).expect("synthetic");
    let mut cfg = PipelineConfig {
        tag: "demo".into(),
        seeds: Seeds::from_master(1),
        ..PipelineConfig::default()
    };
    cfg.train.epochs = 2;
    cfg.gp.population = 50;
    cfg.gp.generations = 10;

    let dir = tempfile::tempdir().expect("tempdir");
    let report = run_pipeline(&data, &cfg, Some(dir.path())).expect("pipeline");
    print!("{}", report.base_tsv());
    print!("{}", report.to_tsv());
    println!(
        "A={} rows, B={} rows",
        report.audit.a_rows.len(),
        report.audit.b_rows.len()
    );
    let mut files: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    files.sort();
    println!("{} artifacts, e.g. {:?}", files.len(), &files[..3]);
}
