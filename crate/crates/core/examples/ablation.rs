// Same data and seeds with and without pretrained weights.

use churnstack::convnet::TrainConfig;
use churnstack::stacker::{generate_synthetic, run_ablation, PipelineConfig, PretrainSource, SyntheticSpec};

fn main() {
    let target = SyntheticSpec {
        n: 200,
        d: 20,
        churn_rate: 0.5,
        separation: 2.5632,
        noise: 1.0,
        seed: 8,
        direction_seed: 9,
        shift: 0.0,
    };
    let source = SyntheticSpec {
        n: 600,
        seed: 80,
        shift: 0.5,
        ..target.clone()
    };
    let mut cfg = PipelineConfig {
        tag: "demo".into(),
        ..PipelineConfig::default()
    };
    cfg.train.epochs = 2;
    cfg.gp.population = 40;
    cfg.gp.generations = 8;
    cfg.pretrain = Some(PretrainSource::SourceData {
        data: generate_synthetic(&source).unwrap(),
        train: TrainConfig {
            epochs: 3,
            ..TrainConfig::default()
        },
    });

    let report = run_ablation(&generate_synthetic(&target).unwrap(), &cfg, None).expect("ablation");
    print!("{}", report.to_tsv());
    assert_eq!(report.with_transfer.audit.folds, report.without_transfer.audit.folds);
    assert!(!report.without_transfer.audit.pretrained_loaded);
}
