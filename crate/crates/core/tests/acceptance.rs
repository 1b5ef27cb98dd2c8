// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use churnstack::cli::{cmd_run, Session};
use churnstack::convnet::{build_custom_cnn, numeric_gradient_check, save_weights, TrainConfig};
use churnstack::gpboost::{adaboost_train_traced, GpConfig};
use churnstack::metrics::{pairwise_auc_oracle, roc_auc};
use churnstack::stacker::{
    generate_synthetic, pretrain_reference, run_ablation, run_pipeline, PipelineConfig, PretrainSource, RunReport,
    Seeds, SyntheticSpec,
};
use churnstack::tabular::Class;
use rand::Rng;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
/// `mu / (2 sigma) = 1.2816`, i.e. a balanced Bayes accuracy of about 0.90.
const SEPARATION: f64 = 2.5632;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn gaussian(n: usize, churn_rate: f64, seed: u64, shift: f64) -> SyntheticSpec {
    SyntheticSpec {
        n,
        d: 20,
        churn_rate,
        separation: SEPARATION,
        noise: 1.0,
        seed,
        direction_seed: 7,
        shift,
    }
}

fn pipeline(seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig {
        tag: format!("seed{seed}"),
        seeds: Seeds::from_master(seed),
        ..PipelineConfig::default()
    };
    cfg.train.epochs = 5;
    cfg
}

fn metric_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = churnstack::rng::seeded(1);
    let mut worst = 0.0f64;
    let mut sets = 0;
    while sets < 1000 {
        let n = rng.random_range(2..=200);
        let levels = rng.random_range(1..=n);
        let labels: Vec<Class> = (0..n)
            .map(|_| {
                if rng.random_bool(0.4) {
                    Class::Churner
                } else {
                    Class::NonChurner
                }
            })
            .collect();
        if !labels.contains(&Class::Churner) || !labels.contains(&Class::NonChurner) {
            continue;
        }
        let scores: Vec<f64> = (0..n)
            .map(|_| rng.random_range(0..levels) as f64 / levels as f64)
            .collect();
        let (_, auc) = roc_auc(&scores, &labels).unwrap();
        worst = worst.max((auc - pairwise_auc_oracle(&scores, &labels).unwrap()).abs());
        sets += 1;
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-12 && secs < 10.0,
        format!("max |roc - oracle| = {worst:.1e} over 1000 sets, {secs:.2} s"),
    )
}

fn gradient_check() -> Outcome {
    let t = Instant::now();
    let mut worst = 0.0f64;
    for seed in SEEDS {
        let net = build_custom_cnn(32, seed).unwrap();
        let mut rng = churnstack::rng::seeded(seed + 100);
        let x: Vec<f64> = (0..32 * 32).map(|_| rng.random::<f64>()).collect();
        worst = worst.max(numeric_gradient_check(&net, &x, (seed % 2) as usize, 1e-5).unwrap());
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-4 && secs < 60.0,
        format!("max relative error {worst:.2e} over 5 seeds, {secs:.1} s"),
    )
}

fn adaboost_identity() -> Outcome {
    let mut worst_error = 0.0f64;
    let mut worst_simplex = 0.0f64;
    let mut accepted = 0;
    let mut negative = false;
    for p in 0..20u64 {
        let mut rng = churnstack::rng::seeded(500 + p);
        let rows: Vec<Vec<f64>> = (0..100)
            .map(|_| (0..4).map(|_| rng.random::<f64>()).collect())
            .collect();
        let labels: Vec<Class> = rows
            .iter()
            .map(|r| {
                let noisy = r[0] - r[1] + 0.3 * (rng.random::<f64>() - 0.5);
                if noisy > 0.0 {
                    Class::Churner
                } else {
                    Class::NonChurner
                }
            })
            .collect();
        let cfg = GpConfig {
            seed: p,
            ..GpConfig::default()
        };
        let (_, trace) = adaboost_train_traced(&rows, &labels, &cfg).unwrap();
        for r in trace
            .iter()
            .filter(|r| r.accepted && r.error > churnstack::gpboost::MIN_ERROR)
        {
            accepted += 1;
            worst_error = worst_error.max((r.post_update_error - 0.5).abs());
            worst_simplex = worst_simplex.max((r.weight_sum - 1.0).abs());
            negative |= r.min_weight < 0.0;
        }
    }
    outcome(
        accepted > 0 && worst_error <= 1e-9 && worst_simplex <= 1e-12 && !negative,
        format!(
            "{accepted} accepted rounds, max |err - 0.5| = {worst_error:.1e}, max |sum w - 1| = {worst_simplex:.1e}"
        ),
    )
}

fn shape_chain() -> Outcome {
    let net = build_custom_cnn(32, 0).unwrap();
    let dims: Vec<(usize, usize, usize)> = net.shapes().unwrap().iter().map(|s| (s.h, s.w, s.c)).collect();
    let expected = [
        (32, 32, 1),
        (30, 30, 6),
        (30, 30, 6),
        (15, 15, 6),
        (11, 11, 10),
        (11, 11, 10),
        (5, 5, 10),
        (1, 1, 2),
        (1, 1, 2),
    ];
    let flat = dims[6].0 * dims[6].1 * dims[6].2;
    outcome(
        dims == expected && flat == 250,
        dims.iter()
            .map(|(h, w, c)| format!("{h}x{w}x{c}"))
            .collect::<Vec<_>>()
            .join(" -> "),
    )
}

fn end_to_end(runs: &[RunReport], secs: &[f64]) -> Outcome {
    let acc = median(runs.iter().map(|r| r.mean_accuracy).collect());
    let auc = median(runs.iter().map(|r| r.mean_auc).collect());
    let slowest = secs.iter().copied().fold(0.0, f64::max);
    let total: f64 = secs.iter().sum();
    outcome(
        acc >= 0.85 && auc >= 0.90 && total < 600.0,
        format!("median CV accuracy {acc:.4}, AUC {auc:.4}; {total:.0} s for 5 runs (slowest {slowest:.0} s)"),
    )
}

fn meta_vs_base(runs: &[RunReport]) -> Outcome {
    let gaps: Vec<f64> = runs.iter().map(|r| r.mean_accuracy - r.best_base_accuracy()).collect();
    let gap = median(gaps.clone());
    outcome(
        gap >= -0.01,
        format!(
            "median(meta - best base) = {gap:+.4}; per seed {:?}",
            gaps.iter().map(|g| format!("{g:+.4}")).collect::<Vec<_>>()
        ),
    )
}

fn transfer_ablation(scratch: &Path) -> Outcome {
    let t = Instant::now();
    let source = generate_synthetic(&gaussian(4000, 0.5, 900, 0.5)).unwrap();
    let pre_cfg = TrainConfig {
        epochs: 5,
        seed: 42,
        ..TrainConfig::default()
    };
    let net = pretrain_reference(&source, 32, 0.95, &pre_cfg).unwrap();
    let weights = scratch.join("pretrained.weights");
    save_weights(&net, &weights).unwrap();

    let mut on = Vec::new();
    let mut off = Vec::new();
    let mut same_partitions = true;
    let mut off_read_weights = false;
    for seed in SEEDS {
        let target = generate_synthetic(&gaussian(400, 0.5, 200 + seed, 0.0)).unwrap();
        let cfg = PipelineConfig {
            pretrain: Some(PretrainSource::WeightsFile(weights.clone())),
            ..pipeline(seed)
        };
        let r = run_ablation(&target, &cfg, None).unwrap();
        let (a, b) = (&r.with_transfer.audit, &r.without_transfer.audit);
        same_partitions &= a.a_rows == b.a_rows && a.b_rows == b.b_rows && a.folds == b.folds;
        off_read_weights |= b.pretrained_loaded;
        on.push(r.with_transfer.mean_auc);
        off.push(r.without_transfer.mean_auc);
    }
    let (m_on, m_off) = (median(on), median(off));
    outcome(
        m_on >= m_off && same_partitions && !off_read_weights,
        format!(
            "median AUC transfer {m_on:.4} vs scratch {m_off:.4}; identical partitions: {same_partitions}; {:.0} s",
            t.elapsed().as_secs_f64()
        ),
    )
}

fn imbalance() -> Outcome {
    let t = Instant::now();
    let mut aucs = Vec::new();
    let mut constant_ok = true;
    let mut constant_acc = Vec::new();
    for seed in [0u64, 1, 2] {
        let data = generate_synthetic(&gaussian(4000, 0.10, 300 + seed, 0.0)).unwrap();
        let r = run_pipeline(&data, &pipeline(seed), None).unwrap();
        aucs.push(r.mean_auc);

        let labels: Vec<Class> = r.audit.b_rows.iter().map(|&i| data.labels()[i]).collect();
        let (_, auc) = roc_auc(&vec![0.0; labels.len()], &labels).unwrap();
        let acc = labels.iter().filter(|&&c| c == Class::NonChurner).count() as f64 / labels.len() as f64;
        let sd = (0.9 * 0.1 / labels.len() as f64).sqrt();
        constant_ok &= auc == 0.5 && (acc - 0.90).abs() <= 3.0 * sd;
        constant_acc.push(acc);
    }
    let m = median(aucs);
    outcome(
        m >= 0.85 && constant_ok,
        format!(
            "median meta AUC {m:.4}; majority predictor AUC 0.5, accuracy {:.4}; {:.0} s",
            median(constant_acc),
            t.elapsed().as_secs_f64()
        ),
    )
}

fn artifact_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| {
            let n = p.file_name().unwrap().to_string_lossy();
            n.ends_with("_report.tsv") || n.ends_with(".weights") || n.ends_with(".gpa")
        })
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

fn determinism(scratch: &Path) -> Outcome {
    let dir = scratch.join("determinism");
    fs::create_dir_all(&dir).unwrap();
    let data = generate_synthetic(&gaussian(600, 0.5, 11, 0.0)).unwrap();
    let mut csv = Vec::new();
    churnstack::tabular::write_numeric_csv(&data, "churn", &mut csv).unwrap();
    fs::write(dir.join("data.csv"), csv).unwrap();
    fs::write(
        dir.join("run.toml"),
        "[data]\ntrain = \"data.csv\"\n[pipeline]\ntag = \"det\"\n[train]\nepochs = 2\n[gp]\npopulation = 60\ngenerations = 10\n",
    )
    .unwrap();
    let mut outputs = Vec::new();
    for out in ["first", "second"] {
        let s = Session::open(&dir.join("run.toml"), Some(&dir.join(out)), None).unwrap();
        cmd_run(&s).unwrap();
        outputs.push(artifact_files(&dir.join(out)));
    }
    let n = outputs[0].len();
    outcome(
        n == 1 + 3 + 10 && outputs[0] == outputs[1],
        format!("{n} report/weight/ensemble files compared byte for byte"),
    )
}

fn protocol_audit(runs: &[RunReport], n: usize) -> Outcome {
    let mut problems = Vec::new();
    for r in runs {
        let a = &r.audit;
        let in_a = |i: &usize| a.a_rows.binary_search(i).is_ok();
        if a.b_rows.iter().any(in_a) {
            problems.push(format!("{}: A and B overlap", r.tag));
        }
        if a.a_rows.len() + a.b_rows.len() != n {
            problems.push(format!("{}: A and B do not cover the data", r.tag));
        }
        if a.learner_rows.len() != 3 || a.learner_rows.iter().any(|rows| !rows.iter().all(in_a)) {
            problems.push(format!("{}: a base learner saw rows outside A", r.tag));
        }
        let mut tested = vec![0usize; a.b_rows.len()];
        for (train, test) in &a.folds {
            if test.iter().any(|t| train.contains(t)) {
                problems.push(format!("{}: fold test rows in training set", r.tag));
            }
            if train.len() + test.len() != a.b_rows.len() {
                problems.push(format!("{}: fold does not split B", r.tag));
            }
            for &t in test {
                tested[t] += 1;
            }
        }
        if tested.iter().any(|&c| c != 1) {
            problems.push(format!("{}: B rows not tested exactly once", r.tag));
        }
    }
    let pass = problems.is_empty();
    let detail = if pass {
        format!(
            "{} runs: A∩B=∅, learners trained on A only, folds disjoint and covering B",
            runs.len()
        )
    } else {
        problems.join("; ")
    };
    outcome(pass, detail)
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        }
    }
}

fn main() -> ExitCode {
    let scratch = tempfile::tempdir().unwrap();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |id: u32, name: &'static str, o: Outcome| {
        println!(
            "criterion {id:2} {} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        results.push((id, name, o));
    };

    report(1, "metric oracle equivalence", guarded(metric_oracle));
    report(2, "gradient correctness", guarded(gradient_check));
    report(3, "adaboost identity", guarded(adaboost_identity));
    report(4, "shape chain", guarded(shape_chain));

    let mut runs = Vec::new();
    let mut secs = Vec::new();
    let shared = catch_unwind(AssertUnwindSafe(|| {
        for seed in SEEDS {
            let t = Instant::now();
            let data = generate_synthetic(&gaussian(4000, 0.5, 100 + seed, 0.0)).unwrap();
            runs.push(run_pipeline(&data, &pipeline(seed), None).unwrap());
            secs.push(t.elapsed().as_secs_f64());
        }
    }));
    if shared.is_ok() {
        report(5, "end-to-end synthetic", guarded(|| end_to_end(&runs, &secs)));
        report(6, "meta >= base", guarded(|| meta_vs_base(&runs)));
    } else {
        report(
            5,
            "end-to-end synthetic",
            outcome(false, "pipeline run panicked".into()),
        );
        report(6, "meta >= base", outcome(false, "pipeline run panicked".into()));
    }
    report(7, "transfer ablation", guarded(|| transfer_ablation(scratch.path())));
    report(8, "imbalance behaviour", guarded(imbalance));
    report(9, "determinism", guarded(|| determinism(scratch.path())));
    report(10, "protocol audit", guarded(|| protocol_audit(&runs, 4000)));

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
