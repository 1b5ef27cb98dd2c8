use churnstack::gpboost::{
    adaboost_train, adaboost_train_traced, evolve_one_class, random_program, BoostedEnsemble, Columns, EvalScratch,
    GpConfig, GpProgram, Member, OneClassTask,
};
use churnstack::tabular::Class;
use proptest::prelude::*;
use rand::Rng;

fn small_gp(seed: u64) -> GpConfig {
    GpConfig {
        population: 40,
        generations: 8,
        seed,
        ..GpConfig::default()
    }
}

fn random_problem(seed: u64, n: usize, d: usize) -> (Vec<Vec<f64>>, Vec<Class>) {
    let mut rng = churnstack::rng::seeded(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect())
        .collect();
    let labels = rows
        .iter()
        .map(|r| {
            if r[0] + 0.3 * r[1] > 0.1 {
                Class::Churner
            } else {
                Class::NonChurner
            }
        })
        .collect();
    (rows, labels)
}

#[test]
fn random_programs_evaluate_finite() {
    let mut rng = churnstack::rng::seeded(0);
    for i in 0..100_000 {
        let p = random_program(8, 3, &mut rng);
        assert!(p.depth() <= 8);
        let x: Vec<f64> = match i % 4 {
            0 => vec![0.0; 3],
            1 => vec![1.0, 0.0, 1.0],
            _ => (0..3).map(|_| rng.random::<f64>()).collect(),
        };
        let v = p.eval(&x);
        assert!(v.is_finite(), "{} gave {v} on {x:?}", p.to_sexpr());
    }
}

#[test]
fn fitness_is_a_weighted_fraction() {
    let (rows, labels) = random_problem(1, 60, 3);
    let data = Columns::from_rows(&rows).unwrap();
    let is_target: Vec<bool> = labels.iter().map(|c| c.is_churner()).collect();
    let weights = vec![1.0 / 60.0; 60];
    let task = OneClassTask {
        data: &data,
        is_target: &is_target,
        weights: &weights,
    };
    let mut rng = churnstack::rng::seeded(2);
    let mut scratch = EvalScratch::default();
    let mut out = Vec::new();
    for _ in 0..500 {
        let p = random_program(6, 3, &mut rng);
        let (hit, miss) = task.score(&p, &mut scratch, &mut out);
        assert!((0.0..=1.0 + 1e-12).contains(&hit));
        assert!((hit + miss - 1.0).abs() < 1e-12);
    }
}

#[test]
fn first_feature_program_is_perfect_on_its_own_sign() {
    let mut rng = churnstack::rng::seeded(3);
    let rows: Vec<Vec<f64>> = (0..200)
        .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
        .collect();
    let is_target: Vec<bool> = rows.iter().map(|r| r[0] >= 0.0).collect();
    let weights = vec![1.0 / 200.0; 200];
    let data = Columns::from_rows(&rows).unwrap();
    let task = OneClassTask {
        data: &data,
        is_target: &is_target,
        weights: &weights,
    };
    let (hit, miss) = task.score(&GpProgram::feature(0), &mut EvalScratch::default(), &mut Vec::new());
    assert!((hit - 1.0).abs() < 1e-12);
    assert_eq!(miss, 0.0);

    let best = evolve_one_class(&task, &small_gp(4)).unwrap();
    assert!((best.fitness - 1.0).abs() < 1e-12, "{}", best.program.to_sexpr());
}

#[test]
fn boosting_is_deterministic_and_learns() {
    let (rows, labels) = random_problem(5, 150, 4);
    let a = adaboost_train(&rows, &labels, &small_gp(9)).unwrap();
    let b = adaboost_train(&rows, &labels, &small_gp(9)).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    let correct = rows
        .iter()
        .zip(&labels)
        .filter(|(x, &y)| a.predict(x).unwrap().0 == y)
        .count();
    assert!(correct as f64 / rows.len() as f64 > 0.8);
}

#[test]
fn accepted_rounds_reach_half_error_under_new_weights() {
    let (rows, labels) = random_problem(6, 100, 3);
    let (_, trace) = adaboost_train_traced(&rows, &labels, &small_gp(1)).unwrap();
    for r in trace.iter().filter(|r| r.accepted && r.error > 1e-10) {
        assert!((r.post_update_error - 0.5).abs() < 1e-9, "{r:?}");
        assert!((r.weight_sum - 1.0).abs() < 1e-12);
        assert!(r.min_weight > 0.0);
    }
}

#[test]
fn ensemble_text_round_trip() {
    let (rows, labels) = random_problem(7, 80, 3);
    let e = adaboost_train(&rows, &labels, &small_gp(2)).unwrap();
    let text = e.to_text();
    let back = BoostedEnsemble::from_text(&text).unwrap();
    for x in &rows {
        assert_eq!(back.predict(x).unwrap(), e.predict(x).unwrap());
    }
    assert!(BoostedEnsemble::from_text("not an ensemble\n").is_err());
}

fn scaled(e: &BoostedEnsemble, k: f64) -> BoostedEnsemble {
    let scale = |c: Class| {
        e.members(c)
            .iter()
            .map(|m| Member {
                program: m.program.clone(),
                alpha: m.alpha * k,
            })
            .collect()
    };
    BoostedEnsemble::new(scale(Class::Churner), scale(Class::NonChurner))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn predictions_invariant_under_alpha_scaling(seed in 0u64..1000, k in 0.01f64..100.0) {
        let (rows, labels) = random_problem(seed, 60, 3);
        let e = adaboost_train(&rows, &labels, &GpConfig { population: 20, generations: 3, seed, ..GpConfig::default() }).unwrap();
        let s = scaled(&e, k);
        for x in &rows {
            let (c0, m0) = e.predict(x).unwrap();
            let (c1, m1) = s.predict(x).unwrap();
            prop_assert_eq!(c0, c1);
            prop_assert!((m0 - m1).abs() < 1e-12);
        }
    }

    #[test]
    fn sexpr_round_trips(seed in any::<u64>()) {
        let mut rng = churnstack::rng::seeded(seed);
        let p = random_program(5, 4, &mut rng);
        prop_assert_eq!(GpProgram::parse(&p.to_sexpr()).unwrap(), p);
    }
}
