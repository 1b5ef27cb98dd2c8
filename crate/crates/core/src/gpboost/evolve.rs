use std::cmp::Ordering;

use rand::Rng as _;

use super::program::{crossover, mutate, random_program, Columns, EvalScratch, GpProgram};
use crate::error::{Error, Result};
use crate::rng::seeded;

#[derive(Clone, Debug, PartialEq)]
pub struct GpConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub max_depth: usize,
    /// Boosting rounds (programs kept) per class.
    pub elite_size: usize,
    pub seed: u64,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            population: 200,
            generations: 50,
            tournament_size: 7,
            p_crossover: 0.9,
            p_mutation: 0.1,
            max_depth: 8,
            elite_size: 5,
            seed: 0,
        }
    }
}

impl GpConfig {
    pub fn validate(&self) -> Result<()> {
        let probs = [self.p_crossover, self.p_mutation];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::invalid("GP probabilities must lie in [0, 1]"));
        }
        let counts = [
            self.population,
            self.generations,
            self.tournament_size,
            self.max_depth,
            self.elite_size,
        ];
        if counts.contains(&0) {
            return Err(Error::invalid("GP counts must be at least 1"));
        }
        Ok(())
    }
}

/// A program with its weighted one-class accuracy.
#[derive(Clone, Debug, PartialEq)]
pub struct Scored {
    pub program: GpProgram,
    pub fitness: f64,
}

/// Fitness evaluator for one boosting round: `sum_i w_i [fires(x_i) == is_target_i]`.
pub struct OneClassTask<'a> {
    pub data: &'a Columns,
    pub is_target: &'a [bool],
    pub weights: &'a [f64],
}

impl OneClassTask<'_> {
    /// Returns (fitness, weighted error), accumulated separately.
    pub fn score(&self, p: &GpProgram, scratch: &mut EvalScratch, out: &mut Vec<f64>) -> (f64, f64) {
        p.eval_columns(self.data, scratch, out);
        let mut hit = 0.0;
        let mut miss = 0.0;
        for ((v, &t), &w) in out.iter().zip(self.is_target).zip(self.weights) {
            if (*v >= 0.0) == t {
                hit += w;
            } else {
                miss += w;
            }
        }
        (hit, miss)
    }
}

/// Better fitness first, then smaller tree. Equal keys keep discovery order.
fn better(a: &Scored, b: &Scored) -> bool {
    match a.fitness.partial_cmp(&b.fitness) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => a.program.len() < b.program.len(),
    }
}

fn tournament(pop: &[Scored], k: usize, rng: &mut crate::rng::Rng) -> usize {
    let mut best = rng.random_range(0..pop.len());
    for _ in 1..k {
        let c = rng.random_range(0..pop.len());
        let f = pop[c].fitness;
        if f > pop[best].fitness || (f == pop[best].fitness && c < best) {
            best = c;
        }
    }
    best
}

/// Generational GP with tournament selection and single-individual elitism.
/// Returns the best program seen over the run.
pub fn evolve_one_class(task: &OneClassTask<'_>, cfg: &GpConfig) -> Result<Scored> {
    cfg.validate()?;
    let dim = task.data.dim();
    if dim == 0 || task.data.n_samples() == 0 {
        return Err(Error::invalid("GP needs at least one sample and one feature"));
    }
    let mut rng = seeded(cfg.seed);
    let mut scratch = EvalScratch::default();
    let mut buf = Vec::new();
    let eval = |p: GpProgram, scratch: &mut EvalScratch, buf: &mut Vec<f64>| {
        let (fitness, _) = task.score(&p, scratch, buf);
        Scored { program: p, fitness }
    };

    let mut pop: Vec<Scored> = (0..cfg.population)
        .map(|_| random_program(cfg.max_depth, dim, &mut rng))
        .map(|p| eval(p, &mut scratch, &mut buf))
        .collect();
    let mut best = pop[0].clone();
    for s in &pop[1..] {
        if better(s, &best) {
            best = s.clone();
        }
    }

    let p_total = cfg.p_crossover + cfg.p_mutation;
    for _ in 1..cfg.generations {
        if best.fitness >= 1.0 {
            break;
        }
        let elite = (0..pop.len()).fold(0, |b, i| if better(&pop[i], &pop[b]) { i } else { b });
        let mut next = Vec::with_capacity(cfg.population);
        next.push(pop[elite].clone());
        while next.len() < cfg.population {
            let roll = rng.random::<f64>() * p_total;
            if roll < cfg.p_crossover {
                let a = tournament(&pop, cfg.tournament_size, &mut rng);
                let b = tournament(&pop, cfg.tournament_size, &mut rng);
                let (c1, c2) = crossover(&pop[a].program, &pop[b].program, cfg.max_depth, &mut rng);
                for (child, parent) in [(c1, a), (c2, b)] {
                    if next.len() == cfg.population {
                        break;
                    }
                    if child == pop[parent].program {
                        next.push(pop[parent].clone());
                    } else {
                        next.push(eval(child, &mut scratch, &mut buf));
                    }
                }
            } else if roll < p_total {
                let a = tournament(&pop, cfg.tournament_size, &mut rng);
                let child = mutate(&pop[a].program, cfg.max_depth, dim, &mut rng);
                next.push(eval(child, &mut scratch, &mut buf));
            } else {
                let a = tournament(&pop, cfg.tournament_size, &mut rng);
                next.push(pop[a].clone());
            }
        }
        pop = next;
        for s in &pop {
            if better(s, &best) {
                best = s.clone();
            }
        }
    }
    Ok(best)
}
