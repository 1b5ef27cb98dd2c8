//! GP-AdaBoost meta-classifier: per class, AdaBoost reweights samples while
//! genetic programming evolves one-class expression trees.

mod boost;
mod evolve;
mod program;

pub use boost::{
    adaboost_train, adaboost_train_traced, vote_weight, BoostedEnsemble, Member, RoundRecord, ENSEMBLE_MAGIC, MIN_ERROR,
};
pub use evolve::{evolve_one_class, GpConfig, OneClassTask, Scored};
pub use program::{
    crossover, crossover_at, mutate, mutate_at, pdiv, random_program, Columns, EvalScratch, GpProgram, Node,
    MUTATION_DEPTH, PDIV_EPS,
};
