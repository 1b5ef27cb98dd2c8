//! Stacked generalization: hold-out A/B split, CNN base learners, the
//! prediction space on B, the extended feature set and cross-validated
//! GP-AdaBoost meta-classification. Also hosts the synthetic data generator
//! used by the examples and acceptance tests.

mod folds;
mod learner;
mod pipeline;
mod synthetic;

pub use folds::{complement, kfold_indices, split_ab, TRAIN_FRACTION};
pub use learner::{
    build_prediction_space, extend_features, BaseLearner, CnnLearner, ExtendedDataset, ExternalScores, PredictionSpace,
};
pub use pipeline::{
    default_roster, pretrain_reference, run_ablation, run_pipeline, scores_tsv, AblationReport, BaseResult, FoldResult,
    LearnerSpec, PipelineConfig, PretrainSource, ProtocolAudit, RunReport, Seeds,
};
pub use synthetic::{generate_synthetic, unit_direction, SyntheticSpec};
