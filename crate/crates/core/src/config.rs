//! Run configuration, read from a TOML file.
//!
//! ```toml
//! out = "results"             # output directory, overridable with --out
//!
//! [data]
//! train = "train.csv"         # relative paths resolve against the config file
//! source = "source.csv"       # optional; source-domain data for pretraining
//! pretrained_weights = "w"    # optional; used instead of `source`
//! label_column = "churn"
//! churn_label = "1"
//! missing_token = "NA"
//!
//! [seeds]
//! split = 0
//! base = 1
//! gp = 2
//! folds = 3
//!
//! [pipeline]
//! tag = "run"
//! split_fraction = 0.6
//! folds = 10
//! image_size = 32
//! drop_threshold = 0.95
//! transfer = true
//! frozen_prefix = 6           # optional; overrides every learner's value
//!
//! [[learners]]                # optional; defaults to cnn-a/cnn-b/cnn-c
//! name = "cnn-a"
//! frozen_prefix = 6
//! seed_offset = 0
//!
//! [train]                     # base learner SGD
//! learning_rate = 0.01
//! momentum = 0.9
//! epochs = 10
//! batch_size = 32
//!
//! [pretrain]                  # SGD on the source data
//! epochs = 10
//!
//! [gp]
//! population = 200
//! generations = 50
//! tournament_size = 7
//! p_crossover = 0.9
//! p_mutation = 0.1
//! max_depth = 8
//! rounds = 5
//!
//! [synth]                     # used by `synth`
//! file = "synthetic.csv"
//! n = 4000
//! d = 20
//! churn_rate = 0.5
//! separation = 2.5632
//! noise = 1.0
//! seed = 0
//! direction_seed = 0
//! shift = 0.0
//! ```
//!
//! Every key has a default except `data.train` for commands that read data.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::convnet::TrainConfig;
use crate::error::{Error, Result};
use crate::gpboost::GpConfig;
use crate::stacker::{default_roster, LearnerSpec, PipelineConfig, Seeds, SyntheticSpec};
use crate::tabular::{CsvOptions, DEFAULT_DROP_THRESHOLD};

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DataSection {
    pub train: Option<PathBuf>,
    pub source: Option<PathBuf>,
    pub pretrained_weights: Option<PathBuf>,
    pub label_column: String,
    pub churn_label: String,
    pub missing_token: String,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            train: None,
            source: None,
            pretrained_weights: None,
            label_column: "churn".into(),
            churn_label: "1".into(),
            missing_token: "NA".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SeedSection {
    pub split: u64,
    pub base: u64,
    pub gp: u64,
    pub folds: u64,
}

impl Default for SeedSection {
    fn default() -> Self {
        let s = Seeds::from_master(0);
        SeedSection {
            split: s.split,
            base: s.base,
            gp: s.gp,
            folds: s.folds,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineSection {
    pub tag: String,
    pub split_fraction: f64,
    pub folds: usize,
    pub image_size: usize,
    pub drop_threshold: f64,
    pub transfer: bool,
    pub frozen_prefix: Option<usize>,
}

impl Default for PipelineSection {
    fn default() -> Self {
        let p = PipelineConfig::default();
        PipelineSection {
            tag: p.tag,
            split_fraction: p.split_fraction,
            folds: p.folds,
            image_size: p.image_size,
            drop_threshold: DEFAULT_DROP_THRESHOLD,
            transfer: false,
            frozen_prefix: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LearnerEntry {
    pub name: String,
    #[serde(default)]
    pub frozen_prefix: usize,
    #[serde(default)]
    pub seed_offset: u64,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub learning_rate: f64,
    pub momentum: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            learning_rate: t.learning_rate,
            momentum: t.momentum,
            epochs: t.epochs,
            batch_size: t.batch_size,
        }
    }
}

impl TrainSection {
    fn to_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct GpSection {
    pub population: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub p_crossover: f64,
    pub p_mutation: f64,
    pub max_depth: usize,
    pub rounds: usize,
}

impl Default for GpSection {
    fn default() -> Self {
        let g = GpConfig::default();
        GpSection {
            population: g.population,
            generations: g.generations,
            tournament_size: g.tournament_size,
            p_crossover: g.p_crossover,
            p_mutation: g.p_mutation,
            max_depth: g.max_depth,
            rounds: g.elite_size,
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub file: String,
    pub n: usize,
    pub d: usize,
    pub churn_rate: f64,
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
    pub direction_seed: u64,
    pub shift: f64,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            file: "synthetic.csv".into(),
            n: 4000,
            d: 20,
            churn_rate: 0.5,
            separation: 2.5632,
            noise: 1.0,
            seed: 0,
            direction_seed: 0,
            shift: 0.0,
        }
    }
}

impl SynthSection {
    pub fn to_spec(&self) -> SyntheticSpec {
        SyntheticSpec {
            n: self.n,
            d: self.d,
            churn_rate: self.churn_rate,
            separation: self.separation,
            noise: self.noise,
            seed: self.seed,
            direction_seed: self.direction_seed,
            shift: self.shift,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub out: Option<PathBuf>,
    pub data: DataSection,
    pub seeds: SeedSection,
    pub pipeline: PipelineSection,
    pub learners: Option<Vec<LearnerEntry>>,
    pub train: TrainSection,
    pub pretrain: TrainSection,
    pub gp: GpSection,
    pub synth: SynthSection,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a config file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    /// Replaces every seed with one derived from `seed`.
    pub fn override_seed(&mut self, seed: u64) {
        let s = Seeds::from_master(seed);
        self.seeds = SeedSection {
            split: s.split,
            base: s.base,
            gp: s.gp,
            folds: s.folds,
        };
        self.synth.seed = seed;
    }

    pub fn seeds(&self) -> Seeds {
        Seeds {
            split: self.seeds.split,
            base: self.seeds.base,
            gp: self.seeds.gp,
            folds: self.seeds.folds,
        }
    }

    pub fn csv_options(&self) -> CsvOptions {
        CsvOptions {
            missing_token: self.data.missing_token.clone(),
            ..CsvOptions::new(self.data.label_column.clone(), self.data.churn_label.clone())
        }
    }

    pub fn train_path(&self) -> Result<PathBuf> {
        self.data
            .train
            .as_deref()
            .map(|p| self.resolve(p))
            .ok_or_else(|| Error::Config("data.train is required".into()))
    }

    pub fn pretrain_config(&self) -> TrainConfig {
        self.pretrain.to_config(self.seeds.base.wrapping_add(1000))
    }

    /// Pipeline settings without the pretraining source, which needs I/O.
    pub fn pipeline_config(&self) -> Result<PipelineConfig> {
        let seeds = self.seeds();
        let mut learners = match &self.learners {
            Some(list) => list
                .iter()
                .map(|l| LearnerSpec {
                    name: l.name.clone(),
                    frozen_prefix: l.frozen_prefix,
                    seed_offset: l.seed_offset,
                })
                .collect(),
            None => default_roster(),
        };
        if learners.is_empty() {
            return Err(Error::Config("at least one learner is required".into()));
        }
        if let Some(f) = self.pipeline.frozen_prefix {
            for l in &mut learners {
                l.frozen_prefix = f;
            }
        }
        let g = &self.gp;
        let gp = GpConfig {
            population: g.population,
            generations: g.generations,
            tournament_size: g.tournament_size,
            p_crossover: g.p_crossover,
            p_mutation: g.p_mutation,
            max_depth: g.max_depth,
            elite_size: g.rounds,
            seed: seeds.gp,
        };
        gp.validate().map_err(|e| Error::Config(e.to_string()))?;
        let train = self.train.to_config(seeds.base);
        train.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(PipelineConfig {
            tag: self.pipeline.tag.clone(),
            split_fraction: self.pipeline.split_fraction,
            folds: self.pipeline.folds,
            image_size: self.pipeline.image_size,
            drop_threshold: self.pipeline.drop_threshold,
            seeds,
            train,
            gp,
            learners,
            transfer: self.pipeline.transfer,
            pretrain: None,
        })
    }
}
