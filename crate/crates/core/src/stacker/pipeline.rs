use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::folds::{complement, kfold_indices, split_ab};
use super::learner::{build_prediction_space, extend_features, BaseLearner, CnnLearner, PredictionSpace};
use crate::convnet::{build_custom_cnn, train, weights_from_text, weights_to_text, ConvNet, TrainConfig, CONV_BLOCKS};
use crate::error::{Error, Result, StageContext};
use crate::gpboost::{adaboost_train, GpConfig};
use crate::imaging::{convert_dataset, FeatureImage, DEFAULT_IMAGE_SIZE};
use crate::metrics::{evaluate, roc_auc, roc_to_tsv};
use crate::tabular::{Class, Dataset, PreprocessReport, Preprocessor, DEFAULT_DROP_THRESHOLD};
use crate::textfmt::fmt6;

#[derive(Clone, Debug, PartialEq)]
pub struct LearnerSpec {
    pub name: String,
    /// Leading layers kept fixed when fine-tuning pretrained weights.
    pub frozen_prefix: usize,
    pub seed_offset: u64,
}

/// Three reference CNNs that differ in seed and in how much of the
/// pretrained network they keep frozen.
pub fn default_roster() -> Vec<LearnerSpec> {
    [("cnn-a", CONV_BLOCKS), ("cnn-b", 3), ("cnn-c", 0)]
        .into_iter()
        .enumerate()
        .map(|(i, (name, frozen_prefix))| LearnerSpec {
            name: name.to_string(),
            frozen_prefix,
            seed_offset: i as u64,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Seeds {
    pub split: u64,
    pub base: u64,
    pub gp: u64,
    pub folds: u64,
}

impl Seeds {
    /// `split = s`, `base = s + 1`, `gp = s + 2`, `folds = s + 3`.
    pub fn from_master(s: u64) -> Self {
        Seeds {
            split: s,
            base: s.wrapping_add(1),
            gp: s.wrapping_add(2),
            folds: s.wrapping_add(3),
        }
    }
}

#[derive(Clone, Debug)]
pub enum PretrainSource {
    /// A weight file for the reference network.
    WeightsFile(PathBuf),
    /// Raw source-domain data; it is preprocessed on its own and used to train
    /// the reference network before transfer.
    SourceData { data: Dataset, train: TrainConfig },
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub tag: String,
    pub split_fraction: f64,
    pub folds: usize,
    pub image_size: usize,
    pub drop_threshold: f64,
    pub seeds: Seeds,
    pub train: TrainConfig,
    pub gp: GpConfig,
    pub learners: Vec<LearnerSpec>,
    pub transfer: bool,
    pub pretrain: Option<PretrainSource>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            tag: "run".to_string(),
            split_fraction: super::folds::TRAIN_FRACTION,
            folds: 10,
            image_size: DEFAULT_IMAGE_SIZE,
            drop_threshold: DEFAULT_DROP_THRESHOLD,
            seeds: Seeds::from_master(0),
            train: TrainConfig::default(),
            gp: GpConfig::default(),
            learners: default_roster(),
            transfer: false,
            pretrain: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldResult {
    pub accuracy: f64,
    pub auc: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BaseResult {
    pub name: String,
    /// Hold-out accuracy on B with a 0.5 probability threshold.
    pub accuracy: f64,
    pub auc: f64,
}

/// Index bookkeeping for checking the hold-out and cross-validation protocol.
/// Row indices refer to the input dataset; fold indices refer to rows of B.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProtocolAudit {
    pub a_rows: Vec<usize>,
    pub b_rows: Vec<usize>,
    pub learner_rows: Vec<Vec<usize>>,
    /// `(train, test)` positions within B for each fold.
    pub folds: Vec<(Vec<usize>, Vec<usize>)>,
    pub pretrained_loaded: bool,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub tag: String,
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub mean_auc: f64,
    pub base: Vec<BaseResult>,
    pub preprocess: PreprocessReport,
    pub prediction_space: PredictionSpace,
    pub audit: ProtocolAudit,
}

impl RunReport {
    /// Per-fold table followed by the macro average.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("run\taccuracy\tauc\n");
        for (i, f) in self.folds.iter().enumerate() {
            writeln!(s, "{}\t{}\t{}", i + 1, fmt6(f.accuracy), fmt6(f.auc)).unwrap();
        }
        writeln!(s, "average\t{}\t{}", fmt6(self.mean_accuracy), fmt6(self.mean_auc)).unwrap();
        s
    }

    pub fn base_tsv(&self) -> String {
        let mut s = String::from("learner\taccuracy\tauc\n");
        for b in &self.base {
            writeln!(s, "{}\t{}\t{}", b.name, fmt6(b.accuracy), fmt6(b.auc)).unwrap();
        }
        s
    }

    pub fn best_base_accuracy(&self) -> f64 {
        self.base.iter().map(|b| b.accuracy).fold(f64::NEG_INFINITY, f64::max)
    }
}

fn write(dir: &Path, name: String, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Error::io(path, e))
}

fn images_for(ds: &Dataset, rows: &[usize], size: usize) -> Result<Vec<FeatureImage>> {
    let mut images = convert_dataset(ds, size)?;
    for (im, &r) in images.iter_mut().zip(rows) {
        im.source_index = r;
    }
    Ok(images)
}

/// Preprocesses source-domain data on its own and trains the reference
/// network on it.
pub fn pretrain_reference(source: &Dataset, image_size: usize, threshold: f64, cfg: &TrainConfig) -> Result<ConvNet> {
    let (_, processed) = Preprocessor::fit(source, threshold)?;
    let images = convert_dataset(&processed, image_size)?;
    let mut net = build_custom_cnn(image_size, cfg.seed)?;
    train(&mut net, &images, processed.labels(), cfg)?;
    Ok(net)
}

/// Hold-out stacking with cross-validated meta-classification:
/// split into A/B, fit preprocessing on A, convert rows to images, train (or
/// fine-tune) base CNNs on A, score B, append the scores to B's features and
/// run k-fold GP-AdaBoost on the result. Artifacts go to `out` when given.
pub fn run_pipeline(data: &Dataset, cfg: &PipelineConfig, out: Option<&Path>) -> Result<RunReport> {
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let (a_rows, b_rows) = split_ab(data.labels(), cfg.split_fraction, cfg.seeds.split).stage("split")?;
    let raw_a = data.subset(&a_rows);
    let raw_b = data.subset(&b_rows);

    let (pre, set_a) = Preprocessor::fit(&raw_a, cfg.drop_threshold).stage("preprocess")?;
    let set_b = pre.apply(&raw_b).stage("preprocess")?;
    if let Some(dir) = out {
        write(dir, format!("{}_preprocess.txt", cfg.tag), &pre.report().to_text()).stage("report")?;
    }

    let images_a = images_for(&set_a, &a_rows, cfg.image_size).stage("imaging")?;
    let images_b = images_for(&set_b, &b_rows, cfg.image_size).stage("imaging")?;

    let mut audit = ProtocolAudit {
        a_rows: a_rows.clone(),
        b_rows: b_rows.clone(),
        ..Default::default()
    };

    let pretrained = if cfg.transfer {
        let text = match cfg.pretrain.as_ref() {
            None => {
                return Err(Error::Config("transfer enabled without a pretraining source".into())).stage("pretrain")
            }
            Some(PretrainSource::WeightsFile(path)) => fs::read_to_string(path)
                .map_err(|e| Error::io(path, e))
                .stage("pretrain")?,
            Some(PretrainSource::SourceData { data: source, train }) => {
                let net = pretrain_reference(source, cfg.image_size, cfg.drop_threshold, train).stage("pretrain")?;
                let text = weights_to_text(&net);
                if let Some(dir) = out {
                    write(dir, format!("{}_pretrained.weights", cfg.tag), &text).stage("pretrain")?;
                }
                text
            }
        };
        audit.pretrained_loaded = true;
        Some(text)
    } else {
        None
    };

    let mut learners = Vec::with_capacity(cfg.learners.len());
    for spec in &cfg.learners {
        let seed = cfg.seeds.base.wrapping_add(spec.seed_offset);
        let mut net = build_custom_cnn(cfg.image_size, seed).stage("base-learners")?;
        if let Some(text) = &pretrained {
            weights_from_text(&mut net, text).stage("base-learners")?;
            net.set_frozen_prefix(spec.frozen_prefix).stage("base-learners")?;
        }
        let tc = TrainConfig {
            seed,
            ..cfg.train.clone()
        };
        train(&mut net, &images_a, set_a.labels(), &tc).stage("base-learners")?;
        audit
            .learner_rows
            .push(images_a.iter().map(|im| im.source_index).collect());
        if let Some(dir) = out {
            write(
                dir,
                format!("{}_{}.weights", cfg.tag, spec.name),
                &weights_to_text(&net),
            )
            .stage("base-learners")?;
        }
        learners.push(CnnLearner::trained(spec.name.clone(), net));
    }
    let refs: Vec<&dyn BaseLearner> = learners.iter().map(|l| l as &dyn BaseLearner).collect();
    let space = build_prediction_space(&refs, &images_b).stage("prediction-space")?;

    let labels_b = set_b.labels();
    let mut base = Vec::with_capacity(learners.len());
    for (j, l) in learners.iter().enumerate() {
        let probs = space.column(j);
        let preds: Vec<Class> = probs
            .iter()
            .map(|&p| if p > 0.5 { Class::Churner } else { Class::NonChurner })
            .collect();
        let report = evaluate(&preds, &probs, labels_b).stage("prediction-space")?;
        base.push(BaseResult {
            name: l.name().to_string(),
            accuracy: report.accuracy,
            auc: report.auc.unwrap_or(0.5),
        });
    }

    let ext =
        extend_features(&set_b.column_names(), &set_b.numeric_rows()?, labels_b, &space).stage("prediction-space")?;
    if let Some(dir) = out {
        write(dir, format!("{}_prediction_space.tsv", cfg.tag), &space.to_tsv()).stage("report")?;
    }

    let folds = kfold_indices(&ext.labels, cfg.folds, cfg.seeds.folds).stage("meta-cv")?;
    let mut results = Vec::with_capacity(folds.len());
    for (f, test) in folds.iter().enumerate() {
        let train_idx = complement(&folds, f);
        let rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| ext.rows[i].clone()).collect();
        let labels: Vec<Class> = train_idx.iter().map(|&i| ext.labels[i]).collect();
        let gp = GpConfig {
            seed: cfg.seeds.gp.wrapping_add(f as u64),
            ..cfg.gp.clone()
        };
        let ensemble = adaboost_train(&rows, &labels, &gp).stage("meta-cv")?;
        let mut preds = Vec::with_capacity(test.len());
        let mut scores = Vec::with_capacity(test.len());
        for &i in test {
            let (c, s) = ensemble.predict(&ext.rows[i]).stage("meta-cv")?;
            preds.push(c);
            scores.push(s);
        }
        let truth: Vec<Class> = test.iter().map(|&i| ext.labels[i]).collect();
        let report = evaluate(&preds, &scores, &truth).stage("meta-cv")?;
        let (roc, auc) = roc_auc(&scores, &truth).stage("meta-cv")?;
        if let Some(dir) = out {
            let stem = format!("{}_fold{:02}", cfg.tag, f + 1);
            write(dir, format!("{stem}.gpa"), &ensemble.to_text()).stage("report")?;
            write(dir, format!("{stem}_roc.tsv"), &roc_to_tsv(&roc)).stage("report")?;
            write(dir, format!("{stem}_scores.tsv"), &scores_tsv(&truth, &scores, &preds)).stage("report")?;
        }
        results.push(FoldResult {
            accuracy: report.accuracy,
            auc,
            sensitivity: report.sensitivity,
            specificity: report.specificity,
        });
        audit.folds.push((train_idx, test.clone()));
    }

    let k = results.len() as f64;
    let report = RunReport {
        tag: cfg.tag.clone(),
        mean_accuracy: results.iter().map(|r| r.accuracy).sum::<f64>() / k,
        mean_auc: results.iter().map(|r| r.auc).sum::<f64>() / k,
        folds: results,
        base,
        preprocess: pre.report().clone(),
        prediction_space: space,
        audit,
    };
    if let Some(dir) = out {
        write(dir, format!("{}_report.tsv", cfg.tag), &report.to_tsv()).stage("report")?;
        write(dir, format!("{}_base.tsv", cfg.tag), &report.base_tsv()).stage("report")?;
    }
    Ok(report)
}

/// Score file consumed by the `eval` command: `label<TAB>score<TAB>predicted`.
pub fn scores_tsv(labels: &[Class], scores: &[f64], preds: &[Class]) -> String {
    let mut s = String::from("label\tscore\tpredicted\n");
    for ((l, sc), p) in labels.iter().zip(scores).zip(preds) {
        writeln!(s, "{}\t{sc:?}\t{}", l.tag(), p.tag()).unwrap();
    }
    s
}

/// Transfer-on and transfer-off runs from identical inputs and seeds.
#[derive(Clone, Debug)]
pub struct AblationReport {
    pub with_transfer: RunReport,
    pub without_transfer: RunReport,
}

impl AblationReport {
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("variant\taccuracy\tauc\n");
        for (name, r) in [
            ("transfer", &self.with_transfer),
            ("no-transfer", &self.without_transfer),
        ] {
            writeln!(s, "{name}\t{}\t{}", fmt6(r.mean_accuracy), fmt6(r.mean_auc)).unwrap();
        }
        s
    }
}

/// Runs the pipeline twice, with and without loading pretrained weights.
/// Without transfer every layer trains from its random initialization.
pub fn run_ablation(data: &Dataset, cfg: &PipelineConfig, out: Option<&Path>) -> Result<AblationReport> {
    let on = PipelineConfig {
        transfer: true,
        tag: format!("{}_transfer", cfg.tag),
        ..cfg.clone()
    };
    let off = PipelineConfig {
        transfer: false,
        pretrain: None,
        tag: format!("{}_notransfer", cfg.tag),
        ..cfg.clone()
    };
    let report = AblationReport {
        with_transfer: run_pipeline(data, &on, out)?,
        without_transfer: run_pipeline(data, &off, out)?,
    };
    if let Some(dir) = out {
        write(dir, format!("{}_ablation.tsv", cfg.tag), &report.to_tsv()).stage("report")?;
    }
    Ok(report)
}
