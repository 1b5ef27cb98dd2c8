//! Command implementations behind the `churnstack` binary. Each command reads a
//! [`RunConfig`], writes its artifacts to the output directory and echoes the
//! config file there verbatim as `config.toml`.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use crate::config::RunConfig;
use crate::error::{Error, Result, StageContext};
use crate::metrics::{evaluate, EvalReport};
use crate::stacker::{generate_synthetic, run_ablation, run_pipeline, AblationReport, PretrainSource, RunReport};
use crate::tabular::{load_csv, write_numeric_csv, Class, Dataset, PreprocessReport, Preprocessor};
use crate::textfmt::{fmt6, parse_f64};

pub const CONFIG_ECHO: &str = "config.toml";

/// A loaded config plus the resolved output directory.
#[derive(Clone, Debug)]
pub struct Session {
    pub config: RunConfig,
    pub out: PathBuf,
}

impl Session {
    /// Loads the config, applies command-line overrides, creates the output
    /// directory and copies the config file into it.
    pub fn open(config_path: &Path, out: Option<&Path>, seed_override: Option<u64>) -> Result<Self> {
        let text = fs::read_to_string(config_path).map_err(|e| Error::io(config_path, e))?;
        let mut config = RunConfig::from_toml(&text).map_err(|e| Error::Input {
            path: config_path.to_path_buf(),
            source: Box::new(e),
        })?;
        config.base_dir = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
        if let Some(seed) = seed_override {
            config.override_seed(seed);
        }
        let out = match (out, &config.out) {
            (Some(o), _) => o.to_path_buf(),
            (None, Some(o)) => config.resolve(o),
            (None, None) => return Err(Error::Config("no output directory: pass --out or set `out`".into())),
        };
        fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
        let echo = out.join(CONFIG_ECHO);
        fs::write(&echo, &text).map_err(|e| Error::io(echo, e))?;
        Ok(Session { config, out })
    }
}

fn load(cfg: &RunConfig, path: &Path) -> Result<Dataset> {
    load_csv(path, &cfg.csv_options()).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

fn write_dataset(ds: &Dataset, label_column: &str, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_numeric_csv(ds, label_column, BufWriter::new(file))
}

/// Fits the preprocessing chain on the whole training file and writes
/// `<tag>_preprocessed.csv` and `<tag>_preprocess.txt`.
pub fn cmd_preprocess(s: &Session) -> Result<PreprocessReport> {
    let cfg = &s.config;
    let ds = load(cfg, &cfg.train_path()?).stage("load")?;
    let (pre, out) = Preprocessor::fit(&ds, cfg.pipeline.drop_threshold).stage("preprocess")?;
    let tag = &cfg.pipeline.tag;
    write_dataset(
        &out,
        &cfg.data.label_column,
        &s.out.join(format!("{tag}_preprocessed.csv")),
    )
    .stage("report")?;
    let path = s.out.join(format!("{tag}_preprocess.txt"));
    fs::write(&path, pre.report().to_text())
        .map_err(|e| Error::io(path, e))
        .stage("report")?;
    Ok(pre.report().clone())
}

fn pipeline_with_source(cfg: &RunConfig, need_source: bool) -> Result<crate::stacker::PipelineConfig> {
    let mut p = cfg.pipeline_config()?;
    if need_source {
        p.pretrain = match (&cfg.data.pretrained_weights, &cfg.data.source) {
            (Some(w), _) => Some(PretrainSource::WeightsFile(cfg.resolve(w))),
            (None, Some(src)) => Some(PretrainSource::SourceData {
                data: load(cfg, &cfg.resolve(src)).stage("load")?,
                train: cfg.pretrain_config(),
            }),
            (None, None) => {
                return Err(Error::Config(
                    "transfer needs data.pretrained_weights or data.source".into(),
                ))
            }
        };
    }
    Ok(p)
}

/// Full pipeline on the training file.
pub fn cmd_run(s: &Session) -> Result<RunReport> {
    let cfg = &s.config;
    let data = load(cfg, &cfg.train_path()?).stage("load")?;
    let p = pipeline_with_source(cfg, cfg.pipeline.transfer)?;
    run_pipeline(&data, &p, Some(&s.out))
}

/// Transfer-on and transfer-off runs; writes `<tag>_ablation.tsv`.
pub fn cmd_ablate(s: &Session) -> Result<AblationReport> {
    let cfg = &s.config;
    let data = load(cfg, &cfg.train_path()?).stage("load")?;
    let p = pipeline_with_source(cfg, true)?;
    run_ablation(&data, &p, Some(&s.out))
}

/// Writes the `[synth]` dataset as CSV and returns its path.
pub fn cmd_synth(s: &Session) -> Result<PathBuf> {
    let cfg = &s.config;
    let ds = generate_synthetic(&cfg.synth.to_spec()).stage("synth")?;
    let path = s.out.join(&cfg.synth.file);
    write_dataset(&ds, &cfg.data.label_column, &path).stage("synth")?;
    Ok(path)
}

/// Parses a `label<TAB>score<TAB>predicted` file.
pub fn read_scores(text: &str) -> Result<(Vec<Class>, Vec<f64>, Vec<Class>)> {
    let mut labels = Vec::new();
    let mut scores = Vec::new();
    let mut preds = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let bad = |message: &str| Error::Parse {
            what: "score file",
            line: i + 1,
            message: message.to_string(),
        };
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 3 {
            return Err(bad("expected 3 fields"));
        }
        labels.push(Class::from_tag(f[0]).ok_or_else(|| bad("unknown label"))?);
        scores.push(parse_f64(f[1]).ok_or_else(|| bad("bad score"))?);
        preds.push(Class::from_tag(f[2]).ok_or_else(|| bad("unknown prediction"))?);
    }
    Ok((labels, scores, preds))
}

/// Recomputes per-fold metrics from the saved `<tag>_foldNN_scores.tsv` files
/// in the output directory and writes `<tag>_eval.tsv` in the report layout.
pub fn cmd_eval(s: &Session) -> Result<Vec<EvalReport>> {
    let tag = &s.config.pipeline.tag;
    let prefix = format!("{tag}_fold");
    let mut files: Vec<PathBuf> = fs::read_dir(&s.out)
        .map_err(|e| Error::io(&s.out, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.starts_with(&prefix) && n.ends_with("_scores.tsv"))
        })
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Config(format!(
            "no {prefix}*_scores.tsv files in {}",
            s.out.display()
        )))
        .stage("eval");
    }
    let mut reports = Vec::with_capacity(files.len());
    for path in &files {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e)).stage("eval")?;
        let report = read_scores(&text)
            .and_then(|(labels, scores, preds)| evaluate(&preds, &scores, &labels))
            .map_err(|e| Error::Input {
                path: path.clone(),
                source: Box::new(e),
            })
            .stage("eval")?;
        reports.push(report);
    }
    let k = reports.len() as f64;
    let mut out = String::from("run\taccuracy\tauc\n");
    for (i, r) in reports.iter().enumerate() {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            i + 1,
            fmt6(r.accuracy),
            fmt6(r.auc.unwrap_or(0.5))
        ));
    }
    let acc = reports.iter().map(|r| r.accuracy).sum::<f64>() / k;
    let auc = reports.iter().map(|r| r.auc.unwrap_or(0.5)).sum::<f64>() / k;
    out.push_str(&format!("average\t{}\t{}\n", fmt6(acc), fmt6(auc)));
    let path = s.out.join(format!("{tag}_eval.tsv"));
    fs::write(&path, out).map_err(|e| Error::io(path, e)).stage("eval")?;
    Ok(reports)
}
