use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use churnstack::cli::{cmd_ablate, cmd_eval, cmd_preprocess, cmd_run, cmd_synth, Session};
use churnstack::Result;

#[derive(Parser)]
#[command(name = "churnstack", version, about = "Stacked CNN + GP-AdaBoost churn prediction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Derive every seed from this value.
    #[arg(long)]
    seed_override: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Clean, encode and scale the training CSV.
    Preprocess(Common),
    /// Run the full pipeline.
    Run(Common),
    /// Compare runs with and without pretrained weights.
    Ablate(Common),
    /// Write a synthetic dataset.
    Synth(Common),
    /// Recompute metrics from saved fold scores.
    Eval(Common),
}

fn dispatch(cmd: Command) -> Result<()> {
    let (common, run): (Common, fn(&Session) -> Result<()>) = match cmd {
        Command::Preprocess(c) => (c, |s| {
            let r = cmd_preprocess(s)?;
            println!(
                "{} columns after encoding, {} dropped",
                r.encoded_width,
                r.dropped_columns.len()
            );
            Ok(())
        }),
        Command::Run(c) => (c, |s| {
            print!("{}", cmd_run(s)?.to_tsv());
            Ok(())
        }),
        Command::Ablate(c) => (c, |s| {
            print!("{}", cmd_ablate(s)?.to_tsv());
            Ok(())
        }),
        Command::Synth(c) => (c, |s| {
            println!("{}", cmd_synth(s)?.display());
            Ok(())
        }),
        Command::Eval(c) => (c, |s| {
            println!("{} folds evaluated", cmd_eval(s)?.len());
            Ok(())
        }),
    };
    let session = Session::open(&common.config, common.out.as_deref(), common.seed_override)?;
    run(&session)
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
