// Drive the command layer from a TOML config, as the binary does.

use churnstack::cli::{cmd_eval, cmd_run, cmd_synth, Session};

fn main() {
    let dir = tempfile::tempdir().expect("tempdir");
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        r#"
out = "results"

[data]
train = "results/synthetic.csv"

[pipeline]
tag = "quick"

[train]
epochs = 1

[gp]
population = 30
generations = 5

[synth]
n = 300
d = 10
"#,
    )
    .unwrap();

    let session = Session::open(&config, None, Some(42)).expect("session");
    println!("wrote {}", cmd_synth(&session).expect("synth").display());
    print!("{}", cmd_run(&session).expect("run").to_tsv());
    println!(
        "re-evaluated {} folds from saved scores",
        cmd_eval(&session).expect("eval").len()
    );
}
