// A configured sweep end to end: parse a TOML config, run it on several
// thread counts and confirm the CSV bytes do not change.
//
//   cargo run --release --example reproducible_sweep

use cellfree::harness::{run_experiment, write_results, ExperimentKind, RunConfig, RunOptions};

const CONFIG: &str = r#"
[system]
seed = 42

[experiment]
drops = 3
blocks = 2
capacities = [8.0, 16.0]
bits = [2, 4]
"#;

fn csv(run: &RunConfig, kind: ExperimentKind, threads: usize) -> cellfree::Result<Vec<u8>> {
    let rows = run_experiment(kind, run, &RunOptions { threads, ..Default::default() })?;
    let mut buf = Vec::new();
    write_results(&rows, &mut buf)?;
    Ok(buf)
}

fn main() -> cellfree::Result<()> {
    let run = RunConfig::parse(CONFIG)?;
    println!("config hash {}", run.hash());
    let reference = csv(&run, ExperimentKind::Maxmin, 1)?;
    for threads in [2, 4] {
        let other = csv(&run, ExperimentKind::Maxmin, threads)?;
        println!("{threads} threads: identical = {}", other == reference);
    }
    let text = String::from_utf8(reference).expect("csv is utf-8");
    for line in text.lines().take(9) {
        println!("{line}");
    }
    Ok(())
}
