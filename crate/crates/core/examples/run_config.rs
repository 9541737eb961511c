//! Drive a packaged experiment from a JSON config, as the `inls` binary
//! does, and read the observables back.
//!
//! ```text
//! cargo run --release --example run_config -- [out_dir]
//! ```

use inls::experiments::{read_observables_csv, run_experiment, Command, RunConfig, RunOptions, OBSERVABLES_FILE};

const CONFIG: &str = r#"{
    "grid": {"L": 40.0, "N": 2048},
    "params": {"alpha": 4.0, "b": 0.5},
    "time": {"dt": 0.002, "t_max": 2.0, "output_every": 50},
    "initial": {"kind": "odd_gaussian", "amplitude": 1.0, "width": 1.0},
    "local": {"lo": -1.0, "hi": 1.0}
}"#;

fn main() -> inls::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("inls-run-config"), Into::into);
    let config = RunConfig::from_json(CONFIG)?;
    let options = RunOptions {
        out: Some(out),
        ..RunOptions::default()
    };
    let summary = run_experiment(Command::Evolve, config, &options)?;
    for f in &summary.files {
        println!("wrote {}", f.display());
    }
    for row in read_observables_csv(summary.out_dir.join(OBSERVABLES_FILE))? {
        println!("t = {:4.1}  mass = {:.15}  energy = {:.12}", row.t, row.mass, row.e_total);
    }
    Ok(())
}
