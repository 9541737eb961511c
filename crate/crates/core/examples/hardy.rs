//! Hardy's inequality for odd functions, `∫|u/r|^p <= (p/(p-1))^p ∫|u'|^p`,
//! on seeded random packets and on `r e^{-r}`.
//!
//! ```text
//! cargo run --release --example hardy -- [samples] [seed]
//! ```

use std::path::PathBuf;

use inls::analysis::hardy_ratio_analytic;
use inls::experiments::{hardy_suite, HardyConfig, RunConfig};
use inls::integrator::Schedule;
use inls::{make_grid, make_params, InitialSpec};

fn main() -> inls::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples = args.next().map_or(200, |a| a.parse().expect("sample count"));
    let seed = args.next().map_or(0, |a| a.parse().expect("seed"));

    let config = RunConfig {
        grid: make_grid(40.0, 4096)?,
        params: make_params(4.0, 0.5)?,
        time: Schedule::new(1e-3, 0.0, 0)?,
        initial: InitialSpec::odd_gaussian(1.0, 1.0),
        local: inls::observables::Interval::symmetric(1.0),
        coupling: Default::default(),
        wall_policy: Default::default(),
        out: None::<PathBuf>,
        seed,
        convergence: None,
        hardy: Some(HardyConfig {
            samples,
            ..HardyConfig::default()
        }),
        scatter: None,
        sweep: None,
    };
    let report = hardy_suite(&config)?;
    for e in &report.exponents {
        println!(
            "p = {:3}: max ratio {:.5} / constant {:.5}, violations {}",
            e.p, e.max_ratio, e.sharp_constant, e.violations
        );
    }

    let exact = hardy_ratio_analytic(|r| r * (-r).exp(), |r| (1.0 - r) * (-r).exp(), 2.0)?;
    println!("r e^-r, p = 2: lhs = {:.12} (1/2), rhs = {:.12} (1/4)", exact.lhs, exact.rhs);
    Ok(())
}
