//! Discrete Strichartz norms of a small solution against the free evolution
//! of the same data, over several `Ḣ^{s_c}`-admissible pairs.
//!
//! ```text
//! cargo run --release --example small_data -- [amplitude]
//! ```

use inls::analysis::small_data_certificate;
use inls::integrator::{Flow, Observer, Schedule};
use inls::observables::admissible_pairs;
use inls::{make_grid, make_params, sample_initial, InitialSpec};

fn main() -> inls::Result<()> {
    let amplitude: f64 = std::env::args().nth(1).map_or(0.05, |a| a.parse().expect("amplitude"));
    let params = make_params(4.0, 0.5)?;
    let grid = make_grid(40.0, 4096)?;
    let u0 = sample_initial(&InitialSpec::odd_gaussian(amplitude, 1.0), &grid)?;
    let traj = Flow::new(&grid, params).evolve(&u0, &Schedule::new(1e-3, 10.0, 50)?, &[Observer::States])?;

    let pairs = admissible_pairs(params.s_c(), &[3.0, 4.0, 6.0, 8.0])?;
    let report = small_data_certificate(&u0, &traj, &pairs)?;
    for p in &report.pairs {
        println!(
            "(q, r) = ({:7.3}, {}): nonlinear {:.6e}, free {:.6e}, ratio {:.6}",
            p.pair.q, p.pair.r, p.nonlinear, p.linear, p.ratio
        );
    }
    println!("max ratio {:.6}, within bound: {}", report.max_ratio, report.passed);
    Ok(())
}
