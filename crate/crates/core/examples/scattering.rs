//! Interaction-picture residuals `||v(t_{i+1}) - v(t_i)||_{H¹}` with
//! `v = e^{-itΔ}u` on a dyadic window, and the extracted asymptotic state.
//!
//! ```text
//! cargo run --release --example scattering -- [t_max]
//! ```

use inls::analysis::scattering_report;
use inls::integrator::{domain_rule, Flow, Observer, Schedule};
use inls::{make_grid, make_params, sample_initial, InitialSpec};

fn main() -> inls::Result<()> {
    let t_max: f64 = std::env::args().nth(1).map_or(8.0, |a| a.parse().expect("t_max"));
    // domain rule: L >= x_support + 2 k_eff t_max with k_eff ~ 4
    let l = (8.2 * t_max + 8.0).ceil();
    let n = (l * 102.4).round() as usize;
    let grid = make_grid(l, n)?;
    let u0 = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &grid)?;
    println!("L = {l}, N = {n}, domain rule ok: {}", domain_rule(&u0, t_max).is_ok());

    let dt = 1e-3;
    let window: Vec<f64> = (0..4).map(|i| t_max / f64::powi(2.0, 3 - i)).collect();
    let every = (window[0] / dt).round() as usize;
    let traj = Flow::new(&grid, make_params(4.0, 0.5)?).evolve(&u0, &Schedule::new(dt, t_max, every)?, &[Observer::States])?;
    let report = scattering_report(&traj, &window, 1e-2)?;

    for (w, r) in report.times.windows(2).zip(&report.residuals) {
        println!("[{:6.3}, {:6.3}]  residual {r:.4e}", w[0], w[1]);
    }
    println!(
        "verdict {:?}; |u_+|^2 = {:.9}, |u_+|_H1 = {:.9}, self-consistency {:.1e}",
        report.verdict, report.u_plus_mass, report.u_plus_h1, report.final_mismatch
    );
    Ok(())
}
