//! Backward-forward construction of the solution that scatters to a
//! prescribed free profile φ, compared against `e^{itΔ}φ`.
//!
//! ```text
//! cargo run --release --example wave_operator -- [amplitude] [t_back]
//! ```

use inls::analysis::wave_operator_roundtrip;
use inls::integrator::Schedule;
use inls::{make_grid, make_params, sample_initial, InitialSpec};

fn main() -> inls::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let amplitude = args.next().unwrap_or(0.5);
    let t_back = args.next().unwrap_or(4.0);

    let grid = make_grid(60.0, 6144)?;
    let phi = sample_initial(&InitialSpec::odd_gaussian(amplitude, 1.0), &grid)?;
    let schedule = Schedule::new(1e-3, t_back, 250)?;
    let report = wave_operator_roundtrip(&phi, t_back, &schedule, &make_params(4.0, 0.5)?)?;

    for (t, m) in &report.window {
        println!("t = {t:6.3}  |u(t) - e^(itΔ)φ|_H1 = {m:.4e}");
    }
    println!("sup mismatch {:.4e}, mass defect {:.2e}", report.mismatch, report.mass_defect);
    Ok(())
}
