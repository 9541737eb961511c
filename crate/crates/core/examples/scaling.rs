//! Scaling symmetry `u_λ(t, x) = λ^{(2-b)/α} u(λ² t, λ x)`: the critical norm
//! is invariant and the discrete flow commutes with the scaling.
//!
//! ```text
//! cargo run --release --example scaling
//! ```

use inls::analysis::scale_state;
use inls::integrator::Flow;
use inls::observables::mass;
use inls::transform::{sobolev_norm, SobolevKind};
use inls::{make_grid, make_params, sample_initial, InitialSpec};

fn main() -> inls::Result<()> {
    let params = make_params(4.0, 0.5)?;
    let grid = make_grid(40.0, 4096)?;
    let u0 = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &grid)?;
    let s_c = params.s_c();
    println!("s_c = {s_c}");

    let dt = 1e-3;
    let steps = 1000;
    let evolved = Flow::new(&grid, params).advance(&u0, dt, steps)?;
    for lambda in [0.5, 2.0, 3.0] {
        let scaled = scale_state(&u0, lambda, &params)?;
        let before = sobolev_norm(&u0, s_c, SobolevKind::Homogeneous)?;
        let after = sobolev_norm(&scaled, s_c, SobolevKind::Homogeneous)?;

        let lhs = scale_state(&evolved, lambda, &params)?;
        let rhs = Flow::new(scaled.grid(), params).advance(&scaled, dt / (lambda * lambda), steps)?;
        println!(
            "lambda = {lambda}: L = {:6.2}, H^s_c {before:.12} -> {after:.12}, mass x{:.6}, flow defect {:.2e}",
            scaled.grid().length(),
            mass(&scaled) / mass(&u0),
            lhs.l2_distance(&rhs) / mass(&lhs).sqrt()
        );
    }
    Ok(())
}
