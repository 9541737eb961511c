//! The free flow is diagonal in the sine basis, so it is exact up to roundoff.
//!
//! ```text
//! cargo run --release --example free_propagator
//! ```

use std::f64::consts::PI;

use inls::analysis::interaction_picture;
use inls::integrator::{Flow, Observer, Schedule};
use inls::observables::mass;
use inls::transform::{free_propagate, sobolev_norm, SobolevKind};
use inls::{make_grid, make_params, sample_initial, InitialSpec};

fn main() -> inls::Result<()> {
    // sin(x) on [-π, π] picks up e^{-iπ} = -1 at t = π
    let grid = make_grid(PI, 256)?;
    let mode = sample_initial(&InitialSpec::sine_mode(1.0, 1), &grid)?;
    let flipped = free_propagate(&mode, PI);
    let err = flipped
        .values()
        .iter()
        .zip(mode.values())
        .map(|(a, b)| (a + b).norm())
        .fold(0.0, f64::max);
    println!("sine mode, k^2 t = pi: max |u(t) + u0| = {err:.2e}");

    let grid = make_grid(30.0, 2048)?;
    let u0 = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &grid)?;
    let traj = Flow::new(&grid, make_params(4.0, 0.5)?)
        .linear_only()
        .evolve(&u0, &Schedule::new(0.01, 4.0, 100)?, &[Observer::States])?;

    println!("{:>6} {:>12} {:>12} {:>14}", "t", "mass", "H1", "|v(t) - u0|");
    for s in traj.states() {
        let v = interaction_picture(s);
        println!(
            "{:6.2} {:12.9} {:12.9} {:14.3e}",
            s.t(),
            mass(s),
            sobolev_norm(s, 1.0, SobolevKind::Inhomogeneous)?,
            v.l2_distance(&u0)
        );
    }
    Ok(())
}
