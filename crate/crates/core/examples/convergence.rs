//! Self-convergence order of the Strang splitting, and the dt^2 scaling of
//! the energy error.
//!
//! ```text
//! cargo run --release --example convergence
//! ```

use inls::integrator::{Flow, Observer, Order, Schedule};
use inls::observables::Interval;
use inls::{make_grid, make_params, sample_initial, InitialSpec};

fn main() -> inls::Result<()> {
    let grid = make_grid(40.0, 4096)?;
    let flow = Flow::new(&grid, make_params(4.0, 0.5)?);
    let u0 = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &grid)?;
    let dts = [4e-3, 2e-3, 1e-3];

    let est = flow.convergence_order(&u0, 1.0, &dts)?;
    println!("reference dt = {:.3e}", est.reference_dt);
    for (dt, e) in est.dts.iter().zip(&est.errors) {
        println!("dt = {dt:.0e}  |u_dt(1) - u_ref(1)| = {e:.4e}");
    }
    match est.order {
        Order::Measured(p) => println!("order = {p:.4}"),
        Order::Exact => println!("order: exact"),
    }

    let mut previous: Option<f64> = None;
    for dt in dts {
        let every = (0.1 / dt).round() as usize;
        let traj = flow.evolve(
            &u0,
            &Schedule::new(dt, 2.0, every)?,
            &[Observer::Observables(Interval::symmetric(1.0))],
        )?;
        let obs = traj.observables();
        let e0 = obs[0].e_total;
        let drift = obs.iter().map(|s| ((s.e_total - e0) / e0).abs()).fold(0.0, f64::max);
        match previous {
            Some(p) => println!("dt = {dt:.0e}  max energy drift {drift:.4e}  factor {:.3}", p / drift),
            None => println!("dt = {dt:.0e}  max energy drift {drift:.4e}"),
        }
        previous = Some(drift);
    }
    Ok(())
}
