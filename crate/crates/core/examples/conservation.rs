//! Mass and energy along a defocusing run, plus the Morawetz bound
//! `|I(u)| <= ||u|| ||u_x||` at every sample.
//!
//! ```text
//! cargo run --release --example conservation -- [dt] [t_max]
//! ```

use inls::analysis::morawetz_bound_holds;
use inls::integrator::{Flow, Observer, Schedule};
use inls::observables::Interval;
use inls::{make_grid, make_params, sample_initial, InitialSpec};

fn main() -> inls::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let dt = args.next().unwrap_or(1e-3);
    let t_max = args.next().unwrap_or(2.0);

    let grid = make_grid(40.0, 4096)?;
    let params = make_params(4.0, 0.5)?;
    let u0 = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &grid)?;
    let every = ((t_max / 10.0) / dt).round().max(1.0) as usize;
    let traj = Flow::new(&grid, params).evolve(
        &u0,
        &Schedule::new(dt, t_max, every)?,
        &[Observer::Observables(Interval::symmetric(1.0))],
    )?;

    let obs = traj.observables();
    let (m0, e0) = (obs[0].mass, obs[0].e_total);
    println!(
        "{:>6} {:>12} {:>12} {:>12} {:>11} {:>11} {:>10}",
        "t", "e_kin", "e_pot", "morawetz", "dM/M", "dE/E", "bound"
    );
    for s in &obs {
        println!(
            "{:6.2} {:12.9} {:12.9} {:12.9} {:11.2e} {:11.2e} {:>10}",
            s.t,
            s.e_kin,
            s.e_pot,
            s.morawetz,
            (s.mass - m0) / m0,
            (s.e_total - e0) / e0,
            morawetz_bound_holds(s)
        );
    }
    println!("flags: {:?}", traj.flags());
    Ok(())
}
