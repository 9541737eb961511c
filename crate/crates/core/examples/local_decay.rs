//! Decay of `||u(t)||_{L∞([-1, 1])}` for odd data. The half-width `L` must
//! grow with the horizon or waves reflected at the walls come back; the run
//! reports the domain rule and the first wall alarm.
//!
//! ```text
//! cargo run --release --example local_decay -- [t_max] [L]
//! ```

use inls::integrator::{domain_rule, Flow, Observer, Schedule};
use inls::observables::Interval;
use inls::{make_grid, make_params, sample_initial, InitialSpec};

fn main() -> inls::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<f64>().expect("numeric argument"));
    let t_max = args.next().unwrap_or(10.0);
    let l = args.next().unwrap_or(100.0);
    // keep the spacing 80 / 8192
    let n = (l * 8192.0 / 80.0).round() as usize;

    let grid = make_grid(l, n)?;
    let u0 = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &grid)?;
    if let Err(w) = domain_rule(&u0, t_max) {
        println!("warning: {w}");
    }
    let dt = 1e-3;
    let traj = Flow::new(&grid, make_params(4.0, 0.5)?).evolve(
        &u0,
        &Schedule::new(dt, t_max, (t_max / 20.0 / dt).round() as usize)?,
        &[Observer::Observables(Interval::symmetric(1.0))],
    )?;
    let obs = traj.observables();
    let first = obs[0].linf_local;
    println!("{:>7} {:>12} {:>12} {:>9}", "t", "L2[-1,1]", "Linf[-1,1]", "ratio");
    for s in &obs {
        println!("{:7.2} {:12.5e} {:12.5e} {:9.5}", s.t, s.l2_local, s.linf_local, s.linf_local / first);
    }
    if let Some(t) = traj.flags().wall_alarm {
        println!("wall alarm first raised at t = {t}");
    }
    Ok(())
}
