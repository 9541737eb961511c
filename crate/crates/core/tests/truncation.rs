//! Domain truncation: the Dirichlet walls at `±L` reflect whatever reaches
//! them, so long-time diagnostics need `L` to grow with the horizon.

use inls::integrator::{domain_rule, Flow, Observer, Schedule};
use inls::observables::Interval;
use inls::{make_grid, make_params, sample_initial, InitialSpec};

#[test]
fn domain_rule_rejects_l80_for_t50() {
    let u = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &make_grid(80.0, 8192).unwrap()).unwrap();
    let msg = domain_rule(&u, 50.0).unwrap_err();
    assert!(msg.contains("k_eff = 4.0"), "{msg}");
    assert!(domain_rule(&u, 9.0).is_ok());

    let wide = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &make_grid(410.0, 41984).unwrap()).unwrap();
    assert!(domain_rule(&wide, 50.0).is_ok());
}

#[test]
fn reflected_waves_return_to_the_origin() {
    // a small box makes the rebound visible after a short time
    let grid = make_grid(10.0, 1024).unwrap();
    let u0 = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &grid).unwrap();
    let traj = Flow::new(&grid, make_params(4.0, 0.5).unwrap())
        .evolve(
            &u0,
            &Schedule::new(2e-3, 8.0, 250).unwrap(),
            &[Observer::Observables(Interval::symmetric(1.0))],
        )
        .unwrap();
    assert!(traj.flags().wall_alarm.is_some());
    assert!(traj.flags().domain_warning.is_some());
    let linf: Vec<f64> = traj.observables().iter().map(|s| s.linf_local).collect();
    let min = linf.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(*linf.last().unwrap() > 2.0 * min);
}
