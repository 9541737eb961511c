//! Certificates over states and completed runs: Hardy ratios for odd
//! functions, the scaling symmetry, interaction-picture scattering, the
//! wave-operator round trip and the small-data Strichartz bound.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{PhysParams, State};
use crate::error::{Error, Result};
use crate::integrator::{Flow, Observer, Schedule, Trajectory, WALL_NODES, WALL_THRESHOLD};
use crate::observables::{mass, strichartz_norm, AdmissiblePair, ObservableSample};
use crate::quadrature::integrate_to_infinity;
use crate::transform::{derivative_nodes, free_propagate, sobolev_norm, to_spectral, SobolevKind};

// ---------------------------------------------------------------- Hardy

/// Both sides of `∫_0^∞ |u/r|^p dr <= (p/(p-1))^p ∫_0^∞ |u'|^p dr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyReport {
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub sharp_constant: f64,
    /// `lhs / rhs`, or 0 when both vanish.
    pub ratio: f64,
}

impl HardyReport {
    fn new(p: f64, lhs: f64, rhs: f64) -> Self {
        HardyReport {
            p,
            lhs,
            rhs,
            sharp_constant: hardy_constant(p),
            ratio: if rhs > 0.0 { lhs / rhs } else { 0.0 },
        }
    }

    pub fn holds(&self) -> bool {
        self.ratio <= self.sharp_constant
    }
}

pub fn hardy_constant(p: f64) -> f64 {
    (p / (p - 1.0)).powf(p)
}

fn check_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("Hardy exponent must exceed 1, got {p}")))
    }
}

/// Hardy ratio of a sampled odd field, by the trapezoid rule on `[0, L]`.
/// At `r = 0` the quotient `|u/r|` is continued by `|u'(0)|`.
pub fn hardy_ratio(state: &State, p: f64) -> Result<HardyReport> {
    check_p(p)?;
    let grid = state.grid();
    let du = derivative_nodes(state);
    let n = grid.modes();
    let dx = grid.dx();
    let trapezoid = |f: &dyn Fn(usize) -> f64| -> f64 {
        dx * (0.5 * f(0) + (1..n).map(f).sum::<f64>() + 0.5 * f(n))
    };
    let quotient = |j: usize| -> f64 {
        match j {
            0 => du[0].norm().powf(p),
            j if j == n => 0.0,
            j => (state.values()[j - 1].norm() / grid.node(j - 1)).powf(p),
        }
    };
    let lhs = trapezoid(&quotient);
    let rhs = trapezoid(&|j| du[j].norm().powf(p));
    Ok(HardyReport::new(p, lhs, rhs))
}

/// Hardy ratio of an analytic odd function given on the half line with its
/// derivative, by adaptive quadrature on `[0, ∞)`.
pub fn hardy_ratio_analytic(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    p: f64,
) -> Result<HardyReport> {
    check_p(p)?;
    let lhs = integrate_to_infinity(
        |r| {
            if r == 0.0 {
                df(0.0).abs().powf(p)
            } else {
                (f(r) / r).abs().powf(p)
            }
        },
        0.0,
        1e-15,
        1e-13,
    )
    .value;
    let rhs = integrate_to_infinity(|r| df(r).abs().powf(p), 0.0, 1e-15, 1e-13).value;
    Ok(HardyReport::new(p, lhs, rhs))
}

// ---------------------------------------------------------------- scaling

/// `u_λ(x) = λ^{(2-b)/α} u(λx)` on the grid `[0, L/λ]` with the same mode
/// count. The nodes of the new grid map exactly onto the old ones, so no
/// interpolation is needed. The time label becomes `t/λ²`.
pub fn scale_state(state: &State, lambda: f64, params: &PhysParams) -> Result<State> {
    check_lambda(lambda)?;
    let grid = state.grid().rescaled(lambda)?;
    let amp = lambda.powf(params.scaling_exponent());
    let values = state.values().iter().map(|v| v * amp).collect();
    State::new(grid, state.t() / (lambda * lambda), values)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("scaling factor must be positive, got {lambda}")))
    }
}

/// Relative mass allowed outside the part of the source domain that the
/// target grid can see.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

/// `u_λ` sampled on an arbitrary target grid by evaluating the sine series of
/// `u` at `λ x'`. Fails when the target grid cuts off a non-negligible part
/// of the field.
pub fn scale_state_onto(
    state: &State,
    lambda: f64,
    params: &PhysParams,
    target: &crate::domain::Grid,
) -> Result<State> {
    check_lambda(lambda)?;
    let src = state.grid();
    let reach = lambda * target.length();
    if reach < src.length() {
        let total: f64 = state.values().iter().map(|v| v.norm_sqr()).sum();
        let outside: f64 = src
            .nodes()
            .zip(state.values())
            .filter(|(x, _)| *x > reach)
            .map(|(_, v)| v.norm_sqr())
            .sum();
        if outside > SUPPORT_TOLERANCE * total {
            return Err(Error::SupportOverflow(format!(
                "target grid reaches x = {reach:.4} of the source domain [0, {}]; {:.3e} of the mass lies beyond",
                src.length(),
                outside / total
            )));
        }
    }
    let sp = to_spectral(state);
    let amp = lambda.powf(params.scaling_exponent());
    State::from_fn(*target, state.t() / (lambda * lambda), |x| sp.evaluate(lambda * x) * amp)
}

// ---------------------------------------------------------------- scattering

/// `v(t) = e^{-itΔ} u(t)`; keeps the time label of `u`.
pub fn interaction_picture(state: &State) -> State {
    free_propagate(state, -state.t()).with_t(state.t())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Scattered,
    Undecided,
}

/// Residuals below this fraction of `‖u‖_{H¹}` count as roundoff when
/// testing monotonicity.
pub const RESIDUAL_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatteringReport {
    pub times: Vec<f64>,
    /// `‖v(t_{i+1}) - v(t_i)‖_{H¹}`.
    pub residuals: Vec<f64>,
    /// `‖u(T) - e^{iTΔ} u_plus‖_{H¹}`.
    pub final_mismatch: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub u_plus_mass: f64,
    pub u_plus_h1: f64,
    /// `v(T)` as a profile at time 0.
    #[serde(skip)]
    pub u_plus: Option<State>,
}

/// Interaction-picture residuals over `window`. The verdict is
/// [`Verdict::Scattered`] iff the last three residuals are below `tol` and
/// non-increasing.
pub fn scattering_report(trajectory: &Trajectory, window: &[f64], tol: f64) -> Result<ScatteringReport> {
    if window.len() < 4 {
        return Err(Error::MissingStates(format!(
            "scattering window needs at least 4 times for three residuals, got {}",
            window.len()
        )));
    }
    if window.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::OutOfRange("window times must increase".into()));
    }
    let time_tol = 0.5 * trajectory.schedule().dt;
    let states: Vec<&State> = window
        .iter()
        .map(|&t| {
            trajectory
                .state_at(t, time_tol)
                .ok_or_else(|| Error::MissingStates(format!("no stored state at t = {t}")))
        })
        .collect::<Result<_>>()?;

    let pictures: Vec<State> = states.iter().map(|s| interaction_picture(s)).collect();
    let h1 = |s: &State| sobolev_norm(s, 1.0, SobolevKind::Inhomogeneous).expect("s = 1 in range");
    let residuals: Vec<f64> = pictures
        .windows(2)
        .map(|w| h1(&difference(&w[1], &w[0])))
        .collect();

    let last = states[states.len() - 1];
    let u_plus = pictures[pictures.len() - 1].clone().with_t(0.0);
    let reconstructed = free_propagate(&u_plus, last.t());
    let final_mismatch = h1(&difference(last, &reconstructed));

    let floor = RESIDUAL_FLOOR * h1(last);
    let tail = &residuals[residuals.len() - 3..];
    let scattered = tail.iter().all(|&r| r < tol) && tail.windows(2).all(|w| w[1] <= w[0] + floor);

    Ok(ScatteringReport {
        times: window.to_vec(),
        residuals,
        final_mismatch,
        tol,
        verdict: if scattered { Verdict::Scattered } else { Verdict::Undecided },
        u_plus_mass: mass(&u_plus),
        u_plus_h1: h1(&u_plus),
        u_plus: Some(u_plus),
    })
}

fn difference(a: &State, b: &State) -> State {
    let values: Vec<Complex64> = a.values().iter().zip(b.values()).map(|(x, y)| x - y).collect();
    State::new(*a.grid(), a.t(), values).expect("finite difference of finite states")
}

// ---------------------------------------------------------------- wave operator

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveOperatorReport {
    pub t_back: f64,
    /// `sup ‖u(t) - e^{itΔ}φ‖_{H¹}` over `t ∈ [t_back/2, t_back]`.
    pub mismatch: f64,
    /// `|M[u] - M[φ]|`.
    pub mass_defect: f64,
    /// Per-sample mismatch over the final window.
    pub window: Vec<(f64, f64)>,
    #[serde(skip)]
    pub initial: Option<State>,
}

/// Backward–forward surrogate of the wave operator: start from
/// `u(T) = e^{iTΔ}φ`, run the flow back to `t = 0`, run it forward again and
/// compare with the free evolution of `φ` on the final half window.
pub fn wave_operator_roundtrip(phi: &State, t_back: f64, schedule: &Schedule, params: &PhysParams) -> Result<WaveOperatorReport> {
    wave_operator_roundtrip_with(&Flow::new(phi.grid(), *params), phi, t_back, schedule)
}

pub fn wave_operator_roundtrip_with(flow: &Flow, phi: &State, t_back: f64, schedule: &Schedule) -> Result<WaveOperatorReport> {
    let forward = Schedule {
        t_max: t_back,
        checkpoint_every: 0,
        ..*schedule
    };
    forward.validate()?;
    let steps = forward.steps();
    if ((steps as f64) * forward.dt - t_back).abs() > 1e-9 * t_back {
        return Err(Error::InvalidSchedule(format!(
            "dt = {} does not divide t_back = {t_back}",
            forward.dt
        )));
    }
    let phi = phi.clone().with_t(0.0);
    let total = mass(&phi);

    let at_horizon = free_propagate(&phi, t_back);
    let initial = flow.advance(&at_horizon, -forward.dt, steps)?.with_t(0.0);
    let traj = flow.evolve(&initial, &forward, &[Observer::States])?;

    let h1 = |s: &State| sobolev_norm(s, 1.0, SobolevKind::Inhomogeneous).expect("s = 1 in range");
    let mut window = Vec::new();
    for s in traj.states() {
        let reference = free_propagate(&phi, s.t());
        if guard_mass(&reference) > WALL_THRESHOLD * total {
            return Err(Error::WallReflection {
                t: s.t(),
                edge_mass: guard_mass(&reference),
                threshold: WALL_THRESHOLD,
            });
        }
        if s.t() >= 0.5 * t_back - 0.5 * forward.dt {
            window.push((s.t(), h1(&difference(s, &reference))));
        }
    }
    let mismatch = window.iter().map(|w| w.1).fold(0.0, f64::max);
    Ok(WaveOperatorReport {
        t_back,
        mismatch,
        mass_defect: (mass(&initial) - total).abs(),
        window,
        initial: Some(initial),
    })
}

fn guard_mass(state: &State) -> f64 {
    let v = state.values();
    let start = v.len().saturating_sub(WALL_NODES);
    2.0 * state.grid().dx() * v[start..].iter().map(|c| c.norm_sqr()).sum::<f64>()
}

// ---------------------------------------------------------------- small data

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairRatio {
    pub pair: AdmissiblePair,
    pub nonlinear: f64,
    pub linear: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallDataReport {
    pub pairs: Vec<PairRatio>,
    pub max_ratio: f64,
    pub passed: bool,
}

/// Largest admissible ratio between the nonlinear and free Strichartz norms.
pub const SMALL_DATA_BOUND: f64 = 2.0;

/// Compares discrete `S(Ḣ^{s_c})` surrogates of the nonlinear trajectory and
/// of a free run from the same data and schedule.
pub fn small_data_certificate(u0: &State, trajectory: &Trajectory, pairs: &[AdmissiblePair]) -> Result<SmallDataReport> {
    let s_c = trajectory.params().s_c();
    if let Some(bad) = pairs.iter().find(|p| (p.s - s_c).abs() > 1e-12) {
        return Err(Error::OutOfRange(format!(
            "pair (q = {}, r = {}) has regularity {}, expected s_c = {s_c}",
            bad.q, bad.r, bad.s
        )));
    }
    let linear = Flow::new(trajectory.grid(), *trajectory.params())
        .linear_only()
        .evolve(u0, trajectory.schedule(), &[Observer::States])?;

    let mut rows = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let nonlinear = strichartz_norm(trajectory, pair, false)?;
        let free = strichartz_norm(&linear, pair, false)?;
        let ratio = if free > 0.0 { nonlinear / free } else { 0.0 };
        rows.push(PairRatio {
            pair: *pair,
            nonlinear,
            linear: free,
            ratio,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    Ok(SmallDataReport {
        pairs: rows,
        max_ratio,
        passed: max_ratio <= SMALL_DATA_BOUND,
    })
}

// ---------------------------------------------------------------- Morawetz

/// `|I(u)| <= ‖u‖_{L²} ‖∂ₓu‖_{L²}` for a recorded sample.
pub fn morawetz_bound_holds(sample: &ObservableSample) -> bool {
    sample.morawetz.abs() <= sample.mass.sqrt() * (2.0 * sample.e_kin).sqrt()
}
