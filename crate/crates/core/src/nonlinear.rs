//! The singular weight `|x|^{-b}`, the exact flow of `u_t = -i|x|^{-b}|u|^α u`,
//! and the potential part of the energy.
//!
//! The weight is only ever evaluated at interior nodes. At the origin the
//! multiplier `|x|^{-b}|u|^α` of an odd field behaves like `|x|^{α-b}` and its
//! unstored value is taken as 0.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::domain::{Grid, PhysParams, State};
use crate::error::{Error, Result};

/// Largest per-node phase increment `dt·w_j·|u_j|^α` allowed when
/// `alpha <= b`.
pub const ORIGIN_PHASE_CAP: f64 = FRAC_PI_4;

/// `x_j^{-b}` at the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialWeights {
    grid: Grid,
    b: f64,
    weights: Vec<f64>,
}

pub fn potential_weight(grid: &Grid, b: f64) -> Result<PotentialWeights> {
    PotentialWeights::new(grid, b)
}

impl PotentialWeights {
    pub fn new(grid: &Grid, b: f64) -> Result<Self> {
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidParams(format!(
                "b must lie in (0, 1), got {b}"
            )));
        }
        Ok(PotentialWeights {
            grid: *grid,
            b,
            weights: grid.nodes().map(|x| x.powf(-b)).collect(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Outcome of a phase step: whether any node hit [`ORIGIN_PHASE_CAP`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PhaseOutcome {
    pub capped: bool,
}

/// In-place phase flow over `dt` with precomputed weights. `coupling` scales
/// the nonlinearity (1 for the physical equation, 0 for the linear-only hook).
pub(crate) fn phase_in_place(
    values: &mut [Complex64],
    weights: &[f64],
    dt: f64,
    half_alpha: f64,
    coupling: f64,
    cap: Option<f64>,
) -> PhaseOutcome {
    let mut out = PhaseOutcome::default();
    if dt == 0.0 || coupling == 0.0 {
        return out;
    }
    let scale = dt * coupling;
    for (u, &w) in values.iter_mut().zip(weights) {
        let m2 = u.norm_sqr();
        if m2 == 0.0 {
            continue;
        }
        let mut theta = scale * w * m2.powf(half_alpha);
        if let Some(cap) = cap {
            if theta.abs() > cap {
                theta = cap.copysign(theta);
                out.capped = true;
            }
        }
        let (sin, cos) = theta.sin_cos();
        *u *= Complex64::new(cos, -sin);
    }
    out
}

/// Exact solution of the potential-only subflow over `dt`:
/// `u_j ← exp(-i dt w_j |u_j|^α) u_j`. Leaves the time label untouched.
pub fn phase_step(state: &State, dt: f64, params: &PhysParams) -> State {
    let weights = PotentialWeights::new(state.grid(), params.b()).expect("validated b");
    phase_step_with(state, dt, params, &weights).0
}

pub fn phase_step_with(
    state: &State,
    dt: f64,
    params: &PhysParams,
    weights: &PotentialWeights,
) -> (State, PhaseOutcome) {
    let mut next = state.clone();
    let cap = params.origin_singular().then_some(ORIGIN_PHASE_CAP);
    let out = phase_in_place(
        next.values_mut(),
        weights.weights(),
        dt,
        0.5 * params.alpha(),
        1.0,
        cap,
    );
    (next, out)
}

/// `(1/(α+2)) ∫ |x|^{-b} |u|^{α+2} dx` over the odd extension, by the
/// rectangle rule on the interior nodes (origin and wall contribute 0).
pub fn potential_energy(state: &State, params: &PhysParams) -> f64 {
    let weights = PotentialWeights::new(state.grid(), params.b()).expect("validated b");
    potential_energy_with(state, params, &weights)
}

pub fn potential_energy_with(state: &State, params: &PhysParams, weights: &PotentialWeights) -> f64 {
    let half_power = 0.5 * (params.alpha() + 2.0);
    let sum: f64 = state
        .values()
        .iter()
        .zip(weights.weights())
        .map(|(u, w)| w * u.norm_sqr().powf(half_power))
        .sum();
    2.0 * state.grid().dx() * sum / (params.alpha() + 2.0)
}
