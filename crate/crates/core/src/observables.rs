//! Scalar diagnostics on states and trajectories.
//!
//! Every integral is over the odd extension on `[-L, L]`, so values are
//! comparable with whole-line quantities once the field has not reached the
//! walls.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{Grid, PhysParams, State};
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::nonlinear::{potential_energy_with, PotentialWeights};
use crate::transform::{spectral_norm, to_spectral, SineTransform, SobolevKind, SpectralState};

/// Closed spatial interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn symmetric(half_width: f64) -> Self {
        Interval::new(-half_width, half_width)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let l = grid.length();
        let slack = 1e-12 * l;
        if !(self.lo < self.hi && self.lo >= -l - slack && self.hi <= l + slack) {
            return Err(Error::OutOfRange(format!(
                "interval [{}, {}] must satisfy -L <= lo < hi <= L with L = {l}",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}

/// One row of the observables table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSample {
    pub t: f64,
    pub mass: f64,
    pub e_kin: f64,
    pub e_pot: f64,
    pub e_total: f64,
    /// Inhomogeneous `H¹` norm.
    pub h1: f64,
    /// Homogeneous `Ḣ^{s_c}` norm.
    pub hsc: f64,
    pub l2_local: f64,
    pub linf_local: f64,
    pub morawetz: f64,
}

impl ObservableSample {
    /// Checks the sign constraints and `e_total = e_kin + e_pot`.
    pub fn check_invariants(&self) -> Result<()> {
        let nonneg = [
            ("mass", self.mass),
            ("e_kin", self.e_kin),
            ("e_pot", self.e_pot),
            ("h1", self.h1),
            ("hsc", self.hsc),
            ("l2_local", self.l2_local),
            ("linf_local", self.linf_local),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange(format!("{name} = {v} at t = {}", self.t)));
            }
        }
        let sum = self.e_kin + self.e_pot;
        if (self.e_total - sum).abs() > 4.0 * f64::EPSILON * sum.abs().max(f64::MIN_POSITIVE) {
            return Err(Error::OutOfRange(format!(
                "e_total {} != e_kin + e_pot {} at t = {}",
                self.e_total, sum, self.t
            )));
        }
        Ok(())
    }
}

/// `M[u] = ∫|u|² dx`.
pub fn mass(state: &State) -> f64 {
    2.0 * state.grid().dx() * state.values().iter().map(|v| v.norm_sqr()).sum::<f64>()
}

/// Kinetic, potential and total energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Energy {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

pub fn energy(state: &State, params: &PhysParams) -> Energy {
    let weights = PotentialWeights::new(state.grid(), params.b()).expect("validated b");
    let sp = to_spectral(state);
    energy_from(&sp, state, params, &weights)
}

fn energy_from(sp: &SpectralState, state: &State, params: &PhysParams, weights: &PotentialWeights) -> Energy {
    let h1 = spectral_norm(sp, 1.0, SobolevKind::Homogeneous);
    let kinetic = 0.5 * h1 * h1;
    let potential = potential_energy_with(state, params, weights);
    Energy {
        kinetic,
        potential,
        total: kinetic + potential,
    }
}

/// Local `L²` norm and maximum modulus over the nodes of the odd extension
/// inside `interval`.
pub fn local_norms(state: &State, interval: Interval) -> Result<(f64, f64)> {
    let grid = state.grid();
    interval.validate(grid)?;
    let dx = grid.dx();
    let n = grid.modes() as i64;
    let j_lo = ((interval.lo / dx) - 1e-9).ceil().max(-(n as f64)) as i64;
    let j_hi = ((interval.hi / dx) + 1e-9).floor().min(n as f64) as i64;
    let mut sum = 0.0;
    let mut peak: f64 = 0.0;
    for j in j_lo..=j_hi {
        let m = state.odd_value(j).norm();
        sum += m * m;
        peak = peak.max(m);
    }
    Ok(((dx * sum).sqrt(), peak))
}

/// Morawetz weight `φ(x) = x / (1 + |x|)`.
pub fn morawetz_weight(x: f64) -> f64 {
    x / (1.0 + x.abs())
}

/// `I(u) = Im ∫ φ(x) u ū_x dx` with `∂ₓu` from the differentiated sine series.
pub fn morawetz(state: &State) -> f64 {
    let mut transform = SineTransform::for_grid(state.grid());
    let sp = to_spectral(state);
    morawetz_from(&mut transform, &sp, state)
}

fn derivative_from(transform: &mut SineTransform, sp: &SpectralState) -> Vec<Complex64> {
    let grid = sp.grid();
    let coeffs: Vec<Complex64> = sp
        .coeffs()
        .iter()
        .zip(grid.wavenumbers())
        .map(|(c, k)| c * k)
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.modes() + 1];
    transform.cosine_series(&coeffs, &mut out);
    out
}

fn morawetz_from(transform: &mut SineTransform, sp: &SpectralState, state: &State) -> f64 {
    let du = derivative_from(transform, sp);
    let grid = state.grid();
    // integrand is even; origin and wall terms vanish
    let half: f64 = state
        .values()
        .iter()
        .enumerate()
        .map(|(i, u)| morawetz_weight(grid.node(i)) * (u * du[i + 1].conj()).im)
        .sum();
    2.0 * grid.dx() * half
}

/// Evaluates every column of [`ObservableSample`] with cached transforms and
/// weights.
#[derive(Debug, Clone)]
pub struct ObservableEngine {
    params: PhysParams,
    local: Interval,
    weights: PotentialWeights,
    transform: SineTransform,
}

impl ObservableEngine {
    pub fn new(grid: &Grid, params: PhysParams, local: Interval) -> Result<Self> {
        local.validate(grid)?;
        Ok(ObservableEngine {
            params,
            local,
            weights: PotentialWeights::new(grid, params.b())?,
            transform: SineTransform::for_grid(grid),
        })
    }

    pub fn sample(&mut self, state: &State) -> ObservableSample {
        let mut coeffs = state.values().to_vec();
        self.transform.forward(&mut coeffs);
        let sp = SpectralState::new(*state.grid(), state.t(), coeffs).expect("grid length");
        let e = energy_from(&sp, state, &self.params, &self.weights);
        let (l2_local, linf_local) = local_norms(state, self.local).expect("validated interval");
        ObservableSample {
            t: state.t(),
            mass: mass(state),
            e_kin: e.kinetic,
            e_pot: e.potential,
            e_total: e.total,
            h1: spectral_norm(&sp, 1.0, SobolevKind::Inhomogeneous),
            hsc: spectral_norm(&sp, self.params.s_c(), SobolevKind::Homogeneous),
            l2_local,
            linf_local,
            morawetz: morawetz_from(&mut self.transform, &sp, state),
        }
    }
}

/// Time/space exponent pair `(q, r)` at regularity `s` with
/// `2/q = 1/2 - 1/r - s`. `q = ∞` is stored as `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePair {
    pub s: f64,
    #[serde(with = "extended_float")]
    pub q: f64,
    pub r: f64,
}

mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!("expected number or \"inf\", got {t}"))),
        }
    }
}

const PAIR_TOL: f64 = 1e-12;

impl AdmissiblePair {
    /// Solves for `q` given `s` and `r`.
    pub fn from_r(s: f64, r: f64) -> Result<Self> {
        if !(s > -0.5 && s < 0.5) {
            return Err(Error::OutOfRange(format!("regularity s must lie in (-1/2, 1/2), got {s}")));
        }
        let r_min = 2.0 / (1.0 - 2.0 * s);
        if !r.is_finite() || r < r_min * (1.0 - PAIR_TOL) {
            return Err(Error::OutOfRange(format!(
                "r = {r} outside [{r_min}, ∞) for s = {s}"
            )));
        }
        let gap = 0.5 - 1.0 / r - s;
        let q = if gap <= PAIR_TOL { f64::INFINITY } else { 2.0 / gap };
        Ok(AdmissiblePair { s, q, r })
    }

    pub fn is_endpoint(&self) -> bool {
        self.q.is_infinite()
    }

    /// `|2/q + 1/r + s - 1/2|`.
    pub fn relation_defect(&self) -> f64 {
        (2.0 / self.q + 1.0 / self.r + self.s - 0.5).abs()
    }
}

pub fn admissible_pairs(s: f64, r_values: &[f64]) -> Result<Vec<AdmissiblePair>> {
    r_values.iter().map(|&r| AdmissiblePair::from_r(s, r)).collect()
}

/// `‖u‖_{L^r}` of the odd extension.
pub fn lebesgue_norm(state: &State, r: f64) -> f64 {
    let sum: f64 = state.values().iter().map(|v| v.norm().powf(r)).sum();
    (2.0 * state.grid().dx() * sum).powf(1.0 / r)
}

/// `‖∂ₓu‖_{L^r}` by the trapezoid rule on nodes `0..=N`.
fn derivative_lebesgue_norm(transform: &mut SineTransform, state: &State, r: f64) -> f64 {
    let sp = {
        let mut c = state.values().to_vec();
        transform.forward(&mut c);
        SpectralState::new(*state.grid(), state.t(), c).expect("grid length")
    };
    let du = derivative_from(transform, &sp);
    let n = du.len() - 1;
    let interior: f64 = du[1..n].iter().map(|v| v.norm().powf(r)).sum();
    let ends = du[0].norm().powf(r) + du[n].norm().powf(r);
    (state.grid().dx() * (2.0 * interior + ends)).powf(1.0 / r)
}

/// Discrete `L^q_t L^r_x` norm over the stored states of a trajectory, with
/// left-endpoint time quadrature (max over samples when `q = ∞`). With
/// `derivative`, the space norm is `‖u‖_{W^{1,r}} = (‖u‖_r^r + ‖u_x‖_r^r)^{1/r}`.
pub fn strichartz_norm(trajectory: &Trajectory, pair: &AdmissiblePair, derivative: bool) -> Result<f64> {
    let states = trajectory.states();
    if states.is_empty() || states.len() != trajectory.samples().len() {
        return Err(Error::MissingStates(
            "Strichartz norms need a full state at every sample".into(),
        ));
    }
    let mut transform = SineTransform::for_grid(trajectory.grid());
    let r = pair.r;
    let space: Vec<f64> = states
        .iter()
        .map(|s| {
            let base = lebesgue_norm(s, r);
            if derivative {
                let d = derivative_lebesgue_norm(&mut transform, s, r);
                (base.powf(r) + d.powf(r)).powf(1.0 / r)
            } else {
                base
            }
        })
        .collect();
    if pair.q.is_infinite() {
        return Ok(space.iter().copied().fold(0.0, f64::max));
    }
    let q = pair.q;
    let integral: f64 = states
        .windows(2)
        .zip(&space)
        .map(|(w, v)| v.powf(q) * (w[1].t() - w[0].t()))
        .sum();
    Ok(integral.powf(1.0 / q))
}
