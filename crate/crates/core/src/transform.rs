//! Sine-I transform on the interior nodes, the exact free Schrödinger
//! propagator for odd fields, and spectral Sobolev norms.
//!
//! Convention: `u_j = Σ_{m=1}^{N-1} c_m sin(k_m x_j)` with `k_m = mπ/L`, so a
//! sampled `sin(k_m x)` has coefficient vector `e_m`. The forward transform is
//! `c_m = (2/N) Σ_j u_j sin(π m j / N)`.
//!
//! Norms are reported for the odd extension on `[-L, L]`; with this
//! convention `∫_{-L}^{L} |u|² dx = L Σ |c_m|²`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::domain::{Grid, State};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Reusable DST-I engine for one mode count. Not `Sync` because it owns
/// scratch buffers; clone it per worker.
#[derive(Clone)]
pub struct SineTransform {
    modes: usize,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl std::fmt::Debug for SineTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SineTransform")
            .field("modes", &self.modes)
            .finish()
    }
}

impl SineTransform {
    pub fn new(modes: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * modes);
        let scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        SineTransform {
            modes,
            fft,
            buf: vec![ZERO; 2 * modes],
            scratch,
        }
    }

    pub fn for_grid(grid: &Grid) -> Self {
        Self::new(grid.modes())
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Raw sum `S_m = Σ_{j=1}^{N-1} x_j sin(π m j / N)`, written over `data`.
    fn dst1(&mut self, data: &mut [Complex64]) {
        let n = self.modes;
        debug_assert_eq!(data.len(), n - 1);
        self.buf[0] = ZERO;
        self.buf[n] = ZERO;
        for (j, &v) in data.iter().enumerate() {
            self.buf[j + 1] = v;
            self.buf[2 * n - 1 - j] = -v;
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        // Y_m = -2i S_m
        for (m, out) in data.iter_mut().enumerate() {
            let y = self.buf[m + 1];
            *out = Complex64::new(-y.im, y.re) * 0.5;
        }
    }

    /// Node values to sine coefficients, in place.
    pub fn forward(&mut self, data: &mut [Complex64]) {
        self.dst1(data);
        let scale = 2.0 / self.modes as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// Sine coefficients to node values, in place.
    pub fn inverse(&mut self, data: &mut [Complex64]) {
        self.dst1(data);
    }

    /// Evaluates `Σ_m d_m cos(π m j / N)` at all nodes `j = 0..=N`, origin
    /// and wall included.
    pub fn cosine_series(&mut self, coeffs: &[Complex64], out: &mut [Complex64]) {
        let n = self.modes;
        debug_assert_eq!(coeffs.len(), n - 1);
        debug_assert_eq!(out.len(), n + 1);
        self.buf[0] = ZERO;
        self.buf[n] = ZERO;
        for (m, &d) in coeffs.iter().enumerate() {
            self.buf[m + 1] = d;
            self.buf[2 * n - 1 - m] = d;
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        for (j, o) in out.iter_mut().enumerate() {
            *o = self.buf[j] * 0.5;
        }
    }
}

/// Sine coefficients of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    grid: Grid,
    t: f64,
    coeffs: Vec<Complex64>,
}

impl SpectralState {
    pub fn new(grid: Grid, t: f64, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} coefficients for N = {}",
                coeffs.len(),
                grid.modes()
            )));
        }
        Ok(SpectralState { grid, t, coeffs })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Evaluates the sine series at an arbitrary `x`; zero outside `[-L, L]`.
    pub fn evaluate(&self, x: f64) -> Complex64 {
        if x.abs() >= self.grid.length() {
            return ZERO;
        }
        let theta = std::f64::consts::PI * x / self.grid.length();
        clenshaw_sine(&self.coeffs, theta)
    }
}

/// `Σ_{m=1}^{M} c_m sin(m θ)` by Clenshaw's recurrence.
fn clenshaw_sine(coeffs: &[Complex64], theta: f64) -> Complex64 {
    let two_cos = 2.0 * theta.cos();
    let (mut b1, mut b2) = (ZERO, ZERO);
    for &c in coeffs.iter().rev() {
        let b0 = c + b1 * two_cos - b2;
        b2 = b1;
        b1 = b0;
    }
    b1 * theta.sin()
}

pub fn to_spectral(state: &State) -> SpectralState {
    let mut coeffs = state.values().to_vec();
    SineTransform::for_grid(state.grid()).forward(&mut coeffs);
    SpectralState {
        grid: *state.grid(),
        t: state.t(),
        coeffs,
    }
}

pub fn from_spectral(sp: &SpectralState) -> State {
    let mut values = sp.coeffs.clone();
    SineTransform::for_grid(&sp.grid).inverse(&mut values);
    State::from_parts(sp.grid, sp.t, values)
}

/// Applies `e^{i dt Δ}`: `c_m ← e^{-i k_m² dt} c_m`. Advances the state's
/// time label by `dt`.
pub fn free_propagate(state: &State, dt: f64) -> State {
    FreePropagator::new(state.grid(), dt).apply(state)
}

/// Cached `e^{-i k_m² dt}` multipliers for a fixed step.
#[derive(Debug, Clone)]
pub struct FreePropagator {
    dt: f64,
    multipliers: Vec<Complex64>,
    transform: SineTransform,
}

impl FreePropagator {
    pub fn new(grid: &Grid, dt: f64) -> Self {
        let multipliers = grid
            .wavenumbers()
            .map(|k| Complex64::from_polar(1.0, -k * k * dt))
            .collect();
        FreePropagator {
            dt,
            multipliers,
            transform: SineTransform::for_grid(grid),
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn apply_in_place(&mut self, values: &mut [Complex64]) {
        if self.dt == 0.0 {
            return;
        }
        self.transform.forward(values);
        for (c, m) in values.iter_mut().zip(&self.multipliers) {
            *c *= m;
        }
        self.transform.inverse(values);
    }

    pub fn apply(&mut self, state: &State) -> State {
        let mut values = state.values().to_vec();
        self.apply_in_place(&mut values);
        State::from_parts(*state.grid(), state.t() + self.dt, values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SobolevKind {
    Homogeneous,
    Inhomogeneous,
}

/// `‖u‖_{Ḣ^s}` or `‖u‖_{H^s}` of the odd extension, `s ∈ [0, 1]`.
///
/// The inhomogeneous norm is `(‖u‖²_{L²} + ‖u‖²_{Ḣ^s})^{1/2}` for `s > 0`;
/// both kinds return the L² norm at `s = 0`.
pub fn sobolev_norm(state: &State, s: f64, kind: SobolevKind) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRange(format!(
            "Sobolev index must lie in [0, 1], got {s}"
        )));
    }
    let sp = to_spectral(state);
    Ok(spectral_norm(&sp, s, kind))
}

/// Same as [`sobolev_norm`] on precomputed coefficients, without the range
/// check. Negative `s` is meaningful here since `k_m >= π/L > 0`.
pub fn spectral_norm(sp: &SpectralState, s: f64, kind: SobolevKind) -> f64 {
    let l = sp.grid.length();
    let l2sq: f64 = sp.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * l;
    if s == 0.0 {
        return l2sq.sqrt();
    }
    let hom: f64 = sp
        .coeffs
        .iter()
        .zip(sp.grid.wavenumbers())
        .map(|(c, k)| k.powf(2.0 * s) * c.norm_sqr())
        .sum::<f64>()
        * l;
    match kind {
        SobolevKind::Homogeneous => hom.sqrt(),
        SobolevKind::Inhomogeneous => (l2sq + hom).sqrt(),
    }
}

/// `∂ₓu` of the odd extension sampled at nodes `j = 0..=N` (origin and wall
/// included), from the differentiated sine series.
pub fn derivative_nodes(state: &State) -> Vec<Complex64> {
    let mut transform = SineTransform::for_grid(state.grid());
    derivative_with(&mut transform, state)
}

pub(crate) fn derivative_with(transform: &mut SineTransform, state: &State) -> Vec<Complex64> {
    let grid = state.grid();
    let mut coeffs = state.values().to_vec();
    transform.forward(&mut coeffs);
    for (c, k) in coeffs.iter_mut().zip(grid.wavenumbers()) {
        *c *= k;
    }
    let mut out = vec![ZERO; grid.modes() + 1];
    transform.cosine_series(&coeffs, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_grid, sample_initial, InitialSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn naive_dst(values: &[Complex64], n: usize) -> Vec<Complex64> {
        (1..n)
            .map(|m| {
                values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v * (PI * (m * (i + 1)) as f64 / n as f64).sin())
                    .sum::<Complex64>()
                    * (2.0 / n as f64)
            })
            .collect()
    }

    fn random_state(grid: Grid, seed: u64) -> State {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        State::new(grid, 0.0, values).unwrap()
    }

    #[test]
    fn fft_path_matches_direct_sum() {
        let g = make_grid(3.0, 48).unwrap();
        let s = random_state(g, 7);
        let fast = to_spectral(&s);
        let slow = naive_dst(s.values(), 48);
        for (a, b) in fast.coeffs().iter().zip(&slow) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn basis_mode_is_unit_vector() {
        let g = make_grid(5.0, 64).unwrap();
        let s = sample_initial(&InitialSpec::sine_mode(1.0, 3), &g).unwrap();
        let sp = to_spectral(&s);
        for (i, c) in sp.coeffs().iter().enumerate() {
            let expect = if i == 2 { 1.0 } else { 0.0 };
            assert!((c - Complex64::new(expect, 0.0)).norm() < 1e-14, "m = {}", i + 1);
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = make_grid(5.0, 16).unwrap();
        let sp = to_spectral(&State::zeros(g, 0.0));
        assert!(sp.coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn round_trip_is_identity() {
        let g = make_grid(7.0, 1000).unwrap();
        let s = random_state(g, 11);
        let back = from_spectral(&to_spectral(&s));
        assert!(back.l2_distance(&s) <= 1e-12 * sobolev_norm(&s, 0.0, SobolevKind::Homogeneous).unwrap());
    }

    #[test]
    fn half_period_phase_negates_mode() {
        let g = make_grid(PI, 64).unwrap();
        let s = sample_initial(&InitialSpec::sine_mode(1.0, 1), &g).unwrap();
        // k_1 = 1 so dt = π gives e^{-iπ}
        let out = free_propagate(&s, PI);
        for (a, b) in out.values().iter().zip(s.values()) {
            assert!((a + b).norm() <= 1e-12);
        }
        assert_relative_eq!(out.t(), PI);
    }

    #[test]
    fn zero_step_is_identity() {
        let g = make_grid(4.0, 32).unwrap();
        let s = random_state(g, 3);
        assert_eq!(free_propagate(&s, 0.0).values(), s.values());
    }

    #[test]
    fn free_flow_group_law() {
        let g = make_grid(10.0, 256).unwrap();
        let s = random_state(g, 5);
        let ab = free_propagate(&free_propagate(&s, 0.3), 0.45);
        let direct = free_propagate(&s, 0.75);
        let norm = sobolev_norm(&s, 0.0, SobolevKind::Homogeneous).unwrap();
        assert!(ab.l2_distance(&direct) <= 1e-12 * norm);
    }

    #[test]
    fn single_mode_norm_ratio_is_wavenumber() {
        let g = make_grid(PI, 2048).unwrap();
        let s = sample_initial(&InitialSpec::sine_mode(1.0, 2), &g).unwrap();
        let h1 = sobolev_norm(&s, 1.0, SobolevKind::Homogeneous).unwrap();
        let l2 = sobolev_norm(&s, 0.0, SobolevKind::Homogeneous).unwrap();
        assert!((h1 / l2 - 2.0).abs() < 1e-10);
    }

    #[test]
    fn odd_gaussian_norms_match_moment_integrals() {
        let g = make_grid(40.0, 4096).unwrap();
        let s = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &g).unwrap();
        let l2 = sobolev_norm(&s, 0.0, SobolevKind::Homogeneous).unwrap();
        let h1 = sobolev_norm(&s, 1.0, SobolevKind::Homogeneous).unwrap();
        // √π / 2^{5/2} and ∫(1 - 2x²)² e^{-2x²} dx
        assert_relative_eq!(l2 * l2, 0.313328534328875041, max_relative = 1e-12);
        assert_relative_eq!(h1 * h1, 0.939985602986625188, max_relative = 1e-10);
        let full = sobolev_norm(&s, 1.0, SobolevKind::Inhomogeneous).unwrap();
        assert_relative_eq!(full * full, l2 * l2 + h1 * h1, max_relative = 1e-14);
    }

    #[test]
    fn zero_state_norm() {
        let g = make_grid(4.0, 32).unwrap();
        let z = State::zeros(g, 0.0);
        for kind in [SobolevKind::Homogeneous, SobolevKind::Inhomogeneous] {
            assert_eq!(sobolev_norm(&z, 0.5, kind).unwrap(), 0.0);
        }
    }

    #[test]
    fn s_out_of_range_rejected() {
        let g = make_grid(4.0, 32).unwrap();
        let z = State::zeros(g, 0.0);
        assert!(sobolev_norm(&z, 1.5, SobolevKind::Homogeneous).is_err());
        assert!(sobolev_norm(&z, -0.1, SobolevKind::Inhomogeneous).is_err());
    }

    #[test]
    fn derivative_of_odd_gaussian() {
        let g = make_grid(20.0, 1024).unwrap();
        let s = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &g).unwrap();
        let d = derivative_nodes(&s);
        assert_eq!(d.len(), 1025);
        for (j, v) in d.iter().enumerate() {
            let x = j as f64 * g.dx();
            let exact = (1.0 - 2.0 * x * x) * (-x * x).exp();
            assert!((v.re - exact).abs() < 1e-11, "x = {x}");
        }
    }

    #[test]
    fn clenshaw_evaluation_matches_nodes() {
        let g = make_grid(6.0, 128).unwrap();
        let s = random_state(g, 21);
        let sp = to_spectral(&s);
        for (i, x) in g.nodes().enumerate().step_by(9) {
            assert!((sp.evaluate(x) - s.values()[i]).norm() < 1e-12);
            assert!((sp.evaluate(-x) + s.values()[i]).norm() < 1e-12);
        }
        assert_eq!(sp.evaluate(6.0), ZERO);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn free_flow_is_unitary(seed in any::<u64>(), t in -50.0..50.0f64, n in 8usize..300) {
            let g = make_grid(9.0, n).unwrap();
            let s = random_state(g, seed);
            let before = sobolev_norm(&s, 0.0, SobolevKind::Homogeneous).unwrap();
            let after = sobolev_norm(&free_propagate(&s, t), 0.0, SobolevKind::Homogeneous).unwrap();
            prop_assert!((after - before).abs() <= 1e-12 * before);
        }

        #[test]
        fn parseval_and_monotonicity(seed in any::<u64>(), s_idx in 0.0..1.0f64) {
            let g = make_grid(3.0, 200).unwrap();
            let st = random_state(g, seed);
            let quad: f64 = 2.0 * g.dx() * st.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
            let l2 = sobolev_norm(&st, 0.0, SobolevKind::Homogeneous).unwrap();
            prop_assert!((quad - l2 * l2).abs() <= 1e-10 * quad);
            let hs = sobolev_norm(&st, s_idx, SobolevKind::Inhomogeneous).unwrap();
            prop_assert!(hs >= l2);
        }
    }
}
