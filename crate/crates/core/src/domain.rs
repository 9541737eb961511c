//! Value types shared by every other module: the half-line grid, the
//! physical exponents, the field state and the initial-condition catalogue.
//!
//! Fields are odd on `[-L, L]` with Dirichlet walls at `±L`, so only the
//! interior nodes `x_j = j·L/N`, `j = 1..N-1`, of the half line are stored.
//! The origin and the wall are exact zeros of every representable field.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest admissible mode count.
pub const MIN_MODES: usize = 8;

/// Relative size of `|u(L)|` against the peak above which a packet is
/// considered to touch the wall.
pub const DOMAIN_TAIL_TOLERANCE: f64 = 1e-12;

/// Relative size of the extrapolated origin value above which file data is
/// rejected as non-odd.
pub const ORIGIN_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    length: f64,
    modes: usize,
}

/// Serialized form of a [`Grid`]: the half-domain length and the mode count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub modes: usize,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        Grid::new(spec.length, spec.modes)
    }
}

impl From<Grid> for GridSpec {
    fn from(grid: Grid) -> Self {
        GridSpec {
            length: grid.length,
            modes: grid.modes,
        }
    }
}

/// Builds the sine-I grid on `[0, L]` with `N` modes.
pub fn make_grid(length: f64, modes: usize) -> Result<Grid> {
    Grid::new(length, modes)
}

impl Grid {
    pub fn new(length: f64, modes: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half-domain length must be positive and finite, got {length}"
            )));
        }
        if modes < MIN_MODES {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_MODES} modes, got {modes}"
            )));
        }
        Ok(Grid { length, modes })
    }

    /// Half-domain length `L`.
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Mode count `N`.
    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Number of stored values, `N - 1`.
    pub fn len(&self) -> usize {
        self.modes - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        self.length / self.modes as f64
    }

    /// Position of the stored value at `index` (node `j = index + 1`).
    pub fn node(&self, index: usize) -> f64 {
        (index + 1) as f64 * self.dx()
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.node(i))
    }

    /// Wavenumber `k_m = m·π/L` paired with stored coefficient `index` (`m = index + 1`).
    pub fn wavenumber(&self, index: usize) -> f64 {
        (index + 1) as f64 * PI / self.length
    }

    pub fn wavenumbers(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.wavenumber(i))
    }

    /// Grid with the same mode count on `[0, L / lambda]`.
    pub fn rescaled(&self, lambda: f64) -> Result<Grid> {
        Grid::new(self.length / lambda, self.modes)
    }
}

/// Nonlinearity power and singularity exponent of the defocusing equation
/// `i u_t + u_xx = |x|^{-b} |u|^alpha u`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParamsSpec", into = "ParamsSpec")]
pub struct PhysParams {
    alpha: f64,
    b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub alpha: f64,
    pub b: f64,
}

impl TryFrom<ParamsSpec> for PhysParams {
    type Error = Error;

    fn try_from(spec: ParamsSpec) -> Result<Self> {
        PhysParams::new(spec.alpha, spec.b)
    }
}

impl From<PhysParams> for ParamsSpec {
    fn from(p: PhysParams) -> Self {
        ParamsSpec {
            alpha: p.alpha,
            b: p.b,
        }
    }
}

pub fn make_params(alpha: f64, b: f64) -> Result<PhysParams> {
    PhysParams::new(alpha, b)
}

impl PhysParams {
    pub fn new(alpha: f64, b: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must be positive and finite, got {alpha}"
            )));
        }
        if !(b > 0.0 && b < 1.0) {
            return Err(Error::InvalidParams(format!(
                "b must lie in (0, 1), got {b}"
            )));
        }
        Ok(PhysParams { alpha, b })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Critical regularity `s_c = 1/2 - (2 - b)/alpha`.
    pub fn s_c(&self) -> f64 {
        0.5 - (2.0 - self.b) / self.alpha
    }

    /// `4 - 2b`, the power at which `s_c = 0`.
    pub fn mass_critical_alpha(&self) -> f64 {
        4.0 - 2.0 * self.b
    }

    /// Exponent `(2 - b)/alpha` of the amplitude factor in the scaling
    /// `u_λ(t, x) = λ^{(2-b)/α} u(λ² t, λ x)`.
    pub fn scaling_exponent(&self) -> f64 {
        (2.0 - self.b) / self.alpha
    }

    /// Set when `alpha <= 4 - 2b`: the run is legal but scattering
    /// certificates have no theorem behind them.
    pub fn below_scattering_threshold(&self) -> bool {
        self.alpha <= self.mass_critical_alpha()
    }

    /// Set when `alpha <= b`: the multiplier `|x|^{-b}|u|^alpha` is unbounded
    /// at the origin and the phase increment is capped.
    pub fn origin_singular(&self) -> bool {
        self.alpha <= self.b
    }
}

/// Complex field at the interior nodes of a grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    grid: Grid,
    t: f64,
    values: Vec<Complex64>,
}

impl State {
    pub fn new(grid: Grid, t: f64, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "state has {} values, grid with N = {} needs {}",
                values.len(),
                grid.modes(),
                grid.len()
            )));
        }
        if let Some(node) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite { node });
        }
        Ok(State { grid, t, values })
    }

    pub fn zeros(grid: Grid, t: f64) -> Self {
        State {
            grid,
            t,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f` at the interior nodes.
    pub fn from_fn(grid: Grid, t: f64, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        State::new(grid, t, values)
    }

    /// Builds a state without the finiteness scan. Used on hot paths whose
    /// inputs are already known to be finite.
    pub(crate) fn from_parts(grid: Grid, t: f64, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        State { grid, t, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn set_t(&mut self, t: f64) {
        self.t = t;
    }

    pub fn with_t(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_finite(&self) -> bool {
        self.values
            .iter()
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0 && v.im == 0.0)
    }

    /// Value of the odd extension at node `j ∈ [-N, N]`.
    pub fn odd_value(&self, j: i64) -> Complex64 {
        let n = self.grid.modes() as i64;
        match j {
            0 => Complex64::new(0.0, 0.0),
            j if j.abs() >= n => Complex64::new(0.0, 0.0),
            j if j > 0 => self.values[(j - 1) as usize],
            j => -self.values[(-j - 1) as usize],
        }
    }

    /// Discrete L² distance to another state on the same grid, normalized as
    /// the integral over the odd extension.
    pub fn l2_distance(&self, other: &State) -> f64 {
        let sum: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        (2.0 * self.grid.dx() * sum).sqrt()
    }
}

/// Entry of the initial-condition catalogue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// `A·x·exp(-σ x²)`.
    OddGaussian { amplitude: f64, width: f64 },
    /// `g(x) - g(-x)` with `g(x) = A·sin(k x)·exp(-σ (x - x0)²)`.
    SinePacket {
        amplitude: f64,
        width: f64,
        center: f64,
        wavenumber: f64,
    },
    /// `A·sin(k_m x)`, an exact Dirichlet eigenmode of the grid.
    SineMode { amplitude: f64, mode: usize },
    /// CSV with header `x,re,im` sampling the field on the half line.
    File { path: PathBuf },
}

impl InitialSpec {
    pub fn odd_gaussian(amplitude: f64, width: f64) -> Self {
        InitialSpec::OddGaussian { amplitude, width }
    }

    pub fn sine_packet(amplitude: f64, width: f64, center: f64, wavenumber: f64) -> Self {
        InitialSpec::SinePacket {
            amplitude,
            width,
            center,
            wavenumber,
        }
    }

    pub fn sine_mode(amplitude: f64, mode: usize) -> Self {
        InitialSpec::SineMode { amplitude, mode }
    }

    /// Checks the kind-specific parameter ranges that do not depend on a grid.
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInitial(format!("{name} must be finite, got {v}")))
            }
        };
        match *self {
            InitialSpec::OddGaussian { amplitude, width } => {
                finite("amplitude", amplitude)?;
                positive_width(width)
            }
            InitialSpec::SinePacket {
                amplitude,
                width,
                center,
                wavenumber,
            } => {
                finite("amplitude", amplitude)?;
                finite("center", center)?;
                finite("wavenumber", wavenumber)?;
                positive_width(width)
            }
            InitialSpec::SineMode { amplitude, mode } => {
                finite("amplitude", amplitude)?;
                if mode == 0 {
                    return Err(Error::InvalidInitial("sine mode index starts at 1".into()));
                }
                Ok(())
            }
            InitialSpec::File { .. } => Ok(()),
        }
    }

    /// The analytic generator for catalogue kinds that have one.
    ///
    /// `sine_mode` needs the grid length to fix `k_m`.
    pub fn analytic(&self, grid: &Grid) -> Option<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        match *self {
            InitialSpec::OddGaussian { amplitude, width } => {
                Some(Box::new(move |x| amplitude * x * (-width * x * x).exp()))
            }
            InitialSpec::SinePacket {
                amplitude,
                width,
                center,
                wavenumber,
            } => Some(Box::new(move |x| {
                let g = |y: f64| amplitude * (wavenumber * y).sin() * (-width * (y - center).powi(2)).exp();
                g(x) - g(-x)
            })),
            InitialSpec::SineMode { amplitude, mode } => {
                let k = mode as f64 * PI / grid.length();
                Some(Box::new(move |x| amplitude * (k * x).sin()))
            }
            InitialSpec::File { .. } => None,
        }
    }

    /// Upper bound for `|f(L)|` that does not depend on accidental zeros of
    /// an oscillating carrier.
    fn envelope_at(&self, x: f64) -> f64 {
        match *self {
            InitialSpec::OddGaussian { amplitude, width } => {
                amplitude.abs() * x * (-width * x * x).exp()
            }
            InitialSpec::SinePacket {
                amplitude,
                width,
                center,
                ..
            } => {
                amplitude.abs()
                    * ((-width * (x - center).powi(2)).exp() + (-width * (x + center).powi(2)).exp())
            }
            InitialSpec::SineMode { .. } | InitialSpec::File { .. } => 0.0,
        }
    }
}

fn positive_width(width: f64) -> Result<()> {
    if width.is_finite() && width > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInitial(format!(
            "width must be positive, got {width}"
        )))
    }
}

/// Samples the catalogue entry at the interior nodes of `grid`, at `t = 0`.
pub fn sample_initial(spec: &InitialSpec, grid: &Grid) -> Result<State> {
    spec.validate()?;
    if let InitialSpec::SineMode { mode, .. } = *spec {
        if mode >= grid.modes() {
            return Err(Error::InvalidInitial(format!(
                "sine mode {mode} not representable with N = {}",
                grid.modes()
            )));
        }
    }
    if let InitialSpec::File { path } = spec {
        return sample_file(path, grid);
    }

    let f = spec.analytic(grid).expect("analytic catalogue kind");
    let state = State::from_fn(*grid, 0.0, |x| Complex64::new(f(x), 0.0))?;
    if !matches!(spec, InitialSpec::SineMode { .. }) {
        let peak = peak_modulus(&state);
        check_tail(spec.envelope_at(grid.length()), peak)?;
    }
    Ok(state)
}

fn peak_modulus(state: &State) -> f64 {
    state.values().iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn check_tail(tail: f64, peak: f64) -> Result<()> {
    if peak > 0.0 && tail > DOMAIN_TAIL_TOLERANCE * peak {
        return Err(Error::DomainTooSmall {
            tail,
            peak,
            threshold: DOMAIN_TAIL_TOLERANCE,
        });
    }
    Ok(())
}

/// Reads `x,re,im` rows (ascending `x >= 0`) and interpolates linearly onto
/// the grid nodes. Nodes past the last row are zero.
fn sample_file(path: &Path, grid: &Grid) -> Result<State> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows: Vec<(f64, Complex64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if lineno == 0 && line.replace(' ', "") == "x,re,im" {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Option<Vec<f64>> = (fields.len() == 3)
            .then(|| fields.iter().map(|f| f.parse::<f64>().ok()).collect())
            .flatten();
        match parsed {
            Some(v) if v.iter().all(|x| x.is_finite()) => {
                rows.push((v[0], Complex64::new(v[1], v[2])))
            }
            _ => {
                return Err(Error::InvalidInitial(format!(
                    "{}:{}: expected `x,re,im` with finite numbers",
                    path.display(),
                    lineno + 1
                )))
            }
        }
    }
    if rows.len() < 4 {
        return Err(Error::InvalidInitial(format!(
            "{}: need at least four samples",
            path.display()
        )));
    }
    if rows[0].0 < 0.0 || rows.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidInitial(format!(
            "{}: x must be non-negative and strictly increasing",
            path.display()
        )));
    }

    let peak = rows.iter().map(|r| r.1.norm()).fold(0.0, f64::max);
    let origin = extrapolate_to_origin(&rows);
    if origin.norm() > ORIGIN_TOLERANCE * peak {
        return Err(Error::NotOdd {
            origin: origin.norm(),
            peak,
        });
    }

    let mut points = Vec::with_capacity(rows.len() + 1);
    if rows[0].0 > 0.0 {
        points.push((0.0, origin));
    }
    points.extend_from_slice(&rows);
    let last_x = points[points.len() - 1].0;
    let interp = |x: f64| -> Complex64 {
        if x > last_x {
            return Complex64::new(0.0, 0.0);
        }
        let hi = points.partition_point(|p| p.0 < x).clamp(1, points.len() - 1);
        let (xa, ua) = points[hi - 1];
        let (xb, ub) = points[hi];
        let s = ((x - xa) / (xb - xa)).clamp(0.0, 1.0);
        ua * (1.0 - s) + ub * s
    };

    let tail = interp(grid.length().min(last_x)).norm();
    check_tail(tail, peak)?;
    State::from_fn(*grid, 0.0, interp)
}

/// Cubic Lagrange extrapolation of the first four rows to `x = 0`. For odd
/// data the first neglected term is `O(x⁵)`.
fn extrapolate_to_origin(rows: &[(f64, Complex64)]) -> Complex64 {
    if rows[0].0 == 0.0 {
        return rows[0].1;
    }
    let pts = &rows[..4];
    pts.iter()
        .enumerate()
        .map(|(i, &(xi, ui))| {
            let weight: f64 = pts
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .map(|(_, &(xk, _))| xk / (xk - xi))
                .product();
            ui * weight
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn grid_on_pi_has_integer_wavenumbers() {
        let g = make_grid(PI, 8).unwrap();
        assert_eq!(g.len(), 7);
        for (i, x) in g.nodes().enumerate() {
            assert_relative_eq!(x, (i + 1) as f64 * PI / 8.0, epsilon = 1e-15);
        }
        for (i, k) in g.wavenumbers().enumerate() {
            assert_relative_eq!(k, (i + 1) as f64, epsilon = 1e-14);
        }
    }

    #[test]
    fn grid_spacing() {
        let g = make_grid(40.0, 4096).unwrap();
        assert_relative_eq!(g.dx(), 0.009765625, epsilon = 1e-15);
        assert_relative_eq!(g.wavenumber(0), PI / 40.0);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(make_grid(-1.0, 16).is_err());
        assert!(make_grid(0.0, 16).is_err());
        assert!(make_grid(f64::NAN, 16).is_err());
        assert!(make_grid(1.0, 7).is_err());
        assert!(make_grid(1.0, 8).is_ok());
    }

    #[test]
    fn params_critical_exponent() {
        let p = make_params(4.0, 0.5).unwrap();
        assert_relative_eq!(p.s_c(), 0.125, epsilon = 1e-15);
        assert_relative_eq!(p.mass_critical_alpha(), 3.0);
        assert!(!p.below_scattering_threshold());

        let p = make_params(3.0, 0.5).unwrap();
        assert_eq!(p.s_c(), 0.0);
        assert!(p.below_scattering_threshold());
    }

    #[test]
    fn params_reject_out_of_range() {
        assert!(make_params(4.0, 1.5).is_err());
        assert!(make_params(4.0, 0.0).is_err());
        assert!(make_params(4.0, 1.0).is_err());
        assert!(make_params(0.0, 0.5).is_err());
        assert!(make_params(-1.0, 0.5).is_err());
    }

    #[test]
    fn odd_gaussian_node_value() {
        // dx = 0.5, so the first node sits at x = 0.5
        let g = make_grid(8.0, 16).unwrap();
        let s = sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &g).unwrap();
        assert_relative_eq!(g.node(0), 0.5);
        assert_relative_eq!(s.values()[0].re, 0.389400391535702434, epsilon = 1e-15);
        assert_eq!(s.t(), 0.0);
    }

    #[test]
    fn sine_mode_samples() {
        let g = make_grid(3.0, 32).unwrap();
        let s = sample_initial(&InitialSpec::sine_mode(1.0, 1), &g).unwrap();
        for (x, v) in g.nodes().zip(s.values()) {
            assert_relative_eq!(v.re, (PI * x / 3.0).sin(), epsilon = 1e-15);
            assert_eq!(v.im, 0.0);
        }
        assert!(sample_initial(&InitialSpec::sine_mode(1.0, 32), &g).is_err());
        assert!(sample_initial(&InitialSpec::sine_mode(1.0, 0), &g).is_err());
    }

    #[test]
    fn small_domain_rejected() {
        let g = make_grid(2.0, 64).unwrap();
        match sample_initial(&InitialSpec::odd_gaussian(1.0, 1.0), &g) {
            Err(Error::DomainTooSmall { tail, .. }) => {
                assert_relative_eq!(tail, 0.036631277777468, epsilon = 1e-12)
            }
            other => panic!("expected domain error, got {other:?}"),
        }
    }

    #[test]
    fn zero_amplitude_is_allowed() {
        let g = make_grid(2.0, 64).unwrap();
        let s = sample_initial(&InitialSpec::odd_gaussian(0.0, 1.0), &g).unwrap();
        assert!(s.is_zero());
    }

    #[test]
    fn sampling_is_deterministic() {
        let g = make_grid(30.0, 512).unwrap();
        let spec = InitialSpec::sine_packet(0.7, 0.8, 4.0, 2.5);
        let a = sample_initial(&spec, &g).unwrap();
        let b = sample_initial(&spec, &g).unwrap();
        let bits = |s: &State| -> Vec<(u64, u64)> {
            s.values().iter().map(|v| (v.re.to_bits(), v.im.to_bits())).collect()
        };
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn state_rejects_nan_and_length() {
        let g = make_grid(1.0, 8).unwrap();
        let mut v = vec![Complex64::new(0.0, 0.0); 7];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(State::new(g, 0.0, v), Err(Error::NonFinite { node: 3 })));
        assert!(State::new(g, 0.0, vec![Complex64::new(0.0, 0.0); 8]).is_err());
    }

    #[test]
    fn odd_extension_values() {
        let g = make_grid(1.0, 8).unwrap();
        let s = State::from_fn(g, 0.0, |x| Complex64::new(x, 1.0)).unwrap();
        assert_eq!(s.odd_value(0), Complex64::new(0.0, 0.0));
        assert_eq!(s.odd_value(8), Complex64::new(0.0, 0.0));
        assert_eq!(s.odd_value(-3), -s.odd_value(3));
    }

    #[test]
    fn file_roundtrip_and_oddness_check() {
        let dir = tempfile::tempdir().unwrap();
        let g = make_grid(10.0, 128).unwrap();

        let good = dir.path().join("good.csv");
        let mut text = String::from("x,re,im\n");
        for i in 1..=400 {
            let x = i as f64 * 0.025;
            text += &format!("{x},{},{}\n", x * (-x * x).exp(), 0.5 * x * (-x * x).exp());
        }
        std::fs::write(&good, text).unwrap();
        let s = sample_initial(&InitialSpec::File { path: good }, &g).unwrap();
        for (x, v) in g.nodes().zip(s.values()) {
            assert!((v.re - x * (-x * x).exp()).abs() < 2e-4);
        }

        let shifted = dir.path().join("shifted.csv");
        let mut text = String::from("x,re,im\n");
        for i in 1..=400 {
            let x = i as f64 * 0.025;
            text += &format!("{x},{},0\n", (-(x * x)).exp());
        }
        std::fs::write(&shifted, text).unwrap();
        assert!(matches!(
            sample_initial(&InitialSpec::File { path: shifted }, &g),
            Err(Error::NotOdd { .. })
        ));

        let missing = dir.path().join("nope.csv");
        assert!(matches!(
            sample_initial(&InitialSpec::File { path: missing }, &g),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn spec_json_is_strict() {
        let ok: InitialSpec =
            serde_json::from_str(r#"{"kind":"odd_gaussian","amplitude":1.0,"width":1.0}"#).unwrap();
        assert_eq!(ok, InitialSpec::odd_gaussian(1.0, 1.0));
        assert!(serde_json::from_str::<InitialSpec>(
            r#"{"kind":"odd_gaussian","amplitude":1.0,"width":1.0,"extra":2}"#
        )
        .is_err());
        assert!(serde_json::from_str::<Grid>(r#"{"L":-1.0,"N":64}"#).is_err());
    }

    fn catalogue() -> impl Strategy<Value = InitialSpec> {
        prop_oneof![
            (-3.0..3.0f64, 0.1..5.0f64).prop_map(|(a, w)| InitialSpec::odd_gaussian(a, w)),
            (-3.0..3.0f64, 0.1..5.0f64, -5.0..5.0f64, -6.0..6.0f64)
                .prop_map(|(a, w, c, k)| InitialSpec::sine_packet(a, w, c, k)),
            (-3.0..3.0f64, 1usize..64).prop_map(|(a, m)| InitialSpec::sine_mode(a, m)),
        ]
    }

    proptest! {
        #[test]
        fn catalogue_generators_are_odd(spec in catalogue(), x in -20.0..20.0f64) {
            let g = make_grid(20.0, 128).unwrap();
            let f = spec.analytic(&g).unwrap();
            let (a, b) = (f(x), f(-x));
            prop_assert!((a + b).abs() <= 1e-14 * a.abs().max(1.0));
        }
    }
}
