//! Strang split-step evolution built from the two exact subflows
//!
//! ```text
//! S(dt) = P(dt/2) ∘ F(dt) ∘ P(dt/2)
//! ```
//!
//! where `F` is the free propagator `e^{i dt Δ}` (diagonal in the sine basis)
//! and `P` the pointwise phase rotation of the nonlinear subflow. Both
//! substeps preserve mass exactly and are exactly invertible, and the
//! composition is symmetric, so `S(-dt) ∘ S(dt) = id` up to roundoff.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::{Grid, PhysParams, State};
use crate::error::{Error, Result};
use crate::nonlinear::{phase_in_place, PotentialWeights, ORIGIN_PHASE_CAP};
use crate::observables::{mass, Interval, ObservableEngine, ObservableSample};
use crate::transform::{to_spectral, FreePropagator};

/// Number of nodes next to `x = L` watched for wall reflections.
pub const WALL_NODES: usize = 5;
/// Fraction of the total mass allowed in the wall layer before the alarm.
pub const WALL_THRESHOLD: f64 = 1e-8;
/// Fraction of the spectral mass used to define the effective wavenumber.
pub const SPECTRAL_MASS_FRACTION: f64 = 0.999;

/// Which generators take part in the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// The physical defocusing nonlinearity.
    #[default]
    Defocusing,
    /// Nonlinearity switched off: the scheme collapses to the free flow.
    /// Diagnostic hook only.
    LinearOnly,
}

impl Coupling {
    fn factor(self) -> f64 {
        match self {
            Coupling::Defocusing => 1.0,
            Coupling::LinearOnly => 0.0,
        }
    }
}

/// What to do when the wall-reflection alarm fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WallPolicy {
    /// Record the first alarm time in [`RunFlags`] and keep going.
    #[default]
    Record,
    /// Stop with [`Error::WallReflection`].
    Abort,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub dt: f64,
    pub t_max: f64,
    /// Steps between observable samples; 0 samples only the endpoints.
    #[serde(default)]
    pub output_every: usize,
    /// Steps between checkpoints; 0 disables them.
    #[serde(default)]
    pub checkpoint_every: usize,
}

impl Schedule {
    pub fn new(dt: f64, t_max: f64, output_every: usize) -> Result<Self> {
        let s = Schedule {
            dt,
            t_max,
            output_every,
            checkpoint_every: 0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_checkpoints(mut self, every: usize) -> Self {
        self.checkpoint_every = every;
        self
    }

    /// `t_max = 0` is accepted and means "initial sample only".
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidSchedule(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max.is_finite() && (self.t_max == 0.0 || self.t_max >= self.dt)) {
            return Err(Error::InvalidSchedule(format!(
                "t_max must be 0 or at least dt, got t_max = {}, dt = {}",
                self.t_max, self.dt
            )));
        }
        Ok(())
    }

    /// `ceil(t_max / dt)`, with a relative slack for representable multiples.
    pub fn steps(&self) -> usize {
        let ratio = self.t_max / self.dt;
        let nearest = ratio.round();
        if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            ratio.ceil() as usize
        }
    }
}

/// Things to record at each output step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observer {
    /// Every column of [`ObservableSample`], local norms on the interval.
    Observables(Interval),
    /// The full field.
    States,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub observables: Option<ObservableSample>,
    pub state: Option<State>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunFlags {
    /// The phase increment was capped somewhere near the origin.
    pub origin_resolution_limited: bool,
    /// Time of the first wall-reflection alarm.
    pub wall_alarm: Option<f64>,
    /// The dispersion-based domain-size rule was violated.
    pub domain_warning: Option<String>,
    /// `alpha <= 4 - 2b`.
    pub below_scattering_threshold: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    grid: Grid,
    params: PhysParams,
    schedule: Schedule,
    coupling: Coupling,
    samples: Vec<Sample>,
    flags: RunFlags,
}

impl Trajectory {
    /// Assembles a trajectory from externally produced samples. Times must
    /// be strictly increasing.
    pub fn from_samples(
        grid: Grid,
        params: PhysParams,
        schedule: Schedule,
        coupling: Coupling,
        samples: Vec<Sample>,
    ) -> Result<Self> {
        if samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(Error::InvalidSchedule("sample times must increase".into()));
        }
        Ok(Trajectory {
            grid,
            params,
            schedule,
            coupling,
            samples,
            flags: RunFlags::default(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn flags(&self) -> &RunFlags {
        &self.flags
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    /// Stored states, in time order. Empty unless [`Observer::States`] was
    /// requested.
    pub fn states(&self) -> Vec<&State> {
        self.samples.iter().filter_map(|s| s.state.as_ref()).collect()
    }

    pub fn observables(&self) -> Vec<ObservableSample> {
        self.samples.iter().filter_map(|s| s.observables).collect()
    }

    pub fn final_state(&self) -> Option<&State> {
        self.samples.last().and_then(|s| s.state.as_ref())
    }

    /// Stored state whose time is within `tol` of `t`.
    pub fn state_at(&self, t: f64, tol: f64) -> Option<&State> {
        self.samples
            .iter()
            .find(|s| (s.t - t).abs() <= tol)
            .and_then(|s| s.state.as_ref())
    }
}

/// The split-step flow for one grid and parameter set.
#[derive(Debug, Clone)]
pub struct Flow {
    grid: Grid,
    params: PhysParams,
    coupling: Coupling,
    wall_policy: WallPolicy,
    weights: PotentialWeights,
}

impl Flow {
    pub fn new(grid: &Grid, params: PhysParams) -> Self {
        Flow {
            grid: *grid,
            params,
            coupling: Coupling::Defocusing,
            wall_policy: WallPolicy::Record,
            weights: PotentialWeights::new(grid, params.b()).expect("PhysParams validates b"),
        }
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn linear_only(self) -> Self {
        self.with_coupling(Coupling::LinearOnly)
    }

    pub fn with_wall_policy(mut self, policy: WallPolicy) -> Self {
        self.wall_policy = policy;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn params(&self) -> &PhysParams {
        &self.params
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn stepper(&self, dt: f64) -> Stepper<'_> {
        Stepper {
            flow: self,
            dt,
            free: FreePropagator::new(&self.grid, dt),
            cap: self.params.origin_singular().then_some(ORIGIN_PHASE_CAP),
            capped: false,
        }
    }

    /// One Strang step; advances the time label by `dt` (which may be negative).
    pub fn strang_step(&self, state: &State, dt: f64) -> Result<State> {
        self.check_grid(state)?;
        let mut values = state.values().to_vec();
        self.stepper(dt).step(&mut values);
        State::new(self.grid, state.t() + dt, values)
    }

    fn check_grid(&self, state: &State) -> Result<()> {
        if state.grid() != &self.grid {
            return Err(Error::GridMismatch(format!(
                "state on {:?}, flow on {:?}",
                state.grid(),
                self.grid
            )));
        }
        Ok(())
    }

    /// Runs `steps` steps of size `dt` without recording anything.
    pub fn advance(&self, state: &State, dt: f64, steps: usize) -> Result<State> {
        self.check_grid(state)?;
        let mut values = state.values().to_vec();
        let mut last_good = values.clone();
        let mut stepper = self.stepper(dt);
        for n in 0..steps {
            last_good.copy_from_slice(&values);
            stepper.step(&mut values);
            if first_non_finite(&values).is_some() {
                let t_good = state.t() + n as f64 * dt;
                return Err(Error::NumericalFault {
                    step: n + 1,
                    last_good_t: t_good,
                    last_good: Box::new(State::from_parts(self.grid, t_good, last_good)),
                });
            }
        }
        Ok(State::from_parts(self.grid, state.t() + steps as f64 * dt, values))
    }

    pub fn evolve(&self, initial: &State, schedule: &Schedule, observers: &[Observer]) -> Result<Trajectory> {
        self.evolve_with(initial, schedule, observers, |_| Ok(()))
    }

    /// Like [`Flow::evolve`], calling `on_checkpoint` every
    /// `schedule.checkpoint_every` steps.
    pub fn evolve_with(
        &self,
        initial: &State,
        schedule: &Schedule,
        observers: &[Observer],
        mut on_checkpoint: impl FnMut(&State) -> Result<()>,
    ) -> Result<Trajectory> {
        schedule.validate()?;
        self.check_grid(initial)?;
        if !initial.is_finite() {
            return Err(Error::NonFinite {
                node: first_non_finite(initial.values()).unwrap_or(0),
            });
        }

        let mut engine = observers
            .iter()
            .find_map(|o| match o {
                Observer::Observables(interval) => Some(*interval),
                Observer::States => None,
            })
            .map(|interval| ObservableEngine::new(&self.grid, self.params, interval))
            .transpose()?;
        let keep_states = observers.contains(&Observer::States);

        let mut flags = RunFlags {
            below_scattering_threshold: self.params.below_scattering_threshold(),
            domain_warning: domain_rule(initial, schedule.t_max).err(),
            ..RunFlags::default()
        };

        let t0 = initial.t();
        let steps = schedule.steps();
        let mut samples = Vec::new();
        let record = |state: &State, engine: &mut Option<ObservableEngine>| Sample {
            t: state.t(),
            observables: engine.as_mut().map(|e| e.sample(state)),
            state: keep_states.then(|| state.clone()),
        };
        samples.push(record(initial, &mut engine));

        let total_mass = mass(initial);
        let mut current = initial.values().to_vec();
        let mut last_good = current.clone();
        let mut stepper = self.stepper(schedule.dt);
        for n in 1..=steps {
            last_good.copy_from_slice(&current);
            stepper.step(&mut current);
            let t = t0 + n as f64 * schedule.dt;
            if first_non_finite(&current).is_some() {
                let t_good = t0 + (n - 1) as f64 * schedule.dt;
                return Err(Error::NumericalFault {
                    step: n,
                    last_good_t: t_good,
                    last_good: Box::new(State::from_parts(self.grid, t_good, last_good)),
                });
            }
            if flags.wall_alarm.is_none() {
                let edge = wall_mass(&self.grid, &current);
                if edge > WALL_THRESHOLD * total_mass {
                    match self.wall_policy {
                        WallPolicy::Record => flags.wall_alarm = Some(t),
                        WallPolicy::Abort => {
                            return Err(Error::WallReflection {
                                t,
                                edge_mass: edge,
                                threshold: WALL_THRESHOLD,
                            })
                        }
                    }
                }
            }
            let output = n == steps || (schedule.output_every > 0 && n % schedule.output_every == 0);
            let checkpoint = schedule.checkpoint_every > 0 && n % schedule.checkpoint_every == 0;
            if output || checkpoint {
                let state = State::from_parts(self.grid, t, current.clone());
                if output {
                    samples.push(record(&state, &mut engine));
                }
                if checkpoint {
                    on_checkpoint(&state)?;
                }
            }
        }
        flags.origin_resolution_limited = stepper.capped;

        Ok(Trajectory {
            grid: self.grid,
            params: self.params,
            schedule: *schedule,
            coupling: self.coupling,
            samples,
            flags,
        })
    }

    /// Self-convergence order of the scheme at `t_final`; see
    /// [`convergence_order`].
    pub fn convergence_order(&self, initial: &State, t_final: f64, dt_list: &[f64]) -> Result<OrderEstimate> {
        if dt_list.len() < 3 {
            return Err(Error::InvalidSchedule("need at least three step sizes".into()));
        }
        for w in dt_list.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidSchedule(format!(
                    "step sizes must be strictly decreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        let steps_for = |dt: f64| -> Result<usize> {
            if !(dt > 0.0) {
                return Err(Error::InvalidSchedule(format!("step size {dt} must be positive")));
            }
            let ratio = t_final / dt;
            let n = ratio.round();
            if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
                return Err(Error::InvalidSchedule(format!("dt = {dt} does not divide t_final = {t_final}")));
            }
            Ok(n as usize)
        };
        let finest = *dt_list.last().unwrap();
        let reference_dt = finest / REFERENCE_REFINEMENT;
        let reference = self.advance(initial, reference_dt, steps_for(finest)? * REFERENCE_REFINEMENT as usize)?;
        let scale = mass(&reference).sqrt().max(f64::MIN_POSITIVE);

        let mut errors = Vec::with_capacity(dt_list.len());
        for &dt in dt_list {
            let end = self.advance(initial, dt, steps_for(dt)?)?;
            errors.push(end.l2_distance(&reference));
        }

        let order = if errors.iter().all(|&e| e <= EXACT_TOLERANCE * scale) {
            Order::Exact
        } else {
            Order::Measured(log_log_slope(dt_list, &errors))
        };
        Ok(OrderEstimate {
            dts: dt_list.to_vec(),
            reference_dt,
            errors,
            order,
        })
    }
}

/// The reference run uses this many substeps per finest step.
pub const REFERENCE_REFINEMENT: f64 = 16.0;
/// Relative error under which every run counts as exact.
pub const EXACT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Order {
    /// All errors at roundoff level: the splitting is exact for this flow.
    Exact,
    Measured(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub dts: Vec<f64>,
    pub reference_dt: f64,
    /// L² distance at `t_final` to the reference run, per step size.
    pub errors: Vec<f64>,
    pub order: Order,
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x.ln(), y.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Reusable stepping kernel for a fixed `dt`.
pub struct Stepper<'a> {
    flow: &'a Flow,
    dt: f64,
    free: FreePropagator,
    cap: Option<f64>,
    capped: bool,
}

impl Stepper<'_> {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Whether any step so far hit the origin phase cap.
    pub fn capped(&self) -> bool {
        self.capped
    }

    fn half_phase(&mut self, values: &mut [Complex64]) {
        let out = phase_in_place(
            values,
            self.flow.weights.weights(),
            0.5 * self.dt,
            0.5 * self.flow.params.alpha(),
            self.flow.coupling.factor(),
            self.cap,
        );
        self.capped |= out.capped;
    }

    pub fn step(&mut self, values: &mut [Complex64]) {
        if self.dt == 0.0 {
            return;
        }
        self.half_phase(values);
        self.free.apply_in_place(values);
        self.half_phase(values);
    }
}

fn first_non_finite(values: &[Complex64]) -> Option<usize> {
    values
        .iter()
        .position(|v| !(v.re.is_finite() && v.im.is_finite()))
}

fn wall_mass(grid: &Grid, values: &[Complex64]) -> f64 {
    let start = values.len().saturating_sub(WALL_NODES);
    2.0 * grid.dx() * values[start..].iter().map(|v| v.norm_sqr()).sum::<f64>()
}

/// Dispersion-based domain rule `L >= x_support + 2·k_eff·t_max`, where
/// `x_support` and `k_eff` enclose [`SPECTRAL_MASS_FRACTION`] of the mass in
/// physical and spectral space. Returns the violation message on failure.
pub fn domain_rule(state: &State, t_max: f64) -> std::result::Result<(), String> {
    let grid = state.grid();
    let total: f64 = state.values().iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(());
    }
    let quantile = |weights: &mut dyn Iterator<Item = f64>| -> usize {
        let mut acc = 0.0;
        for (i, w) in weights.enumerate() {
            acc += w;
            if acc >= SPECTRAL_MASS_FRACTION * total {
                return i;
            }
        }
        grid.len() - 1
    };
    let x_idx = quantile(&mut state.values().iter().map(|v| v.norm_sqr()));
    let sp = to_spectral(state);
    // Σ|c_m|² · N/2 = Σ|u_j|²
    let half_n = grid.modes() as f64 / 2.0;
    let k_idx = quantile(&mut sp.coeffs().iter().map(|c| c.norm_sqr() * half_n));
    let x_support = grid.node(x_idx);
    let k_eff = grid.wavenumber(k_idx);
    let needed = x_support + 2.0 * k_eff * t_max;
    if needed > grid.length() {
        Err(format!(
            "L = {} below x_support + 2 k_eff t_max = {:.3} (x_support = {:.3}, k_eff = {:.3})",
            grid.length(),
            needed,
            x_support,
            k_eff
        ))
    } else {
        Ok(())
    }
}

/// One Strang step of the defocusing flow.
pub fn strang_step(state: &State, dt: f64, params: &PhysParams) -> Result<State> {
    Flow::new(state.grid(), *params).strang_step(state, dt)
}

pub fn evolve(
    initial: &State,
    schedule: &Schedule,
    params: &PhysParams,
    observers: &[Observer],
) -> Result<Trajectory> {
    Flow::new(initial.grid(), *params).evolve(initial, schedule, observers)
}

/// Measures the order of the scheme: runs each step size to `t_final`,
/// compares with a reference run at `min(dt_list) / 16`, and fits the slope
/// of `log(error)` against `log(dt)` by least squares.
pub fn convergence_order(initial: &State, params: &PhysParams, t_final: f64, dt_list: &[f64]) -> Result<OrderEstimate> {
    Flow::new(initial.grid(), *params).convergence_order(initial, t_final, dt_list)
}
