//! Run configuration, artifact files and the five packaged drivers.
//!
//! A run reads a strict JSON [`RunConfig`], writes its artifacts into one
//! output directory and reports a [`RunSummary`]. Failures map to exit codes
//! through [`exit_code`] and to a JSON body through [`error_report`].

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    hardy_constant, hardy_ratio, hardy_ratio_analytic, morawetz_bound_holds, scattering_report, small_data_certificate,
    wave_operator_roundtrip_with, HardyReport, ScatteringReport, SmallDataReport, WaveOperatorReport,
};
use crate::domain::{make_params, sample_initial, Grid, InitialSpec, PhysParams, State};
use crate::error::{Error, Result};
use crate::integrator::{Coupling, Flow, Observer, OrderEstimate, RunFlags, Sample, Schedule, Trajectory, WallPolicy};
use crate::observables::{admissible_pairs, AdmissiblePair, Interval, ObservableSample};

pub const CSV_HEADER: &str = "t,mass,e_kin,e_pot,e_total,h1,hsc,l2_local,linf_local,morawetz";
pub const CHECKPOINT_MAGIC: [u8; 4] = *b"INLS";
pub const CHECKPOINT_VERSION: u32 = 1;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

pub const OBSERVABLES_FILE: &str = "observables.csv";
pub const REPORT_FILE: &str = "report.json";
pub const SUMMARY_FILE: &str = "summary.json";
pub const ERROR_FILE: &str = "error.json";
pub const LAST_GOOD_FILE: &str = "last_good.inls";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Evolve,
    Convergence,
    Hardy,
    Scatter,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Evolve => "evolve",
            Command::Convergence => "convergence",
            Command::Hardy => "hardy",
            Command::Scatter => "scatter",
            Command::Sweep => "sweep",
        }
    }
}

// ---------------------------------------------------------------- config

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: Grid,
    pub params: PhysParams,
    pub time: Schedule,
    pub initial: InitialSpec,
    /// Interval for the local norms.
    #[serde(default = "default_local")]
    pub local: Interval,
    #[serde(default)]
    pub coupling: Coupling,
    #[serde(default)]
    pub wall_policy: WallPolicy,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub convergence: Option<ConvergenceConfig>,
    #[serde(default)]
    pub hardy: Option<HardyConfig>,
    #[serde(default)]
    pub scatter: Option<ScatterConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_local() -> Interval {
    Interval::symmetric(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub t_final: f64,
    /// Strictly decreasing, each dividing `t_final`.
    pub dt_list: Vec<f64>,
}

/// Random odd packets `A sin(kx) exp(-σ(x - x0)²)` drawn uniformly from the
/// given ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardyConfig {
    #[serde(default = "default_hardy_samples")]
    pub samples: usize,
    #[serde(default = "default_hardy_p")]
    pub p: Vec<f64>,
    #[serde(default = "default_amplitude")]
    pub amplitude: [f64; 2],
    #[serde(default = "default_width")]
    pub width: [f64; 2],
    #[serde(default = "default_center")]
    pub center: [f64; 2],
    #[serde(default = "default_wavenumber")]
    pub wavenumber: [f64; 2],
}

fn default_hardy_samples() -> usize {
    200
}
fn default_hardy_p() -> Vec<f64> {
    vec![1.5, 2.0, 3.0]
}
fn default_amplitude() -> [f64; 2] {
    [0.2, 2.0]
}
fn default_width() -> [f64; 2] {
    [0.3, 3.0]
}
fn default_center() -> [f64; 2] {
    [0.0, 6.0]
}
fn default_wavenumber() -> [f64; 2] {
    [0.0, 4.0]
}

impl Default for HardyConfig {
    fn default() -> Self {
        HardyConfig {
            samples: default_hardy_samples(),
            p: default_hardy_p(),
            amplitude: default_amplitude(),
            width: default_width(),
            center: default_center(),
            wavenumber: default_wavenumber(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterConfig {
    /// Increasing sample times, at least four, each a multiple of `dt`.
    pub window: Vec<f64>,
    #[serde(default = "default_scatter_tol")]
    pub tol: f64,
    /// Lebesgue exponents `r` of `Ḣ^{s_c}`-admissible pairs for the
    /// small-data certificate. Empty skips it.
    #[serde(default)]
    pub pairs: Vec<f64>,
    /// Horizon of the wave-operator round trip, with the initial data as the
    /// free profile. Absent skips it.
    #[serde(default)]
    pub wave_operator: Option<f64>,
}

fn default_scatter_tol() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub alpha: Vec<f64>,
    pub b: Vec<f64>,
    /// `evolve` or `scatter`.
    #[serde(default = "default_sweep_experiment")]
    pub experiment: Command,
}

fn default_sweep_experiment() -> Command {
    Command::Evolve
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    /// Checks everything that can be checked without running the flow,
    /// including sampling the initial data.
    pub fn validate(&self) -> Result<()> {
        self.time.validate()?;
        self.initial.validate()?;
        self.local.validate(&self.grid)?;
        sample_initial(&self.initial, &self.grid)?;
        if let Some(c) = &self.convergence {
            c.validate()?;
        }
        if let Some(h) = &self.hardy {
            h.validate()?;
        }
        if let Some(s) = &self.scatter {
            s.validate(&self.time, &self.params)?;
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
            if s.experiment == Command::Scatter && self.scatter.is_none() {
                return Err(Error::Config("sweep over scatter needs a scatter block".into()));
            }
            if let Some(sc) = &self.scatter {
                for (alpha, b) in s.points() {
                    sc.validate(&self.time, &make_params(alpha, b)?)?;
                }
            }
        }
        Ok(())
    }

    /// Applies command-line overrides.
    pub fn apply(&mut self, options: &RunOptions) {
        if let Some(out) = &options.out {
            self.out = Some(out.clone());
        }
        if let Some(seed) = options.seed {
            self.seed = seed;
        }
        if options.linear_only {
            self.coupling = Coupling::LinearOnly;
        }
    }

    fn flow(&self) -> Flow {
        Flow::new(&self.grid, self.params)
            .with_coupling(self.coupling)
            .with_wall_policy(self.wall_policy)
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self
            .out
            .clone()
            .ok_or_else(|| Error::Config("no output directory: set \"out\" or pass --out".into()))?;
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(dir)
    }
}

impl ConvergenceConfig {
    fn validate(&self) -> Result<()> {
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::Config(format!("convergence.t_final must be positive, got {}", self.t_final)));
        }
        if self.dt_list.len() < 3 {
            return Err(Error::Config("convergence.dt_list needs at least three entries".into()));
        }
        for w in self.dt_list.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::Config("convergence.dt_list must be strictly decreasing".into()));
            }
        }
        for &dt in &self.dt_list {
            steps_exact(dt, self.t_final).map_err(|_| {
                Error::Config(format!("convergence: dt = {dt} does not divide t_final = {}", self.t_final))
            })?;
        }
        Ok(())
    }
}

impl HardyConfig {
    fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::Config("hardy.samples must be positive".into()));
        }
        if self.p.is_empty() || self.p.iter().any(|&p| !(p.is_finite() && p > 1.0)) {
            return Err(Error::Config("hardy.p must be a nonempty list of exponents > 1".into()));
        }
        for (name, [lo, hi]) in [
            ("amplitude", self.amplitude),
            ("width", self.width),
            ("center", self.center),
            ("wavenumber", self.wavenumber),
        ] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Config(format!("hardy.{name} must be a range [lo, hi], got [{lo}, {hi}]")));
            }
        }
        if self.width[0] <= 0.0 || self.center[0] < 0.0 {
            return Err(Error::Config("hardy.width must be positive and hardy.center nonnegative".into()));
        }
        Ok(())
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> InitialSpec {
        let mut pick = |[lo, hi]: [f64; 2]| if lo == hi { lo } else { rng.gen_range(lo..hi) };
        let amplitude = pick(self.amplitude);
        let width = pick(self.width);
        let center = pick(self.center);
        let wavenumber = pick(self.wavenumber);
        InitialSpec::sine_packet(amplitude, width, center, wavenumber)
    }
}

impl ScatterConfig {
    fn validate(&self, time: &Schedule, params: &PhysParams) -> Result<()> {
        if self.window.len() < 4 {
            return Err(Error::Config("scatter.window needs at least four times".into()));
        }
        if self.window.windows(2).any(|w| !(w[1] > w[0])) || self.window[0] < 0.0 {
            return Err(Error::Config("scatter.window must be nonnegative and increasing".into()));
        }
        for &t in &self.window {
            let steps = steps_exact(time.dt, t)
                .map_err(|_| Error::Config(format!("scatter.window time {t} is not a multiple of dt = {}", time.dt)))?;
            if steps > time.steps() {
                return Err(Error::Config(format!("scatter.window time {t} exceeds t_max = {}", time.t_max)));
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::Config(format!("scatter.tol must be positive, got {}", self.tol)));
        }
        admissible_pairs(params.s_c(), &self.pairs).map_err(|e| Error::Config(format!("scatter.pairs: {e}")))?;
        if let Some(t_back) = self.wave_operator {
            steps_exact(time.dt, t_back).map_err(|_| {
                Error::Config(format!("scatter.wave_operator = {t_back} is not a positive multiple of dt"))
            })?;
        }
        Ok(())
    }
}

impl SweepConfig {
    fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() || self.b.is_empty() {
            return Err(Error::Config("sweep.alpha and sweep.b must be nonempty".into()));
        }
        if !matches!(self.experiment, Command::Evolve | Command::Scatter) {
            return Err(Error::Config(format!(
                "sweep.experiment must be evolve or scatter, got {}",
                self.experiment.name()
            )));
        }
        for (alpha, b) in self.points() {
            make_params(alpha, b).map_err(|e| Error::Config(format!("sweep point: {e}")))?;
        }
        Ok(())
    }

    /// Cartesian product, `alpha` outermost.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.alpha
            .iter()
            .flat_map(|&a| self.b.iter().map(move |&b| (a, b)))
            .collect()
    }
}

/// `t / dt` when it is a positive integer up to rounding.
fn steps_exact(dt: f64, t: f64) -> Result<usize> {
    let ratio = t / dt;
    let n = ratio.round();
    if t == 0.0 {
        return Ok(0);
    }
    if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
        return Err(Error::InvalidSchedule(format!("{t} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub linear_only: bool,
}

// ---------------------------------------------------------------- CSV

fn csv_row(s: &ObservableSample) -> String {
    let cols = [
        s.t, s.mass, s.e_kin, s.e_pot, s.e_total, s.h1, s.hsc, s.l2_local, s.linf_local, s.morawetz,
    ];
    let parts: Vec<String> = cols.iter().map(|v| format!("{v:.16e}")).collect();
    parts.join(",")
}

pub fn write_observables_csv(path: impl AsRef<Path>, samples: &[ObservableSample]) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(w, "{CSV_HEADER}").map_err(io)?;
    for s in samples {
        writeln!(w, "{}", csv_row(s)).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn read_observables_csv(path: impl AsRef<Path>) -> Result<Vec<ObservableSample>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io(path, e))?
        .unwrap_or_default();
    if header != CSV_HEADER {
        return Err(Error::Config(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("{}: row {}: {e}", path.display(), i + 1)))?;
        if v.len() != 10 {
            return Err(Error::Config(format!(
                "{}: row {} has {} columns",
                path.display(),
                i + 1,
                v.len()
            )));
        }
        out.push(ObservableSample {
            t: v[0],
            mass: v[1],
            e_kin: v[2],
            e_pot: v[3],
            e_total: v[4],
            h1: v[5],
            hsc: v[6],
            l2_local: v[7],
            linf_local: v[8],
            morawetz: v[9],
        });
    }
    Ok(out)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------- checkpoints

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CheckpointMeta {
    grid: Grid,
    params: PhysParams,
    t: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub state: State,
    pub params: PhysParams,
}

pub fn save_checkpoint(state: &State, params: &PhysParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let meta = serde_json::to_vec(&CheckpointMeta {
        grid: *state.grid(),
        params: *params,
        t: state.t(),
    })?;
    let mut bytes = Vec::with_capacity(12 + meta.len() + 16 * state.values().len());
    bytes.extend_from_slice(&CHECKPOINT_MAGIC);
    bytes.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(meta.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&meta);
    for v in state.values() {
        bytes.extend_from_slice(&v.re.to_le_bytes());
        bytes.extend_from_slice(&v.im.to_le_bytes());
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let name = path.display();
    if bytes.len() < 4 {
        return Err(Error::CheckpointTruncated(format!("{name}: {} bytes", bytes.len())));
    }
    if bytes[..4] != CHECKPOINT_MAGIC {
        return Err(Error::CheckpointVersion(format!("{name}: bad magic {:?}", &bytes[..4])));
    }
    if bytes.len() < 12 {
        return Err(Error::CheckpointTruncated(format!("{name}: header cut at {} bytes", bytes.len())));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != CHECKPOINT_VERSION {
        return Err(Error::CheckpointVersion(format!(
            "{name}: version {version}, expected {CHECKPOINT_VERSION}"
        )));
    }
    let meta_len = word(8) as usize;
    let body = 12 + meta_len;
    if bytes.len() < body {
        return Err(Error::CheckpointTruncated(format!("{name}: metadata cut short")));
    }
    let meta: CheckpointMeta = serde_json::from_slice(&bytes[12..body])
        .map_err(|e| Error::CheckpointInconsistent(format!("{name}: metadata: {e}")))?;
    let nodes = meta.grid.len();
    let expected = body + 16 * nodes;
    if bytes.len() < expected {
        return Err(Error::CheckpointTruncated(format!(
            "{name}: {} value bytes, grid needs {}",
            bytes.len() - body,
            16 * nodes
        )));
    }
    if bytes.len() > expected {
        return Err(Error::CheckpointInconsistent(format!(
            "{name}: {} trailing bytes after {nodes} values",
            bytes.len() - expected
        )));
    }
    let f = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8 bytes"));
    let values: Vec<Complex64> = (0..nodes)
        .map(|j| Complex64::new(f(body + 16 * j), f(body + 16 * j + 8)))
        .collect();
    let state = State::new(meta.grid, meta.t, values)
        .map_err(|e| Error::CheckpointInconsistent(format!("{name}: {e}")))?;
    Ok(Checkpoint {
        state,
        params: meta.params,
    })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<State> {
    read_checkpoint(path).map(|c| c.state)
}

/// Loads a checkpoint and requires it to live on `grid`.
pub fn load_checkpoint_for(path: impl AsRef<Path>, grid: &Grid) -> Result<State> {
    let path = path.as_ref();
    let state = load_checkpoint(path)?;
    if state.grid() != grid {
        return Err(Error::CheckpointInconsistent(format!(
            "{}: checkpoint grid L = {}, N = {} but config has L = {}, N = {}",
            path.display(),
            state.grid().length(),
            state.grid().modes(),
            grid.length(),
            grid.modes()
        )));
    }
    Ok(state)
}

fn checkpoint_name(t: f64) -> String {
    format!("checkpoint_t{t:015.6}.inls")
}

// ---------------------------------------------------------------- reports

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvolveReport {
    pub grid: Grid,
    pub params: PhysParams,
    pub schedule: Schedule,
    pub coupling: Coupling,
    pub initial: InitialSpec,
    pub samples: usize,
    pub t_final: f64,
    /// `max |M(t) - M(0)| / M(0)` over samples.
    pub mass_drift: f64,
    /// `max |E(t) - E(0)| / |E(0)|` over samples.
    pub energy_drift: f64,
    pub morawetz_bound: bool,
    pub final_sample: ObservableSample,
    pub flags: RunFlags,
    pub checkpoints: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnergyDrift {
    pub dt: f64,
    pub energy_drift: f64,
    pub mass_drift: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub t_final: f64,
    pub estimate: OrderEstimate,
    pub drifts: Vec<EnergyDrift>,
    /// Ratio of consecutive energy drifts.
    pub halving_factors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HardyExponentSummary {
    pub p: f64,
    pub sharp_constant: f64,
    pub max_ratio: f64,
    pub violations: usize,
    /// `u = r e^{-r}`.
    pub analytic: HardyReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HardyCase {
    pub initial: InitialSpec,
    pub reports: Vec<HardyReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HardySuiteReport {
    pub seed: u64,
    pub grid: Grid,
    pub samples: usize,
    pub exponents: Vec<HardyExponentSummary>,
    pub passed: bool,
    pub cases: Vec<HardyCase>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterReport {
    pub grid: Grid,
    pub params: PhysParams,
    pub schedule: Schedule,
    pub coupling: Coupling,
    pub scattering: ScatteringReport,
    pub small_data: Option<SmallDataReport>,
    pub wave_operator: Option<WaveOperatorReport>,
    pub flags: RunFlags,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub alpha: f64,
    pub b: f64,
    pub dir: PathBuf,
    pub ok: bool,
    pub error: Option<serde_json::Value>,
    pub mass_drift: Option<f64>,
    pub energy_drift: Option<f64>,
    pub verdict: Option<crate::analysis::Verdict>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSummary {
    pub experiment: Command,
    pub runs: Vec<SweepEntry>,
    pub failures: usize,
}

/// What a driver left on disk.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub command: Command,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// Failed sub-runs of a sweep.
    pub failures: usize,
}

// ---------------------------------------------------------------- drivers

/// Runs `command` with `config` after applying `options`.
pub fn run_experiment(command: Command, mut config: RunConfig, options: &RunOptions) -> Result<RunSummary> {
    config.apply(options);
    config.validate()?;
    match command {
        Command::Evolve => run_evolve(&config).map(|(s, _)| s),
        Command::Convergence => run_convergence(&config),
        Command::Hardy => run_hardy(&config),
        Command::Scatter => run_scatter(&config).map(|(s, _)| s),
        Command::Sweep => run_sweep(&config, options.workers),
    }
}

fn max_drift(samples: &[ObservableSample], f: impl Fn(&ObservableSample) -> f64) -> f64 {
    let Some(first) = samples.first() else { return 0.0 };
    let f0 = f(first);
    let scale = if f0 == 0.0 { 1.0 } else { f0.abs() };
    samples.iter().map(|s| (f(s) - f0).abs() / scale).fold(0.0, f64::max)
}

fn keep_last_good(err: Error, config: &RunConfig, out: &Path) -> Error {
    if let Error::NumericalFault { last_good, .. } = &err {
        // best effort; the fault is what gets reported
        let _ = save_checkpoint(last_good, &config.params, out.join(LAST_GOOD_FILE));
    }
    err
}

pub fn run_evolve(config: &RunConfig) -> Result<(RunSummary, EvolveReport)> {
    let out = config.out_dir()?;
    let u0 = sample_initial(&config.initial, &config.grid)?;
    let mut checkpoints = Vec::new();
    let traj = config
        .flow()
        .evolve_with(&u0, &config.time, &[Observer::Observables(config.local)], |s| {
            let name = checkpoint_name(s.t());
            save_checkpoint(s, &config.params, out.join(&name))?;
            checkpoints.push(name);
            Ok(())
        })
        .map_err(|e| keep_last_good(e, config, &out))?;

    let obs = traj.observables();
    let csv = out.join(OBSERVABLES_FILE);
    write_observables_csv(&csv, &obs)?;
    let report = EvolveReport {
        grid: config.grid,
        params: config.params,
        schedule: config.time,
        coupling: config.coupling,
        initial: config.initial.clone(),
        samples: obs.len(),
        t_final: obs.last().map_or(0.0, |s| s.t),
        mass_drift: max_drift(&obs, |s| s.mass),
        energy_drift: max_drift(&obs, |s| s.e_total),
        morawetz_bound: obs.iter().all(morawetz_bound_holds),
        final_sample: *obs.last().expect("initial sample"),
        flags: traj.flags().clone(),
        checkpoints: checkpoints.clone(),
    };
    let json = out.join(REPORT_FILE);
    write_json(&json, &report)?;
    let mut files = vec![csv, json];
    files.extend(checkpoints.iter().map(|c| out.join(c)));
    Ok((
        RunSummary {
            command: Command::Evolve,
            out_dir: out,
            files,
            failures: 0,
        },
        report,
    ))
}

pub fn run_convergence(config: &RunConfig) -> Result<RunSummary> {
    let block = config
        .convergence
        .as_ref()
        .ok_or_else(|| Error::Config("convergence needs a \"convergence\" block".into()))?;
    let out = config.out_dir()?;
    let u0 = sample_initial(&config.initial, &config.grid)?;
    let flow = config.flow();
    let estimate = flow.convergence_order(&u0, block.t_final, &block.dt_list)?;

    // sample drifts at the configured output interval
    let interval = config.time.dt * config.time.output_every as f64;
    let runs: Vec<(Trajectory, f64)> = block
        .dt_list
        .par_iter()
        .map(|&dt| {
            let every = if interval > 0.0 { ((interval / dt).round() as usize).max(1) } else { 0 };
            let schedule = Schedule::new(dt, block.t_final, every)?;
            let traj = flow.evolve(&u0, &schedule, &[Observer::Observables(config.local)])?;
            Ok((traj, dt))
        })
        .collect::<Result<_>>()?;

    let drifts: Vec<EnergyDrift> = runs
        .iter()
        .map(|(traj, dt)| {
            let obs = traj.observables();
            EnergyDrift {
                dt: *dt,
                energy_drift: max_drift(&obs, |s| s.e_total),
                mass_drift: max_drift(&obs, |s| s.mass),
            }
        })
        .collect();
    let halving_factors = drifts.windows(2).map(|w| w[0].energy_drift / w[1].energy_drift).collect();

    let csv = out.join(OBSERVABLES_FILE);
    let finest = &runs.last().expect("at least three step sizes").0;
    write_observables_csv(&csv, &finest.observables())?;
    let json = out.join(REPORT_FILE);
    write_json(
        &json,
        &ConvergenceReport {
            t_final: block.t_final,
            estimate,
            drifts,
            halving_factors,
        },
    )?;
    Ok(RunSummary {
        command: Command::Convergence,
        out_dir: out,
        files: vec![csv, json],
        failures: 0,
    })
}

pub fn hardy_suite(config: &RunConfig) -> Result<HardySuiteReport> {
    let block = config.hardy.clone().unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let specs: Vec<InitialSpec> = (0..block.samples).map(|_| block.draw(&mut rng)).collect();
    let cases: Vec<HardyCase> = specs
        .into_par_iter()
        .map(|initial| {
            let u = sample_initial(&initial, &config.grid)?;
            let reports = block.p.iter().map(|&p| hardy_ratio(&u, p)).collect::<Result<_>>()?;
            Ok(HardyCase { initial, reports })
        })
        .collect::<Result<_>>()?;

    let exponents = block
        .p
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let column = cases.iter().map(|c| &c.reports[i]);
            Ok(HardyExponentSummary {
                p,
                sharp_constant: hardy_constant(p),
                max_ratio: column.clone().map(|r| r.ratio).fold(0.0, f64::max),
                violations: column.filter(|r| !r.holds()).count(),
                analytic: hardy_ratio_analytic(|r| r * (-r).exp(), |r| (1.0 - r) * (-r).exp(), p)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let passed = exponents.iter().all(|e| e.violations == 0);
    Ok(HardySuiteReport {
        seed: config.seed,
        grid: config.grid,
        samples: block.samples,
        exponents,
        passed,
        cases,
    })
}

pub fn run_hardy(config: &RunConfig) -> Result<RunSummary> {
    let out = config.out_dir()?;
    let report = hardy_suite(config)?;
    let json = out.join(REPORT_FILE);
    write_json(&json, &report)?;
    Ok(RunSummary {
        command: Command::Hardy,
        out_dir: out,
        files: vec![json],
        failures: 0,
    })
}

pub fn run_scatter(config: &RunConfig) -> Result<(RunSummary, ScatterReport)> {
    let block = config
        .scatter
        .as_ref()
        .ok_or_else(|| Error::Config("scatter needs a \"scatter\" block".into()))?;
    let out = config.out_dir()?;
    let u0 = sample_initial(&config.initial, &config.grid)?;
    let flow = config.flow();
    let dt = config.time.dt;

    let window_steps: Vec<usize> = block
        .window
        .iter()
        .map(|&t| steps_exact(dt, t))
        .collect::<Result<_>>()?;
    let user_every = config.time.checkpoint_every;
    let stride = window_steps
        .iter()
        .copied()
        .chain((user_every > 0).then_some(user_every))
        .filter(|&s| s > 0)
        .fold(0, gcd);
    let schedule = Schedule {
        checkpoint_every: stride,
        ..config.time
    };

    let mut observers = vec![Observer::Observables(config.local)];
    if !block.pairs.is_empty() {
        observers.push(Observer::States);
    }
    let mut window_states: Vec<Sample> = Vec::new();
    if window_steps[0] == 0 {
        window_states.push(Sample {
            t: u0.t(),
            observables: None,
            state: Some(u0.clone()),
        });
    }
    let mut checkpoints = Vec::new();
    let traj = flow
        .evolve_with(&u0, &schedule, &observers, |s| {
            let step = ((s.t() - u0.t()) / dt).round() as usize;
            if window_steps.contains(&step) {
                window_states.push(Sample {
                    t: s.t(),
                    observables: None,
                    state: Some(s.clone()),
                });
            }
            if user_every > 0 && step % user_every == 0 {
                let name = checkpoint_name(s.t());
                save_checkpoint(s, &config.params, out.join(&name))?;
                checkpoints.push(out.join(name));
            }
            Ok(())
        })
        .map_err(|e| keep_last_good(e, config, &out))?;

    let window_traj = Trajectory::from_samples(config.grid, config.params, config.time, config.coupling, window_states)?;
    let scattering = scattering_report(&window_traj, &block.window, block.tol)?;

    let small_data = if block.pairs.is_empty() {
        None
    } else {
        let pairs: Vec<AdmissiblePair> = admissible_pairs(config.params.s_c(), &block.pairs)?;
        Some(small_data_certificate(&u0, &traj, &pairs)?)
    };
    let wave_operator = block
        .wave_operator
        .map(|t_back| wave_operator_roundtrip_with(&flow, &u0, t_back, &config.time))
        .transpose()?;

    let csv = out.join(OBSERVABLES_FILE);
    write_observables_csv(&csv, &traj.observables())?;
    let mut files = vec![csv];
    if let Some(u_plus) = &scattering.u_plus {
        let path = out.join("u_plus.inls");
        save_checkpoint(u_plus, &config.params, &path)?;
        files.push(path);
    }
    let report = ScatterReport {
        grid: config.grid,
        params: config.params,
        schedule: config.time,
        coupling: config.coupling,
        scattering,
        small_data,
        wave_operator,
        flags: traj.flags().clone(),
    };
    let json = out.join(REPORT_FILE);
    write_json(&json, &report)?;
    files.push(json);
    files.extend(checkpoints);
    Ok((
        RunSummary {
            command: Command::Scatter,
            out_dir: out,
            files,
            failures: 0,
        },
        report,
    ))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Name of the run directory of one sweep point.
pub fn sweep_dir_name(alpha: f64, b: f64) -> String {
    format!("alpha_{alpha}_b_{b}")
}

pub fn run_sweep(config: &RunConfig, workers: Option<usize>) -> Result<RunSummary> {
    let block = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Config("sweep needs a \"sweep\" block".into()))?;
    let out = config.out_dir()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::Config("--workers must be positive".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;

    let points = block.points();
    let runs: Vec<SweepEntry> = pool.install(|| {
        points
            .par_iter()
            .map(|&(alpha, b)| sweep_point(config, block.experiment, alpha, b, &out))
            .collect()
    });
    let failures = runs.iter().filter(|r| !r.ok).count();
    let summary = SweepSummary {
        experiment: block.experiment,
        runs,
        failures,
    };
    let json = out.join(SUMMARY_FILE);
    write_json(&json, &summary)?;
    Ok(RunSummary {
        command: Command::Sweep,
        out_dir: out,
        files: vec![json],
        failures,
    })
}

fn sweep_point(base: &RunConfig, experiment: Command, alpha: f64, b: f64, out: &Path) -> SweepEntry {
    let dir = out.join(sweep_dir_name(alpha, b));
    let mut entry = SweepEntry {
        alpha,
        b,
        dir: dir.clone(),
        ok: false,
        error: None,
        mass_drift: None,
        energy_drift: None,
        verdict: None,
    };
    let result = make_params(alpha, b).and_then(|params| {
        let config = RunConfig {
            params,
            out: Some(dir.clone()),
            sweep: None,
            ..base.clone()
        };
        match experiment {
            Command::Scatter => run_scatter(&config).map(|(_, r)| {
                entry.verdict = Some(r.scattering.verdict);
            }),
            _ => run_evolve(&config).map(|(_, r)| {
                entry.mass_drift = Some(r.mass_drift);
                entry.energy_drift = Some(r.energy_drift);
            }),
        }
    });
    match result {
        Ok(()) => entry.ok = true,
        Err(e) => {
            let body = error_report(&e, Some(&dir));
            if fs::create_dir_all(&dir).is_ok() {
                let _ = write_json(&dir.join(ERROR_FILE), &body);
            }
            entry.error = Some(body);
        }
    }
    entry
}

// ---------------------------------------------------------------- failures

/// 3 for faults raised while the flow was running, 2 for everything else.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_runtime_fault() {
        EXIT_RUNTIME
    } else {
        EXIT_CONFIG
    }
}

/// Machine-readable description of a failure. `out` is searched for a
/// retained last-good checkpoint.
pub fn error_report(err: &Error, out: Option<&Path>) -> serde_json::Value {
    let mut body = serde_json::json!({
        "error": err.kind(),
        "message": err.to_string(),
        "exit_code": exit_code(err),
    });
    if let Error::NumericalFault { step, last_good_t, .. } = err {
        body["step"] = (*step).into();
        body["last_good_t"] = (*last_good_t).into();
    }
    if let Error::WallReflection { t, .. } = err {
        body["t"] = (*t).into();
    }
    if let Some(path) = out.map(|d| d.join(LAST_GOOD_FILE)).filter(|p| p.exists()) {
        body["last_good_checkpoint"] = path.display().to_string().into();
    }
    body
}

/// Writes [`error_report`] to `out/error.json` when `out` exists.
pub fn write_error_report(err: &Error, out: Option<&Path>) -> serde_json::Value {
    let body = error_report(err, out);
    if let Some(dir) = out.filter(|d| d.is_dir()) {
        let _ = write_json(&dir.join(ERROR_FILE), &body);
    }
    body
}
