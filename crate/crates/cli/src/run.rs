use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use qsl_core::bounds::{a_dot_at, golden_section_max, max_speed, record_at, scan, GOLDEN_TOL};
use qsl_core::experiment::{run_virtual_experiment, SpeedEstimate};
use qsl_core::quantum::{make_state, Operator, StateSpec};
use qsl_core::spectral::{Evolution, SpectralModel};
use qsl_core::{BoundsRecord64, QslError};

use crate::config::{ConfigError, ScenarioConfig};
use crate::output::{experiment_csv, fmt_num, trajectory_csv, write_atomic};

/// Slack on both sides of the sandwich before a point counts as a violation.
pub const SANDWICH_TOL: f64 = 1e-9;
/// A scenario whose speed stays within this of the lower bound everywhere is reported as tight.
pub const TIGHTNESS_GAP: f64 = 0.1;
/// Width, in standard deviations, of the band an estimated speed may stray outside the bounds.
pub const EXPERIMENT_SIGMAS: f64 = 3.0;

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Numerical(QslError),
    Io(std::io::Error),
    Invariant(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Invariant(_) => 3,
            Self::Numerical(_) | Self::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(e) => write!(f, "config error: {e}"),
            Self::Numerical(e) => write!(f, "numerical error: {e}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
            Self::Invariant(msg) => write!(f, "invariant violated: {msg}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<QslError> for RunError {
    fn from(e: QslError) -> Self {
        Self::Numerical(e)
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectorySummary {
    pub scenario: String,
    pub state: String,
    pub n_photons: usize,
    pub source_kind: String,
    pub noise_length_lambda: Option<f64>,
    pub prep_infidelity: f64,
    pub grid_points: usize,
    pub max_speed: f64,
    pub l_star: f64,
    pub max_upper: f64,
    pub max_lower_gap: f64,
    pub lower_bound_tight: bool,
    pub sandwich_violations: usize,
    pub qfi_c_relative_spread: f64,
    pub reference_max_speed: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrajectoryRun {
    pub records: Vec<BoundsRecord64>,
    pub summary: TrajectorySummary,
}

fn max_by_grid(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn relative_spread(xs: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
        (lo.min(x), hi.max(x))
    });
    if hi > 0.0 {
        (hi - lo) / hi
    } else {
        0.0
    }
}

/// Bound records of `ev` on the scenario grid, with the summary statistics.
pub fn compute_trajectory(
    cfg: &ScenarioConfig,
    ev: &Evolution<f64>,
    a_obs: &Operator<f64>,
) -> Result<TrajectoryRun, QslError> {
    let records = scan(ev, a_obs, &cfg.l_grid())?;
    let (l_star, peak) = max_speed(&records, |l| a_dot_at(ev, a_obs, l).map(f64::abs))?;
    let max_lower_gap = records
        .iter()
        .map(|r| r.lower_gap())
        .fold(f64::NEG_INFINITY, f64::max);
    let summary = TrajectorySummary {
        scenario: cfg.name.clone(),
        state: cfg.state.to_string(),
        n_photons: ev.initial().n_qubits(),
        source_kind: cfg.source.kind.to_string(),
        noise_length_lambda: cfg.noise.as_ref().map(|n| n.length_lambda),
        prep_infidelity: ev.prep_infidelity(),
        grid_points: records.len(),
        max_speed: peak,
        l_star,
        max_upper: records
            .iter()
            .map(|r| r.upper)
            .fold(f64::NEG_INFINITY, f64::max),
        max_lower_gap,
        lower_bound_tight: max_lower_gap < TIGHTNESS_GAP,
        sandwich_violations: records
            .iter()
            .filter(|r| r.violates_sandwich(SANDWICH_TOL))
            .count(),
        qfi_c_relative_spread: relative_spread(records.iter().map(|r| r.qfi_c)),
        reference_max_speed: cfg.reference_max_speed,
    };
    Ok(TrajectoryRun { records, summary })
}

fn json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("summary serializes");
    s.push('\n');
    s
}

fn check_sandwich(summary: &TrajectorySummary) -> Result<(), RunError> {
    if summary.sandwich_violations > 0 {
        return Err(RunError::Invariant(format!(
            "{} grid points of `{}` break the speed sandwich",
            summary.sandwich_violations, summary.scenario
        )));
    }
    Ok(())
}

/// Writes `trajectory.csv` and `summary.json`; a sandwich breach is reported after writing.
pub fn run_trajectory(cfg: &ScenarioConfig, out_dir: &Path) -> Result<TrajectoryRun, RunError> {
    let ev = cfg.evolution()?;
    let a_obs = cfg.observable_operator().map_err(RunError::Invariant)?;
    let run = compute_trajectory(cfg, &ev, &a_obs)?;
    write_atomic(out_dir, "trajectory.csv", &trajectory_csv(&run.records))?;
    write_atomic(out_dir, "summary.json", &json(&run.summary))?;
    check_sandwich(&run.summary)?;
    Ok(run)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentStats {
    pub rate_hz: f64,
    pub integration_s: f64,
    pub delta_l: f64,
    pub resamples: usize,
    pub master_seed: u64,
    pub estimated_max_speed: f64,
    pub estimated_max_speed_std: f64,
    pub estimated_l_star: f64,
    /// Points whose estimated speed leaves `[lower − 3σ, upper + 3σ]`.
    pub bound_excursions: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    #[serde(flatten)]
    pub analytic: TrajectorySummary,
    pub experiment: ExperimentStats,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub trajectory: TrajectoryRun,
    pub estimates: Vec<SpeedEstimate>,
    pub summary: ExperimentSummary,
}

pub fn within_bounds(estimate: &SpeedEstimate, record: &BoundsRecord64) -> bool {
    let band = EXPERIMENT_SIGMAS * estimate.speed_std;
    estimate.speed_mean >= record.lower - band && estimate.speed_mean <= record.upper + band
}

pub fn compute_experiment(cfg: &ScenarioConfig) -> Result<ExperimentRun, RunError> {
    let exp = cfg.experiment.clone().ok_or_else(|| {
        RunError::Config(ConfigError {
            source: cfg.name.clone(),
            line: None,
            key: "experiment.enabled".into(),
            message: "the experiment subcommand needs `experiment.enabled = true`".into(),
        })
    })?;
    let ev = cfg.evolution()?.with_prep_infidelity(exp.prep_infidelity)?;
    let a_obs = cfg.observable_operator().map_err(RunError::Invariant)?;
    let trajectory = compute_trajectory(cfg, &ev, &a_obs)?;
    let estimates = run_virtual_experiment(&ev, &a_obs, &cfg.l_grid(), &exp, &cfg.name)?;
    let best = max_by_grid(&estimates.iter().map(|e| e.speed_mean).collect::<Vec<_>>());
    let bound_excursions = estimates
        .iter()
        .zip(&trajectory.records)
        .filter(|(e, r)| !within_bounds(e, r))
        .count();
    let summary = ExperimentSummary {
        analytic: trajectory.summary.clone(),
        experiment: ExperimentStats {
            rate_hz: exp.rate_hz,
            integration_s: exp.integration_s,
            delta_l: exp.delta_l,
            resamples: exp.resamples,
            master_seed: exp.master_seed,
            estimated_max_speed: estimates[best].speed_mean,
            estimated_max_speed_std: estimates[best].speed_std,
            estimated_l_star: estimates[best].l,
            bound_excursions,
        },
    };
    Ok(ExperimentRun {
        trajectory,
        estimates,
        summary,
    })
}

/// Writes `trajectory.csv`, `experiment.csv` and `summary.json`.
pub fn run_experiment(cfg: &ScenarioConfig, out_dir: &Path) -> Result<ExperimentRun, RunError> {
    let run = compute_experiment(cfg)?;
    write_atomic(
        out_dir,
        "trajectory.csv",
        &trajectory_csv(&run.trajectory.records),
    )?;
    write_atomic(out_dir, "experiment.csv", &experiment_csv(&run.estimates))?;
    write_atomic(out_dir, "summary.json", &json(&run.summary))?;
    check_sandwich(&run.summary.analytic)?;
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Product,
    Ghz,
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "product" => Ok(Self::Product),
            "ghz" => Ok(Self::Ghz),
            other => Err(format!(
                "unknown sweep kind `{other}` (expected product or ghz)"
            )),
        }
    }
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Product => "product",
            Self::Ghz => "ghz",
        })
    }
}

impl SweepKind {
    pub fn state(self, n: usize) -> StateSpec {
        match self {
            Self::Product => StateSpec::PlusN(n),
            Self::Ghz => StateSpec::Ghz(n),
        }
    }

    /// `√N·π` for product states, `N·π` for GHZ states.
    pub fn ideal_bound(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Self::Product => n.sqrt() * std::f64::consts::PI,
            Self::Ghz => n * std::f64::consts::PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub max_upper_bound: f64,
    pub upper_l_star: f64,
    pub ideal_bound: f64,
    pub max_speed: f64,
    pub speed_l_star: f64,
}

pub const SWEEP_MAX_N: usize = 8;
const SWEEP_GRID: usize = 41;

/// Largest pure-state upper bound and largest speed over `l ∈ [0, 1]`, monochromatic light.
pub fn sweep_row(kind: SweepKind, n: usize) -> Result<SweepRow, QslError> {
    let ket = make_state::<f64>(&kind.state(n))?;
    let a_obs = ket.to_projector_operator();
    let ev = Evolution::new(ket, SpectralModel::monochromatic(n)?)?;
    let grid: Vec<f64> = (0..SWEEP_GRID)
        .map(|i| i as f64 / (SWEEP_GRID - 1) as f64)
        .collect();
    let records = scan(&ev, &a_obs, &grid)?;
    let (speed_l_star, max_speed_value) =
        max_speed(&records, |l| a_dot_at(&ev, &a_obs, l).map(f64::abs))?;

    let bound_at = |l: f64| -> Result<f64, QslError> {
        Ok(record_at(&ev, &a_obs, l)?.pure_upper.unwrap_or(f64::NAN))
    };
    let on_grid: Vec<f64> = records
        .iter()
        .map(|r| r.pure_upper.unwrap_or(f64::NAN))
        .collect();
    let best = max_by_grid(&on_grid);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    let (upper_l_star, max_upper_bound) = golden_section_max(bound_at, lo, hi, GOLDEN_TOL)?;

    Ok(SweepRow {
        n,
        max_upper_bound,
        upper_l_star,
        ideal_bound: kind.ideal_bound(n),
        max_speed: max_speed_value,
        speed_l_star,
    })
}

pub fn sweep_n(kind: SweepKind, n_max: usize) -> Result<Vec<SweepRow>, QslError> {
    if n_max == 0 || n_max > SWEEP_MAX_N {
        return Err(QslError::InvalidConfig(format!(
            "n_max must lie in 1..={SWEEP_MAX_N}, got {n_max}"
        )));
    }
    (1..=n_max).map(|n| sweep_row(kind, n)).collect()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out =
        String::from("n,max_upper_bound,upper_l_star,ideal_bound,max_speed,speed_l_star\n");
    for r in rows {
        let nums = [
            r.max_upper_bound,
            r.upper_l_star,
            r.ideal_bound,
            r.max_speed,
            r.speed_l_star,
        ]
        .map(fmt_num);
        out.push_str(&format!("{},{}\n", r.n, nums.join(",")));
    }
    out
}

/// Writes `sweep_<kind>.csv` into `out_dir`.
pub fn run_sweep(
    kind: SweepKind,
    n_max: usize,
    out_dir: &Path,
) -> Result<(Vec<SweepRow>, PathBuf), RunError> {
    let rows = sweep_n(kind, n_max).map_err(|e| match e {
        QslError::InvalidConfig(message) => RunError::Config(ConfigError {
            source: "sweep-n".into(),
            line: None,
            key: "--n-max".into(),
            message,
        }),
        other => RunError::Numerical(other),
    })?;
    let path = write_atomic(out_dir, &format!("sweep_{kind}.csv"), &sweep_csv(&rows))?;
    Ok((rows, path))
}
