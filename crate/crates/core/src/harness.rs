//! Trajectory ensembles, parameter sweeps and CSV persistence.
//!
//! Trajectory `i` of a point always uses random stream `i` of the point's
//! seed and results are gathered in trajectory order, so every output file
//! is independent of the worker count.

use std::fmt;
use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::observables::ensemble_stats;
use crate::protocol::{
    trajectory_rng, LayerMode, Observers, Protocol, ProtocolConfig, RecoveryMenu, Sample, TrajectoryRecord,
};
use crate::tableau::StabilizerTableau;
use crate::VERSION_TAG;

/// Number of trailing sample times averaged for late-time values.
pub const DEFAULT_WINDOW: usize = 9;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    ChiZ,
    ChiX,
    GammaKp,
    GammaLw,
}

impl Observable {
    pub const ALL: [Observable; 4] = [Observable::ChiZ, Observable::ChiX, Observable::GammaKp, Observable::GammaLw];

    pub fn name(self) -> &'static str {
        match self {
            Observable::ChiZ => "chi_sg_z",
            Observable::ChiX => "chi_sg_x",
            Observable::GammaKp => "gamma_kp",
            Observable::GammaLw => "gamma_lw",
        }
    }

    pub fn value(self, sample: &Sample, width: usize) -> Option<f64> {
        match self {
            Observable::ChiZ => sample.chi_z(width),
            Observable::ChiX => sample.chi_x(width),
            Observable::GammaKp => sample.gamma_kp.map(|g| g as f64),
            Observable::GammaLw => sample.gamma_lw.map(|g| g as f64),
        }
    }
}

/// Late-time summary of one observable over the trailing window.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct LateTime {
    /// Ensemble mean of the per-trajectory window averages.
    pub mean: f64,
    /// Standard error of `mean`, treating trajectories as independent.
    pub std_error: f64,
    /// Across-trajectory variance at each window time, averaged over the window.
    pub fluctuation: f64,
    /// `sqrt(fluctuation) / L_x`.
    pub sigma_per_width: f64,
}

/// All trajectories of one parameter point.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub config: ProtocolConfig,
    pub records: Vec<TrajectoryRecord>,
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(Error::InvalidArgument("worker count must be positive".into()));
        }
        builder = builder.num_threads(w);
    }
    builder.build().map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))
}

/// Run `samples` trajectories of `config` with the standard observers.
pub fn run_ensemble(config: &ProtocolConfig, samples: u64, workers: Option<usize>) -> Result<Ensemble> {
    let protocol = Protocol::new(config.clone())?;
    let observers = Observers::standard(protocol.geometry());
    run_ensemble_with(&protocol, &observers, samples, workers)
}

pub fn run_ensemble_with(
    protocol: &Protocol,
    observers: &Observers,
    samples: u64,
    workers: Option<usize>,
) -> Result<Ensemble> {
    if samples == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let records = pool(workers)?.install(|| {
        (0..samples).into_par_iter().map(|i| protocol.run_trajectory(i, observers)).collect::<Result<Vec<_>>>()
    })?;
    Ok(Ensemble { config: protocol.config().clone(), records })
}

impl Ensemble {
    pub fn samples(&self) -> usize {
        self.records.len()
    }

    pub fn times(&self) -> Vec<u64> {
        self.records.first().map(|r| r.samples.iter().map(|s| s.t).collect()).unwrap_or_default()
    }

    /// Values of `obs` across trajectories at the `k`-th sample time.
    pub fn values_at(&self, obs: Observable, k: usize) -> Option<Vec<f64>> {
        self.records.iter().map(|r| obs.value(r.samples.get(k)?, self.config.width)).collect()
    }

    /// `(mean, variance)` of `obs` at every sample time.
    pub fn series(&self, obs: Observable) -> Option<Vec<(f64, f64)>> {
        (0..self.times().len())
            .map(|k| {
                let v = self.values_at(obs, k)?;
                let s = ensemble_stats(&v, self.config.width).ok()?;
                Some((s.mean, s.variance))
            })
            .collect()
    }

    pub fn late_time(&self, obs: Observable, window: usize) -> Option<LateTime> {
        let nt = self.times().len();
        if window == 0 || window > nt {
            return None;
        }
        let width = self.config.width;
        let per_traj: Vec<f64> = self
            .records
            .iter()
            .map(|r| {
                let vals: Option<Vec<f64>> = r.samples[nt - window..].iter().map(|s| obs.value(s, width)).collect();
                vals.map(|v| v.iter().sum::<f64>() / window as f64)
            })
            .collect::<Option<_>>()?;
        let stats = ensemble_stats(&per_traj, width).ok()?;
        let mut fluctuation = 0.0;
        for k in nt - window..nt {
            fluctuation += ensemble_stats(&self.values_at(obs, k)?, width).ok()?.variance;
        }
        fluctuation /= window as f64;
        Some(LateTime {
            mean: stats.mean,
            std_error: (stats.variance / per_traj.len() as f64).sqrt(),
            fluctuation,
            sigma_per_width: fluctuation.sqrt() / width as f64,
        })
    }

    /// First sample time at which the ensemble mean of `obs` satisfies `pred`.
    pub fn first_time(&self, obs: Observable, pred: impl Fn(f64) -> bool) -> Option<u64> {
        let series = self.series(obs)?;
        self.times().into_iter().zip(series).find(|(_, (m, _))| pred(*m)).map(|(t, _)| t)
    }

    /// Write `raw.csv`, `aggregate.csv` and `late_time.csv` into `dir`.
    pub fn write_csv(&self, dir: &Path, window: usize) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
        let echo = config_fields(&self.config);

        let mut out = CsvOut::create(&dir.join("raw.csv"))?;
        out.header(&[
            "trajectory",
            "t",
            "measurements",
            "random_outcomes",
            "chi_z_pairs",
            "chi_x_pairs",
            "gamma_kp",
            "gamma_lw",
        ])?;
        for r in &self.records {
            for s in &r.samples {
                out.row(
                    &echo,
                    [
                        r.trajectory.to_string(),
                        s.t.to_string(),
                        s.measurements.to_string(),
                        s.random_outcomes.to_string(),
                        opt(s.chi_z_pairs),
                        opt(s.chi_x_pairs),
                        opt(s.gamma_kp),
                        opt(s.gamma_lw),
                    ],
                )?;
            }
        }
        out.finish()?;

        let mut out = CsvOut::create(&dir.join("aggregate.csv"))?;
        let mut cols = vec!["t".to_string(), "samples".to_string()];
        for o in Observable::ALL {
            cols.push(format!("{}_mean", o.name()));
            cols.push(format!("{}_var", o.name()));
        }
        out.header(&cols.iter().map(String::as_str).collect::<Vec<_>>())?;
        let series: Vec<Option<Vec<(f64, f64)>>> = Observable::ALL.iter().map(|&o| self.series(o)).collect();
        for (k, t) in self.times().into_iter().enumerate() {
            let mut row = vec![t.to_string(), self.samples().to_string()];
            for s in &series {
                match s {
                    Some(s) => row.extend([s[k].0.to_string(), s[k].1.to_string()]),
                    None => row.extend([String::new(), String::new()]),
                }
            }
            out.row(&echo, row)?;
        }
        out.finish()?;

        let mut out = CsvOut::create(&dir.join("late_time.csv"))?;
        out.header(&["samples", "window", "observable", "mean", "std_error", "fluctuation", "sigma_per_width"])?;
        for o in Observable::ALL {
            if let Some(l) = self.late_time(o, window) {
                out.row(
                    &echo,
                    [
                        self.samples().to_string(),
                        window.to_string(),
                        o.name().to_string(),
                        l.mean.to_string(),
                        l.std_error.to_string(),
                        l.fluctuation.to_string(),
                        l.sigma_per_width.to_string(),
                    ],
                )?;
            }
        }
        out.finish()
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

const CONFIG_COLUMNS: [&str; 11] = [
    "version",
    "seed",
    "width",
    "height",
    "p_s",
    "p_x",
    "p_z",
    "duration",
    "measure_every",
    "layer_mode",
    "recovery_menu",
];

fn config_fields(c: &ProtocolConfig) -> Vec<String> {
    let mode = match c.layer_mode {
        LayerMode::SingleSite => "single-site",
        LayerMode::Sweep => "sweep",
    };
    let menu = match c.recovery_menu {
        RecoveryMenu::AllStars => "all-stars",
        RecoveryMenu::InteriorStars => "interior-stars",
    };
    vec![
        VERSION_TAG.to_string(),
        c.seed.to_string(),
        c.width.to_string(),
        c.height.to_string(),
        c.p_s.to_string(),
        c.p_x.to_string(),
        c.p_z.to_string(),
        c.duration.to_string(),
        c.measure_every.to_string(),
        mode.to_string(),
        menu.to_string(),
    ]
}

/// CSV writer that prefixes every row with the config echo and reports the file path on failure.
struct CsvOut {
    path: PathBuf,
    w: csv::Writer<File>,
}

impl CsvOut {
    fn create(path: &Path) -> Result<Self> {
        let w = csv::Writer::from_path(path).map_err(|e| Error::Csv { path: path.to_path_buf(), source: e })?;
        Ok(Self { path: path.to_path_buf(), w })
    }

    fn err(&self, e: csv::Error) -> Error {
        Error::Csv { path: self.path.clone(), source: e }
    }

    fn header(&mut self, cols: &[&str]) -> Result<()> {
        let all: Vec<&str> = CONFIG_COLUMNS.iter().copied().chain(cols.iter().copied()).collect();
        self.w.write_record(&all).map_err(|e| self.err(e))
    }

    fn row(&mut self, echo: &[String], fields: impl IntoIterator<Item = String>) -> Result<()> {
        let all: Vec<String> = echo.iter().cloned().chain(fields).collect();
        self.w.write_record(&all).map_err(|e| self.err(e))
    }

    fn finish(mut self) -> Result<()> {
        self.w.flush().map_err(|e| Error::Io { path: self.path.clone(), source: e })
    }
}

/// A rectangular grid of points sharing a horizon and cadence.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub widths: Vec<usize>,
    pub height: usize,
    pub p_s: Vec<f64>,
    pub p_x: Vec<f64>,
    /// Defaults to `1 - p_x`.
    #[serde(default)]
    pub p_z: Option<f64>,
    /// Horizon in units of `L` steps.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    /// Samples per `L` steps.
    #[serde(default = "default_cadence")]
    pub cadence: u64,
    /// Overrides the plan-wide sample count.
    #[serde(default)]
    pub samples: Option<u64>,
    #[serde(default)]
    pub layer_mode: LayerMode,
    #[serde(default)]
    pub recovery_menu: RecoveryMenu,
}

fn default_horizon() -> u64 {
    20
}

fn default_cadence() -> u64 {
    1
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

/// An explicitly configured point.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanPoint {
    pub config: ProtocolConfig,
    #[serde(default)]
    pub samples: Option<u64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub out_dir: PathBuf,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    pub samples: u64,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default)]
    pub grids: Vec<Grid>,
    #[serde(default)]
    pub points: Vec<PlanPoint>,
}

impl SweepPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        plan.expand()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io { path: path.to_path_buf(), source: e })?;
        Self::from_toml(&text)
    }

    /// Every point with its sample count, in file order. The plan seed is
    /// stamped into every config.
    pub fn expand(&self) -> Result<Vec<(ProtocolConfig, u64)>> {
        let mut out = Vec::new();
        for g in &self.grids {
            if g.cadence == 0 || g.horizon == 0 {
                return Err(Error::InvalidConfig("grid horizon and cadence must be positive".into()));
            }
            for &w in &g.widths {
                for &p_s in &g.p_s {
                    for &p_x in &g.p_x {
                        let mut c = ProtocolConfig::new(w, g.height, p_s, p_x);
                        let l = c.num_qubits() as u64;
                        c.p_z = g.p_z.unwrap_or(1.0 - p_x);
                        c.duration = g.horizon * l;
                        c.measure_every = (l / g.cadence).max(1);
                        c.layer_mode = g.layer_mode;
                        c.recovery_menu = g.recovery_menu;
                        out.push((c, g.samples.unwrap_or(self.samples)));
                    }
                }
            }
        }
        for p in &self.points {
            out.push((p.config.clone(), p.samples.unwrap_or(self.samples)));
        }
        for (c, n) in &mut out {
            c.seed = self.seed;
            c.validate()?;
            if *n == 0 {
                return Err(Error::InvalidConfig("sample count must be at least 1".into()));
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidConfig("sweep plan has no points".into()));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("late-time window must be positive".into()));
        }
        Ok(out)
    }
}

/// Directory name for one point.
pub fn point_label(c: &ProtocolConfig) -> String {
    let mode = match c.layer_mode {
        LayerMode::SingleSite => "",
        LayerMode::Sweep => "_sweep",
    };
    format!("lx{}_ly{}_ps{:.3}_px{:.3}_pz{:.3}_t{}{}", c.width, c.height, c.p_s, c.p_x, c.p_z, c.duration, mode)
}

#[derive(Clone, Debug)]
pub struct PointSummary {
    pub config: ProtocolConfig,
    pub samples: u64,
    pub late: Vec<(Observable, LateTime)>,
}

impl PointSummary {
    pub fn get(&self, obs: Observable) -> Option<LateTime> {
        self.late.iter().find(|(o, _)| *o == obs).map(|(_, l)| *l)
    }
}

/// Run every point of `plan`, writing one directory per point and a
/// `summary.csv` of late-time values. `progress` is called after each point.
pub fn run_plan(plan: &SweepPlan, mut progress: impl FnMut(&PointSummary)) -> Result<Vec<PointSummary>> {
    let points = plan.expand()?;
    fs::create_dir_all(&plan.out_dir).map_err(|e| Error::Io { path: plan.out_dir.clone(), source: e })?;
    let mut summaries = Vec::with_capacity(points.len());
    for (config, samples) in points {
        let ens = run_ensemble(&config, samples, plan.workers)?;
        ens.write_csv(&plan.out_dir.join(point_label(&config)), plan.window)?;
        let late = Observable::ALL.iter().filter_map(|&o| Some((o, ens.late_time(o, plan.window)?))).collect();
        let s = PointSummary { config, samples, late };
        progress(&s);
        summaries.push(s);
    }
    let path = plan.out_dir.join("summary.csv");
    let mut out = CsvOut::create(&path)?;
    out.header(&["samples", "window", "observable", "mean", "std_error", "fluctuation", "sigma_per_width"])?;
    for s in &summaries {
        let echo = config_fields(&s.config);
        for (o, l) in &s.late {
            out.row(
                &echo,
                [
                    s.samples.to_string(),
                    plan.window.to_string(),
                    o.name().to_string(),
                    l.mean.to_string(),
                    l.std_error.to_string(),
                    l.fluctuation.to_string(),
                    l.sigma_per_width.to_string(),
                ],
            )?;
        }
    }
    out.finish()?;
    Ok(summaries)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Figure {
    Fig3,
    Fig5,
    Fig6,
    Fig7,
    Fig9,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(Figure::Fig3),
            "fig5" => Ok(Figure::Fig5),
            "fig6" => Ok(Figure::Fig6),
            "fig7" => Ok(Figure::Fig7),
            "fig9" => Ok(Figure::Fig9),
            other => Err(Error::InvalidArgument(format!(
                "unknown figure {other:?} (expected fig3, fig5, fig6, fig7 or fig9)"
            ))),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Figure::Fig3 => "fig3",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
            Figure::Fig9 => "fig9",
        };
        f.write_str(s)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    Desk,
    Paper,
}

/// The `p_s` grid of the bulk-transition sweep.
pub const TRANSITION_PS: [f64; 7] = [0.5, 0.6, 0.65, 0.7, 0.75, 0.8, 0.9];
/// Points of the bulk sweep that need the longer `30·L` horizon.
pub const SLOW_PS: [f64; 2] = [0.65, 0.7];
/// The `p_x` grid of the boundary-crossover sweep.
pub const CROSSOVER_PX: [f64; 7] = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];

fn grid(widths: &[usize], samples: u64, p_s: &[f64], p_x: &[f64], horizon: u64, cadence: u64) -> Grid {
    Grid {
        widths: widths.to_vec(),
        height: 10,
        p_s: p_s.to_vec(),
        p_x: p_x.to_vec(),
        p_z: None,
        horizon,
        cadence,
        samples: Some(samples),
        layer_mode: LayerMode::SingleSite,
        recovery_menu: RecoveryMenu::AllStars,
    }
}

/// The sweep behind `figure`, at `scale`, writing under `out_dir`.
pub fn figure_plan(figure: Figure, scale: Scale, out_dir: PathBuf, seed: u64, workers: Option<usize>) -> SweepPlan {
    // (widths, samples) groups per scale
    let sizes: Vec<(Vec<usize>, u64)> = match (scale, figure) {
        (Scale::Desk, _) => vec![(vec![10, 14], 200)],
        (Scale::Paper, Figure::Fig3) => vec![(vec![14, 18], 2000), (vec![22], 1000)],
        (Scale::Paper, Figure::Fig5 | Figure::Fig6) => vec![(vec![14, 18], 2000), (vec![22, 26], 1000)],
        (Scale::Paper, Figure::Fig7) => vec![(vec![14, 18], 1000)],
        (Scale::Paper, Figure::Fig9) => vec![(vec![14, 18], 1000), (vec![22], 500)],
    };
    let mut grids = Vec::new();
    for (widths, samples) in sizes {
        match figure {
            Figure::Fig3 => grids.push(grid(&widths, samples, &[0.5], &CROSSOVER_PX, 20, 1)),
            Figure::Fig5 | Figure::Fig9 => {
                grids.push(grid(&widths, samples, &[0.5, 0.8], &[0.5], 20, 1));
                grids.push(grid(&widths, samples, &[0.65], &[0.5], 30, 1));
            }
            Figure::Fig6 => {
                let fast: Vec<f64> = TRANSITION_PS.iter().copied().filter(|p| !SLOW_PS.contains(p)).collect();
                grids.push(grid(&widths, samples, &fast, &[0.5], 20, 1));
                grids.push(grid(&widths, samples, &SLOW_PS, &[0.5], 30, 1));
            }
            Figure::Fig7 => grids.push(grid(&widths, samples, &[0.5], &[0.2], 20, 10)),
        }
    }
    SweepPlan { out_dir, workers, seed, samples: 1, window: DEFAULT_WINDOW, grids, points: Vec::new() }
}

pub fn figure_dataset(
    figure: Figure,
    scale: Scale,
    out_dir: PathBuf,
    seed: u64,
    workers: Option<usize>,
    progress: impl FnMut(&PointSummary),
) -> Result<Vec<PointSummary>> {
    run_plan(&figure_plan(figure, scale, out_dir, seed, workers), progress)
}

/// Timing of the dynamics against a full observed trajectory.
#[derive(Copy, Clone, Debug)]
pub struct BenchReport {
    pub qubits: usize,
    pub steps: u64,
    /// Mean wall time of one protocol step (one measurement) in seconds.
    pub per_measurement: f64,
    /// Wall time of one trajectory with the standard observers at the default cadence.
    pub trajectory: f64,
    /// `trajectory / (per_measurement · steps)`.
    pub overhead: f64,
}

/// Measure the per-step cost on a warmed-up state, then time a full observed trajectory.
pub fn bench(width: usize, height: usize, seed: u64) -> Result<BenchReport> {
    let mut config = ProtocolConfig::new(width, height, 0.65, 0.5);
    config.seed = seed;
    let protocol = Protocol::new(config.clone())?;
    let mut rng = trajectory_rng(seed, u64::MAX);
    let mut tableau = StabilizerTableau::initial_state(protocol.geometry())?;
    for _ in 0..config.duration {
        protocol.step(&mut tableau, &mut rng);
    }
    let reps = 4 * config.duration;
    let start = Instant::now();
    for _ in 0..reps {
        protocol.step(&mut tableau, &mut rng);
    }
    let per_measurement = start.elapsed().as_secs_f64() / reps as f64;

    let observers = Observers::standard(protocol.geometry());
    let start = Instant::now();
    protocol.run_trajectory(0, &observers)?;
    let trajectory = start.elapsed().as_secs_f64();
    Ok(BenchReport {
        qubits: config.num_qubits(),
        steps: config.duration,
        per_measurement,
        trajectory,
        overhead: trajectory / (per_measurement * config.duration as f64),
    })
}
