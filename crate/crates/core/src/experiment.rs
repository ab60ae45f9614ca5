//! Benchmark protocols: synthetic request sweeps, closed-loop runs, and
//! solver timing, with their CSV and JSON reports.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::error::{config_err, Result};
use crate::kinematics::{Gait, KinematicSpace, MotorLimits, DEFAULT_SAMPLES_PER_CYCLE, SETPOINTS_PER_CYCLE};
use crate::loss::LossWeights;
use crate::model::{
    load_weight_file, DnnModel, DnnWeights, ForwardModel, LoadedWeights, LstmModel, LstmWeights, SyntheticSurrogate,
};
use crate::search::{mix_seed, propose_gait, InverseRequest, Method, SearchConfig};
use crate::simulation::{
    generate_synthetic_requests, generate_targets, run_closed_loop, ClosedLoopConfig, PidConfig, PlantState, Trajectory,
};

/// Which forward model a run uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSource {
    Synthetic,
    LstmFile {
        path: PathBuf,
    },
    DnnFile {
        path: PathBuf,
    },
    /// Seeded random LSTM weights, for timing the sequence-model path.
    LstmRandom {
        seed: u64,
        hidden_dim: usize,
    },
    DnnRandom {
        seed: u64,
        hidden: Vec<usize>,
    },
}

impl ModelSource {
    pub fn label(&self) -> String {
        match self {
            ModelSource::Synthetic => SyntheticSurrogate::VERSION.to_string(),
            ModelSource::LstmFile { path } => format!("lstm:{}", path.display()),
            ModelSource::DnnFile { path } => format!("dnn:{}", path.display()),
            ModelSource::LstmRandom { seed, hidden_dim } => format!("lstm-random:h{hidden_dim}:s{seed}"),
            ModelSource::DnnRandom { seed, hidden } => format!("dnn-random:{hidden:?}:s{seed}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSettings {
    /// One request set per value, newtons.
    pub max_steps: Vec<f64>,
    /// Gait in place before the first request of every set.
    pub initial_gait: Gait,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            max_steps: (1..=10).map(|i| i as f64 / 10.0).collect(),
            initial_gait: Gait::new(25.0, 25.0, 1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSettings {
    pub targets: usize,
    pub cycles_per_target: usize,
    pub initial_gait: Gait,
    pub plant: PlantState,
    pub pid: PidConfig,
    /// Targets whose distance from the start position is at most this many
    /// meters count as small steps in the tracking summary.
    pub small_step: f64,
    /// Final position error counted as on target, meters.
    pub tolerance: f64,
}

impl Default for SimulateSettings {
    fn default() -> Self {
        let cl = ClosedLoopConfig::default();
        Self {
            targets: crate::simulation::TARGETS_PER_RUN,
            cycles_per_target: cl.cycles_per_target,
            initial_gait: cl.initial_gait,
            plant: cl.plant,
            pid: cl.pid,
            small_step: 1.0,
            tolerance: 0.5,
        }
    }
}

/// One JSON document describing a run. Unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub space: KinematicSpace,
    pub motor: MotorLimits,
    pub samples_per_cycle: usize,
    pub model: ModelSource,
    pub methods: Vec<Method>,
    pub search: SearchConfig,
    /// `w_t` values; each runs with `w_k = 1 − w_t` and no efficiency term.
    pub thrust_weights: Vec<f64>,
    pub synth: SynthSettings,
    pub simulate: SimulateSettings,
    pub seed: u64,
    /// Seconds allowed per gait proposal.
    pub time_budget: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            space: KinematicSpace::default(),
            motor: MotorLimits::default(),
            samples_per_cycle: DEFAULT_SAMPLES_PER_CYCLE,
            model: ModelSource::Synthetic,
            methods: Method::ALL.to_vec(),
            search: SearchConfig::default(),
            thrust_weights: vec![0.9, 0.95, 1.0],
            synth: SynthSettings::default(),
            simulate: SimulateSettings::default(),
            seed: 0,
            time_budget: 0.5,
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        self.space.validate().map_err(|e| config_err(format!("space: {e}")))?;
        self.search.validate()?;
        if self.samples_per_cycle < SETPOINTS_PER_CYCLE {
            return Err(config_err(format!(
                "samples_per_cycle must be at least {SETPOINTS_PER_CYCLE}"
            )));
        }
        if self.methods.is_empty() {
            return Err(config_err("at least one method is required"));
        }
        if self.thrust_weights.is_empty() {
            return Err(config_err("at least one thrust weight is required"));
        }
        for &w in &self.thrust_weights {
            if !(0.0..=1.0).contains(&w) {
                return Err(config_err(format!("thrust weight {w} is outside [0, 1]")));
            }
        }
        if self.synth.max_steps.iter().any(|d| !(*d > 0.0 && *d <= 1.0)) {
            return Err(config_err("synthetic max steps must lie in (0, 1] N"));
        }
        if !self.space.is_feasible(&self.synth.initial_gait) {
            return Err(config_err("synthetic initial gait is infeasible"));
        }
        if self.simulate.targets == 0 || self.simulate.cycles_per_target == 0 {
            return Err(config_err("simulation needs at least one target and cycle"));
        }
        if !self.space.mirrored().is_feasible(&self.simulate.initial_gait) {
            return Err(config_err("simulation initial gait is infeasible"));
        }
        self.simulate.plant.validate().map_err(|e| config_err(e.to_string()))?;
        self.simulate.pid.validate().map_err(|e| config_err(e.to_string()))?;
        if !(self.time_budget > 0.0) {
            return Err(config_err("time budget must be positive"));
        }
        Ok(())
    }

    pub fn weight_settings(&self) -> Vec<LossWeights> {
        self.thrust_weights
            .iter()
            .map(|&w| LossWeights {
                thrust: w,
                kinematic: 1.0 - w,
                efficiency: 0.0,
            })
            .collect()
    }

    /// Builds the configured forward model.
    pub fn build_model(&self) -> Result<Box<dyn ForwardModel>> {
        let lstm = |w: &LstmWeights| -> Result<Box<dyn ForwardModel>> {
            Ok(Box::new(LstmModel::new(w, self.motor, self.samples_per_cycle)?))
        };
        let dnn = |w: DnnWeights| -> Result<Box<dyn ForwardModel>> { Ok(Box::new(DnnModel::new(w)?)) };
        match &self.model {
            ModelSource::Synthetic => Ok(Box::new(SyntheticSurrogate::default())),
            ModelSource::LstmRandom { seed, hidden_dim } => lstm(&LstmWeights::random(*hidden_dim, *seed)),
            ModelSource::DnnRandom { seed, hidden } => dnn(DnnWeights::random(hidden, *seed)),
            ModelSource::LstmFile { path } | ModelSource::DnnFile { path } => {
                match (load_weight_file(path)?, &self.model) {
                    (LoadedWeights::Lstm(w), ModelSource::LstmFile { .. }) => lstm(&w),
                    (LoadedWeights::Dnn(w), ModelSource::DnnFile { .. }) => dnn(w),
                    _ => Err(config_err(format!("{} holds the other model kind", path.display()))),
                }
            }
        }
    }
}

/// One inverse-model call of the synthetic sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub dataset: usize,
    pub max_step: f64,
    pub request: usize,
    pub method: Method,
    pub thrust_weight: f64,
    pub kinematic_weight: f64,
    pub target_thrust: f64,
    pub current_gait: Gait,
    pub proposed_gait: Gait,
    pub predicted_thrust: f64,
    pub thrust_loss: f64,
    pub kinematic_loss: f64,
    pub total_loss: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
    /// Seconds.
    pub wall_time: f64,
}

/// Runs every method and weight setting over every synthetic request set.
///
/// Within a set each proposal becomes the current gait of the next request.
/// Search seeds depend only on the run seed, set index, and request index, so
/// methods and weight settings see paired random streams.
pub fn run_synth(cfg: &RunConfig, model: &dyn ForwardModel) -> Result<Vec<RequestRecord>> {
    cfg.validate()?;
    let sets = cfg
        .synth
        .max_steps
        .iter()
        .enumerate()
        .map(|(d, &step)| generate_synthetic_requests(step, mix_seed(cfg.seed, d as u64)))
        .collect::<Result<Vec<_>>>()?;
    let search = cfg.search.with_seed(cfg.seed);
    let mut out = Vec::new();
    for &method in &cfg.methods {
        for weights in cfg.weight_settings() {
            for (dataset, set) in sets.iter().enumerate() {
                let mut gait = cfg.synth.initial_gait;
                for (request, &target) in set.requests.iter().enumerate() {
                    let inverse = InverseRequest {
                        target_thrust: target,
                        current_gait: gait,
                        weights,
                    };
                    let seeded = search.for_request(dataset as u64, request as u64);
                    let r = propose_gait(&inverse, method, &seeded, model, &cfg.space)?;
                    out.push(RequestRecord {
                        dataset,
                        max_step: cfg.synth.max_steps[dataset],
                        request,
                        method,
                        thrust_weight: weights.thrust,
                        kinematic_weight: weights.kinematic,
                        target_thrust: target,
                        current_gait: gait,
                        proposed_gait: r.proposed_gait,
                        predicted_thrust: r.predicted_thrust,
                        thrust_loss: r.loss.thrust_loss,
                        kinematic_loss: r.loss.kinematic_loss,
                        total_loss: r.loss.total,
                        evaluations: r.evaluations,
                        budget_exhausted: r.budget_exhausted,
                        wall_time: r.wall_time,
                    });
                    gait = r.proposed_gait;
                }
            }
        }
    }
    Ok(out)
}

/// Closed-loop trajectory for one method and weight setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationCell {
    pub method: Method,
    pub weights: LossWeights,
    pub trajectory: Trajectory,
}

/// Runs the closed loop for every method and weight setting on one shared
/// seeded target sequence.
pub fn run_simulate(cfg: &RunConfig, model: &dyn ForwardModel) -> Result<Vec<SimulationCell>> {
    cfg.validate()?;
    let targets = generate_targets(cfg.simulate.targets, cfg.seed);
    let mut cells = Vec::new();
    for &method in &cfg.methods {
        for weights in cfg.weight_settings() {
            let cl = ClosedLoopConfig {
                cycles_per_target: cfg.simulate.cycles_per_target,
                initial_gait: cfg.simulate.initial_gait,
                plant: cfg.simulate.plant,
                pid: cfg.simulate.pid,
                weights,
                search: cfg.search.with_seed(cfg.seed),
            };
            let trajectory = run_closed_loop(&targets, method, &cl, model, &cfg.space)?;
            cells.push(SimulationCell {
                method,
                weights,
                trajectory,
            });
        }
    }
    Ok(cells)
}

/// Aggregates for one (method, weight setting) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub thrust_weight: f64,
    pub count: usize,
    pub mean_thrust_loss: f64,
    pub mean_kinematic_loss: f64,
    pub mean_total_loss: f64,
    /// Seconds.
    pub mean_time: f64,
    pub p99_time: f64,
    pub max_time: f64,
    pub mean_evaluations: f64,
    pub max_evaluations: usize,
    pub budget_exhausted: usize,
}

/// Mean losses for one (method, weight, max step) cell of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub method: Method,
    pub thrust_weight: f64,
    pub max_step: f64,
    pub mean_thrust_loss: f64,
    pub mean_kinematic_loss: f64,
    pub mean_total_loss: f64,
}

/// Closed-loop tracking quality for one (method, weight setting) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingRow {
    pub method: Method,
    pub thrust_weight: f64,
    pub targets: usize,
    pub small_step_targets: usize,
    pub small_step_on_target: usize,
    pub mean_final_error: f64,
    pub max_abs_request: f64,
}

impl TrackingRow {
    pub fn small_step_fraction(&self) -> f64 {
        if self.small_step_targets == 0 {
            return f64::NAN;
        }
        self.small_step_on_target as f64 / self.small_step_targets as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub host: String,
    pub timestamp_unix: u64,
    pub seed: u64,
    pub model: String,
    pub version: String,
}

impl Metadata {
    pub fn collect(cfg: &RunConfig) -> Self {
        let host = fs::read_to_string("/proc/sys/kernel/hostname")
            .map(|s| s.trim().to_string())
            .or_else(|_| std::env::var("HOSTNAME"))
            .unwrap_or_else(|_| "unknown".into());
        Self {
            host,
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            seed: cfg.seed,
            model: cfg.model.label(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub metadata: Metadata,
    pub time_budget: f64,
    pub summary: Vec<SummaryRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub curves: Vec<CurveRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tracking: Vec<TrackingRow>,
    /// Calls slower than the time budget.
    pub time_violations: usize,
    /// Calls that ran out of evaluation budget.
    pub evaluation_violations: usize,
}

impl BenchReport {
    pub fn budget_violated(&self) -> bool {
        self.time_violations > 0 || self.evaluation_violations > 0
    }

    pub fn row(&self, method: Method, thrust_weight: f64) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.method == method && r.thrust_weight == thrust_weight)
    }
}

/// Per-call quantities the summaries are built from.
#[derive(Debug, Clone, Copy)]
struct Sample {
    thrust_loss: f64,
    kinematic_loss: f64,
    total_loss: f64,
    wall_time: f64,
    evaluations: usize,
    budget_exhausted: bool,
}

impl From<&RequestRecord> for Sample {
    fn from(r: &RequestRecord) -> Self {
        Self {
            thrust_loss: r.thrust_loss,
            kinematic_loss: r.kinematic_loss,
            total_loss: r.total_loss,
            wall_time: r.wall_time,
            evaluations: r.evaluations,
            budget_exhausted: r.budget_exhausted,
        }
    }
}

type Key = (Method, u64);

fn key(method: Method, w: f64) -> Key {
    (method, w.to_bits())
}

fn summarize_samples(method: Method, thrust_weight: f64, samples: &[Sample]) -> SummaryRow {
    let times: Vec<f64> = samples.iter().map(|s| s.wall_time).collect();
    SummaryRow {
        method,
        thrust_weight,
        count: samples.len(),
        mean_thrust_loss: mean(samples.iter().map(|s| s.thrust_loss)),
        mean_kinematic_loss: mean(samples.iter().map(|s| s.kinematic_loss)),
        mean_total_loss: mean(samples.iter().map(|s| s.total_loss)),
        mean_time: mean(times.iter().copied()),
        p99_time: percentile(&times, 0.99),
        max_time: times.iter().copied().fold(0.0, f64::max),
        mean_evaluations: mean(samples.iter().map(|s| s.evaluations as f64)),
        max_evaluations: samples.iter().map(|s| s.evaluations).max().unwrap_or(0),
        budget_exhausted: samples.iter().filter(|s| s.budget_exhausted).count(),
    }
}

fn report(cfg: &RunConfig, groups: BTreeMap<Key, Vec<Sample>>) -> BenchReport {
    let all = groups.values().flatten();
    let time_violations = all.clone().filter(|s| s.wall_time > cfg.time_budget).count();
    let evaluation_violations = all.filter(|s| s.budget_exhausted).count();
    let summary = groups
        .iter()
        .map(|(&(m, w), s)| summarize_samples(m, f64::from_bits(w), s))
        .collect();
    BenchReport {
        metadata: Metadata::collect(cfg),
        time_budget: cfg.time_budget,
        summary,
        curves: Vec::new(),
        tracking: Vec::new(),
        time_violations,
        evaluation_violations,
    }
}

/// Summary and loss curves for a synthetic sweep.
pub fn summarize_synth(cfg: &RunConfig, records: &[RequestRecord]) -> BenchReport {
    let mut groups: BTreeMap<Key, Vec<Sample>> = BTreeMap::new();
    let mut cells: BTreeMap<(Key, usize), Vec<&RequestRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(key(r.method, r.thrust_weight)).or_default().push(r.into());
        cells
            .entry((key(r.method, r.thrust_weight), r.dataset))
            .or_default()
            .push(r);
    }
    let mut rep = report(cfg, groups);
    rep.curves = cells
        .into_iter()
        .map(|(((m, w), _), rs)| CurveRow {
            method: m,
            thrust_weight: f64::from_bits(w),
            max_step: rs[0].max_step,
            mean_thrust_loss: mean(rs.iter().map(|r| r.thrust_loss)),
            mean_kinematic_loss: mean(rs.iter().map(|r| r.kinematic_loss)),
            mean_total_loss: mean(rs.iter().map(|r| r.total_loss)),
        })
        .collect();
    rep
}

/// Summary and tracking quality for closed-loop runs.
pub fn summarize_simulate(cfg: &RunConfig, cells: &[SimulationCell]) -> BenchReport {
    let mut groups: BTreeMap<Key, Vec<Sample>> = BTreeMap::new();
    let mut tracking = Vec::new();
    for cell in cells {
        let samples = groups.entry(key(cell.method, cell.weights.thrust)).or_default();
        for c in &cell.trajectory.cycles {
            samples.push(Sample {
                thrust_loss: c.loss.thrust_loss,
                kinematic_loss: c.loss.kinematic_loss,
                total_loss: c.loss.total,
                wall_time: c.solver_ms / 1e3,
                evaluations: c.evaluations,
                budget_exhausted: c.budget_exhausted,
            });
        }
        let errors = cell.trajectory.final_errors();
        let steps = cell.trajectory.step_sizes();
        let small: Vec<f64> = errors
            .iter()
            .zip(&steps)
            .filter(|(_, s)| **s <= cfg.simulate.small_step)
            .map(|(e, _)| *e)
            .collect();
        tracking.push(TrackingRow {
            method: cell.method,
            thrust_weight: cell.weights.thrust,
            targets: errors.len(),
            small_step_targets: small.len(),
            small_step_on_target: small.iter().filter(|e| **e < cfg.simulate.tolerance).count(),
            mean_final_error: mean(errors.iter().copied()),
            max_abs_request: cell
                .trajectory
                .cycles
                .iter()
                .map(|c| c.thrust_request.abs())
                .fold(0.0, f64::max),
        });
    }
    let mut rep = report(cfg, groups);
    rep.tracking = tracking;
    rep
}

/// Arithmetic mean; NaN for an empty sequence.
pub fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        sum / n as f64
    }
}

/// Nearest-rank percentile, `q` in (0, 1]; NaN for an empty slice.
pub fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let rank = (q * v.len() as f64).ceil() as usize;
    v[rank.clamp(1, v.len()) - 1]
}

/// Spearman rank correlation with average ranks for ties. NaN when either
/// input is constant or the lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() || x.len() < 2 {
        return f64::NAN;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let (mx, my) = (mean(rx.iter().copied()), mean(ry.iter().copied()));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

pub const REQUESTS_HEADER: [&str; 23] = [
    "dataset",
    "max_step",
    "request",
    "method",
    "w_t",
    "w_k",
    "target_thrust",
    "current_stroke_amp",
    "current_pitch_amp",
    "current_flap_freq",
    "current_offset",
    "stroke_amp",
    "pitch_amp",
    "flap_freq",
    "offset",
    "predicted_thrust",
    "L_t",
    "L_k",
    "L_total",
    "evaluations",
    "budget_exhausted",
    "model",
    "seed",
];

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn num(v: f64) -> String {
    v.to_string()
}

/// Per-request rows without timing, so reruns are byte-identical.
pub fn write_requests_csv<W: Write>(writer: W, records: &[RequestRecord], cfg: &RunConfig) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REQUESTS_HEADER)?;
    let model = cfg.model.label();
    for r in records {
        let mut row = vec![
            r.dataset.to_string(),
            num(r.max_step),
            r.request.to_string(),
            r.method.to_string(),
            num(r.thrust_weight),
            num(r.kinematic_weight),
            num(r.target_thrust),
        ];
        row.extend(r.current_gait.to_array().map(num));
        row.extend(r.proposed_gait.to_array().map(num));
        row.extend([
            num(r.predicted_thrust),
            num(r.thrust_loss),
            num(r.kinematic_loss),
            num(r.total_loss),
            r.evaluations.to_string(),
            r.budget_exhausted.to_string(),
            model.clone(),
            cfg.seed.to_string(),
        ]);
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub const TIMING_HEADER: [&str; 6] = ["dataset", "request", "method", "w_t", "evaluations", "wall_time_s"];

pub fn write_timing_csv<W: Write>(writer: W, records: &[RequestRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(TIMING_HEADER)?;
    for r in records {
        w.write_record([
            r.dataset.to_string(),
            r.request.to_string(),
            r.method.to_string(),
            num(r.thrust_weight),
            r.evaluations.to_string(),
            num(r.wall_time),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const SUMMARY_HEADER: [&str; 12] = [
    "method",
    "w_t",
    "count",
    "mean_L_t",
    "mean_L_k",
    "mean_L_total",
    "mean_time_s",
    "p99_time_s",
    "max_time_s",
    "mean_evaluations",
    "max_evaluations",
    "budget_exhausted",
];

pub fn write_summary_csv<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            num(r.thrust_weight),
            r.count.to_string(),
            num(r.mean_thrust_loss),
            num(r.mean_kinematic_loss),
            num(r.mean_total_loss),
            num(r.mean_time),
            num(r.p99_time),
            num(r.max_time),
            num(r.mean_evaluations),
            r.max_evaluations.to_string(),
            r.budget_exhausted.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curves_csv<W: Write>(writer: W, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["method", "w_t", "max_step", "mean_L_t", "mean_L_k", "mean_L_total"])?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            num(r.thrust_weight),
            num(r.max_step),
            num(r.mean_thrust_loss),
            num(r.mean_kinematic_loss),
            num(r.mean_total_loss),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format table with the four headline metrics per method and weight.
pub fn write_table3_csv<W: Write>(writer: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["method", "w_t", "metric", "value"])?;
    for r in rows {
        for (metric, value) in [
            ("thrust_loss", r.mean_thrust_loss),
            ("kinematic_loss", r.mean_kinematic_loss),
            ("overall_loss", r.mean_total_loss),
            ("max_time_s", r.max_time),
        ] {
            w.write_record([r.method.to_string(), num(r.thrust_weight), metric.into(), num(value)])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_tracking_csv<W: Write>(writer: W, rows: &[TrackingRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "method",
        "w_t",
        "targets",
        "small_step_targets",
        "small_step_on_target",
        "mean_final_error_m",
        "max_abs_request_n",
    ])?;
    for r in rows {
        w.write_record([
            r.method.to_string(),
            num(r.thrust_weight),
            r.targets.to_string(),
            r.small_step_targets.to_string(),
            r.small_step_on_target.to_string(),
            num(r.mean_final_error),
            num(r.max_abs_request),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_report(dir: &Path, report: &BenchReport) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut f = BufWriter::new(File::create(dir.join("report.json"))?);
    serde_json::to_writer_pretty(&mut f, report)?;
    writeln!(f)?;
    f.flush()?;
    Ok(())
}

/// Synthetic sweep; writes `requests.csv`, `timing.csv`, `summary.csv`,
/// `curves.csv`, and `report.json` under the output directory.
pub fn cmd_synth(cfg: &RunConfig) -> Result<BenchReport> {
    let model = cfg.build_model()?;
    let records = run_synth(cfg, model.as_ref())?;
    let report = summarize_synth(cfg, &records);
    let dir = &cfg.output_dir;
    write_requests_csv(create(dir, "requests.csv")?, &records, cfg)?;
    write_timing_csv(create(dir, "timing.csv")?, &records)?;
    write_summary_csv(create(dir, "summary.csv")?, &report.summary)?;
    write_curves_csv(create(dir, "curves.csv")?, &report.curves)?;
    write_report(dir, &report)?;
    Ok(report)
}

/// Closed-loop runs; writes one trajectory CSV per method and weight plus
/// `summary.csv`, `table3.csv`, `tracking.csv`, and `report.json`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<BenchReport> {
    let model = cfg.build_model()?;
    let cells = run_simulate(cfg, model.as_ref())?;
    let report = summarize_simulate(cfg, &cells);
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir)?;
    for cell in &cells {
        let name = format!("trajectory_{}_wt{:.2}.csv", cell.method, cell.weights.thrust);
        cell.trajectory.write_csv_file(&dir.join(name))?;
    }
    write_summary_csv(create(dir, "summary.csv")?, &report.summary)?;
    write_table3_csv(create(dir, "table3.csv")?, &report.summary)?;
    write_tracking_csv(create(dir, "tracking.csv")?, &report.tracking)?;
    write_report(dir, &report)?;
    Ok(report)
}

/// Times the synthetic-sweep workload; writes `timing.csv`,
/// `timing_summary.csv`, and `report.json`.
pub fn cmd_bench_timing(cfg: &RunConfig) -> Result<BenchReport> {
    let model = cfg.build_model()?;
    let records = run_synth(cfg, model.as_ref())?;
    let report = summarize_synth(cfg, &records);
    let dir = &cfg.output_dir;
    write_timing_csv(create(dir, "timing.csv")?, &records)?;
    write_summary_csv(create(dir, "timing_summary.csv")?, &report.summary)?;
    write_report(dir, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn percentile_examples() {
        let v: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(percentile(&v, 0.99), 99.0);
        assert_eq!(percentile(&v, 1.0), 100.0);
        assert_eq!(percentile(&[3.0], 0.99), 3.0);
        assert!(percentile(&[], 0.5).is_nan());
    }

    #[test]
    fn spearman_examples() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((spearman(&x, &[10.0, 20.0, 25.0, 100.0]) - 1.0).abs() < 1e-12);
        assert!((spearman(&x, &[4.0, 3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!(spearman(&x, &[1.0, 1.0, 1.0, 1.0]).is_nan());
        assert_eq!(ranks(&[5.0, 1.0, 5.0]), vec![2.5, 1.0, 2.5]);
    }

    #[test]
    fn config_rejects_unknown_fields() {
        assert!(RunConfig::from_json("{}").is_ok());
        assert!(matches!(
            RunConfig::from_json(r#"{"sead": 3}"#),
            Err(crate::Error::Config(_))
        ));
        assert!(RunConfig::from_json(r#"{"thrust_weights": [1.5]}"#).is_err());
        let cfg = RunConfig::from_json(r#"{"model": {"kind": "lstm_random", "seed": 1, "hidden_dim": 8}}"#).unwrap();
        assert!(cfg.build_model().is_ok());
    }

    #[test]
    fn default_config_round_trips() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
