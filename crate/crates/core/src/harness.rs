//! Seeded trial execution and Monte-Carlo aggregation.
//!
//! Each trial owns a ChaCha8 stream: the generator is seeded from the master
//! seed and the trial index selects the stream (`set_stream(trial)`). Initial
//! uniform states are drawn first, then every slot consumes arcs, `B_t`,
//! `D_t` in that order. Results therefore do not depend on how trials are
//! scheduled across threads.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{
    classify_trajectory, ratio_trends_to_zero, spread_metrics, theorem_constants, ClassificationCriteria, Evidence,
    SpreadMetrics, VerdictKind,
};
use crate::config::{ConfigError, ConfigFile, InitialState};
use crate::dynamics::{step_into, DynamicsError, DynamicsParams, Model, StateVector, StepScratch};
use crate::env::{check_assumptions, AssumptionReport, Environment, InteractionGraph, SummabilityReport};
use crate::graph::{union_graph, PositiveClusterPartition};
use crate::trajectory::{Record, Termination, Trajectory};

/// `|s_i|` above this stops a trial as numerically divergent.
pub const NUMERIC_LIMIT: f64 = 1e12;

/// A validated, ready-to-run experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub env: Environment,
    pub params: DynamicsParams,
    pub horizon: u64,
    pub trials: usize,
    pub seed: u64,
    pub initial: InitialState,
    pub stride: u64,
    pub criteria: ClassificationCriteria,
    /// Positive-cluster partition of the total graph; singletons when the
    /// schedule is not sign consistent.
    pub partition: PositiveClusterPartition,
    pub source: ConfigFile,
}

impl ExperimentConfig {
    /// Validates `file`; `base` anchors relative graph file paths.
    pub fn from_file(file: ConfigFile, base: &Path) -> Result<Self, ConfigError> {
        let schedule = file.schedule(base)?;
        let n = schedule.node_count();
        if file.env.n != n {
            return Err(ConfigError::Invalid(format!("env.n = {} but graphs have {n} nodes", file.env.n)));
        }
        if file.trials == 0 || file.horizon == 0 || file.stride == 0 {
            return Err(ConfigError::Invalid("trials, horizon and stride must all be at least 1".into()));
        }
        file.params.validate()?;
        file.env.b.validate("env.b")?;
        file.env.d.validate("env.d")?;
        let c = &file.criteria;
        if !(c.eps > 0.0) || !(c.divergence_threshold > 0.0) || c.tail_window == Some(0) || c.sep.is_some_and(|s| !(s >= 0.0)) {
            return Err(ConfigError::Invalid("criteria: eps and divergence_threshold must be positive, tail_window at least 1".into()));
        }
        let partition = match union_graph(schedule.graphs()) {
            Ok(total) => total.positive_cluster_partition(),
            Err(e) => {
                log::warn!("{e}; cluster metrics fall back to singleton blocks");
                PositiveClusterPartition::singletons(n)
            }
        };
        match &file.initial {
            InitialState::Explicit { values } if values.len() != n => {
                return Err(ConfigError::Invalid(format!("initial.values has {} entries, expected {n}", values.len())));
            }
            InitialState::Explicit { values } if values.iter().any(|v| !v.is_finite()) => {
                return Err(ConfigError::Invalid("initial.values must be finite".into()));
            }
            InitialState::Uniform { lo, hi } if !(lo.is_finite() && hi.is_finite() && lo <= hi) => {
                return Err(ConfigError::Invalid(format!("initial uniform range [{lo}, {hi}] is invalid")));
            }
            InitialState::TwoBlock { .. } if partition.len() != 2 => {
                return Err(ConfigError::Invalid(format!(
                    "two-block initial state needs exactly two positive clusters, found {}",
                    partition.len()
                )));
            }
            _ => {}
        }
        Ok(ExperimentConfig {
            env: Environment { schedule, b: file.env.b.clone(), d: file.env.d.clone() },
            params: file.params,
            horizon: file.horizon,
            trials: file.trials,
            seed: file.seed,
            initial: file.initial.clone(),
            stride: file.stride,
            criteria: file.criteria,
            partition,
            source: file,
        })
    }

    pub fn node_count(&self) -> usize {
        self.env.schedule.node_count()
    }

    /// Same experiment under a different negative-recommendation model.
    pub fn with_model(&self, model: Model) -> Self {
        let mut c = self.clone();
        c.params.model = model;
        c.source.params.model = model;
        c
    }

    pub fn assumption_report(&self) -> Result<AssumptionReport, String> {
        check_assumptions(&self.env.schedule, self.horizon, self.source.theory.k).map_err(|e| e.to_string())
    }

    pub fn constants_report(&self) -> ConstantsReport {
        ConstantsReport::for_config(self)
    }
}

/// Stream for `trial` under `seed`.
pub fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

impl InitialState {
    pub fn resolve<R: Rng + ?Sized>(&self, part: &PositiveClusterPartition, rng: &mut R) -> Vec<f64> {
        let n = part.node_count();
        match self {
            InitialState::Explicit { values } => values.clone(),
            InitialState::Uniform { lo, hi } => (0..n).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect(),
            InitialState::TwoBlock { c0 } => (0..n).map(|i| if part.block_of(i) == 0 { 0.0 } else { *c0 }).collect(),
        }
    }
}

fn record(t: u64, state: &[f64], part: &PositiveClusterPartition) -> Record {
    Record { t, metrics: spread_metrics(state, part), state: state.to_vec(), events: None }
}

/// Runs one trial: sample, step, repeat until the horizon or divergence.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize) -> Trajectory {
    let n = cfg.node_count();
    let part = &cfg.partition;
    let mut rng = trial_rng(cfg.seed, trial);
    let mut s = StateVector::new(cfg.initial.resolve(part, &mut rng));
    let mut next = StateVector::new(Vec::with_capacity(n));
    let mut graph = InteractionGraph::new(n, 0);
    let mut scratch = StepScratch::default();
    let mut records = vec![record(0, &s.values, part)];
    let mut termination = Termination::Completed;

    for t in 0..cfg.horizon {
        let events = cfg.env.sample_slot(t, &mut rng, &mut graph);
        let last = records.last_mut().expect("slot 0 recorded");
        if last.t == t {
            last.events = Some(events);
        }
        match step_into(&s, &graph, events.b, events.d, &cfg.params, &mut scratch, &mut next) {
            Ok(()) => {}
            Err(DynamicsError::NonFiniteState { .. }) => {
                if records.last().map(|r| r.t) != Some(t) {
                    let mut r = record(t, &s.values, part);
                    r.events = Some(events);
                    records.push(r);
                }
                termination = Termination::NonFinite { t };
                break;
            }
            Err(e) => unreachable!("validated config produced {e}"),
        }
        std::mem::swap(&mut s, &mut next);
        let t1 = t + 1;
        let spread = s.spread();
        if s.values.iter().any(|v| v.abs() > NUMERIC_LIMIT) {
            termination = Termination::NumericLimit { t: t1 };
        } else if spread > cfg.criteria.divergence_threshold {
            termination = Termination::DivergenceThreshold { t: t1, spread };
        }
        if t1 % cfg.stride == 0 || t1 == cfg.horizon || termination.is_divergent() {
            records.push(record(t1, &s.values, part));
        }
        if termination.is_divergent() {
            break;
        }
    }
    Trajectory { trial, records, termination }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        return Execution::Parallel;
        #[cfg(not(feature = "parallel"))]
        Execution::Sequential
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictStats {
    pub count: usize,
    pub frequency: f64,
    /// Binomial standard error `sqrt(f (1 - f) / trials)`.
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub verdict: VerdictKind,
    pub final_t: u64,
    pub final_metrics: SpreadMetrics,
    pub evidence: Evidence,
}

/// Summary statistics of a per-block sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceStats {
    pub first: f64,
    pub last: f64,
    pub min: f64,
    pub max: f64,
    pub sum: f64,
}

impl SequenceStats {
    fn of(v: &[f64]) -> Option<Self> {
        Some(SequenceStats {
            first: *v.first()?,
            last: *v.last()?,
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            sum: v.iter().sum(),
        })
    }
}

/// Constants report over the configured horizon, `M = horizon / K0` blocks.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstantsReport {
    pub k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub k0: Option<usize>,
    pub blocks: usize,
    pub rho_star: Option<f64>,
    pub lambda_star: Option<f64>,
    pub x: Option<SequenceStats>,
    pub y: Option<SequenceStats>,
    pub margin: Option<SequenceStats>,
    pub margins_in_unit_interval: Option<bool>,
    /// Whether `sum_m (X_m - Y_m)` diverges: decided when both attention
    /// schedules are eventually constant, otherwise `None`.
    pub margin_sum_diverges: Option<bool>,
    pub j: Option<SequenceStats>,
    pub w: Option<SequenceStats>,
    pub w_over_j: Option<SequenceStats>,
    pub w_over_j_trends_to_zero: Option<bool>,
    pub b_summability: SummabilityReport,
    pub d_summability: SummabilityReport,
}

impl ConstantsReport {
    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        let n = cfg.node_count();
        let k = cfg.source.theory.k;
        let env = &cfg.env;
        let k0 = (2 * n - 3) * k.max(1);
        let blocks = (cfg.horizon / k0 as u64) as usize;
        let p_star = env.schedule.p_lower().unwrap_or(1.0);
        let mut report = ConstantsReport {
            k,
            error: None,
            k0: None,
            blocks,
            rho_star: None,
            lambda_star: None,
            x: None,
            y: None,
            margin: None,
            margins_in_unit_interval: None,
            margin_sum_diverges: None,
            j: None,
            w: None,
            w_over_j: None,
            w_over_j_trends_to_zero: None,
            b_summability: SummabilityReport::of(&env.b, cfg.horizon),
            d_summability: SummabilityReport::of(&env.d, cfg.horizon),
        };
        let c = match theorem_constants(n, k, cfg.params.alpha, cfg.params.beta, p_star, &env.b, &env.d, blocks) {
            Ok(c) => c,
            Err(e) => {
                report.error = Some(e.to_string());
                return report;
            }
        };
        let margins = c.margins();
        let ratios = c.w_over_j();
        report.k0 = Some(c.k0);
        report.rho_star = Some(c.rho_star);
        report.lambda_star = Some(c.lambda_star);
        report.x = SequenceStats::of(&c.x);
        report.y = SequenceStats::of(&c.y);
        report.margin = SequenceStats::of(&margins);
        report.margins_in_unit_interval = Some(c.margins_in_unit_interval());
        report.margin_sum_diverges = match (env.b.eventual_value(), env.d.eventual_value()) {
            (Some(b), Some(d)) => {
                let x = p_star.powi((n - 1) as i32) * c.rho_star.powi(c.k0 as i32) / 2.0 * (b * (1.0 - d)).powi(c.k0 as i32);
                let y = (1.0 + 2.0 * cfg.params.beta * (n - 1) as f64).powi(c.k0 as i32) * (1.0 - (1.0 - d).powi(c.k0 as i32));
                Some(x - y > 0.0)
            }
            _ => None,
        };
        report.j = SequenceStats::of(&c.j);
        report.w = SequenceStats::of(&c.w);
        report.w_over_j = SequenceStats::of(&ratios);
        report.w_over_j_trends_to_zero = Some(ratio_trends_to_zero(&ratios));
        report
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSummary {
    pub seed: u64,
    pub trials: usize,
    pub model: Model,
    pub verdicts: BTreeMap<&'static str, VerdictStats>,
    pub criteria: ResolvedCriteria,
    pub partition: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assumptions: Option<AssumptionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub assumption_error: Option<String>,
    pub constants: ConstantsReport,
    pub outcomes: Vec<TrialOutcome>,
    pub config: ConfigFile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolvedCriteria {
    pub eps: f64,
    pub tail_window: Option<usize>,
    pub divergence_threshold: f64,
    pub sep: f64,
    pub numeric_limit: f64,
}

impl ExperimentSummary {
    pub fn frequency(&self, kind: VerdictKind) -> f64 {
        self.verdicts[kind.name()].frequency
    }

    pub fn count(&self, kind: VerdictKind) -> usize {
        self.verdicts[kind.name()].count
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }
}

fn outcome(cfg: &ExperimentConfig, traj: &Trajectory) -> TrialOutcome {
    let v = classify_trajectory(traj, &cfg.partition, &cfg.criteria);
    let last = traj.last();
    TrialOutcome {
        trial: traj.trial,
        verdict: v.kind,
        final_t: last.t,
        final_metrics: last.metrics.clone(),
        evidence: v.evidence,
    }
}

/// Runs every trial, handing each trajectory to `sink` before it is dropped.
/// `sink` may be called from several threads at once.
pub fn run_experiment_with<F>(cfg: &ExperimentConfig, exec: Execution, sink: F) -> ExperimentSummary
where
    F: Fn(&Trajectory) + Sync,
{
    let work = |trial: usize| {
        let traj = run_trial(cfg, trial);
        sink(&traj);
        outcome(cfg, &traj)
    };
    let outcomes: Vec<TrialOutcome> = match exec {
        Execution::Sequential => (0..cfg.trials).map(work).collect(),
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..cfg.trials).into_par_iter().map(work).collect()
        }
    };
    summarize(cfg, outcomes)
}

pub fn run_experiment(cfg: &ExperimentConfig) -> ExperimentSummary {
    run_experiment_with(cfg, Execution::default(), |_| {})
}

fn summarize(cfg: &ExperimentConfig, outcomes: Vec<TrialOutcome>) -> ExperimentSummary {
    let total = outcomes.len() as f64;
    let verdicts = VerdictKind::ALL
        .into_iter()
        .map(|k| {
            let count = outcomes.iter().filter(|o| o.verdict == k).count();
            let f = count as f64 / total;
            (k.name(), VerdictStats { count, frequency: f, std_error: (f * (1.0 - f) / total).sqrt() })
        })
        .collect();
    let c = &cfg.criteria;
    let (assumptions, assumption_error) = match cfg.assumption_report() {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e)),
    };
    ExperimentSummary {
        seed: cfg.seed,
        trials: cfg.trials,
        model: cfg.params.model,
        verdicts,
        criteria: ResolvedCriteria {
            eps: c.eps,
            tail_window: c.tail_window,
            divergence_threshold: c.divergence_threshold,
            sep: c.separation(),
            numeric_limit: NUMERIC_LIMIT,
        },
        partition: cfg.partition.one_based(),
        assumptions,
        assumption_error,
        constants: cfg.constants_report(),
        outcomes,
        config: cfg.source.clone(),
    }
}

/// Result of locating the largest constant `b` that still yields divergence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    /// Largest probed `b` meeting the target.
    pub b_star: f64,
    /// `(b, diverged frequency)` for every probe, in probe order.
    pub probes: Vec<(f64, f64)>,
}

/// Bisection over a constant positive attention `b` in `[lo, hi]`: a probe
/// passes when at least `target` of `batch` trials diverge. Assumes the
/// diverged frequency falls as `b` grows. Returns `None` if `lo` fails.
pub fn calibrate_b_star(
    cfg: &ExperimentConfig,
    lo: f64,
    hi: f64,
    iterations: usize,
    batch: usize,
    target: f64,
) -> Option<Calibration> {
    let probe = |b: f64| {
        let mut c = cfg.clone();
        c.trials = batch;
        c.env.b = crate::env::AttentionSchedule::constant(b);
        run_experiment(&c).frequency(VerdictKind::Diverged)
    };
    let mut probes = Vec::new();
    let f_lo = probe(lo);
    probes.push((lo, f_lo));
    if f_lo < target {
        return None;
    }
    let f_hi = probe(hi);
    probes.push((hi, f_hi));
    if f_hi >= target {
        return Some(Calibration { b_star: hi, probes });
    }
    let (mut good, mut bad) = (lo, hi);
    for _ in 0..iterations {
        let mid = 0.5 * (good + bad);
        let f = probe(mid);
        probes.push((mid, f));
        if f >= target {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Some(Calibration { b_star: good, probes })
}
