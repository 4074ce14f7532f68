//! Ready-made experiments whose schedules and parameters satisfy the
//! hypotheses of each convergence, divergence or clustering result.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::analysis::ClassificationCriteria;
use crate::config::{ConfigError, ConfigFile, EnvSection, GraphSection, InitialState, TheorySection};
use crate::dynamics::{DynamicsParams, Model};
use crate::env::{Assumption, AssumptionReport, AttentionSchedule, ScheduleMode};
use crate::graph::Sign;
use crate::harness::ExperimentConfig;

/// Largest constant `b` at which the `thm3` setup still diverged in at least
/// 95 of 100 trials, located by `calibrate_b_star` over `[0.001, 0.999]` (see
/// `examples/calibrate_b_star.rs`). Every probe diverged, so this is the top
/// of the bracket.
pub const THM3_B_STAR: f64 = 0.999;
/// Positive attention used by the `thm3` preset, below [`THM3_B_STAR`].
pub const THM3_B: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetName {
    Thm1a,
    Thm1b,
    Thm2,
    Thm3,
    Thm4,
    FlipCompare,
}

impl PresetName {
    pub const ALL: [PresetName; 6] =
        [PresetName::Thm1a, PresetName::Thm1b, PresetName::Thm2, PresetName::Thm3, PresetName::Thm4, PresetName::FlipCompare];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetName::Thm1a => "thm1a",
            PresetName::Thm1b => "thm1b",
            PresetName::Thm2 => "thm2",
            PresetName::Thm3 => "thm3",
            PresetName::Thm4 => "thm4",
            PresetName::FlipCompare => "flip-compare",
        }
    }

    /// Assumptions the corresponding result relies on.
    pub fn cited(self) -> Vec<Assumption> {
        use Assumption::*;
        match self {
            PresetName::Thm1a | PresetName::Thm1b | PresetName::FlipCompare => vec![A1, A3],
            PresetName::Thm2 => vec![A1, A7],
            PresetName::Thm3 => vec![A1, A6, A8],
            PresetName::Thm4 => vec![A1, A3, A9],
        }
    }
}

impl fmt::Display for PresetName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PresetName::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| format!("unknown preset {s:?}; expected one of thm1a, thm1b, thm2, thm3, thm4, flip-compare"))
    }
}

fn line(t: usize, h: usize, s: Sign) -> String {
    format!("{t} {h} {s}")
}

/// Complete positive digraph on `nodes`.
fn clique(nodes: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    for &i in nodes {
        for &j in nodes {
            if i != j {
                out.push(line(i, j, Sign::Positive));
            }
        }
    }
    out
}

/// Negative arcs in both directions between every pair across `a` and `b`.
fn bipartite_negative(a: &[usize], b: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    for &i in a {
        for &j in b {
            out.push(line(i, j, Sign::Negative));
            out.push(line(j, i, Sign::Negative));
        }
    }
    out
}

fn lines(arcs: &[(usize, usize, Sign)]) -> Vec<String> {
    arcs.iter().map(|&(t, h, s)| line(t, h, s)).collect()
}

fn base(n: usize, mode: ScheduleMode, graphs: Vec<Vec<String>>, q: f64, b: AttentionSchedule, d: AttentionSchedule) -> EnvSection {
    EnvSection { n, graph: GraphSection { mode, graphs, files: vec![] }, q_all: Some(q), q: vec![], b, d }
}

fn two_cliques() -> Vec<String> {
    let mut g = clique(&[1, 2, 3]);
    g.extend(clique(&[4, 5, 6]));
    g.extend(bipartite_negative(&[1, 2, 3], &[4, 5, 6]));
    g
}

pub fn preset(name: PresetName) -> ConfigFile {
    use Sign::{Negative as N, Positive as P};
    let theory = |k: usize| TheorySection { k, assumptions: name.cited() };
    match name {
        // Two positive clusters, each spanned from one node, with negative
        // arcs across; negative attention decays summably.
        PresetName::Thm1a => ConfigFile {
            seed: 20_140_101,
            trials: 200,
            horizon: 10_000,
            stride: 1,
            contrast_models: false,
            env: base(
                6,
                ScheduleMode::Static,
                vec![lines(&[(1, 2, P), (2, 3, P), (3, 1, P), (4, 5, P), (5, 6, P), (3, 4, N), (6, 1, N), (2, 5, N)])],
                0.8,
                AttentionSchedule::constant(0.5),
                AttentionSchedule::power_decay(0.5, 2.0),
            ),
            params: DynamicsParams { alpha: 0.15, beta: 0.5, model: Model::Relative },
            initial: InitialState::Uniform { lo: 0.0, hi: 1.0 },
            criteria: ClassificationCriteria::default(),
            theory: theory(1),
        },
        PresetName::Thm1b | PresetName::FlipCompare => ConfigFile {
            seed: 20_140_102,
            trials: 200,
            horizon: 100_000,
            stride: 1,
            contrast_models: name == PresetName::FlipCompare,
            env: base(
                6,
                ScheduleMode::Static,
                vec![two_cliques()],
                0.5,
                AttentionSchedule::constant(0.5),
                AttentionSchedule::constant(0.3),
            ),
            params: DynamicsParams { alpha: 0.15, beta: 0.5, model: Model::Relative },
            initial: InitialState::TwoBlock { c0: 1.0 },
            criteria: ClassificationCriteria::default(),
            theory: theory(1),
        },
        // Positive spanning tree (a directed path) plus negative arcs; the
        // negative attention is small enough that X_m - Y_m stays positive.
        PresetName::Thm2 => ConfigFile {
            seed: 20_140_103,
            trials: 200,
            horizon: 100_000,
            stride: 1,
            contrast_models: false,
            env: base(
                5,
                ScheduleMode::Static,
                vec![lines(&[(1, 2, P), (2, 3, P), (3, 4, P), (4, 5, P), (5, 1, N), (3, 2, N), (5, 3, N)])],
                0.9,
                AttentionSchedule::constant(0.9),
                AttentionSchedule::constant(1e-9),
            ),
            params: DynamicsParams { alpha: 0.2, beta: 0.1, model: Model::Relative },
            initial: InitialState::Uniform { lo: 0.0, hi: 1.0 },
            criteria: ClassificationCriteria::default(),
            theory: theory(1),
        },
        // Negative cycle (weakly connected) interleaved with a positive cycle.
        PresetName::Thm3 => ConfigFile {
            seed: 20_140_104,
            trials: 200,
            horizon: 100_000,
            stride: 1,
            contrast_models: false,
            env: base(
                5,
                ScheduleMode::Static,
                vec![lines(&[
                    (1, 2, N),
                    (2, 3, N),
                    (3, 4, N),
                    (4, 5, N),
                    (5, 1, N),
                    (1, 3, P),
                    (3, 5, P),
                    (5, 2, P),
                    (2, 4, P),
                    (4, 1, P),
                ])],
                0.5,
                AttentionSchedule::constant(THM3_B),
                AttentionSchedule::constant(0.5),
            ),
            params: DynamicsParams { alpha: 0.1, beta: 0.5, model: Model::Relative },
            initial: InitialState::Uniform { lo: 0.0, hi: 1.0 },
            criteria: ClassificationCriteria::default(),
            theory: theory(1),
        },
        // Alternating schedule: each slot carries the positive cycle of one
        // cluster; negative arcs sit across and inside clusters.
        PresetName::Thm4 => ConfigFile {
            seed: 20_140_105,
            trials: 200,
            horizon: 20_000,
            stride: 1,
            contrast_models: false,
            env: base(
                6,
                ScheduleMode::Periodic,
                vec![
                    lines(&[(1, 2, P), (2, 3, P), (3, 1, P), (1, 4, N), (5, 2, N)]),
                    lines(&[(4, 5, P), (5, 6, P), (6, 4, P), (1, 3, N), (6, 3, N), (4, 6, N)]),
                ],
                0.7,
                AttentionSchedule::constant(0.8),
                AttentionSchedule::power_decay(0.5, 2.0),
            ),
            params: DynamicsParams { alpha: 0.15, beta: 0.5, model: Model::Relative },
            initial: InitialState::Uniform { lo: 0.0, hi: 1.0 },
            criteria: ClassificationCriteria::default(),
            theory: theory(2),
        },
    }
}

/// The preset resolved into a runnable experiment.
pub fn preset_config(name: PresetName) -> Result<ExperimentConfig, ConfigError> {
    ExperimentConfig::from_file(preset(name), Path::new("."))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PresetValidation {
    pub preset: &'static str,
    pub cited: Vec<Assumption>,
    pub assumptions: AssumptionReport,
    pub hypotheses: Vec<HypothesisCheck>,
}

impl PresetValidation {
    pub fn cited_hold(&self) -> bool {
        self.cited.iter().all(|&a| self.assumptions.holds(a))
    }

    pub fn ok(&self) -> bool {
        self.cited_hold() && self.hypotheses.iter().all(|h| h.holds)
    }
}

/// Checks the cited assumptions and the remaining result-specific hypotheses
/// of a preset configuration.
pub fn validate_preset(name: PresetName, cfg: &ExperimentConfig) -> Result<PresetValidation, ConfigError> {
    let assumptions = cfg.assumption_report().map_err(ConfigError::Invalid)?;
    let n = cfg.node_count();
    let nm1 = (n - 1) as f64;
    let alpha = cfg.params.alpha;
    let env = &cfg.env;
    let is_static = env.schedule.mode() == ScheduleMode::Static;
    let mut h = Vec::new();
    let mut push = |name: &'static str, holds: bool| h.push(HypothesisCheck { name, holds });
    let alpha_ok = alpha > 0.0 && alpha * nm1 < 1.0;
    let relative = cfg.params.model == Model::Relative;

    match name {
        PresetName::Thm1a => {
            push("static schedule", is_static);
            push("alpha in (0, 1/(n-1))", alpha_ok);
            push("every positive cluster has a spanning tree", assumptions.a9);
            push("d summable", env.d.is_summable());
        }
        PresetName::Thm1b | PresetName::FlipCompare => {
            let g = env.schedule.graph_at(0);
            let part = &cfg.partition;
            let no_internal_negative =
                g.arcs().all(|a| a.sign == Sign::Positive || part.block_of(a.tail) != part.block_of(a.head));
            let across_negative = (0..n).all(|i| {
                (0..n).all(|j| {
                    part.block_of(i) == part.block_of(j)
                        || g.sign_of(i, j) == Some(Sign::Negative)
                        || g.sign_of(j, i) == Some(Sign::Negative)
                })
            });
            push("static schedule", is_static);
            push("alpha in (0, 1/(n-1))", alpha_ok);
            push("exactly two positive clusters", part.len() == 2);
            push("no negative arcs inside clusters", no_internal_negative);
            push("negative arc between any two nodes of different clusters", across_negative);
            push("d not summable", !env.d.is_summable());
            push("two-block initial state", matches!(cfg.initial, InitialState::TwoBlock { c0 } if c0 > 0.0));
        }
        PresetName::Thm2 => {
            let c = cfg.constants_report();
            push("alpha in (0, 1/(n-1))", alpha_ok);
            push("0 <= X_m - Y_m <= 1 for every block", c.margins_in_unit_interval == Some(true));
            push("sum of X_m - Y_m diverges", c.margin_sum_diverges == Some(true));
        }
        PresetName::Thm3 => {
            let constant_in_unit = |a: &AttentionSchedule| matches!(a, AttentionSchedule::Constant { c } if *c > 0.0 && *c < 1.0);
            push("alpha in [0, 1/(2(n-1)))", alpha >= 0.0 && alpha * 2.0 * nm1 < 1.0);
            push("constant b and d in (0, 1)", constant_in_unit(&env.b) && constant_in_unit(&env.d));
            push("b below calibrated b_star", env.b.eventual_value().is_some_and(|b| b < THM3_B_STAR));
        }
        PresetName::Thm4 => {
            let c = cfg.constants_report();
            push("alpha in (0, 1/(n-1))", alpha_ok);
            push("sum of J(m) diverges", env.b.eventual_value().is_some_and(|b| b > 0.0));
            push("d summable", env.d.is_summable());
            push("W(m)/J(m) trends to zero", c.w_over_j_trends_to_zero == Some(true));
        }
    }
    push("relative model", relative);
    Ok(PresetValidation { preset: name.as_str(), cited: name.cited(), assumptions, hypotheses: h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for p in PresetName::ALL {
            assert_eq!(p.as_str().parse::<PresetName>().unwrap(), p);
        }
        assert!("thm5".parse::<PresetName>().is_err());
    }

    #[test]
    fn every_preset_validates() {
        for p in PresetName::ALL {
            let cfg = preset_config(p).unwrap();
            let v = validate_preset(p, &cfg).unwrap();
            assert!(v.cited_hold(), "{p}: {:?}", v.assumptions);
            for h in &v.hypotheses {
                assert!(h.holds, "{p}: {} fails", h.name);
            }
        }
    }

    #[test]
    fn thm1b_starts_in_two_blocks() {
        let cfg = preset_config(PresetName::Thm1b).unwrap();
        let mut rng = crate::harness::trial_rng(cfg.seed, 0);
        assert_eq!(cfg.initial.resolve(&cfg.partition, &mut rng), vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(cfg.partition.one_based(), vec![vec![1, 2, 3], vec![4, 5, 6]]);
    }

    #[test]
    fn thm1a_negative_attention_is_a_p_series() {
        let c = preset(PresetName::Thm1a);
        assert_eq!(c.env.d, AttentionSchedule::power_decay(0.5, 2.0));
        assert!(c.env.d.is_summable());
    }

    #[test]
    fn presets_survive_toml() {
        for p in PresetName::ALL {
            let c = preset(p);
            assert_eq!(ConfigFile::from_toml(&c.to_toml()).unwrap(), c, "{p}");
        }
    }

    #[test]
    fn thm2_constants_report() {
        let cfg = preset_config(PresetName::Thm2).unwrap();
        let c = cfg.constants_report();
        assert_eq!(c.k0, Some(7));
        assert!((c.rho_star.unwrap() - 0.2).abs() < 1e-12);
        let m = c.margin.unwrap();
        assert!(m.min > 0.0 && m.max <= 1.0);
    }
}
