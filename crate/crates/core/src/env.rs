//! The random environment: a deterministic graph schedule, independent
//! per-arc sampling of the interaction graph, and the two Bernoulli attention
//! processes.
//!
//! Randomness is consumed in a fixed order each slot: one uniform draw per arc
//! of the scheduled graph in ascending `(tail, head)` order, then one draw for
//! `B_t`, then one for `D_t`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{union_graph, GraphError, PositiveClusterPartition, Sign, SignedArc, SignedDigraph};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph schedule is empty")]
    EmptySchedule,
    #[error("a static schedule holds exactly one graph, got {0}")]
    StaticScheduleSize(usize),
    #[error("arc probability {p} for ({tail}, {head}) is outside (0, 1]")]
    BadProbability { tail: usize, head: usize, p: f64 },
    #[error("no sampling probability configured for arc ({tail}, {head})")]
    MissingProbability { tail: usize, head: usize },
    #[error("window length must be at least 1 and at most the horizon (K = {k}, horizon = {horizon})")]
    BadWindow { k: usize, horizon: u64 },
    #[error("invalid attention schedule: {0}")]
    BadAttention(String),
}

/// Inclusion probability for each arc.
#[derive(Debug, Clone, PartialEq)]
pub enum ArcProbabilities {
    Uniform(f64),
    /// Explicit per-arc values, falling back to `default` for unlisted arcs.
    PerArc { default: Option<f64>, map: BTreeMap<(usize, usize), f64> },
}

impl ArcProbabilities {
    fn lookup(&self, tail: usize, head: usize) -> Option<f64> {
        match self {
            ArcProbabilities::Uniform(p) => Some(*p),
            ArcProbabilities::PerArc { default, map } => map.get(&(tail, head)).copied().or(*default),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScheduleMode {
    Static,
    Periodic,
}

/// Deterministic time-indexed sequence of signed digraphs with per-arc
/// sampling probabilities. A static schedule holds a single graph.
#[derive(Debug, Clone)]
pub struct GraphSchedule {
    mode: ScheduleMode,
    graphs: Vec<SignedDigraph>,
    /// Per graph, arcs in sampling order with their probabilities.
    sampling: Vec<Vec<(SignedArc, f64)>>,
}

impl GraphSchedule {
    pub fn fixed(graph: SignedDigraph, probs: ArcProbabilities) -> Result<Self, EnvError> {
        Self::build(ScheduleMode::Static, vec![graph], probs)
    }

    pub fn periodic(graphs: Vec<SignedDigraph>, probs: ArcProbabilities) -> Result<Self, EnvError> {
        Self::build(ScheduleMode::Periodic, graphs, probs)
    }

    pub fn build(mode: ScheduleMode, graphs: Vec<SignedDigraph>, probs: ArcProbabilities) -> Result<Self, EnvError> {
        let first = graphs.first().ok_or(EnvError::EmptySchedule)?;
        if mode == ScheduleMode::Static && graphs.len() != 1 {
            return Err(EnvError::StaticScheduleSize(graphs.len()));
        }
        let n = first.node_count();
        let mut sampling = Vec::with_capacity(graphs.len());
        for g in &graphs {
            if g.node_count() != n {
                return Err(GraphError::NodeCountMismatch(n, g.node_count()).into());
            }
            let mut arcs = Vec::with_capacity(g.arc_count());
            for arc in g.arcs() {
                let p = probs
                    .lookup(arc.tail, arc.head)
                    .ok_or(EnvError::MissingProbability { tail: arc.tail, head: arc.head })?;
                if !(p > 0.0 && p <= 1.0) {
                    return Err(EnvError::BadProbability { tail: arc.tail, head: arc.head, p });
                }
                arcs.push((arc, p));
            }
            sampling.push(arcs);
        }
        Ok(GraphSchedule { mode, graphs, sampling })
    }

    pub fn mode(&self) -> ScheduleMode {
        self.mode
    }

    pub fn node_count(&self) -> usize {
        self.graphs[0].node_count()
    }

    pub fn period(&self) -> usize {
        self.graphs.len()
    }

    pub fn graphs(&self) -> &[SignedDigraph] {
        &self.graphs
    }

    /// `G_t`: the graph itself for a static schedule, `g_{t mod p}` otherwise.
    pub fn graph_at(&self, t: u64) -> &SignedDigraph {
        &self.graphs[self.index(t)]
    }

    fn index(&self, t: u64) -> usize {
        (t % self.graphs.len() as u64) as usize
    }

    fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        self.sampling.iter().flatten().map(|&(_, p)| p)
    }

    /// Smallest arc probability (`p_*`); `None` when the schedule has no arcs.
    pub fn p_lower(&self) -> Option<f64> {
        self.probabilities().reduce(f64::min)
    }

    /// Largest arc probability (`p^*`); `None` when the schedule has no arcs.
    pub fn p_upper(&self) -> Option<f64> {
        self.probabilities().reduce(f64::max)
    }

    /// Samples `E_t` into `out`, reusing its buffer.
    pub fn sample_into<R: Rng + ?Sized>(&self, t: u64, rng: &mut R, out: &mut InteractionGraph) {
        out.t = t;
        out.arcs.clear();
        for &(arc, p) in &self.sampling[self.index(t)] {
            if rng.gen::<f64>() < p {
                out.arcs.push(arc);
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, t: u64, rng: &mut R) -> InteractionGraph {
        let mut e = InteractionGraph::new(self.node_count(), t);
        self.sample_into(t, rng, &mut e);
        e
    }
}

/// Free-function form of [`GraphSchedule::graph_at`].
pub fn schedule_graph(sched: &GraphSchedule, t: u64) -> &SignedDigraph {
    sched.graph_at(t)
}

/// Free-function form of [`GraphSchedule::sample`].
pub fn sample_interaction_graph<R: Rng + ?Sized>(sched: &GraphSchedule, t: u64, rng: &mut R) -> InteractionGraph {
    sched.sample(t, rng)
}

/// The realized random subgraph `G_t = (V, E_t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    pub t: u64,
    n: usize,
    arcs: Vec<SignedArc>,
}

impl InteractionGraph {
    pub fn new(n: usize, t: u64) -> Self {
        InteractionGraph { t, n, arcs: Vec::new() }
    }

    pub fn from_arcs(n: usize, t: u64, arcs: Vec<SignedArc>) -> Self {
        InteractionGraph { t, n, arcs }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[SignedArc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// `N_i^+(t)`: tails of positive arcs into `i`.
    pub fn positive_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors(i, Sign::Positive)
    }

    /// `N_i^-(t)`: tails of negative arcs into `i`.
    pub fn negative_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors(i, Sign::Negative)
    }

    fn neighbors(&self, i: usize, sign: Sign) -> impl Iterator<Item = usize> + '_ {
        self.arcs.iter().filter(move |a| a.head == i && a.sign == sign).map(|a| a.tail)
    }
}

/// Mean sequence `b_t` or `d_t` of an attention process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AttentionSchedule {
    Constant { c: f64 },
    /// `c / (t + 1)^gamma`
    PowerDecay { c: f64, gamma: f64 },
    /// `values[t]` for the listed slots, `tail` afterwards.
    Explicit { values: Vec<f64>, tail: f64 },
}

impl AttentionSchedule {
    pub fn constant(c: f64) -> Self {
        AttentionSchedule::Constant { c }
    }

    pub fn power_decay(c: f64, gamma: f64) -> Self {
        AttentionSchedule::PowerDecay { c, gamma }
    }

    fn raw(&self, t: u64) -> f64 {
        match self {
            AttentionSchedule::Constant { c } => *c,
            AttentionSchedule::PowerDecay { c, gamma } => c / ((t + 1) as f64).powf(*gamma),
            AttentionSchedule::Explicit { values, tail } => values.get(t as usize).copied().unwrap_or(*tail),
        }
    }

    /// Evaluated mean, clamped to `[0, 1]`.
    pub fn value(&self, t: u64) -> f64 {
        self.raw(t).clamp(0.0, 1.0)
    }

    /// Rejects non-finite or negative parameters and warns when some terms
    /// will be clamped to 1.
    pub fn validate(&self, name: &str) -> Result<(), EnvError> {
        let bad = |msg: String| Err(EnvError::BadAttention(format!("{name}: {msg}")));
        let (params, saturates): (Vec<f64>, bool) = match self {
            AttentionSchedule::Constant { c } => (vec![*c], *c > 1.0),
            AttentionSchedule::PowerDecay { c, gamma } => (vec![*c, *gamma], *c > 1.0),
            AttentionSchedule::Explicit { values, tail } => {
                let mut all = values.clone();
                all.push(*tail);
                let sat = all.iter().any(|&v| v > 1.0);
                (all, sat)
            }
        };
        if let Some(p) = params.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return bad(format!("parameter {p} must be finite and non-negative"));
        }
        if saturates {
            log::warn!("{name}: attention schedule exceeds 1 for some slots; those terms are clamped to 1");
        }
        Ok(())
    }

    /// Analytic verdict on whether `sum_t value(t)` is finite.
    pub fn is_summable(&self) -> bool {
        match self {
            AttentionSchedule::Constant { c } => *c == 0.0,
            AttentionSchedule::PowerDecay { c, gamma } => *c == 0.0 || *gamma > 1.0,
            AttentionSchedule::Explicit { tail, .. } => *tail == 0.0,
        }
    }

    /// Limit of `value(t)` when the schedule is eventually constant.
    pub fn eventual_value(&self) -> Option<f64> {
        match self {
            AttentionSchedule::Constant { c } => Some(c.clamp(0.0, 1.0)),
            AttentionSchedule::PowerDecay { c, gamma } if *c == 0.0 || *gamma == 0.0 => Some(c.clamp(0.0, 1.0)),
            AttentionSchedule::PowerDecay { .. } => None,
            AttentionSchedule::Explicit { tail, .. } => Some(tail.clamp(0.0, 1.0)),
        }
    }

    /// `sum_{t < horizon} value(t)`.
    pub fn partial_sum(&self, horizon: u64) -> f64 {
        (0..horizon).map(|t| self.value(t)).sum()
    }

    /// One Bernoulli draw with mean `value(t)`.
    pub fn sample<R: Rng + ?Sized>(&self, t: u64, rng: &mut R) -> bool {
        rng.gen::<f64>() < self.value(t)
    }
}

/// Free-function form of [`AttentionSchedule::sample`].
pub fn sample_attention<R: Rng + ?Sized>(a: &AttentionSchedule, t: u64, rng: &mut R) -> bool {
    a.sample(t, rng)
}

/// Partial sums next to the analytic summability verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub summable: bool,
    pub partial_sum: f64,
    pub horizon: u64,
}

impl SummabilityReport {
    pub fn of(a: &AttentionSchedule, horizon: u64) -> Self {
        SummabilityReport { summable: a.is_summable(), partial_sum: a.partial_sum(horizon), horizon }
    }
}

/// Everything that drives the random part of a trial.
#[derive(Debug, Clone)]
pub struct Environment {
    pub schedule: GraphSchedule,
    pub b: AttentionSchedule,
    pub d: AttentionSchedule,
}

/// Realized randomness for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SlotEvents {
    pub b: bool,
    pub d: bool,
    pub arcs: usize,
}

impl Environment {
    /// Samples `E_t` into `graph`, then `B_t`, then `D_t`.
    pub fn sample_slot<R: Rng + ?Sized>(&self, t: u64, rng: &mut R, graph: &mut InteractionGraph) -> SlotEvents {
        self.schedule.sample_into(t, rng, graph);
        let b = self.b.sample(t, rng);
        let d = self.d.sample(t, rng);
        SlotEvents { b, d, arcs: graph.len() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Assumption {
    A1,
    A2,
    A3,
    A4,
    A5,
    A6,
    A7,
    A8,
    A9,
}

impl Assumption {
    pub const ALL: [Assumption; 9] = [
        Assumption::A1,
        Assumption::A2,
        Assumption::A3,
        Assumption::A4,
        Assumption::A5,
        Assumption::A6,
        Assumption::A7,
        Assumption::A8,
        Assumption::A9,
    ];
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Assumption {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Assumption::ALL
            .into_iter()
            .find(|a| a.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown assumption {s:?}"))
    }
}

/// Outcome of checking the connectivity and sampling assumptions on a
/// schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub k: usize,
    pub windows_checked: usize,
    pub a1: bool,
    pub p_lower: Option<f64>,
    pub a2: bool,
    pub a3: bool,
    /// Total graph in one-based arc lines.
    pub total_graph: Vec<String>,
    pub a4: bool,
    pub a5: bool,
    pub a6: bool,
    pub p_upper: Option<f64>,
    pub a7: bool,
    pub a8: bool,
    pub a9: bool,
    /// Positive-cluster partition of the total graph, one-based.
    pub partition: Vec<Vec<usize>>,
}

impl AssumptionReport {
    pub fn holds(&self, a: Assumption) -> bool {
        match a {
            Assumption::A1 => self.a1,
            Assumption::A2 => self.a2,
            Assumption::A3 => self.a3,
            Assumption::A4 => self.a4,
            Assumption::A5 => self.a5,
            Assumption::A6 => self.a6,
            Assumption::A7 => self.a7,
            Assumption::A8 => self.a8,
            Assumption::A9 => self.a9,
        }
    }

    pub fn satisfied(&self) -> Vec<Assumption> {
        Assumption::ALL.into_iter().filter(|&a| self.holds(a)).collect()
    }

    pub fn cluster_count(&self) -> usize {
        self.partition.len()
    }
}

/// Checks A1-A9 over every window of `k` consecutive slots.
///
/// A periodic schedule repeats, so one period of window starts covers the
/// whole infinite horizon; fewer starts are checked when the horizon is
/// shorter than that. A sign conflict anywhere in the schedule is returned as
/// an error: A3 fails and the total graph (and with it A9) is undefined.
pub fn check_assumptions(sched: &GraphSchedule, horizon: u64, k: usize) -> Result<AssumptionReport, EnvError> {
    if k == 0 || (k as u64) > horizon {
        return Err(EnvError::BadWindow { k, horizon });
    }
    let total = union_graph(sched.graphs())?;
    let partition: PositiveClusterPartition = total.positive_cluster_partition();

    let starts = match sched.mode() {
        ScheduleMode::Static => 1,
        ScheduleMode::Periodic => (sched.period() as u64).min(horizon - k as u64 + 1) as usize,
    };
    let (mut a2, mut a4, mut a5, mut a7, mut a8, mut a9) = (true, true, true, true, true, true);
    for start in 0..starts {
        let window: Vec<SignedDigraph> =
            (0..k).map(|dt| sched.graph_at((start + dt) as u64).clone()).collect();
        let union = union_graph(&window)?;
        let pos = union.subgraph_by_sign(Sign::Positive);
        let neg = union.subgraph_by_sign(Sign::Negative);
        let pos_conn = pos.connectivity();
        let neg_conn = neg.connectivity();
        a2 &= union.connectivity().strong;
        a4 &= pos_conn.strong;
        a5 &= neg_conn.strong;
        a7 &= pos_conn.center.is_some();
        a8 &= neg_conn.weak;
        a9 &= partition.blocks().iter().all(|b| pos.has_spanning_tree_within(b));
    }

    let p_lower = sched.p_lower();
    let p_upper = sched.p_upper();
    Ok(AssumptionReport {
        k,
        windows_checked: starts,
        a1: p_lower.is_none_or(|p| p > 0.0),
        p_lower,
        a2,
        a3: true,
        total_graph: total.arc_lines(),
        a4,
        a5,
        // independence holds by construction; the bound needs p^* < 1
        a6: p_upper.is_none_or(|p| p < 1.0),
        p_upper,
        a7,
        a8,
        a9,
        partition: partition.one_based(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Sign::{Negative as N, Positive as P};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn g(n: usize, arcs: &[(usize, usize, Sign)]) -> SignedDigraph {
        let arcs: Vec<_> = arcs.iter().map(|&(t, h, s)| (t - 1, h - 1, s)).collect();
        SignedDigraph::from_triples(n, &arcs).unwrap()
    }

    fn complete(n: usize, sign: Sign) -> Vec<(usize, usize, Sign)> {
        let mut v = Vec::new();
        for i in 1..=n {
            for j in 1..=n {
                if i != j {
                    v.push((i, j, sign));
                }
            }
        }
        v
    }

    fn two_cliques() -> SignedDigraph {
        let mut arcs = Vec::new();
        for base in [0, 3] {
            for i in 1..=3 {
                for j in 1..=3 {
                    if i != j {
                        arcs.push((base + i, base + j, P));
                    }
                }
            }
        }
        for i in 1..=3 {
            for j in 4..=6 {
                arcs.push((i, j, N));
                arcs.push((j, i, N));
            }
        }
        g(6, &arcs)
    }

    #[test]
    fn schedule_indexing() {
        let g0 = g(3, &[(1, 2, P)]);
        let g1 = g(3, &[(2, 3, P)]);
        let g2 = g(3, &[(3, 1, P)]);
        let s = GraphSchedule::fixed(g0.clone(), ArcProbabilities::Uniform(1.0)).unwrap();
        assert_eq!(schedule_graph(&s, 1_000_000), &g0);
        let s = GraphSchedule::periodic(vec![g0.clone(), g1.clone()], ArcProbabilities::Uniform(1.0)).unwrap();
        assert_eq!(schedule_graph(&s, 3), &g1);
        let s = GraphSchedule::periodic(vec![g0.clone(), g1, g2], ArcProbabilities::Uniform(1.0)).unwrap();
        assert_eq!(schedule_graph(&s, 0), &g0);
    }

    #[test]
    fn schedule_validation() {
        let h = g(3, &[(1, 2, P)]);
        assert!(matches!(
            GraphSchedule::fixed(h.clone(), ArcProbabilities::Uniform(0.0)),
            Err(EnvError::BadProbability { .. })
        ));
        assert!(matches!(
            GraphSchedule::fixed(h.clone(), ArcProbabilities::PerArc { default: None, map: BTreeMap::new() }),
            Err(EnvError::MissingProbability { tail: 0, head: 1 })
        ));
        assert!(GraphSchedule::build(ScheduleMode::Static, vec![h.clone(), h], ArcProbabilities::Uniform(1.0)).is_err());
        assert!(matches!(
            GraphSchedule::periodic(vec![], ArcProbabilities::Uniform(1.0)),
            Err(EnvError::EmptySchedule)
        ));
    }

    #[test]
    fn certain_and_empty_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = g(4, &complete(4, P));
        let s = GraphSchedule::fixed(h.clone(), ArcProbabilities::Uniform(1.0)).unwrap();
        assert_eq!(sample_interaction_graph(&s, 5, &mut rng).len(), h.arc_count());
        let s = GraphSchedule::fixed(g(4, &[]), ArcProbabilities::Uniform(0.5)).unwrap();
        assert!(sample_interaction_graph(&s, 0, &mut rng).is_empty());
    }

    #[test]
    fn per_arc_probabilities_override_default() {
        let h = g(3, &[(1, 2, P), (2, 3, N)]);
        let map = BTreeMap::from([((1, 2), 0.25)]);
        let s = GraphSchedule::fixed(h, ArcProbabilities::PerArc { default: Some(0.75), map }).unwrap();
        assert_eq!(s.p_lower(), Some(0.25));
        assert_eq!(s.p_upper(), Some(0.75));
    }

    #[test]
    fn neighbours_are_tails() {
        let e = InteractionGraph::from_arcs(3, 0, vec![SignedArc::new(1, 0, P), SignedArc::new(2, 0, N)]);
        assert_eq!(e.positive_neighbors(0).collect::<Vec<_>>(), vec![1]);
        assert_eq!(e.negative_neighbors(0).collect::<Vec<_>>(), vec![2]);
        assert_eq!(e.positive_neighbors(1).count(), 0);
    }

    #[test]
    fn attention_values() {
        assert_eq!(AttentionSchedule::constant(0.3).value(17), 0.3);
        assert_eq!(AttentionSchedule::power_decay(0.5, 2.0).value(1), 0.125);
        assert_eq!(AttentionSchedule::constant(4.0).value(0), 1.0);
        assert_eq!(AttentionSchedule::power_decay(3.0, 1.0).value(0), 1.0);
        assert_eq!(AttentionSchedule::power_decay(3.0, 1.0).value(5), 0.5);
        let e = AttentionSchedule::Explicit { values: vec![1.0, 0.2], tail: 0.1 };
        assert_eq!((e.value(0), e.value(1), e.value(2), e.value(99)), (1.0, 0.2, 0.1, 0.1));
        assert!(AttentionSchedule::constant(-0.1).validate("b").is_err());
        assert!(AttentionSchedule::power_decay(0.5, f64::NAN).validate("d").is_err());
        assert!(AttentionSchedule::constant(2.0).validate("d").is_ok());
    }

    #[test]
    fn degenerate_attention_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let zero = AttentionSchedule::constant(0.0);
        let one = AttentionSchedule::constant(1.0);
        for t in 0..1000 {
            assert!(!sample_attention(&zero, t, &mut rng));
            assert!(sample_attention(&one, t, &mut rng));
        }
    }

    #[test]
    fn summability_classifier() {
        assert!(AttentionSchedule::power_decay(0.5, 2.0).is_summable());
        assert!(!AttentionSchedule::power_decay(0.5, 1.0).is_summable());
        assert!(!AttentionSchedule::constant(0.3).is_summable());
        assert!(AttentionSchedule::constant(0.0).is_summable());
        let r = SummabilityReport::of(&AttentionSchedule::power_decay(1.0, 2.0), 100_000);
        assert!(r.summable);
        let exact = std::f64::consts::PI.powi(2) / 6.0;
        assert!((r.partial_sum - exact).abs() < 1.1e-5);
    }

    #[test]
    fn assumptions_on_complete_positive_graph() {
        let s = GraphSchedule::fixed(g(4, &complete(4, P)), ArcProbabilities::Uniform(0.5)).unwrap();
        for k in [1, 3] {
            let r = check_assumptions(&s, 10, k).unwrap();
            assert!(r.a1 && r.a2 && r.a3 && r.a4 && r.a7 && r.a9 && r.a6);
            assert!(!r.a5 && !r.a8);
            assert_eq!(r.p_lower, Some(0.5));
            assert_eq!(r.cluster_count(), 1);
        }
    }

    #[test]
    fn assumptions_on_two_cliques() {
        let s = GraphSchedule::fixed(two_cliques(), ArcProbabilities::Uniform(0.5)).unwrap();
        let r = check_assumptions(&s, 100, 1).unwrap();
        assert!(r.a9 && !r.a4 && !r.a7);
        assert!(r.a2 && r.a5 && r.a8);
        assert_eq!(r.partition, vec![vec![1, 2, 3], vec![4, 5, 6]]);
    }

    #[test]
    fn sign_flip_across_period_is_a_conflict() {
        let s = GraphSchedule::periodic(vec![g(3, &[(1, 2, P)]), g(3, &[(1, 2, N)])], ArcProbabilities::Uniform(0.5))
            .unwrap();
        assert_eq!(
            check_assumptions(&s, 10, 1).unwrap_err(),
            EnvError::Graph(GraphError::SignConflict { tail: 0, head: 1 })
        );
    }

    #[test]
    fn periodic_windows() {
        // each slot alone is disconnected, every two-slot window is a cycle
        let s = GraphSchedule::periodic(
            vec![g(3, &[(1, 2, P), (3, 1, P)]), g(3, &[(2, 3, P)])],
            ArcProbabilities::Uniform(1.0),
        )
        .unwrap();
        assert!(!check_assumptions(&s, 10, 1).unwrap().a4);
        let r = check_assumptions(&s, 10, 2).unwrap();
        assert!(r.a4 && r.a2 && r.a7);
        assert_eq!(r.windows_checked, 2);
        assert!(!r.a6, "q = 1 gives p^* = 1");
        assert!(check_assumptions(&s, 1, 2).is_err());
    }

    #[test]
    fn assumption_names_round_trip() {
        for a in Assumption::ALL {
            assert_eq!(a.to_string().parse::<Assumption>().unwrap(), a);
        }
        assert!("a10".parse::<Assumption>().is_err());
    }
}
