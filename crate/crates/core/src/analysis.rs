//! Trajectory metrics, the constants appearing in the convergence conditions,
//! and finite-horizon classification of a run's asymptotic behaviour.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::AttentionSchedule;
use crate::graph::PositiveClusterPartition;
use crate::trajectory::{Termination, Trajectory};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("alpha = {alpha} is outside (0, 1/(n-1)) = (0, {bound}) for n = {n}")]
    InvalidAlpha { alpha: f64, n: usize, bound: f64 },
    #[error("need n >= 3, K >= 1 and at least one block (n = {n}, K = {k}, M = {m})")]
    BadShape { n: usize, k: usize, m: usize },
}

/// Extremes and spreads of one state vector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadMetrics {
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    /// `max - min` inside each block of the partition.
    pub cluster_spreads: Vec<f64>,
}

pub fn spread_metrics(s: &[f64], part: &PositiveClusterPartition) -> SpreadMetrics {
    let (min, max) = extremes(s.iter().copied());
    let cluster_spreads = part
        .blocks()
        .iter()
        .map(|b| {
            let (lo, hi) = extremes(b.iter().map(|&i| s[i]));
            hi - lo
        })
        .collect();
    SpreadMetrics { min, max, spread: max - min, cluster_spreads }
}

fn extremes(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Constants from the deviation-consensus and clustering conditions, with the
/// per-block sequences evaluated over `t in [m K0, (m+1) K0 - 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremConstants {
    /// `min{alpha, 1 - (n-1) alpha}`
    pub rho_star: f64,
    /// `1 - alpha (n-1)`
    pub lambda_star: f64,
    /// `(2n - 3) K`
    pub k0: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Products of `b_t` over each block.
    pub j: Vec<f64>,
    /// Sums of `d_t` over each block.
    pub w: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
pub fn theorem_constants(
    n: usize,
    k: usize,
    alpha: f64,
    beta: f64,
    p_star: f64,
    b: &AttentionSchedule,
    d: &AttentionSchedule,
    blocks: usize,
) -> Result<TheoremConstants, AnalysisError> {
    if n < 3 || k == 0 || blocks == 0 {
        return Err(AnalysisError::BadShape { n, k, m: blocks });
    }
    let nm1 = (n - 1) as f64;
    if !(alpha > 0.0 && alpha * nm1 < 1.0) {
        return Err(AnalysisError::InvalidAlpha { alpha, n, bound: 1.0 / nm1 });
    }
    let rho_star = alpha.min(1.0 - nm1 * alpha);
    let lambda_star = 1.0 - alpha * nm1;
    let k0 = (2 * n - 3) * k;
    let x_scale = p_star.powi((n - 1) as i32) * rho_star.powi(k0 as i32) / 2.0;
    let y_scale = (1.0 + 2.0 * beta * nm1).powi(k0 as i32);

    let mut out = TheoremConstants { rho_star, lambda_star, k0, x: vec![], y: vec![], j: vec![], w: vec![] };
    for m in 0..blocks as u64 {
        let slots = (m * k0 as u64)..((m + 1) * k0 as u64);
        let (mut bd, mut no_d, mut prod_b, mut sum_d) = (1.0, 1.0, 1.0, 0.0);
        for t in slots {
            let (bt, dt) = (b.value(t), d.value(t));
            bd *= bt * (1.0 - dt);
            no_d *= 1.0 - dt;
            prod_b *= bt;
            sum_d += dt;
        }
        out.x.push(x_scale * bd);
        out.y.push(y_scale * (1.0 - no_d));
        out.j.push(prod_b);
        out.w.push(sum_d);
    }
    Ok(out)
}

impl TheoremConstants {
    /// `X_m - Y_m` per block.
    pub fn margins(&self) -> Vec<f64> {
        self.x.iter().zip(&self.y).map(|(x, y)| x - y).collect()
    }

    /// Whether every `X_m - Y_m` lies in `[0, 1]`.
    pub fn margins_in_unit_interval(&self) -> bool {
        self.margins().iter().all(|&v| (0.0..=1.0).contains(&v))
    }

    /// `W(m) / J(m)` per block; infinite where `J(m) = 0`.
    pub fn w_over_j(&self) -> Vec<f64> {
        self.w
            .iter()
            .zip(&self.j)
            .map(|(&w, &j)| if j > 0.0 { w / j } else if w > 0.0 { f64::INFINITY } else { 0.0 })
            .collect()
    }
}

/// Thresholds turning almost-sure limit statements into finite-horizon
/// certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassificationCriteria {
    pub eps: f64,
    /// Tail length in recorded slots; `None` means 10% of the recorded slots
    /// but at least 1000 (or everything, for shorter runs).
    pub tail_window: Option<usize>,
    pub divergence_threshold: f64,
    /// Minimum gap between block tail means for a clustered verdict;
    /// `None` means `10 * eps`.
    pub sep: Option<f64>,
}

impl Default for ClassificationCriteria {
    fn default() -> Self {
        ClassificationCriteria { eps: 1e-6, tail_window: None, divergence_threshold: 1e6, sep: None }
    }
}

impl ClassificationCriteria {
    pub fn separation(&self) -> f64 {
        self.sep.unwrap_or(10.0 * self.eps)
    }

    pub fn tail_len(&self, recorded: usize) -> usize {
        let want = self.tail_window.unwrap_or_else(|| recorded.div_ceil(10).max(1000));
        want.clamp(1, recorded.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictKind {
    Converged,
    DeviationConsensus,
    Clustered,
    Diverged,
    Undecided,
}

impl VerdictKind {
    pub const ALL: [VerdictKind; 5] = [
        VerdictKind::Converged,
        VerdictKind::DeviationConsensus,
        VerdictKind::Clustered,
        VerdictKind::Diverged,
        VerdictKind::Undecided,
    ];

    pub fn name(self) -> &'static str {
        match self {
            VerdictKind::Converged => "converged",
            VerdictKind::DeviationConsensus => "deviation-consensus",
            VerdictKind::Clustered => "clustered",
            VerdictKind::Diverged => "diverged",
            VerdictKind::Undecided => "undecided",
        }
    }
}

/// Tail statistics backing a verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub tail_len: usize,
    pub peak_spread: f64,
    pub max_node_oscillation: f64,
    pub max_tail_spread: f64,
    pub max_tail_cluster_spread: f64,
    /// Largest gap between the tail means of two blocks.
    pub block_separation: f64,
    pub termination: Termination,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub evidence: Evidence,
}

/// Classifies a trajectory, checking in order: diverged, converged,
/// deviation consensus, clustered, and otherwise undecided.
pub fn classify_trajectory(
    traj: &Trajectory,
    part: &PositiveClusterPartition,
    crit: &ClassificationCriteria,
) -> Verdict {
    let records = &traj.records;
    let tail_len = crit.tail_len(records.len());
    let tail = &records[records.len().saturating_sub(tail_len)..];
    let n = part.node_count();

    let peak_spread = records.iter().map(|r| r.metrics.spread).fold(0.0, f64::max);
    let mut node_lo = vec![f64::INFINITY; n];
    let mut node_hi = vec![f64::NEG_INFINITY; n];
    let mut block_sums = vec![0.0; part.len()];
    let (mut max_tail_spread, mut max_tail_cluster_spread) = (0.0f64, 0.0f64);
    for r in tail {
        for (i, &v) in r.state.iter().enumerate() {
            node_lo[i] = node_lo[i].min(v);
            node_hi[i] = node_hi[i].max(v);
        }
        max_tail_spread = max_tail_spread.max(r.metrics.spread);
        for &c in &r.metrics.cluster_spreads {
            max_tail_cluster_spread = max_tail_cluster_spread.max(c);
        }
        for (j, block) in part.blocks().iter().enumerate() {
            block_sums[j] += block.iter().map(|&i| r.state[i]).sum::<f64>() / block.len() as f64;
        }
    }
    let max_node_oscillation = node_hi.iter().zip(&node_lo).map(|(h, l)| h - l).fold(0.0, f64::max);
    let means: Vec<f64> = block_sums.iter().map(|s| s / tail.len().max(1) as f64).collect();
    let (lo, hi) = extremes(means.iter().copied());
    let block_separation = if means.len() >= 2 { hi - lo } else { 0.0 };

    let evidence = Evidence {
        tail_len: tail.len(),
        peak_spread,
        max_node_oscillation,
        max_tail_spread,
        max_tail_cluster_spread,
        block_separation,
        termination: traj.termination,
    };
    let kind = if traj.termination.is_divergent() || !(peak_spread <= crit.divergence_threshold) {
        VerdictKind::Diverged
    } else if max_node_oscillation < crit.eps {
        VerdictKind::Converged
    } else if max_tail_spread < crit.eps {
        VerdictKind::DeviationConsensus
    } else if max_tail_cluster_spread < crit.eps && part.len() >= 2 && block_separation > crit.separation() {
        VerdictKind::Clustered
    } else {
        VerdictKind::Undecided
    };
    Verdict { kind, evidence }
}

/// Trend of `W(m)/J(m)`: nonincreasing over the second half of the blocks and
/// the last ratio at most `1e-3` of the first.
pub fn ratio_trends_to_zero(ratios: &[f64]) -> bool {
    let (Some(&first), Some(&last)) = (ratios.first(), ratios.last()) else {
        return false;
    };
    let half = &ratios[ratios.len() / 2..];
    let nonincreasing = half.windows(2).all(|w| w[1] <= w[0]);
    last.is_finite() && nonincreasing && (last == 0.0 || last <= 1e-3 * first)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::Record;

    fn trajectory(states: Vec<Vec<f64>>, part: &PositiveClusterPartition) -> Trajectory {
        let records = states
            .into_iter()
            .enumerate()
            .map(|(t, s)| Record { t: t as u64, metrics: spread_metrics(&s, part), state: s, events: None })
            .collect();
        Trajectory { trial: 0, records, termination: Termination::Completed }
    }

    #[test]
    fn spread_examples() {
        let m = spread_metrics(&[1.0, 1.0, 1.0], &PositiveClusterPartition::whole(3));
        assert_eq!((m.min, m.max, m.spread, m.cluster_spreads), (1.0, 1.0, 0.0, vec![0.0]));

        let part = PositiveClusterPartition::from_explicit(3, vec![vec![0, 1], vec![2]]).unwrap();
        let m = spread_metrics(&[0.0, 1.0, 5.0], &part);
        assert_eq!(m.spread, 5.0);
        assert_eq!(m.cluster_spreads, vec![1.0, 0.0]);

        let m = spread_metrics(&[0.3, -2.0, 7.5, 1.0], &PositiveClusterPartition::singletons(4));
        assert!(m.cluster_spreads.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn constants_small_example() {
        let c = theorem_constants(
            3,
            1,
            0.25,
            1.0,
            0.5,
            &AttentionSchedule::constant(1.0),
            &AttentionSchedule::constant(0.0),
            4,
        )
        .unwrap();
        assert_eq!(c.k0, 3);
        assert_eq!(c.rho_star, 0.25);
        assert!(c.x.iter().all(|&x| (x - 0.001953125).abs() < 1e-15));
        assert!(c.y.iter().all(|&y| y == 0.0));
        assert!(c.j.iter().all(|&j| j == 1.0));
        assert!(c.margins_in_unit_interval());
    }

    #[test]
    fn constants_rho_lambda() {
        let b = AttentionSchedule::constant(0.5);
        let d = AttentionSchedule::constant(0.1);
        let c = theorem_constants(4, 2, 0.2, 1.0, 0.5, &b, &d, 1).unwrap();
        assert_eq!(c.k0, 10);
        assert_eq!(c.rho_star, 0.2);
        assert!((c.lambda_star - 0.4).abs() < 1e-15);
        assert!(c.y[0] > 0.0);
    }

    #[test]
    fn constants_reject_bad_alpha() {
        let a = AttentionSchedule::constant(0.5);
        for alpha in [0.0, 0.5, 0.6, -0.1] {
            assert!(matches!(
                theorem_constants(3, 1, alpha, 1.0, 0.5, &a, &a, 1),
                Err(AnalysisError::InvalidAlpha { .. })
            ));
        }
        assert!(theorem_constants(3, 0, 0.1, 1.0, 0.5, &a, &a, 1).is_err());
    }

    #[test]
    fn w_partial_sums_match_direct_summation() {
        let d = AttentionSchedule::power_decay(0.5, 2.0);
        let c = theorem_constants(5, 1, 0.1, 1.0, 0.5, &AttentionSchedule::constant(0.5), &d, 500).unwrap();
        let direct: f64 = (0..(500 * c.k0) as u64).map(|t| 0.5 / ((t + 1) as f64).powi(2)).sum();
        let blocks: f64 = c.w.iter().sum();
        assert!((direct - blocks).abs() < 1e-12);
        assert!(ratio_trends_to_zero(&c.w_over_j()));
        let flat = theorem_constants(5, 1, 0.1, 1.0, 0.5, &AttentionSchedule::constant(0.5), &AttentionSchedule::constant(0.2), 50)
            .unwrap();
        assert!(!ratio_trends_to_zero(&flat.w_over_j()));
    }

    #[test]
    fn classify_constant_is_converged() {
        let part = PositiveClusterPartition::whole(3);
        let t = trajectory(vec![vec![1.0; 3]; 50], &part);
        assert_eq!(classify_trajectory(&t, &part, &ClassificationCriteria::default()).kind, VerdictKind::Converged);
    }

    #[test]
    fn classify_common_drift_is_deviation_consensus() {
        let part = PositiveClusterPartition::whole(3);
        let t = trajectory((0..50).map(|t| vec![t as f64 * 0.001; 3]).collect(), &part);
        let v = classify_trajectory(&t, &part, &ClassificationCriteria::default());
        assert_eq!(v.kind, VerdictKind::DeviationConsensus);
        assert!(v.evidence.max_node_oscillation > 1e-6);
    }

    #[test]
    fn classify_two_block_tails() {
        // block {1,2} settles at 0, block {3,4} at 5, within-block gaps halve
        let part = PositiveClusterPartition::from_explicit(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let states: Vec<Vec<f64>> = (0..200)
            .map(|t| {
                let g = 0.5f64.powi(t);
                vec![-g, g, 5.0 - g, 5.0 + g + (t as f64) * 1e-3]
            })
            .collect();
        // node 4 keeps drifting, so nothing converges; within-block spread
        // of block 2 is g + g + t*1e-3 which never vanishes -> undecided
        let crit = ClassificationCriteria { tail_window: Some(20), ..Default::default() };
        assert_eq!(classify_trajectory(&trajectory(states, &part), &part, &crit).kind, VerdictKind::Undecided);

        let states: Vec<Vec<f64>> = (0..200)
            .map(|t| {
                let g = 0.5f64.powi(t);
                let drift = t as f64 * 1e-3;
                vec![-g + drift, g + drift, 5.0 - g, 5.0 + g]
            })
            .collect();
        let v = classify_trajectory(&trajectory(states, &part), &part, &crit);
        assert_eq!(v.kind, VerdictKind::Clustered);
        assert!(v.evidence.block_separation > 4.0);
        assert!(v.evidence.max_tail_cluster_spread < 1e-6);
    }

    #[test]
    fn classify_merging_blocks_is_converged() {
        let part = PositiveClusterPartition::from_explicit(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let states = vec![vec![2.0; 4]; 30];
        assert_eq!(
            classify_trajectory(&trajectory(states, &part), &part, &ClassificationCriteria::default()).kind,
            VerdictKind::Converged
        );
    }

    #[test]
    fn classify_divergence() {
        let part = PositiveClusterPartition::whole(3);
        let mut t = trajectory(vec![vec![0.0, 1.0, 2e6], vec![0.0, 0.0, 0.0]], &part);
        assert_eq!(classify_trajectory(&t, &part, &ClassificationCriteria::default()).kind, VerdictKind::Diverged);
        t = trajectory(vec![vec![0.0; 3]; 5], &part);
        t.termination = Termination::NonFinite { t: 4 };
        assert_eq!(classify_trajectory(&t, &part, &ClassificationCriteria::default()).kind, VerdictKind::Diverged);
    }

    #[test]
    fn classify_is_translation_invariant() {
        let part = PositiveClusterPartition::from_explicit(4, vec![vec![0, 1], vec![2, 3]]).unwrap();
        let crit = ClassificationCriteria { tail_window: Some(10), ..Default::default() };
        let base: Vec<Vec<f64>> = (0..60)
            .map(|t| {
                let g = 0.5f64.powi(t);
                vec![-g + t as f64, g + t as f64, 3.0 - g, 3.0 + g]
            })
            .collect();
        let kind = classify_trajectory(&trajectory(base.clone(), &part), &part, &crit).kind;
        for c in [-7.25, 0.5, 100.0] {
            let shifted = base.iter().map(|s| s.iter().map(|v| v + c).collect()).collect();
            assert_eq!(classify_trajectory(&trajectory(shifted, &part), &part, &crit).kind, kind);
        }
    }

    #[test]
    fn default_tail_window() {
        let c = ClassificationCriteria::default();
        assert_eq!(c.tail_len(10_001), 1001);
        assert_eq!(c.tail_len(100_001), 10_001);
        assert_eq!(c.tail_len(500), 500);
        assert_eq!(ClassificationCriteria { tail_window: Some(7), ..c }.tail_len(3), 3);
    }
}
