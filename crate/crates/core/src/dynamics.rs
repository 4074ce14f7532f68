//! Node state update.
//!
//! Every node reads the time-`t` state and all nodes move simultaneously:
//!
//! ```text
//! s_i(t+1) = s_i(t) + alpha * B_t * h_i^+(t) + beta * D_t * h_i^-(t)
//! ```
//!
//! `h_i^+` is the usual consensus pull towards positive neighbours. `h_i^-`
//! depends on the model: the relative-state-flipping model pushes away from
//! negative neighbours using relative state only, while the state-flipping
//! model attracts towards the negated neighbour state.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::InteractionGraph;
use crate::graph::Sign;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error("alpha and beta must be positive and finite (alpha = {alpha}, beta = {beta})")]
    InvalidParams { alpha: f64, beta: f64 },
    #[error("state of node {node} became non-finite at slot {t}")]
    NonFiniteState { t: u64, node: usize },
    #[error("state has {got} entries, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// `h_i^- = sum_j (s_i - s_j)`
    #[default]
    Relative,
    /// `h_i^- = -sum_j (s_i + s_j)`
    Flip,
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Relative => "relative",
            Model::Flip => "flip",
        })
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "relative" => Ok(Model::Relative),
            "flip" => Ok(Model::Flip),
            _ => Err(format!("unknown model {s:?}, expected relative or flip")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsParams {
    pub alpha: f64,
    pub beta: f64,
    #[serde(default)]
    pub model: Model,
}

impl DynamicsParams {
    pub fn new(alpha: f64, beta: f64, model: Model) -> Result<Self, DynamicsError> {
        let p = DynamicsParams { alpha, beta, model };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if ok(self.alpha) && ok(self.beta) {
            Ok(())
        } else {
            Err(DynamicsError::InvalidParams { alpha: self.alpha, beta: self.beta })
        }
    }
}

/// Node states at slot `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub t: u64,
    pub values: Vec<f64>,
}

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        StateVector { t: 0, values }
    }

    pub fn at(t: u64, values: Vec<f64>) -> Self {
        StateVector { t, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn spread(&self) -> f64 {
        self.max() - self.min()
    }
}

/// `h_i^+(t) = -sum_{j in N_i^+(t)} (s_i - s_j)`.
pub fn positive_recommendation(i: usize, s: &StateVector, e: &InteractionGraph) -> f64 {
    let si = s.values[i];
    -e.positive_neighbors(i).map(|j| si - s.values[j]).sum::<f64>()
}

/// `h_i^-(t)` under `model`; zero when `i` has no negative neighbour.
pub fn negative_recommendation(i: usize, s: &StateVector, e: &InteractionGraph, model: Model) -> f64 {
    let si = s.values[i];
    match model {
        Model::Relative => e.negative_neighbors(i).map(|j| si - s.values[j]).sum(),
        Model::Flip => -e.negative_neighbors(i).map(|j| si + s.values[j]).sum::<f64>(),
    }
}

/// Reusable buffers for [`step_into`].
#[derive(Debug, Clone, Default)]
pub struct StepScratch {
    pos: Vec<f64>,
    neg: Vec<f64>,
}

/// One synchronous update, writing `s(t+1)` into `out`.
///
/// Accumulates both recommendations in a single pass over the realized arcs.
/// Terms switched off by `B_t = 0` or `D_t = 0` are skipped rather than
/// multiplied by zero, so a silent slot leaves the state bit-for-bit intact.
pub fn step_into(
    s: &StateVector,
    e: &InteractionGraph,
    b: bool,
    d: bool,
    p: &DynamicsParams,
    scratch: &mut StepScratch,
    out: &mut StateVector,
) -> Result<(), DynamicsError> {
    let n = s.len();
    if e.node_count() != n {
        return Err(DynamicsError::LengthMismatch { expected: e.node_count(), got: n });
    }
    let x = &s.values;
    out.t = s.t + 1;
    out.values.clear();
    out.values.extend_from_slice(x);
    if !(b || d) || e.is_empty() {
        return Ok(());
    }

    scratch.pos.clear();
    scratch.pos.resize(n, 0.0);
    scratch.neg.clear();
    scratch.neg.resize(n, 0.0);
    let (mut any_pos, mut any_neg) = (false, false);
    for arc in e.arcs() {
        let (i, j) = (arc.head, arc.tail);
        match arc.sign {
            Sign::Positive if b => {
                scratch.pos[i] -= x[i] - x[j];
                any_pos = true;
            }
            Sign::Negative if d => {
                scratch.neg[i] += match p.model {
                    Model::Relative => x[i] - x[j],
                    Model::Flip => -(x[i] + x[j]),
                };
                any_neg = true;
            }
            _ => {}
        }
    }
    for i in 0..n {
        let mut v = x[i];
        if any_pos {
            v += p.alpha * scratch.pos[i];
        }
        if any_neg {
            v += p.beta * scratch.neg[i];
        }
        if !v.is_finite() {
            return Err(DynamicsError::NonFiniteState { t: out.t, node: i });
        }
        out.values[i] = v;
    }
    Ok(())
}

/// One synchronous update of every node.
pub fn step(s: &StateVector, e: &InteractionGraph, b: bool, d: bool, p: &DynamicsParams) -> Result<StateVector, DynamicsError> {
    let mut out = StateVector::at(s.t + 1, Vec::with_capacity(s.len()));
    step_into(s, e, b, d, p, &mut StepScratch::default(), &mut out)?;
    Ok(out)
}
