use std::io::Write;

use serde::Serialize;

use crate::analysis::SpreadMetrics;
use crate::env::SlotEvents;

/// One recorded slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub t: u64,
    pub metrics: SpreadMetrics,
    pub state: Vec<f64>,
    /// Randomness realized at slot `t`, i.e. what drives `t -> t + 1`. Absent
    /// on the final row.
    pub events: Option<SlotEvents>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum Termination {
    /// Ran the full horizon.
    Completed,
    /// Spread crossed the classification divergence threshold at slot `t`.
    DivergenceThreshold { t: u64, spread: f64 },
    /// Some `|s_i|` exceeded the numeric limit at slot `t`.
    NumericLimit { t: u64 },
    /// The update at slot `t` produced a non-finite state; `t` is the last
    /// finite slot.
    NonFinite { t: u64 },
}

impl Termination {
    pub fn is_divergent(&self) -> bool {
        !matches!(self, Termination::Completed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub trial: usize,
    pub records: Vec<Record>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> &Record {
        self.records.last().expect("slot 0 is always recorded")
    }

    /// Writes `t,h,H,spread,theta_1..theta_Tp,B,D,m_edges`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let blocks = self.records.first().map_or(0, |r| r.metrics.cluster_spreads.len());
        let mut header: Vec<String> = ["t", "h", "H", "spread"].iter().map(|s| s.to_string()).collect();
        header.extend((1..=blocks).map(|j| format!("theta_{j}")));
        header.extend(["B", "D", "m_edges"].iter().map(|s| s.to_string()));
        w.write_record(&header)?;
        for r in &self.records {
            let m = &r.metrics;
            let mut row = vec![r.t.to_string(), m.min.to_string(), m.max.to_string(), m.spread.to_string()];
            row.extend(m.cluster_spreads.iter().map(|v| v.to_string()));
            match r.events {
                Some(e) => row.extend([u8::from(e.b).to_string(), u8::from(e.d).to_string(), e.arcs.to_string()]),
                None => row.extend([String::new(), String::new(), String::new()]),
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
