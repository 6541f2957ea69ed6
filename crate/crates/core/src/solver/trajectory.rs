use serde::{Deserialize, Serialize};

use crate::spectral::StateField;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Completed,
    BlowUp { t_est: f64 },
    ToleranceFailure {
        /// Non-finite factors are written as `null` and read back as NaN.
        #[serde(with = "finite_or_null")]
        factor: f64,
        iterations: usize,
        t: f64,
    },
}

mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl Status {
    pub fn is_completed(&self) -> bool {
        matches!(self, Status::Completed)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::BlowUp { .. } => "blow_up",
            Status::ToleranceFailure { .. } => "tolerance_failure",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeDiagnostics {
    pub t: f64,
    pub h_norm: f64,
    pub graph_norm: f64,
    /// Picard sweeps of the window containing this node (0 for `t = 0`).
    pub iterations: usize,
    /// Last observed ratio of successive Picard distances, if any.
    pub contraction: Option<f64>,
}

/// Solution samples on a time mesh, with per-node diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub nodes: Vec<f64>,
    pub states: Vec<StateField>,
    pub diagnostics: Vec<NodeDiagnostics>,
    pub status: Status,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn last(&self) -> &StateField {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn t_end(&self) -> f64 {
        *self.nodes.last().unwrap_or(&0.0)
    }

    /// Index of the node closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let i = self.nodes.partition_point(|&s| s < t);
        if i == 0 {
            0
        } else if i == self.nodes.len() || t - self.nodes[i - 1] <= self.nodes[i] - t {
            i - 1
        } else {
            i
        }
    }
}
