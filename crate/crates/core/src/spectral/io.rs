use std::path::Path;

use serde::{Deserialize, Serialize};

use super::operator::{DiagonalizedOperator, Potential};
use super::symbol::SymbolSpec;
use crate::error::{FracError, Result};

pub const OPERATOR_SCHEMA_VERSION: u32 = 1;

/// JSON description of an operator: symbol preset, grid, potentials and the
/// resulting eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorDoc {
    pub schema_version: u32,
    #[serde(flatten)]
    pub symbol: SymbolSpec,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Potential>,
    #[serde(default)]
    pub eigenvalues: Vec<f64>,
}

impl OperatorDoc {
    pub fn from_operator(op: &DiagonalizedOperator) -> Result<Self> {
        let symbol = op
            .symbol()
            .cloned()
            .ok_or_else(|| FracError::invalid("injected matrices have no symbol to serialize"))?;
        Ok(OperatorDoc {
            schema_version: OPERATOR_SCHEMA_VERSION,
            symbol,
            n: op.side(),
            length: op.length(),
            potential: op.potential().cloned(),
            eigenvalues: op.eigenvalues().to_vec(),
        })
    }

    /// Rebuilds the operator; stored eigenvalues, if any, must match.
    pub fn build(&self) -> Result<DiagonalizedOperator> {
        let op = match &self.potential {
            Some(p) => DiagonalizedOperator::build_perturbed(self.symbol.clone(), p.clone(), self.n, self.length)?,
            None => DiagonalizedOperator::build_diagonal(self.symbol.clone(), self.n, self.length)?,
        };
        if !self.eigenvalues.is_empty() {
            if self.eigenvalues.len() != op.modes() {
                return Err(FracError::Shape { expected: op.modes(), got: self.eigenvalues.len() });
            }
            let scale = op.eigenvalues().iter().fold(1.0f64, |m, a| m.max(a.abs()));
            let worst = self
                .eigenvalues
                .iter()
                .zip(op.eigenvalues())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if worst > 1e-8 * scale {
                return Err(FracError::invalid(format!(
                    "stored eigenvalues differ from the rebuilt operator by {worst:e}"
                )));
            }
        }
        Ok(op)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct PotentialRow {
    x: f64,
    q: f64,
    #[serde(rename = "V")]
    v: f64,
}

/// Reads a potential table with columns `x,q,V`.
pub fn read_potential_csv(path: &Path) -> Result<(Vec<f64>, Potential)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut x = Vec::new();
    let mut p = Potential { q: Vec::new(), v: Vec::new() };
    for row in rdr.deserialize() {
        let r: PotentialRow = row?;
        x.push(r.x);
        p.q.push(r.q);
        p.v.push(r.v);
    }
    Ok((x, p))
}

pub fn write_potential_csv(path: &Path, x: &[f64], p: &Potential) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for ((&x, &q), &v) in x.iter().zip(&p.q).zip(&p.v) {
        w.serialize(PotentialRow { x, q, v })?;
    }
    w.flush()?;
    Ok(())
}
