use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{ForcingConfig, OutputSpace, RunConfig, RunMode, SweepPoint, SCHEMA_VERSION};
use crate::calculus::TimeGrid;
use crate::error::{FracError, Result};
use crate::solver::{
    classify_global, holder_slope, solve_linear, solve_local, solve_with_continuation, stiff_limit, steady_state,
    vanishing_operator, AsymptoticTable, DuhamelKernel, GlobalClassification, HolderFit, NodeDiagnostics, Status,
    Trajectory,
};
use crate::spectral::{DiagonalizedOperator, Propagator, StateField};

/// Fitted quantities attached to a sweep point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Fitted {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holder: Option<HolderFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<AsymptoticTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<GlobalClassification>,
    /// Largest observed Picard contraction factor.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_contraction: Option<f64>,
    pub max_iterations: usize,
}

/// The sidecar document written next to each trajectory CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub schema_version: u32,
    pub config: RunConfig,
    pub point: SweepPoint,
    pub trajectory_csv: String,
    #[serde(flatten)]
    pub status: Status,
    pub t_end: f64,
    pub nodes: usize,
    pub diagnostics: Vec<NodeDiagnostics>,
    pub warnings: Vec<String>,
    pub fitted: Fitted,
}

/// One line of the summary table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub point: usize,
    pub alpha: f64,
    pub epsilon: f64,
    pub horizon: f64,
    pub status: String,
    pub t_end: f64,
    pub nodes: usize,
    pub max_iterations: usize,
    pub final_h_norm: f64,
    pub final_graph_norm: f64,
    /// Table error, Hölder slope or blow-up time, depending on the mode.
    pub value: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct PointOutcome {
    pub sidecar: Sidecar,
    pub rows: Vec<SummaryRow>,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub points: Vec<PointOutcome>,
    pub summary_path: PathBuf,
}

impl RunReport {
    pub fn rows(&self) -> impl Iterator<Item = &SummaryRow> {
        self.points.iter().flat_map(|p| p.rows.iter())
    }

    pub fn any_tolerance_failure(&self) -> bool {
        self.points.iter().any(|p| matches!(p.sidecar.status, Status::ToleranceFailure { .. }))
    }
}

pub const SUMMARY_HEADER: &str = "point,alpha,epsilon,horizon,status,t_end,nodes,max_iterations,final_h_norm,final_graph_norm,value";

/// Runs every sweep point (concurrently) and writes the trajectory CSVs,
/// sidecars and the summary table.
pub fn run(cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let base = cfg.operator.build()?;
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir)
        .map_err(|e| FracError::invalid(format!("cannot create output directory {}: {e}", dir.display())))?;
    let points = cfg.points();
    let outcomes = crate::par::try_map(points.len(), |i| {
        let p = points[i];
        run_point(cfg, &base, p).map_err(|e| {
            FracError::invalid(format!("sweep point {} (alpha {}, {:?}): {e}", p.index, p.alpha, cfg.mode))
        })
    })?;
    let mut summary = String::from(SUMMARY_HEADER);
    summary.push('\n');
    for o in &outcomes {
        for r in &o.rows {
            summary.push_str(&summary_line(r));
            summary.push('\n');
        }
    }
    let summary_path = dir.join(format!("{}-summary.csv", cfg.experiment));
    write_atomic(&summary_path, summary.as_bytes())?;
    Ok(RunReport { dir, points: outcomes, summary_path })
}

pub fn summary_line(r: &SummaryRow) -> String {
    let value = r.value.map(num).unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        r.point,
        num(r.alpha),
        num(r.epsilon),
        num(r.horizon),
        r.status,
        num(r.t_end),
        r.nodes,
        r.max_iterations,
        num(r.final_h_norm),
        num(r.final_graph_norm),
        value
    )
}

/// Shortest round-trip representation in exponent form.
fn num(x: f64) -> String {
    format!("{x:e}")
}

fn forcing_fn(cfg: &RunConfig, op: &DiagonalizedOperator) -> impl Fn(f64) -> StateField + Sync {
    let shape = cfg.forcing.shape(op, cfg.seed);
    let profile = cfg.forcing.profile();
    move |t| &shape * Complex64::new(profile(t), 0.0)
}

fn run_point(cfg: &RunConfig, base: &DiagonalizedOperator, p: SweepPoint) -> Result<PointOutcome> {
    let (traj, fitted) = compute_point(cfg, base, p)?;
    let stem = format!("{}-{:03}", cfg.experiment, p.index);
    let csv_name = format!("{stem}.csv");
    write_atomic(&cfg.output.dir.join(&csv_name), trajectory_csv(&traj, base, cfg.output.space).as_bytes())?;

    let rows = summary_rows(cfg, p, &traj, &fitted);
    let sidecar = Sidecar {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        point: p,
        trajectory_csv: csv_name,
        status: traj.status.clone(),
        t_end: traj.t_end(),
        nodes: traj.len(),
        diagnostics: traj.diagnostics.clone(),
        warnings: traj.warnings.clone(),
        fitted,
    };
    let json = serde_json::to_string_pretty(&sidecar)? + "\n";
    write_atomic(&cfg.output.dir.join(format!("{stem}.json")), json.as_bytes())?;
    Ok(PointOutcome { sidecar, rows })
}

/// Solves one sweep point without touching the file system. Table modes
/// return the trajectory of the last table entry.
pub fn compute_point(cfg: &RunConfig, base: &DiagonalizedOperator, p: SweepPoint) -> Result<(Trajectory, Fitted)> {
    let prop = Propagator::new(p.alpha, cfg.ml)?;
    let kernel = DuhamelKernel::new(p.alpha, cfg.ml)?;
    let x = cfg.initial.build(base, cfg.seed)?;
    let mut fitted = Fitted::default();
    let scaled;
    let op = match p.epsilon {
        Some(e) if e != 1.0 => {
            scaled = base.scaled(e);
            &scaled
        }
        _ => base,
    };
    let forcing = forcing_fn(cfg, base);
    let traj = match cfg.mode {
        RunMode::Linear => {
            let horizon = p.horizon.expect("trajectory mode");
            let grid = TimeGrid::for_alpha(horizon, cfg.intervals, p.alpha)?;
            let v: Vec<StateField> = grid.nodes().iter().map(|&t| forcing(t)).collect();
            solve_linear(&prop, &kernel, op, &x, &v, &grid)?
        }
        RunMode::Local => {
            let horizon = p.horizon.expect("trajectory mode");
            let grid = TimeGrid::for_alpha(horizon, cfg.intervals, p.alpha)?;
            fitted.classification = Some(classify_global(&cfg.nonlinearity, p.alpha)?);
            solve_local(&prop, &kernel, op, &x, &cfg.nonlinearity, &grid, &cfg.solver.picard)?
        }
        RunMode::Continuation => {
            let horizon = p.horizon.expect("trajectory mode");
            fitted.classification = Some(classify_global(&cfg.nonlinearity, p.alpha)?);
            solve_with_continuation(&prop, &kernel, op, &x, &cfg.nonlinearity, horizon, &cfg.solver)?
        }
        RunMode::SteadyState => {
            let ForcingConfig::Constant { amplitude } = cfg.forcing else {
                return Err(FracError::invalid("steady_state needs constant forcing"));
            };
            let f0 = &cfg.forcing.shape(base, cfg.seed) * Complex64::new(amplitude, 0.0);
            let table = steady_state(&prop, &kernel, op, &x, &f0, &cfg.horizon, cfg.intervals)?;
            take_last(&mut fitted, table)
        }
        RunMode::VanishingOperator => {
            let grid = TimeGrid::for_alpha(p.horizon.expect("table over ε"), cfg.intervals, p.alpha)?;
            let table = vanishing_operator(&prop, &kernel, base, &x, &forcing, &cfg.epsilon, &grid)?;
            take_last(&mut fitted, table)
        }
        RunMode::StiffLimit { delta } => {
            let grid = TimeGrid::for_alpha(p.horizon.expect("table over ε"), cfg.intervals, p.alpha)?;
            let table = stiff_limit(&prop, &kernel, base, &x, &forcing, &cfg.epsilon, &grid, delta)?;
            take_last(&mut fitted, table)
        }
    };
    if let (Some(h), Some(horizon)) = (cfg.holder, p.horizon) {
        if traj.status.is_completed() {
            fitted.holder = Some(holder_slope(&traj, (h.delta, horizon), h.case, p.alpha)?);
        }
    }
    fitted.max_iterations = traj.diagnostics.iter().map(|d| d.iterations).max().unwrap_or(0);
    fitted.max_contraction = traj.diagnostics.iter().filter_map(|d| d.contraction).reduce(f64::max);
    Ok((traj, fitted))
}

fn take_last(fitted: &mut Fitted, mut table: AsymptoticTable) -> Trajectory {
    let last = table.last.take().expect("nonempty table");
    fitted.table = Some(table);
    last
}

fn summary_rows(cfg: &RunConfig, p: SweepPoint, traj: &Trajectory, fitted: &Fitted) -> Vec<SummaryRow> {
    let fin = traj.diagnostics.last().expect("nonempty trajectory");
    let row = |epsilon: f64, horizon: f64, value: Option<f64>| SummaryRow {
        point: p.index,
        alpha: p.alpha,
        epsilon,
        horizon,
        status: traj.status.label().to_string(),
        t_end: traj.t_end(),
        nodes: traj.len(),
        max_iterations: fitted.max_iterations,
        final_h_norm: fin.h_norm,
        final_graph_norm: fin.graph_norm,
        value,
    };
    match (&fitted.table, cfg.mode.clone()) {
        (Some(t), RunMode::SteadyState) => {
            t.rows.iter().map(|r| row(p.epsilon.unwrap_or(1.0), r.parameter, Some(r.error))).collect()
        }
        (Some(t), _) => t.rows.iter().map(|r| row(r.parameter, p.horizon.unwrap_or(f64::NAN), Some(r.error))).collect(),
        (None, _) => {
            let value = match traj.status {
                Status::BlowUp { t_est } => Some(t_est),
                _ => fitted.holder.as_ref().and_then(|h| h.slope),
            };
            vec![row(p.epsilon.unwrap_or(1.0), p.horizon.unwrap_or(f64::NAN), value)]
        }
    }
}

/// `t,node_index,mode_or_gridpoint,re,im`, one line per node and component.
pub fn trajectory_csv(traj: &Trajectory, op: &DiagonalizedOperator, space: OutputSpace) -> String {
    let mut out = String::from("t,node_index,mode_or_gridpoint,re,im\n");
    let inv = 1.0 / op.cell_volume().sqrt();
    for (n, (t, u)) in traj.nodes.iter().zip(&traj.states).enumerate() {
        let values: Vec<Complex64> = match space {
            OutputSpace::Modes => u.coeffs().to_vec(),
            OutputSpace::Grid => op.to_physical(u).into_iter().map(|v| v * inv).collect(),
        };
        let ts = num(*t);
        for (k, v) in values.iter().enumerate() {
            let _ = writeln!(out, "{ts},{n},{k},{},{}", num(v.re), num(v.im));
        }
    }
    out
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| FracError::Io(e.error))?;
    Ok(())
}
