//! Grid-refinement studies against the exact solutions.
//!
//! Errors are relative L² errors measured with the trapezoidal rule on the
//! nodes of the finest mesh in the study.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{DoubleSolitonParams, PeriodicWaveParams};
use crate::mesh::{Boundary, HermiteField, UniformPeriodicMesh};
use crate::operators::{AssembledOperators, QuadratureOrders, WeightFunction};
use crate::projection::project;
use crate::solver::{cfl_timestep, evolve, CflMode, RunStats, SchemeConfig};

/// Trapezoidal rule on the nodes of a mesh. On a periodic mesh every node
/// has weight `dx`; on a free mesh the two end nodes get `dx / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapezoidGrid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TrapezoidGrid {
    pub fn from_mesh(mesh: &UniformPeriodicMesh) -> Self {
        let points = mesh.nodes();
        let mut weights = vec![mesh.dx(); points.len()];
        if mesh.boundary() == Boundary::Free {
            let last = weights.len() - 1;
            weights[0] *= 0.5;
            weights[last] *= 0.5;
        }
        Self { points, weights }
    }
}

/// `‖approx - exact‖ / ‖exact‖` with both norms taken by the trapezoidal rule.
pub fn relative_l2_error<F>(approx: &HermiteField, exact: F, grid: &TrapezoidGrid) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, &w) in grid.points.iter().zip(&grid.weights) {
        let e = exact(x);
        let d = approx.evaluate(x, 0) - e;
        num += w * d * d;
        den += w * e * e;
    }
    if den == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((num / den).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub n: usize,
    pub error: f64,
    /// `log2(E_N / E_2N)`; absent on the last row.
    pub rate: Option<f64>,
    pub dt: f64,
    pub time: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub experiment: String,
    pub target_time: f64,
    pub dt_rule: String,
    pub rows: Vec<ReportRow>,
}

impl ConvergenceReport {
    /// Fills in the rate column from consecutive errors.
    pub fn new(
        experiment: impl Into<String>,
        target_time: f64,
        dt_rule: impl Into<String>,
        mut rows: Vec<ReportRow>,
    ) -> Self {
        for k in 0..rows.len() {
            rows[k].rate = rows.get(k + 1).map(|next| (rows[k].error / next.error).log2());
        }
        Self { experiment: experiment.into(), target_time, dt_rule: dt_rule.into(), rows }
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.error).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.rate).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("N,E,rate\n");
        for r in &self.rows {
            match r.rate {
                Some(rate) => s.push_str(&format!("{},{:.8},{:.2}\n", r.n, r.error, rate)),
                None => s.push_str(&format!("{},{:.8},\n", r.n, r.error)),
            }
        }
        s
    }
}

/// Writes `path` as CSV and a JSON sidecar with the same stem.
pub fn emit_report(report: &ConvergenceReport, path: &Path) -> Result<PathBuf> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, report.to_csv())?;
    let sidecar = path.with_extension("json");
    fs::write(&sidecar, serde_json::to_string_pretty(report)?)?;
    Ok(sidecar)
}

/// How the initial field is obtained from the exact initial data.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialProjection {
    /// Unweighted L² projection, also in weighted runs.
    #[default]
    Unweighted,
    /// Projection in the `φ`-weighted inner product.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    pub stop_factor: f64,
    pub max_iters: usize,
    pub orders: QuadratureOrders,
    pub initial: InitialProjection,
    /// Name used for output files; each study has its own default.
    pub label: Option<String>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            stop_factor: SchemeConfig::DEFAULT_STOP_FACTOR,
            max_iters: SchemeConfig::DEFAULT_MAX_ITERS,
            orders: QuadratureOrders::default(),
            initial: InitialProjection::default(),
            label: None,
        }
    }
}

/// Samples of one snapshot on the finest grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSamples {
    pub target_time: f64,
    pub time: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub exact: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRun {
    pub n: usize,
    pub dt: f64,
    pub errors: Vec<f64>,
    pub snapshots: Vec<SnapshotSamples>,
    pub stats: RunStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub label: String,
    pub reports: Vec<ConvergenceReport>,
    pub runs: Vec<StudyRun>,
}

fn check_doubling(n_list: &[usize]) -> Result<()> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("empty element list".into()));
    }
    for w in n_list.windows(2) {
        if w[1] != 2 * w[0] {
            return Err(Error::InvalidParameter(format!(
                "element counts must double row to row, got {} then {}",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn time_suffix(t: f64) -> String {
    let s = format!("{t}");
    s.replace('.', "p")
}

struct Problem<'a> {
    label: String,
    left: f64,
    right: f64,
    boundary: Boundary,
    weight: WeightFunction,
    cfl: CflMode,
    dt_rule: &'a str,
    initial: &'a (dyn Fn(f64) -> f64 + Sync),
    exact: &'a (dyn Fn(f64, f64) -> f64 + Sync),
}

fn run_study(problem: &Problem, n_list: &[usize], times: &[f64], opts: &StudyOptions) -> Result<Study> {
    check_doubling(n_list)?;
    if times.is_empty() {
        return Err(Error::InvalidParameter("no report times".into()));
    }
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let n_max = *n_list.iter().max().expect("non-empty");
    let finest = UniformPeriodicMesh::with_boundary(problem.left, problem.right, n_max, problem.boundary)?;
    let grid = TrapezoidGrid::from_mesh(&finest);

    let runs: Vec<StudyRun> = n_list
        .par_iter()
        .map(|&n| -> Result<StudyRun> {
            let mesh = UniformPeriodicMesh::with_boundary(problem.left, problem.right, n, problem.boundary)?;
            let proj_weight = match opts.initial {
                InitialProjection::Unweighted => WeightFunction::Unit,
                InitialProjection::Weighted => problem.weight,
            };
            let u0 = project(problem.initial, &mesh, &proj_weight)?;
            let dt = cfl_timestep(&mesh, problem.cfl, &u0)?;
            let ops = AssembledOperators::new(&mesh, problem.weight, dt, opts.orders)?;
            let cfg = SchemeConfig { dt, t_end, stop_factor: opts.stop_factor, max_iters: opts.max_iters };
            let ev = evolve(u0, &ops, &cfg, times)?;
            let mut errors = Vec::with_capacity(times.len());
            let mut snapshots = Vec::with_capacity(times.len());
            for snap in &ev.snapshots {
                let t = snap.time;
                errors.push(relative_l2_error(&snap.field, |x| (problem.exact)(x, t), &grid)?);
                snapshots.push(SnapshotSamples {
                    target_time: snap.requested_time,
                    time: t,
                    x: grid.points.clone(),
                    u: grid.points.iter().map(|&x| snap.field.evaluate(x, 0)).collect(),
                    exact: grid.points.iter().map(|&x| (problem.exact)(x, t)).collect(),
                });
            }
            Ok(StudyRun { n, dt, errors, snapshots, stats: ev.stats })
        })
        .collect::<Result<_>>()?;

    let reports = times
        .iter()
        .enumerate()
        .map(|(k, &t)| {
            let rows = runs
                .iter()
                .map(|r| ReportRow {
                    n: r.n,
                    error: r.errors[k],
                    rate: None,
                    dt: r.dt,
                    time: r.snapshots[k].time,
                    steps: (r.snapshots[k].time / r.dt).round() as usize,
                })
                .collect();
            let name =
                if times.len() == 1 { problem.label.clone() } else { format!("{}_t{}", problem.label, time_suffix(t)) };
            ConvergenceReport::new(name, t, problem.dt_rule, rows)
        })
        .collect();
    Ok(Study { label: problem.label.clone(), reports, runs })
}

/// Periodic travelling wave on `[-L, L]`, `φ = 1`, `dt = 0.5 dx`.
pub fn run_periodic_wave_study(
    n_list: &[usize],
    t_target: f64,
    params: &PeriodicWaveParams,
    opts: &StudyOptions,
) -> Result<Study> {
    let p = *params;
    let initial = move |x: f64| p.value(x, 0.0);
    let exact = move |x: f64, t: f64| p.value(x, t);
    let problem = Problem {
        label: opts.label.clone().unwrap_or_else(|| "periodic_wave".into()),
        left: -p.half_period(),
        right: p.half_period(),
        boundary: Boundary::Periodic,
        weight: WeightFunction::Unit,
        cfl: CflMode::Periodic,
        dt_rule: "dt = 0.5 dx",
        initial: &initial,
        exact: &exact,
    };
    run_study(&problem, n_list, &[t_target], opts)
}

/// Double soliton on a truncated interval, `dt = 0.5 dx / ‖u0‖_∞`.
pub fn run_double_soliton_study(
    n_list: &[usize],
    times: &[f64],
    params: &DoubleSolitonParams,
    domain: (f64, f64),
    boundary: Boundary,
    weight: WeightFunction,
    opts: &StudyOptions,
) -> Result<Study> {
    let p = *params;
    let initial = move |x: f64| p.value(x, 0.0);
    let exact = move |x: f64, t: f64| p.value(x, t);
    let problem = Problem {
        label: opts.label.clone().unwrap_or_else(|| "double_soliton".into()),
        left: domain.0,
        right: domain.1,
        boundary,
        weight,
        cfl: CflMode::FullLine,
        dt_rule: "dt = 0.5 dx / max|u0|",
        initial: &initial,
        exact: &exact,
    };
    run_study(&problem, n_list, times, opts)
}

/// Writes every report as `<name>.csv` plus sidecar, and the solution data
/// of each run as `<label>_<N>.csv` with columns `t,x,u,exact`.
pub fn emit_study(study: &Study, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for report in &study.reports {
        let path = dir.join(format!("{}.csv", report.experiment));
        let sidecar = emit_report(report, &path)?;
        written.push(path);
        written.push(sidecar);
    }
    for run in &study.runs {
        let path = dir.join(format!("{}_{}.csv", study.label, run.n));
        let mut out = std::io::BufWriter::new(fs::File::create(&path)?);
        writeln!(out, "t,x,u,exact")?;
        for s in &run.snapshots {
            for ((x, u), e) in s.x.iter().zip(&s.u).zip(&s.exact) {
                writeln!(out, "{},{},{},{}", s.time, x, u, e)?;
            }
        }
        out.flush()?;
        written.push(path);
    }
    Ok(written)
}
