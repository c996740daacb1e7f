//! The `run` subcommand: one evolution with snapshot output.

use std::fs;
use std::path::{Path, PathBuf};

use bofem::harness::{relative_l2_error, TrapezoidGrid};
use bofem::output::{read_xy_csv, write_json, write_matrix_csv, write_snapshot_csv};
use bofem::solver::RunStats;
use bofem::{
    cfl_timestep, evolve, project, AssembledOperators, Boundary, DoubleSolitonParams, PeriodicWaveParams,
    QuadratureOrders, SchemeConfig, UniformPeriodicMesh, WeightFunction,
};
use serde::{Deserialize, Serialize};

use crate::args::{format_boundary, format_dt_mode, format_weight, parse_boundary, parse_dt_mode, parse_weight};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Problem {
    PeriodicWave,
    DoubleSoliton,
    CustomInitial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveSettings {
    pub speed: f64,
    pub half_period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolitonSettings {
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Every setting of a run, fully resolved. Written next to the output as
/// `effective_config.json`; passing that file back with `--config`
/// reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    pub elements: usize,
    pub t_end: f64,
    pub snapshots: Vec<f64>,
    pub weight: String,
    pub dt_mode: String,
    pub boundary: String,
    pub domain: [f64; 2],
    pub stop_factor: f64,
    pub max_iters: usize,
    pub inner_order: usize,
    pub outer_order: usize,
    pub wave: WaveSettings,
    pub soliton: SolitonSettings,
    pub initial_csv: Option<PathBuf>,
    pub samples_per_element: usize,
    pub dump_matrices: bool,
}

/// A config file or the set of flags given: anything absent falls back to
/// the file, then to the problem's default.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialRunConfig {
    pub problem: Option<Problem>,
    pub elements: Option<usize>,
    pub t_end: Option<f64>,
    pub snapshots: Option<Vec<f64>>,
    pub weight: Option<String>,
    pub dt_mode: Option<String>,
    pub boundary: Option<String>,
    pub domain: Option<[f64; 2]>,
    pub stop_factor: Option<f64>,
    pub max_iters: Option<usize>,
    pub inner_order: Option<usize>,
    pub outer_order: Option<usize>,
    pub wave: Option<WaveSettings>,
    pub soliton: Option<SolitonSettings>,
    pub initial_csv: Option<PathBuf>,
    pub samples_per_element: Option<usize>,
    pub dump_matrices: Option<bool>,
}

impl PartialRunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))
    }

    /// `self` wins over `base`.
    pub fn over(self, base: Self) -> Self {
        Self {
            problem: self.problem.or(base.problem),
            elements: self.elements.or(base.elements),
            t_end: self.t_end.or(base.t_end),
            snapshots: self.snapshots.or(base.snapshots),
            weight: self.weight.or(base.weight),
            dt_mode: self.dt_mode.or(base.dt_mode),
            boundary: self.boundary.or(base.boundary),
            domain: self.domain.or(base.domain),
            stop_factor: self.stop_factor.or(base.stop_factor),
            max_iters: self.max_iters.or(base.max_iters),
            inner_order: self.inner_order.or(base.inner_order),
            outer_order: self.outer_order.or(base.outer_order),
            wave: self.wave.or(base.wave),
            soliton: self.soliton.or(base.soliton),
            initial_csv: self.initial_csv.or(base.initial_csv),
            samples_per_element: self.samples_per_element.or(base.samples_per_element),
            dump_matrices: self.dump_matrices.or(base.dump_matrices),
        }
    }

    /// Fills in defaults. Unless overridden they are the settings of the
    /// reference experiments for the chosen problem.
    pub fn resolve(self) -> Result<RunConfig, CliError> {
        let problem = self.problem.unwrap_or(Problem::PeriodicWave);
        let wave = self.wave.unwrap_or(WaveSettings { speed: 0.25, half_period: 15.0 });
        let soliton = self.soliton.unwrap_or(SolitonSettings { c1: 0.3, c2: 0.6, d1: -30.0, d2: -55.0 });
        let (elements, t_end, weight, dt_mode, boundary, domain) = match problem {
            Problem::PeriodicWave => (64, 480.0, "unit", "periodic", "periodic", [-wave.half_period, wave.half_period]),
            Problem::DoubleSoliton => (256, 180.0, "linear:120,1", "full-line", "free", [-100.0, 100.0]),
            Problem::CustomInitial => (64, 10.0, "unit", "periodic", "periodic", [-15.0, 15.0]),
        };
        let t_end = self.t_end.unwrap_or(t_end);
        let cfg = RunConfig {
            problem,
            elements: self.elements.unwrap_or(elements),
            t_end,
            snapshots: self.snapshots.unwrap_or_else(|| vec![t_end]),
            weight: self.weight.unwrap_or_else(|| weight.into()),
            dt_mode: self.dt_mode.unwrap_or_else(|| dt_mode.into()),
            boundary: self.boundary.unwrap_or_else(|| boundary.into()),
            domain: self.domain.unwrap_or(domain),
            stop_factor: self.stop_factor.unwrap_or(SchemeConfig::DEFAULT_STOP_FACTOR),
            max_iters: self.max_iters.unwrap_or(SchemeConfig::DEFAULT_MAX_ITERS),
            inner_order: self.inner_order.unwrap_or(QuadratureOrders::default().inner),
            outer_order: self.outer_order.unwrap_or(QuadratureOrders::default().outer),
            wave,
            soliton,
            initial_csv: self.initial_csv,
            samples_per_element: self.samples_per_element.unwrap_or(1),
            dump_matrices: self.dump_matrices.unwrap_or(false),
        };
        cfg.check()?;
        Ok(cfg)
    }
}

type Initial = Box<dyn Fn(f64) -> f64>;
type Exact = Box<dyn Fn(f64, f64) -> f64>;

/// Settings turned into solver objects.
struct Prepared {
    mesh: UniformPeriodicMesh,
    weight: WeightFunction,
    dt_mode: bofem::CflMode,
    orders: QuadratureOrders,
    exact: Option<Exact>,
    initial: Initial,
}

impl RunConfig {
    fn check(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Usage(m));
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if let Some(t) = self.snapshots.iter().find(|&&t| !(0.0..=self.t_end).contains(&t)) {
            return bad(format!("snapshot time {t} outside [0, {}]", self.t_end));
        }
        if !(self.stop_factor.is_finite() && self.stop_factor > 0.0) {
            return bad(format!("stop factor must be positive, got {}", self.stop_factor));
        }
        if self.max_iters == 0 || self.samples_per_element == 0 {
            return bad("max_iters and samples_per_element must be at least 1".into());
        }
        if self.problem == Problem::CustomInitial && self.initial_csv.is_none() {
            return bad("--problem custom-initial needs --initial-csv".into());
        }
        self.prepare().map(|_| ())
    }

    fn prepare(&self) -> Result<Prepared, CliError> {
        let usage = |e: bofem::Error| CliError::Usage(e.to_string());
        let boundary: Boundary = parse_boundary(&self.boundary).map_err(CliError::Usage)?;
        let mesh = UniformPeriodicMesh::with_boundary(self.domain[0], self.domain[1], self.elements, boundary)
            .map_err(usage)?;
        let weight = parse_weight(&self.weight).map_err(CliError::Usage)?;
        weight.validate(&mesh).map_err(usage)?;
        let dt_mode = parse_dt_mode(&self.dt_mode).map_err(CliError::Usage)?;
        let orders = QuadratureOrders { inner: self.inner_order, outer: self.outer_order };
        orders.rules().map_err(usage)?;
        let (initial, exact): (Initial, Option<Exact>) = match self.problem {
            Problem::PeriodicWave => {
                let p = PeriodicWaveParams::new(self.wave.speed, self.wave.half_period).map_err(usage)?;
                (Box::new(move |x| p.value(x, 0.0)), Some(Box::new(move |x, t| p.value(x, t))))
            }
            Problem::DoubleSoliton => {
                let s = self.soliton;
                let p = DoubleSolitonParams::new(s.c1, s.c2, s.d1, s.d2).map_err(usage)?;
                (Box::new(move |x| p.value(x, 0.0)), Some(Box::new(move |x, t| p.value(x, t))))
            }
            Problem::CustomInitial => {
                let path = self.initial_csv.as_ref().expect("checked above");
                let rows = read_xy_csv(path).map_err(usage)?;
                (Box::new(piecewise_linear(rows).map_err(CliError::Usage)?), None)
            }
        };
        Ok(Prepared { mesh, weight, dt_mode, orders, exact, initial })
    }
}

/// Linear interpolation through `(x, u)` samples, constant beyond the ends.
fn piecewise_linear(mut rows: Vec<(f64, f64)>) -> Result<impl Fn(f64) -> f64, String> {
    if rows.is_empty() {
        return Err("initial data file has no rows".into());
    }
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(move |x: f64| {
        let k = rows.partition_point(|r| r.0 <= x);
        if k == 0 {
            return rows[0].1;
        }
        if k == rows.len() {
            return rows[k - 1].1;
        }
        let ((x0, u0), (x1, u1)) = (rows[k - 1], rows[k]);
        u0 + (u1 - u0) * (x - x0) / (x1 - x0)
    })
}

#[derive(Debug, Serialize)]
struct SnapshotRecord {
    requested_time: f64,
    time: f64,
    step: usize,
    file: String,
    relative_error: Option<f64>,
}

#[derive(Debug, Serialize)]
struct RunRecord {
    elements: usize,
    dx: f64,
    dt: f64,
    steps: usize,
    final_time: f64,
    snapshots: Vec<SnapshotRecord>,
    stats: RunStats,
}

fn time_tag(t: f64) -> String {
    format!("{t}").replace('.', "p").replace('-', "m")
}

pub fn execute(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    let prep = cfg.prepare()?;
    fs::create_dir_all(out)?;
    write_json(&out.join("effective_config.json"), cfg)?;

    let u0 = project(&prep.initial, &prep.mesh, &WeightFunction::Unit)?;
    let dt = cfl_timestep(&prep.mesh, prep.dt_mode, &u0)?;
    let ops = AssembledOperators::new(&prep.mesh, prep.weight, dt, prep.orders)?;
    if cfg.dump_matrices {
        write_matrix_csv(&out.join("mass.csv"), ops.mass_w())?;
        write_matrix_csv(&out.join("stiffness.csv"), ops.hilbert_stiff())?;
    }
    let scheme = SchemeConfig { dt, t_end: cfg.t_end, stop_factor: cfg.stop_factor, max_iters: cfg.max_iters };
    let evolution = evolve(u0, &ops, &scheme, &cfg.snapshots)?;

    let grid = TrapezoidGrid::from_mesh(&prep.mesh);
    let xs: Vec<f64> = if cfg.samples_per_element == 1 {
        prep.mesh.nodes()
    } else {
        let mut xs: Vec<f64> = evolution.final_state.sample(cfg.samples_per_element).into_iter().map(|p| p.0).collect();
        if prep.mesh.boundary() == Boundary::Free {
            xs.push(prep.mesh.right());
        }
        xs
    };
    let mut snapshots = Vec::new();
    for snap in &evolution.snapshots {
        let file = format!("snapshot_t{}.csv", time_tag(snap.requested_time));
        write_snapshot_csv(&out.join(&file), &snap.field, &xs)?;
        let relative_error = match &prep.exact {
            Some(f) => Some(relative_l2_error(&snap.field, |x| f(x, snap.time), &grid)?),
            None => None,
        };
        println!(
            "t = {:.6} (step {}){}",
            snap.time,
            snap.step,
            relative_error.map(|e| format!(", relative L2 error {e:.8}")).unwrap_or_default()
        );
        snapshots.push(SnapshotRecord {
            requested_time: snap.requested_time,
            time: snap.time,
            step: snap.step,
            file,
            relative_error,
        });
    }
    let record = RunRecord {
        elements: cfg.elements,
        dx: prep.mesh.dx(),
        dt,
        steps: evolution.stats.steps,
        final_time: evolution.final_time,
        snapshots,
        stats: evolution.stats,
    };
    write_json(&out.join("run.json"), &record)?;
    Ok(())
}

/// Canonical text forms for values that came in as typed flags.
pub fn canonical_weight(s: &str) -> Result<String, String> {
    parse_weight(s).map(|w| format_weight(&w))
}

pub fn canonical_dt_mode(s: &str) -> Result<String, String> {
    parse_dt_mode(s).map(|m| format_dt_mode(&m))
}

pub fn canonical_boundary(s: &str) -> Result<String, String> {
    parse_boundary(s).map(format_boundary)
}
