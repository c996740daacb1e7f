//! Crank-Nicolson time stepping with the linearized fixed-point iteration.
//!
//! One step finds `u^{n+1}` with
//!
//! ```text
//! M_φ (u^{n+1} - u^n) + dt K u^{n+1/2} - (dt/2) B(u^{n+1/2}) = 0,
//! ```
//!
//! where `K` is the Hilbert stiffness and `B(m)_i = ∫ m² (φ v_i)'`. The
//! iteration keeps the linear part implicit,
//! `A w^{l+1} = (M_φ - (dt/2) K) u^n + (dt/2) B((w^l + u^n)/2)`, so each
//! iterate costs one back-substitution with the factorization of `A`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{HermiteField, UniformPeriodicMesh};
use crate::operators::{nonlinear_jacobian, unit_norm, AssembledOperators};

/// How the time step is tied to the mesh.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CflMode {
    /// `dt = 0.5 dx / ‖u0‖_∞`
    FullLine,
    /// `dt = 0.5 dx`
    Periodic,
    /// `dt = λ dx²`
    Theory { lambda: f64 },
}

/// Sample density used for `‖u0‖_∞`, on top of the nodes.
pub const SUP_SAMPLES_PER_ELEMENT: usize = 8;

pub fn cfl_timestep(mesh: &UniformPeriodicMesh, mode: CflMode, u0: &HermiteField) -> Result<f64> {
    let dx = mesh.dx();
    match mode {
        CflMode::Periodic => Ok(0.5 * dx),
        CflMode::Theory { lambda } => {
            if !(lambda.is_finite() && lambda > 0.0) {
                return Err(Error::InvalidParameter(format!("λ must be positive, got {lambda}")));
            }
            Ok(lambda * dx * dx)
        }
        CflMode::FullLine => {
            let sup = u0.sup_norm_sampled(SUP_SAMPLES_PER_ELEMENT);
            if sup == 0.0 {
                return Err(Error::ZeroInitialData);
            }
            Ok(0.5 * dx / sup)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub dt: f64,
    pub t_end: f64,
    /// The iteration stops once `‖w^{l+1} - w^l‖ <= stop_factor · dx · ‖u^n‖`.
    pub stop_factor: f64,
    pub max_iters: usize,
}

impl SchemeConfig {
    pub const DEFAULT_STOP_FACTOR: f64 = 0.002;
    pub const DEFAULT_MAX_ITERS: usize = 100;

    pub fn new(dt: f64, t_end: f64) -> Self {
        Self { dt, t_end, stop_factor: Self::DEFAULT_STOP_FACTOR, max_iters: Self::DEFAULT_MAX_ITERS }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {}", self.t_end)));
        }
        if !(self.stop_factor.is_finite() && self.stop_factor > 0.0) {
            return Err(Error::InvalidParameter(format!("stop factor must be positive, got {}", self.stop_factor)));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps taken to reach `t`: `round(t / dt)`.
    pub fn steps_to(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub iterations_used: usize,
    /// `‖w^{l+1} - w^l‖_{L²}` of the accepted iterate.
    pub final_residual: f64,
    pub l2_norm_after: f64,
    /// Euclidean norm of the last coefficient increment.
    pub increment_coeff_norm: f64,
}

fn check_dt(ops: &AssembledOperators, cfg: &SchemeConfig) -> Result<()> {
    if ops.dt() != cfg.dt {
        return Err(Error::InvalidParameter(format!(
            "operators were factorized for dt={}, config asks for dt={}",
            ops.dt(),
            cfg.dt
        )));
    }
    Ok(())
}

fn step_inner(
    u_n: &HermiteField,
    ops: &AssembledOperators,
    cfg: &SchemeConfig,
    step: usize,
) -> Result<(HermiteField, StepReport)> {
    let mesh = *ops.mesh();
    if u_n.mesh() != &mesh {
        return Err(Error::MeshMismatch);
    }
    let half = 0.5 * cfg.dt;
    let un = DVector::from_column_slice(u_n.coeffs());
    let explicit = ops.mass_w() * &un - (ops.hilbert_stiff() * &un) * half;
    let threshold = cfg.stop_factor * mesh.dx() * unit_norm(&mesh, u_n.coeffs());

    let mut w = un.clone();
    let mut mid = HermiteField::zeros(mesh);
    for iteration in 1..=cfg.max_iters {
        for ((m, a), b) in mid.coeffs_mut().iter_mut().zip(w.iter()).zip(un.iter()) {
            *m = 0.5 * (a + b);
        }
        let rhs = &explicit + ops.nonlinear(&mid) * half;
        let next = ops.solve(&rhs);
        let inc = &next - &w;
        if !next.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { step });
        }
        let increment = unit_norm(&mesh, inc.as_slice());
        w = next;
        if increment <= threshold {
            let l2 = unit_norm(&mesh, w.as_slice());
            // `+ 0.0` folds the -0.0 that back substitution can produce, so a
            // zero state stays bitwise zero.
            let field = HermiteField::from_coeffs(mesh, w.iter().map(|v| v + 0.0).collect())?;
            return Ok((
                field,
                StepReport {
                    iterations_used: iteration,
                    final_residual: increment,
                    l2_norm_after: l2,
                    increment_coeff_norm: inc.norm(),
                },
            ));
        }
        if iteration == cfg.max_iters {
            return Err(Error::IterationLimitExceeded { step, iterations: iteration, increment, threshold });
        }
    }
    unreachable!("max_iters >= 1 is validated")
}

/// One Crank-Nicolson step from `u_n`.
pub fn step(u_n: &HermiteField, ops: &AssembledOperators, cfg: &SchemeConfig) -> Result<(HermiteField, StepReport)> {
    cfg.validate()?;
    check_dt(ops, cfg)?;
    step_inner(u_n, ops, cfg, 0)
}

/// `M_φ (u_next - u_n) + dt K m - (dt/2) B(m)` with `m = (u_n + u_next)/2`;
/// zero for an exact solution of the step equation.
pub fn scheme_residual(u_n: &HermiteField, u_next: &HermiteField, ops: &AssembledOperators) -> Result<DVector<f64>> {
    if u_n.mesh() != ops.mesh() || u_next.mesh() != ops.mesh() {
        return Err(Error::MeshMismatch);
    }
    let a = DVector::from_column_slice(u_n.coeffs());
    let b = DVector::from_column_slice(u_next.coeffs());
    let m = (&a + &b) * 0.5;
    let mid = HermiteField::from_coeffs(*ops.mesh(), m.as_slice().to_vec())?;
    let dt = ops.dt();
    Ok(ops.mass_w() * (&b - &a) + ops.hilbert_stiff() * &m * dt - ops.nonlinear(&mid) * (0.5 * dt))
}

/// Tolerance the step residual inherits from stopping the iteration early:
/// `(dt/4) ‖J(m)‖_F ‖Δw‖`, with `J` the Jacobian of the nonlinear form at
/// the converged midpoint and `Δw` the last coefficient increment.
pub fn linearization_tolerance(
    u_n: &HermiteField,
    u_next: &HermiteField,
    ops: &AssembledOperators,
    report: &StepReport,
) -> Result<f64> {
    let a = DVector::from_column_slice(u_n.coeffs());
    let b = DVector::from_column_slice(u_next.coeffs());
    let mid = HermiteField::from_coeffs(*ops.mesh(), ((&a + &b) * 0.5).as_slice().to_vec())?;
    let j: DMatrix<f64> = nonlinear_jacobian(&mid, ops.weight(), ops.outer_rule());
    Ok(0.25 * ops.dt() * j.norm() * report.increment_coeff_norm)
}

/// Aggregate statistics of a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub total_iterations: usize,
    pub max_iterations: usize,
    /// Iteration count -> number of steps that needed it.
    pub iteration_histogram: BTreeMap<usize, usize>,
    pub max_final_residual: f64,
}

impl RunStats {
    fn record(&mut self, r: &StepReport) {
        self.steps += 1;
        self.total_iterations += r.iterations_used;
        self.max_iterations = self.max_iterations.max(r.iterations_used);
        *self.iteration_histogram.entry(r.iterations_used).or_insert(0) += 1;
        self.max_final_residual = self.max_final_residual.max(r.final_residual);
    }
}

/// A resumable time loop. Stepping `k` then `m` times produces exactly the
/// same coefficients as stepping `k + m` times.
#[derive(Debug, Clone)]
pub struct Evolver<'a> {
    ops: &'a AssembledOperators,
    cfg: SchemeConfig,
    state: HermiteField,
    step: usize,
    stats: RunStats,
}

impl<'a> Evolver<'a> {
    pub fn new(u0: HermiteField, ops: &'a AssembledOperators, cfg: SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        check_dt(ops, &cfg)?;
        if u0.mesh() != ops.mesh() {
            return Err(Error::MeshMismatch);
        }
        Ok(Self { ops, cfg, state: u0, step: 0, stats: RunStats::default() })
    }

    pub fn state(&self) -> &HermiteField {
        &self.state
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.dt
    }

    pub fn stats(&self) -> &RunStats {
        &self.stats
    }

    pub fn advance(&mut self) -> Result<StepReport> {
        let (next, report) = step_inner(&self.state, self.ops, &self.cfg, self.step + 1)?;
        self.state = next;
        self.step += 1;
        self.stats.record(&report);
        Ok(report)
    }

    /// Steps until the step index reaches `target`; no-op if already there.
    pub fn advance_to(&mut self, target: usize) -> Result<()> {
        while self.step < target {
            self.advance()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub requested_time: f64,
    pub time: f64,
    pub step: usize,
    pub field: HermiteField,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub snapshots: Vec<Snapshot>,
    pub final_state: HermiteField,
    pub final_time: f64,
    pub stats: RunStats,
}

/// Runs `round(t_end / dt)` steps, keeping the state at the step nearest to
/// each requested time.
pub fn evolve(
    u0: HermiteField,
    ops: &AssembledOperators,
    cfg: &SchemeConfig,
    snapshot_times: &[f64],
) -> Result<Evolution> {
    cfg.validate()?;
    let total = cfg.steps_to(cfg.t_end);
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(snapshot_times.len());
    for (i, &t) in snapshot_times.iter().enumerate() {
        if !(t.is_finite() && t >= 0.0) || t > cfg.t_end + 0.5 * cfg.dt {
            return Err(Error::InvalidParameter(format!("snapshot time {t} outside [0, t_end = {}]", cfg.t_end)));
        }
        order.push((cfg.steps_to(t).min(total), i));
    }
    order.sort_unstable();

    let mut ev = Evolver::new(u0, ops, *cfg)?;
    let mut snaps: Vec<Option<Snapshot>> = vec![None; snapshot_times.len()];
    for (target, i) in order {
        ev.advance_to(target)?;
        snaps[i] = Some(Snapshot {
            requested_time: snapshot_times[i],
            time: ev.time(),
            step: ev.step_index(),
            field: ev.state().clone(),
        });
    }
    ev.advance_to(total)?;
    Ok(Evolution {
        snapshots: snaps.into_iter().map(|s| s.expect("every snapshot is visited")).collect(),
        final_time: ev.time(),
        final_state: ev.state.clone(),
        stats: ev.stats,
    })
}
