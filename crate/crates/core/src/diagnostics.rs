//! Structural checks on the assembled operators.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exact::PeriodicWaveParams;
use crate::mesh::{interpolate, HermiteField, UniformPeriodicMesh};
use crate::operators::{
    assemble_hilbert_stiffness, assemble_weighted_mass, nonlinear_form, unit_norm, AssembledOperators,
    QuadratureOrders, WeightFunction,
};
use crate::projection::{load_vector, project};
use crate::quadrature::gauss_legendre;
use crate::solver::{Evolver, SchemeConfig};

/// `max |K + Kᵀ| / max |K|`
pub fn skew_ratio(k: &DMatrix<f64>) -> f64 {
    let m = k.amax();
    if m == 0.0 {
        return 0.0;
    }
    (k + k.transpose()).amax() / m
}

/// Relative error of the discrete Hilbert form on `sin(κx)`, `κ = kπ/L`.
///
/// Since `H sin(κx)' = κ sin(κx)`, integrating by parts gives
/// `⟨H s', v_i'⟩ = ⟨-κ² cos(κx), v_i⟩`. The assembled stiffness applied to
/// the interpolant of `s` is compared with that load vector in the Euclidean
/// norm, relative to the load vector.
pub fn multiplier_error(
    half_period: f64,
    wavenumber: usize,
    num_elements: usize,
    orders: QuadratureOrders,
) -> Result<f64> {
    let mesh = UniformPeriodicMesh::new(-half_period, half_period, num_elements)?;
    let kappa = wavenumber as f64 * PI / half_period;
    let (inner, outer) = orders.rules()?;
    let stiff = assemble_hilbert_stiffness(&mesh, &WeightFunction::Unit, inner, outer);
    let u = interpolate(|x| (kappa * x).sin(), |x| kappa * (kappa * x).cos(), &mesh);
    let c = DVector::from_column_slice(u.coeffs());
    let want = load_vector(|x| -kappa * kappa * (kappa * x).cos(), &mesh, &WeightFunction::Unit, gauss_legendre(8)?);
    Ok((stiff * c - &want).norm() / want.norm())
}

/// `uᵀ B(u) / ‖u‖³` for `φ = 1`; zero up to round-off.
pub fn nonlinear_antisymmetry(u: &HermiteField, orders: QuadratureOrders) -> Result<f64> {
    let (_, outer) = orders.rules()?;
    let b = nonlinear_form(u, &WeightFunction::Unit, outer);
    let c = DVector::from_column_slice(u.coeffs());
    let n = unit_norm(u.mesh(), u.coeffs());
    if n == 0.0 {
        return Ok(0.0);
    }
    Ok(c.dot(&b).abs() / (n * n * n))
}

/// One named check and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `true` when a larger value is better (a rate).
    pub at_least: bool,
}

impl Check {
    pub fn passed(&self) -> bool {
        if self.at_least {
            self.value >= self.threshold
        } else {
            self.value <= self.threshold
        }
    }
}

/// Skew symmetry, multiplier rates, nonlinear antisymmetry, mass
/// definiteness and a short conservation run, all on `[-15, 15]`.
pub fn check_operators(num_elements: usize, orders: QuadratureOrders) -> Result<Vec<Check>> {
    let l = 15.0;
    let mesh = UniformPeriodicMesh::new(-l, l, num_elements)?;
    let mut checks = Vec::new();

    let (inner, outer) = orders.rules()?;
    let stiff = assemble_hilbert_stiffness(&mesh, &WeightFunction::Unit, inner, outer);
    checks.push(Check { name: "skew_ratio".into(), value: skew_ratio(&stiff), threshold: 1e-8, at_least: false });

    for k in 1..=4 {
        let coarse = multiplier_error(l, k, num_elements, orders)?;
        let fine = multiplier_error(l, k, 2 * num_elements, orders)?;
        checks.push(Check {
            name: format!("multiplier_rate_k{k}"),
            value: (coarse / fine).log2(),
            threshold: 2.0,
            at_least: true,
        });
    }

    let u = interpolate(
        |x| (PI * x / l).sin() + 0.4 * (3.0 * PI * x / l).cos(),
        |x| PI / l * (PI * x / l).cos() - 1.2 * PI / l * (3.0 * PI * x / l).sin(),
        &mesh,
    );
    checks.push(Check {
        name: "nonlinear_antisymmetry".into(),
        value: nonlinear_antisymmetry(&u, orders)?,
        threshold: 1e-9,
        at_least: false,
    });

    let lin = WeightFunction::Linear { intercept: 2.0 * l, slope: 1.0 };
    let spd = assemble_weighted_mass(&mesh, &lin, outer).cholesky().is_some()
        && assemble_weighted_mass(&mesh, &WeightFunction::Unit, outer).cholesky().is_some();
    checks.push(Check {
        name: "mass_positive_definite".into(),
        value: if spd { 0.0 } else { 1.0 },
        threshold: 0.0,
        at_least: false,
    });

    let p = PeriodicWaveParams::new(0.25, l)?;
    let u0 = project(|x| p.value(x, 0.0), &mesh, &WeightFunction::Unit)?;
    let dt = 0.5 * mesh.dx();
    let ops = AssembledOperators::with_stiffness(&mesh, WeightFunction::Unit, dt, orders, stiff)?;
    let cfg = SchemeConfig { dt, t_end: 20.0 * dt, stop_factor: 1e-10, max_iters: 200 };
    let n0 = unit_norm(&mesh, u0.coeffs());
    let mut ev = Evolver::new(u0, &ops, cfg)?;
    ev.advance_to(20)?;
    let drift = (unit_norm(&mesh, ev.state().coeffs()) - n0).abs() / n0;
    checks.push(Check { name: "l2_drift_20_steps".into(), value: drift, threshold: 1e-8, at_least: false });
    Ok(checks)
}
