//! Bilinear and trilinear forms of the scheme and the factorized implicit
//! matrix `A = M_φ + (dt/2) K`.

mod hilbert;
mod weight;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};

pub use hilbert::{
    assemble_hilbert_stiffness, cot_kernel, element_slope_transform, hilbert_of_slope, kernel_remainder,
};
pub use weight::WeightFunction;

use crate::error::{Error, Result};
use crate::mesh::{local_shape, HermiteField, UniformPeriodicMesh, LOCAL_DOFS};
use crate::quadrature::{gauss_legendre, QuadratureRule};

/// Gauss-Legendre orders: `inner` for the principal-value integral of the
/// Hilbert transform, `outer` for every inner product over an element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureOrders {
    pub inner: usize,
    pub outer: usize,
}

impl Default for QuadratureOrders {
    fn default() -> Self {
        Self { inner: 7, outer: 8 }
    }
}

impl QuadratureOrders {
    pub fn rules(&self) -> Result<(&'static QuadratureRule, &'static QuadratureRule)> {
        Ok((gauss_legendre(self.inner)?, gauss_legendre(self.outer)?))
    }
}

fn element_form<F>(mesh: &UniformPeriodicMesh, rule: &QuadratureRule, mut f: F) -> DMatrix<f64>
where
    F: FnMut(usize, f64, f64, &[[f64; 3]; LOCAL_DOFS]) -> [[f64; LOCAL_DOFS]; LOCAL_DOFS],
{
    let ndof = mesh.num_dofs();
    let mut m = DMatrix::zeros(ndof, ndof);
    for e in 0..mesh.num_elements() {
        let mut local = [[0.0; LOCAL_DOFS]; LOCAL_DOFS];
        for (xi, w) in rule.mapped(0.0, 1.0) {
            let shapes = [0, 1, 2, 3].map(|a| local_shape(a, xi));
            let contrib = f(e, xi, w * mesh.dx(), &shapes);
            for a in 0..LOCAL_DOFS {
                for b in 0..LOCAL_DOFS {
                    local[a][b] += contrib[a][b];
                }
            }
        }
        let dofs = mesh.element_dofs(e);
        for a in 0..LOCAL_DOFS {
            for b in 0..LOCAL_DOFS {
                m[(dofs[a], dofs[b])] += local[a][b];
            }
        }
    }
    m
}

/// `M[i][j] = ∫ v_j v_i φ dx`
pub fn assemble_weighted_mass(
    mesh: &UniformPeriodicMesh,
    weight: &WeightFunction,
    outer: &QuadratureRule,
) -> DMatrix<f64> {
    element_form(mesh, outer, |e, xi, w, s| {
        let phi = weight.eval(mesh.element_point(e, xi)).0;
        let mut out = [[0.0; LOCAL_DOFS]; LOCAL_DOFS];
        for a in 0..LOCAL_DOFS {
            for b in 0..LOCAL_DOFS {
                out[a][b] = w * phi * s[a][0] * s[b][0];
            }
        }
        out
    })
}

/// Element mass matrix of the unit weight on a cell of width `dx`.
pub fn local_unit_mass(dx: f64) -> [[f64; LOCAL_DOFS]; LOCAL_DOFS] {
    let rule = gauss_legendre(4).expect("order 4 is supported");
    let mut m = [[0.0; LOCAL_DOFS]; LOCAL_DOFS];
    for (xi, w) in rule.mapped(0.0, 1.0) {
        let s = [0, 1, 2, 3].map(|a| local_shape(a, xi)[0]);
        for a in 0..LOCAL_DOFS {
            for b in 0..LOCAL_DOFS {
                m[a][b] += dx * w * s[a] * s[b];
            }
        }
    }
    m
}

/// `∫ u v φ dx` evaluated element by element.
pub fn l2_inner(
    mesh: &UniformPeriodicMesh,
    a: &HermiteField,
    b: &HermiteField,
    weight: &WeightFunction,
) -> Result<f64> {
    if a.mesh() != mesh || b.mesh() != mesh {
        return Err(Error::MeshMismatch);
    }
    if weight.is_unit() {
        return Ok(unit_inner(mesh, a.coeffs(), b.coeffs()));
    }
    let rule = gauss_legendre(8)?;
    let mut acc = 0.0;
    for e in 0..mesh.num_elements() {
        let (ca, cb) = (a.element_coeffs(e), b.element_coeffs(e));
        for (xi, w) in rule.mapped(0.0, 1.0) {
            let s = [0, 1, 2, 3].map(|k| local_shape(k, xi)[0]);
            let ua: f64 = (0..LOCAL_DOFS).map(|k| ca[k] * s[k]).sum();
            let ub: f64 = (0..LOCAL_DOFS).map(|k| cb[k] * s[k]).sum();
            acc += mesh.dx() * w * weight.eval(mesh.element_point(e, xi)).0 * ua * ub;
        }
    }
    Ok(acc)
}

/// Unit-weight Gram form `aᵀ M b` on raw coefficient slices.
pub fn unit_inner(mesh: &UniformPeriodicMesh, a: &[f64], b: &[f64]) -> f64 {
    let m = local_unit_mass(mesh.dx());
    let mut acc = 0.0;
    for e in 0..mesh.num_elements() {
        let dofs = mesh.element_dofs(e);
        for i in 0..LOCAL_DOFS {
            let mut row = 0.0;
            for j in 0..LOCAL_DOFS {
                row += m[i][j] * b[dofs[j]];
            }
            acc += a[dofs[i]] * row;
        }
    }
    acc
}

/// `‖u‖_{L²}` of a coefficient vector.
pub fn unit_norm(mesh: &UniformPeriodicMesh, c: &[f64]) -> f64 {
    unit_inner(mesh, c, c).max(0.0).sqrt()
}

/// `B[i] = ∫ u² (φ v_i)' dx`
pub fn nonlinear_form(field: &HermiteField, weight: &WeightFunction, outer: &QuadratureRule) -> DVector<f64> {
    let mesh = field.mesh();
    let h = mesh.dx();
    let mut out = DVector::zeros(mesh.num_dofs());
    for e in 0..mesh.num_elements() {
        let c = field.element_coeffs(e);
        let dofs = mesh.element_dofs(e);
        for (xi, w) in outer.mapped(0.0, 1.0) {
            let s = [0, 1, 2, 3].map(|a| local_shape(a, xi));
            let u: f64 = (0..LOCAL_DOFS).map(|a| c[a] * s[a][0]).sum();
            let (phi, dphi) = weight.eval(mesh.element_point(e, xi));
            let f = h * w * u * u;
            for a in 0..LOCAL_DOFS {
                out[dofs[a]] += f * (phi * s[a][1] / h + dphi * s[a][0]);
            }
        }
    }
    out
}

/// Jacobian of [`nonlinear_form`] with respect to the coefficients of `u`:
/// `J[i][k] = 2 ∫ u v_k (φ v_i)' dx`.
pub fn nonlinear_jacobian(field: &HermiteField, weight: &WeightFunction, outer: &QuadratureRule) -> DMatrix<f64> {
    let mesh = *field.mesh();
    let h = mesh.dx();
    element_form(&mesh, outer, |e, xi, w, s| {
        let c = field.element_coeffs(e);
        let u: f64 = (0..LOCAL_DOFS).map(|a| c[a] * s[a][0]).sum();
        let (phi, dphi) = weight.eval(mesh.element_point(e, xi));
        let mut out = [[0.0; LOCAL_DOFS]; LOCAL_DOFS];
        for a in 0..LOCAL_DOFS {
            let test = phi * s[a][1] / h + dphi * s[a][0];
            for k in 0..LOCAL_DOFS {
                out[a][k] = 2.0 * w * u * s[k][0] * test;
            }
        }
        out
    })
}

/// Everything the time loop needs for one `(mesh, φ, dt)` triple.
///
/// Immutable after construction; [`AssembledOperators::solve`] allocates its
/// own output, so concurrent solves through a shared reference are fine.
#[derive(Debug, Clone)]
pub struct AssembledOperators {
    mesh: UniformPeriodicMesh,
    weight: WeightFunction,
    orders: QuadratureOrders,
    dt: f64,
    mass_w: DMatrix<f64>,
    hilbert_stiff: DMatrix<f64>,
    implicit_lu: LU<f64, Dyn, Dyn>,
}

impl AssembledOperators {
    pub fn new(mesh: &UniformPeriodicMesh, weight: WeightFunction, dt: f64, orders: QuadratureOrders) -> Result<Self> {
        weight.validate(mesh)?;
        let (inner, outer) = orders.rules()?;
        let mass_w = assemble_weighted_mass(mesh, &weight, outer);
        let hilbert_stiff = assemble_hilbert_stiffness(mesh, &weight, inner, outer);
        Self::from_parts(*mesh, weight, orders, dt, mass_w, hilbert_stiff)
    }

    /// Reuses an already assembled Hilbert stiffness (it does not depend on
    /// `dt`), assembling only the mass matrix.
    pub fn with_stiffness(
        mesh: &UniformPeriodicMesh,
        weight: WeightFunction,
        dt: f64,
        orders: QuadratureOrders,
        hilbert_stiff: DMatrix<f64>,
    ) -> Result<Self> {
        weight.validate(mesh)?;
        if hilbert_stiff.shape() != (mesh.num_dofs(), mesh.num_dofs()) {
            return Err(Error::MeshMismatch);
        }
        let (_, outer) = orders.rules()?;
        let mass_w = assemble_weighted_mass(mesh, &weight, outer);
        Self::from_parts(*mesh, weight, orders, dt, mass_w, hilbert_stiff)
    }

    fn from_parts(
        mesh: UniformPeriodicMesh,
        weight: WeightFunction,
        orders: QuadratureOrders,
        dt: f64,
        mass_w: DMatrix<f64>,
        hilbert_stiff: DMatrix<f64>,
    ) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        let a = &mass_w + &hilbert_stiff * (0.5 * dt);
        let implicit_lu = a.lu();
        if !implicit_lu.is_invertible() {
            return Err(Error::SingularMatrix);
        }
        Ok(Self { mesh, weight, orders, dt, mass_w, hilbert_stiff, implicit_lu })
    }

    /// Same mesh and weight, new time step; only the factorization is redone.
    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::from_parts(self.mesh, self.weight, self.orders, dt, self.mass_w.clone(), self.hilbert_stiff.clone())
    }

    pub fn mesh(&self) -> &UniformPeriodicMesh {
        &self.mesh
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    pub fn orders(&self) -> QuadratureOrders {
        self.orders
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn mass_w(&self) -> &DMatrix<f64> {
        &self.mass_w
    }

    pub fn hilbert_stiff(&self) -> &DMatrix<f64> {
        &self.hilbert_stiff
    }

    pub fn outer_rule(&self) -> &'static QuadratureRule {
        gauss_legendre(self.orders.outer).expect("validated at construction")
    }

    /// `A⁻¹ rhs` with `A = M_φ + (dt/2) K`.
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = rhs.clone();
        self.implicit_lu.solve_mut(&mut x);
        x
    }

    /// `A x`, the reconstructed implicit matrix applied to `x`.
    pub fn apply_implicit(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.mass_w * x + (&self.hilbert_stiff * x) * (0.5 * self.dt)
    }

    pub fn nonlinear(&self, field: &HermiteField) -> DVector<f64> {
        nonlinear_form(field, &self.weight, self.outer_rule())
    }
}
