//! Weighted L² projection onto the Hermite space and its error measures.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::mesh::{local_shape, HermiteField, UniformPeriodicMesh, LOCAL_DOFS};
use crate::operators::{assemble_weighted_mass, WeightFunction};
use crate::quadrature::{gauss_legendre, QuadratureRule};

/// Panels per element used for right-hand sides.
const RHS_PANELS: usize = 4;
/// Panels per element used when measuring errors.
const ERROR_PANELS: usize = 8;

/// `b[i] = ∫ u φ v_i dx`
pub fn load_vector<U>(u: U, mesh: &UniformPeriodicMesh, weight: &WeightFunction, rule: &QuadratureRule) -> DVector<f64>
where
    U: Fn(f64) -> f64,
{
    let mut b = DVector::zeros(mesh.num_dofs());
    let width = 1.0 / RHS_PANELS as f64;
    for e in 0..mesh.num_elements() {
        let dofs = mesh.element_dofs(e);
        let mut local = [0.0; LOCAL_DOFS];
        for p in 0..RHS_PANELS {
            let lo = p as f64 * width;
            for (xi, w) in rule.mapped(lo, lo + width) {
                let x = mesh.element_point(e, xi);
                let f = mesh.dx() * w * u(x) * weight.eval(x).0;
                for (a, l) in local.iter_mut().enumerate() {
                    *l += f * local_shape(a, xi)[0];
                }
            }
        }
        for a in 0..LOCAL_DOFS {
            b[dofs[a]] += local[a];
        }
    }
    b
}

/// `P_φ u`: the field `p` with `⟨p - u, φ v⟩ = 0` for every `v` in the space.
/// With the unit weight this is the plain L² projection.
pub fn project<U>(u: U, mesh: &UniformPeriodicMesh, weight: &WeightFunction) -> Result<HermiteField>
where
    U: Fn(f64) -> f64,
{
    weight.validate(mesh)?;
    let rule = gauss_legendre(8)?;
    let mass = assemble_weighted_mass(mesh, weight, rule);
    let b = load_vector(u, mesh, weight, rule);
    let chol = mass.cholesky().ok_or(Error::SingularMatrix)?;
    let c = chol.solve(&b);
    HermiteField::from_coeffs(*mesh, c.iter().copied().collect())
}

/// `max_i |∫ (p - u) φ v_i dx|`
pub fn orthogonality_residual<U>(u: U, field: &HermiteField, weight: &WeightFunction) -> Result<f64>
where
    U: Fn(f64) -> f64,
{
    let mesh = field.mesh();
    let rule = gauss_legendre(8)?;
    let mass = assemble_weighted_mass(mesh, weight, rule);
    let b = load_vector(u, mesh, weight, rule);
    let c = DVector::from_column_slice(field.coeffs());
    Ok((mass * c - b).amax())
}

/// `‖∂^m p - g‖_{L²}` where `g` is the `m`-th derivative of the target
/// function (`m` = 0 or 1).
pub fn projection_error<G>(exact_derivative: G, field: &HermiteField, order: u8) -> Result<f64>
where
    G: Fn(f64) -> f64,
{
    if order > 1 {
        return Err(Error::InvalidParameter(format!("seminorm order must be 0 or 1, got {order}")));
    }
    let mesh = field.mesh();
    let rule = gauss_legendre(8)?;
    let width = 1.0 / ERROR_PANELS as f64;
    let mut acc = 0.0;
    for e in 0..mesh.num_elements() {
        for p in 0..ERROR_PANELS {
            let lo = p as f64 * width;
            for (xi, w) in rule.mapped(lo, lo + width) {
                let d = field.evaluate_on_element(e, xi, order) - exact_derivative(mesh.element_point(e, xi));
                acc += mesh.dx() * w * d * d;
            }
        }
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constants_are_reproduced() {
        let mesh = UniformPeriodicMesh::new(-3.0, 5.0, 10).unwrap();
        let p = project(|_| 1.0, &mesh, &WeightFunction::Unit).unwrap();
        for j in 0..10 {
            assert!((p.coeffs()[2 * j] - 1.0).abs() < 1e-12);
            assert!(p.coeffs()[2 * j + 1].abs() < 1e-12);
        }
    }

    #[test]
    fn projection_is_idempotent_on_the_space() {
        let mesh = UniformPeriodicMesh::new(0.0, 1.0, 8).unwrap();
        let coeffs: Vec<f64> = (0..16).map(|i| ((i * 7 % 11) as f64 - 5.0) * 0.1).collect();
        let f = HermiteField::from_coeffs(mesh, coeffs).unwrap();
        let w = WeightFunction::Linear { intercept: 3.0, slope: 1.0 };
        for weight in [WeightFunction::Unit, w] {
            let p = project(|x| f.evaluate(x, 0), &mesh, &weight).unwrap();
            for (a, b) in p.coeffs().iter().zip(f.coeffs()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn orthogonality_holds() {
        let mesh = UniformPeriodicMesh::new(-15.0, 15.0, 24).unwrap();
        let u = |x: f64| (PI * x / 15.0).sin() + 0.3 * (2.0 * PI * x / 15.0).cos();
        let w = WeightFunction::Linear { intercept: 40.0, slope: 1.0 };
        for weight in [WeightFunction::Unit, w] {
            let p = project(u, &mesh, &weight).unwrap();
            assert!(orthogonality_residual(u, &p, &weight).unwrap() < 1e-12);
        }
    }

    #[test]
    fn zero_error_of_zero_field() {
        let mesh = UniformPeriodicMesh::new(0.0, 1.0, 4).unwrap();
        let z = HermiteField::zeros(mesh);
        assert_eq!(projection_error(|_| 0.0, &z, 0).unwrap(), 0.0);
        assert!(projection_error(|_| 0.0, &z, 2).is_err());
    }
}
