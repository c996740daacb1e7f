//! Uniform periodic mesh and the C¹ cubic Hermite space on it.
//!
//! Node `j` carries two degrees of freedom: the value coefficient (index
//! `2j`, multiplying `f((x - x_j)/dx)`) and the scaled-derivative coefficient
//! (index `2j + 1`, multiplying `g((x - x_j)/dx)`). Since `g'(0) = 1`, the
//! derivative coefficient equals `dx * u'(x_j)` for an interpolant.
//!
//! Restricted to one element `[x_e, x_e + dx]` with local coordinate
//! `xi in [0, 1]`, the four basis functions that do not vanish are the
//! classical Hermite cubics, see [`local_shape`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of basis functions that are nonzero on one element.
pub const LOCAL_DOFS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapeKind {
    /// `f(y) = 1 + y²(2|y| - 3)`, the value shape.
    F,
    /// `g(y) = y(1 - |y|)²`, the slope shape.
    G,
}

/// Reference shape `f` or `g` and their first two derivatives on `[-1, 1]`.
///
/// Outside `[-1, 1]` the shapes vanish identically. The second derivative is
/// discontinuous at `y = 0` and `y = ±1`; there the right-hand branch is used.
pub fn shape_value(kind: ShapeKind, y: f64, derivative_order: u8) -> f64 {
    if !(-1.0..=1.0).contains(&y) {
        return 0.0;
    }
    let a = y.abs();
    // sign of the right-hand branch, so that y = 0 picks s = +1
    let s = if y < 0.0 { -1.0 } else { 1.0 };
    match (kind, derivative_order) {
        (ShapeKind::F, 0) => 1.0 + y * y * (2.0 * a - 3.0),
        (ShapeKind::F, 1) => 6.0 * y * a - 6.0 * y,
        (ShapeKind::F, 2) => 12.0 * a - 6.0,
        (ShapeKind::G, 0) => y * (1.0 - a) * (1.0 - a),
        (ShapeKind::G, 1) => 1.0 - 4.0 * a + 3.0 * y * y,
        (ShapeKind::G, 2) => -4.0 * s + 6.0 * y,
        (_, d) => panic!("derivative order {d} not supported"),
    }
}

/// Value, first and second `xi`-derivative of local shape `a` at `xi`.
///
/// Local order: `0` value at the left node, `1` slope at the left node,
/// `2` value at the right node, `3` slope at the right node.
#[inline]
pub fn local_shape(a: usize, xi: f64) -> [f64; 3] {
    let x2 = xi * xi;
    let x3 = x2 * xi;
    match a {
        0 => [1.0 - 3.0 * x2 + 2.0 * x3, -6.0 * xi + 6.0 * x2, -6.0 + 12.0 * xi],
        1 => [xi - 2.0 * x2 + x3, 1.0 - 4.0 * xi + 3.0 * x2, -4.0 + 6.0 * xi],
        2 => [3.0 * x2 - 2.0 * x3, 6.0 * xi - 6.0 * x2, 6.0 - 12.0 * xi],
        3 => [-x2 + x3, -2.0 * xi + 3.0 * x2, -2.0 + 6.0 * xi],
        _ => unreachable!("local shape index out of range"),
    }
}

/// Monomial coefficients (in `xi`) of the `xi`-derivative of local shape `a`.
#[inline]
pub(crate) fn local_shape_slope_poly(a: usize) -> [f64; 3] {
    match a {
        0 => [0.0, -6.0, 6.0],
        1 => [1.0, -4.0, 3.0],
        2 => [0.0, 6.0, -6.0],
        3 => [0.0, -2.0, 3.0],
        _ => unreachable!("local shape index out of range"),
    }
}

/// How the Hermite space treats the two ends of the interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// Node `N` is node `0`; `2N` degrees of freedom.
    #[default]
    Periodic,
    /// Both end nodes carry their own degrees of freedom, `2N + 2` in all.
    /// Integrals still run over one period of the Hilbert kernel; this is
    /// the space for weights that are not periodic, such as `φ = 120 + x`.
    Free,
}

/// Uniform grid on `[left, right]`, periodic in the sense of [`Boundary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformPeriodicMesh {
    left: f64,
    right: f64,
    num_elements: usize,
    dx: f64,
    #[serde(default)]
    boundary: Boundary,
}

impl UniformPeriodicMesh {
    pub fn new(left: f64, right: f64, num_elements: usize) -> Result<Self> {
        Self::with_boundary(left, right, num_elements, Boundary::Periodic)
    }

    pub fn free(left: f64, right: f64, num_elements: usize) -> Result<Self> {
        Self::with_boundary(left, right, num_elements, Boundary::Free)
    }

    pub fn with_boundary(left: f64, right: f64, num_elements: usize, boundary: Boundary) -> Result<Self> {
        if !(left.is_finite() && right.is_finite()) {
            return Err(Error::InvalidMesh("interval endpoints must be finite".into()));
        }
        if right <= left {
            return Err(Error::InvalidMesh(format!("right ({right}) must exceed left ({left})")));
        }
        if num_elements < 4 {
            return Err(Error::InvalidMesh(format!("at least 4 elements required, got {num_elements}")));
        }
        Ok(Self { left, right, num_elements, dx: (right - left) / num_elements as f64, boundary })
    }

    pub fn left(&self) -> f64 {
        self.left
    }

    pub fn right(&self) -> f64 {
        self.right
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Length of the periodic interval (`2L`).
    pub fn period(&self) -> f64 {
        self.right - self.left
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// `N` for a periodic mesh, `N + 1` for a free one.
    pub fn num_nodes(&self) -> usize {
        match self.boundary {
            Boundary::Periodic => self.num_elements,
            Boundary::Free => self.num_elements + 1,
        }
    }

    /// Dimension of the Hermite space.
    pub fn num_dofs(&self) -> usize {
        2 * self.num_nodes()
    }

    pub fn node(&self, j: usize) -> f64 {
        self.left + j as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_nodes()).map(|j| self.node(j)).collect()
    }

    /// Global coordinate of local point `xi` on element `e`.
    #[inline]
    pub fn element_point(&self, e: usize, xi: f64) -> f64 {
        self.left + (e as f64 + xi) * self.dx
    }

    /// Global dof indices of the four local shapes on element `e`.
    #[inline]
    pub fn element_dofs(&self, e: usize) -> [usize; LOCAL_DOFS] {
        let next = match self.boundary {
            Boundary::Periodic => (e + 1) % self.num_elements,
            Boundary::Free => e + 1,
        };
        [2 * e, 2 * e + 1, 2 * next, 2 * next + 1]
    }

    /// Reduces `x` into the periodic cell and returns `(element, xi)`. On a
    /// free mesh `right` itself maps to the end of the last element.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let t = (x - self.left) / self.dx;
        let n = self.num_elements as f64;
        if self.boundary == Boundary::Free && x == self.right {
            return (self.num_elements - 1, 1.0);
        }
        let mut t = t.rem_euclid(n);
        if t >= n {
            t = 0.0;
        }
        let e = (t.floor() as usize).min(self.num_elements - 1);
        (e, (t - e as f64).clamp(0.0, 1.0))
    }
}

/// Member of the Hermite space: `2N` coefficients over a periodic mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteField {
    mesh: UniformPeriodicMesh,
    coeffs: Vec<f64>,
}

impl HermiteField {
    pub fn zeros(mesh: UniformPeriodicMesh) -> Self {
        Self { mesh, coeffs: vec![0.0; mesh.num_dofs()] }
    }

    pub fn from_coeffs(mesh: UniformPeriodicMesh, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != mesh.num_dofs() {
            return Err(Error::InvalidParameter(format!(
                "expected {} coefficients, got {}",
                mesh.num_dofs(),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("coefficients must be finite".into()));
        }
        Ok(Self { mesh, coeffs })
    }

    pub fn mesh(&self) -> &UniformPeriodicMesh {
        &self.mesh
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Local coefficient vector of element `e`.
    #[inline]
    pub fn element_coeffs(&self, e: usize) -> [f64; LOCAL_DOFS] {
        self.mesh.element_dofs(e).map(|i| self.coeffs[i])
    }

    /// Value (or `xi`-scaled derivative) of the field on element `e` at `xi`,
    /// differentiated `derivative_order` times with respect to `x`.
    pub fn evaluate_on_element(&self, e: usize, xi: f64, derivative_order: u8) -> f64 {
        let k = derivative_order as usize;
        assert!(k <= 2, "derivative order {derivative_order} not supported");
        let c = self.element_coeffs(e);
        let s: f64 = (0..LOCAL_DOFS).map(|a| c[a] * local_shape(a, xi)[k]).sum();
        s / self.mesh.dx.powi(k as i32)
    }

    pub fn evaluate(&self, x: f64, derivative_order: u8) -> f64 {
        let (e, xi) = self.mesh.locate(x);
        self.evaluate_on_element(e, xi, derivative_order)
    }

    /// Samples `(x, u(x))` at `per_element` equispaced points per element,
    /// starting at the left endpoint of each element.
    pub fn sample(&self, per_element: usize) -> Vec<(f64, f64)> {
        let per = per_element.max(1);
        let mut out = Vec::with_capacity(per * self.mesh.num_elements);
        for e in 0..self.mesh.num_elements {
            for k in 0..per {
                let xi = k as f64 / per as f64;
                out.push((self.mesh.element_point(e, xi), self.evaluate_on_element(e, xi, 0)));
            }
        }
        out
    }

    /// Largest sampled magnitude: nodes plus `per_element` interior points.
    pub fn sup_norm_sampled(&self, per_element: usize) -> f64 {
        let per = per_element.max(1);
        let mut m = 0.0f64;
        for e in 0..self.mesh.num_elements {
            for k in 0..=per {
                let xi = k as f64 / per as f64;
                m = m.max(self.evaluate_on_element(e, xi, 0).abs());
            }
        }
        m
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { mesh: self.mesh, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    /// `self + s * other`
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        if self.mesh != other.mesh {
            return Err(Error::MeshMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + s * b).collect();
        Ok(Self { mesh: self.mesh, coeffs })
    }
}

/// Hermite interpolant: matches `u` and `du` at every node.
pub fn interpolate<U, DU>(u: U, du: DU, mesh: &UniformPeriodicMesh) -> HermiteField
where
    U: Fn(f64) -> f64,
    DU: Fn(f64) -> f64,
{
    let mut coeffs = Vec::with_capacity(mesh.num_dofs());
    for j in 0..mesh.num_nodes() {
        let x = mesh.node(j);
        coeffs.push(u(x));
        coeffs.push(mesh.dx() * du(x));
    }
    HermiteField { mesh: *mesh, coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mesh01(n: usize) -> UniformPeriodicMesh {
        UniformPeriodicMesh::new(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn shape_examples() {
        assert_eq!(shape_value(ShapeKind::F, 0.0, 0), 1.0);
        assert_eq!(shape_value(ShapeKind::G, 0.0, 1), 1.0);
        assert!((shape_value(ShapeKind::F, 0.5, 0) - 0.5).abs() < 1e-15);
        assert_eq!(shape_value(ShapeKind::F, 1.5, 0), 0.0);
        assert_eq!(shape_value(ShapeKind::G, -1.2, 1), 0.0);
        // right-hand branch at the kink
        assert_eq!(shape_value(ShapeKind::F, 0.0, 2), -6.0);
        assert_eq!(shape_value(ShapeKind::G, 0.0, 2), -4.0);
    }

    #[test]
    fn shape_derivatives_match_finite_differences() {
        let h = 1e-6;
        for kind in [ShapeKind::F, ShapeKind::G] {
            for &y in &[-0.9, -0.4, 0.3, 0.77] {
                let fd1 = (shape_value(kind, y + h, 0) - shape_value(kind, y - h, 0)) / (2.0 * h);
                let fd2 = (shape_value(kind, y + h, 1) - shape_value(kind, y - h, 1)) / (2.0 * h);
                assert!((fd1 - shape_value(kind, y, 1)).abs() < 1e-8);
                assert!((fd2 - shape_value(kind, y, 2)).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn local_shapes_agree_with_reference_shapes() {
        for &xi in &[0.0, 0.13, 0.5, 0.91, 1.0] {
            let right = xi - 1.0;
            let expect = [
                shape_value(ShapeKind::F, xi, 0),
                shape_value(ShapeKind::G, xi, 0),
                shape_value(ShapeKind::F, right, 0),
                shape_value(ShapeKind::G, right, 0),
            ];
            for (a, want) in expect.iter().enumerate() {
                assert!((local_shape(a, xi)[0] - want).abs() < 1e-15);
                let p = local_shape_slope_poly(a);
                let slope = p[0] + p[1] * xi + p[2] * xi * xi;
                assert!((slope - local_shape(a, xi)[1]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn mesh_rejects_bad_input() {
        assert!(UniformPeriodicMesh::new(1.0, 1.0, 8).is_err());
        assert!(UniformPeriodicMesh::new(0.0, 1.0, 3).is_err());
        assert!(UniformPeriodicMesh::new(0.0, f64::NAN, 8).is_err());
    }

    #[test]
    fn nodes_equally_spaced() {
        let m = UniformPeriodicMesh::new(-15.0, 15.0, 64).unwrap();
        let nodes = m.nodes();
        assert_eq!(nodes.len(), 64);
        for w in nodes.windows(2) {
            assert!(w[1] > w[0]);
            assert!((w[1] - w[0] - m.dx()).abs() < 1e-13);
        }
    }

    #[test]
    fn locate_wraps_periodically() {
        let m = UniformPeriodicMesh::new(-1.0, 1.0, 8).unwrap();
        let (e, xi) = m.locate(1.0);
        assert_eq!(e, 0);
        assert!(xi.abs() < 1e-12);
        let (e, xi) = m.locate(-1.0 - 0.125);
        assert_eq!(e, 7);
        assert!((xi - 0.5).abs() < 1e-12);
        let (e, xi) = m.locate(0.3 + 4.0);
        assert_eq!(e, 5);
        assert!((xi - 0.2).abs() < 1e-9);
    }

    #[test]
    fn zero_and_unit_fields() {
        let m = mesh01(8);
        let z = HermiteField::zeros(m);
        assert_eq!(z.evaluate(0.37, 0), 0.0);
        let mut one = HermiteField::zeros(m);
        for j in 0..8 {
            one.coeffs_mut()[2 * j] = 1.0;
        }
        for &x in &[0.0, 0.01, 0.37, 0.999] {
            assert!((one.evaluate(x, 0) - 1.0).abs() < 1e-15);
            assert!(one.evaluate(x, 1).abs() < 1e-12);
        }
    }

    #[test]
    fn cubic_reproduced_inside_an_element() {
        // a periodic mesh cannot carry x³ globally, but every element sees the
        // nodal data of the cubic on its own two nodes
        let m = mesh01(8);
        let f = interpolate(|x| x * x * x, |x| 3.0 * x * x, &m);
        let x = 0.37;
        assert!((f.evaluate(x, 0) - x * x * x).abs() < 1e-14);
        assert!((f.evaluate(x, 1) - 3.0 * x * x).abs() < 1e-12);
        assert!((f.evaluate(x, 2) - 6.0 * x).abs() < 1e-10);
    }

    #[test]
    fn interpolation_properties() {
        let m = UniformPeriodicMesh::new(-15.0, 15.0, 16).unwrap();
        let z = interpolate(|_| 0.0, |_| 0.0, &m);
        assert!(z.coeffs().iter().all(|&c| c == 0.0));
        let c = interpolate(|_| 2.5, |_| 0.0, &m);
        for j in 0..16 {
            assert_eq!(c.coeffs()[2 * j], 2.5);
            assert_eq!(c.coeffs()[2 * j + 1], 0.0);
        }
        let k = std::f64::consts::PI / 15.0;
        let s = interpolate(|x| (k * x).sin(), |x| k * (k * x).cos(), &m);
        for x in m.nodes() {
            assert!((s.evaluate(x, 0) - (k * x).sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn cardinality_at_nodes() {
        let m = UniformPeriodicMesh::new(0.0, 2.0, 6).unwrap();
        for j in 0..m.num_dofs() {
            let mut c = vec![0.0; m.num_dofs()];
            c[j] = 1.0;
            let f = HermiteField::from_coeffs(m, c).unwrap();
            for k in 0..6 {
                let x = m.node(k);
                let (v, d) = (f.evaluate(x, 0), f.evaluate(x, 1));
                let node = j / 2;
                if j % 2 == 0 {
                    assert!((v - if node == k { 1.0 } else { 0.0 }).abs() < 1e-14);
                    assert!(d.abs() < 1e-12);
                } else {
                    assert!(v.abs() < 1e-14);
                    let want = if node == k { 1.0 / m.dx() } else { 0.0 };
                    assert!((d - want).abs() < 1e-12);
                }
            }
        }
    }
}
