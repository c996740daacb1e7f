//! Dense stiffness matrix of the periodic Hilbert transform,
//! `K[i][j] = ⟨H_per v_j', (φ v_i)'⟩`.
//!
//! The kernel `cot(π y / P) / P` is split into `1 / (π y)` plus a remainder
//! that is analytic on `|y| < P`. On element pairs closer than two elements the
//! singular part is integrated in closed form against the (quadratic) slope of
//! each shape and the remainder with the inner Gauss rule; farther pairs use
//! the inner rule on the full kernel. The outer integral uses the outer Gauss
//! rule, refined geometrically toward the element ends on the three diagonal
//! offsets where `H_per v_j'` has `x log x` behaviour at the nodes.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::weight::WeightFunction;
use crate::mesh::{local_shape, local_shape_slope_poly, Boundary, HermiteField, UniformPeriodicMesh, LOCAL_DOFS};
use crate::quadrature::{GradedRule, QuadratureRule};

/// Geometric refinement depth of the outer rule near the diagonal.
const GRADED_LEVELS: usize = 24;

/// `cot(π y / P) / P`
#[inline]
pub fn cot_kernel(y: f64, period: f64) -> f64 {
    1.0 / (period * (PI * y / period).tan())
}

/// `cot(π y / P) / P - 1 / (π y)`, odd and analytic on `|y| < P`.
#[inline]
pub fn kernel_remainder(y: f64, period: f64) -> f64 {
    let w = PI * y / period;
    let r = if w.abs() < 0.2 {
        // Laurent series of cot w - 1/w
        let w2 = w * w;
        -w * (1.0 / 3.0
            + w2 * (1.0 / 45.0
                + w2 * (2.0 / 945.0 + w2 * (1.0 / 4725.0 + w2 * (2.0 / 93555.0 + w2 * (1382.0 / 638512875.0))))))
    } else {
        1.0 / w.tan() - 1.0 / w
    };
    r / period
}

/// `p.v. ∫ ψ_b'(η) k(h (z - η)) dη` over `η ∈ [0, 1]`, i.e. the periodic
/// Hilbert transform of the slope of local shape `b` on one element, at the
/// point sitting `z` element widths to the right of the element's left end.
///
/// Only the image of the element with `z - 1/2` in `[-P/2h, P/2h)` may be
/// passed; the kernel's periodicity accounts for the others.
pub fn element_slope_transform(b: usize, z: f64, h: f64, period: f64, inner: &QuadratureRule) -> f64 {
    let p = local_shape_slope_poly(b);
    let gap = (-z).max(z - 1.0).max(0.0);
    if gap < 2.0 {
        // Taylor coefficients of the slope polynomial about z
        let c0 = p[0] + z * (p[1] + z * p[2]);
        let c1 = p[1] + 2.0 * p[2] * z;
        let c2 = p[2];
        // at a node the log terms of neighbouring elements cancel exactly, so
        // the divergent piece is dropped on both sides
        let log = if c0 == 0.0 { 0.0 } else { c0 * (ln_abs(1.0 - z) - ln_abs(z)) };
        let singular = -(log + c1 + 0.5 * c2 * (1.0 - 2.0 * z)) / (PI * h);
        let smooth: f64 = inner
            .mapped(0.0, 1.0)
            .map(|(eta, w)| w * (p[0] + eta * (p[1] + eta * p[2])) * kernel_remainder(h * (z - eta), period))
            .sum();
        singular + smooth
    } else {
        inner
            .mapped(0.0, 1.0)
            .map(|(eta, w)| w * (p[0] + eta * (p[1] + eta * p[2])) * cot_kernel(h * (z - eta), period))
            .sum()
    }
}

#[inline]
fn ln_abs(t: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.abs().ln()
    }
}

/// Signed element offset in `(-N/2, N/2]` for unsigned offset `k`.
#[inline]
fn signed_offset(k: usize, n: usize) -> isize {
    if k <= n / 2 {
        k as isize
    } else {
        k as isize - n as isize
    }
}

/// `(H_per u')(x)` for a Hermite field.
pub fn hilbert_of_slope(field: &HermiteField, x: f64, inner: &QuadratureRule) -> f64 {
    let mesh = field.mesh();
    let n = mesh.num_elements();
    let h = mesh.dx();
    let (e, xi) = mesh.locate(x);
    let mut acc = 0.0;
    for k in 0..n {
        let d = signed_offset(k, n);
        let ep = (e + k) % n;
        let z = xi - d as f64;
        let c = field.element_coeffs(ep);
        for (b, cb) in c.iter().enumerate() {
            if *cb != 0.0 {
                acc += cb * element_slope_transform(b, z, h, mesh.period(), inner);
            }
        }
    }
    acc
}

/// Translation-invariant table: for each unsigned offset `k`, outer point
/// `q` and shape `b`, the transform of `ψ_b'` on element `e + k` evaluated at
/// outer point `q` of element `e`.
struct SlopeTable {
    near_points: Vec<f64>,
    near_weights: Vec<f64>,
    far_points: Vec<f64>,
    far_weights: Vec<f64>,
    rows: Vec<Vec<[f64; LOCAL_DOFS]>>,
    near: Vec<bool>,
}

impl SlopeTable {
    fn build(mesh: &UniformPeriodicMesh, inner: &QuadratureRule, outer: &QuadratureRule) -> Self {
        let graded = GradedRule::new(outer, GRADED_LEVELS);
        let (far_points, far_weights): (Vec<f64>, Vec<f64>) = outer.mapped(0.0, 1.0).unzip();
        let n = mesh.num_elements();
        let h = mesh.dx();
        let period = mesh.period();
        let near: Vec<bool> = (0..n).map(|k| signed_offset(k, n).abs() <= 1).collect();
        let rows = (0..n)
            .into_par_iter()
            .map(|k| {
                let d = signed_offset(k, n) as f64;
                let pts = if near[k] { &graded.points } else { &far_points };
                pts.iter()
                    .map(|&xi| {
                        let mut row = [0.0; LOCAL_DOFS];
                        for (b, r) in row.iter_mut().enumerate() {
                            *r = element_slope_transform(b, xi - d, h, period, inner);
                        }
                        row
                    })
                    .collect()
            })
            .collect();
        Self { near_points: graded.points, near_weights: graded.weights, far_points, far_weights, rows, near }
    }
}

/// `(φ ψ_a)'` times the quadrature weight, at each point of a rule on element `e`.
fn weighted_test_slopes(
    mesh: &UniformPeriodicMesh,
    weight: &WeightFunction,
    e: usize,
    points: &[f64],
    weights: &[f64],
) -> Vec<[f64; LOCAL_DOFS]> {
    let h = mesh.dx();
    points
        .iter()
        .zip(weights)
        .map(|(&xi, &w)| {
            let (phi, dphi) = weight.eval(mesh.element_point(e, xi));
            let mut out = [0.0; LOCAL_DOFS];
            for (a, o) in out.iter_mut().enumerate() {
                let s = local_shape(a, xi);
                *o = h * w * (phi * s[1] / h + dphi * s[0]);
            }
            out
        })
        .collect()
}

pub fn assemble_hilbert_stiffness(
    mesh: &UniformPeriodicMesh,
    weight: &WeightFunction,
    inner: &QuadratureRule,
    outer: &QuadratureRule,
) -> DMatrix<f64> {
    let n = mesh.num_elements();
    let ndof = mesh.num_dofs();
    let table = SlopeTable::build(mesh, inner, outer);
    let mut data = vec![0.0; ndof * ndof];

    // rows 2j and 2j+1 collect the local shapes 0,1 of element j and 2,3 of element j-1
    data.par_chunks_mut(2 * ndof).enumerate().for_each(|(j, rows)| {
        let owners = match mesh.boundary() {
            Boundary::Periodic => vec![(j, [0usize, 1]), ((j + n - 1) % n, [2, 3])],
            Boundary::Free => {
                let mut v = Vec::with_capacity(2);
                if j < n {
                    v.push((j, [0usize, 1]));
                }
                if j > 0 {
                    v.push((j - 1, [2, 3]));
                }
                v
            }
        };
        for (e, local) in owners {
            let f_near = weighted_test_slopes(mesh, weight, e, &table.near_points, &table.near_weights);
            let f_far = weighted_test_slopes(mesh, weight, e, &table.far_points, &table.far_weights);
            for k in 0..n {
                let f = if table.near[k] { &f_near } else { &f_far };
                let g = &table.rows[k];
                let cols = mesh.element_dofs((e + k) % n);
                for (r, &a) in local.iter().enumerate() {
                    let mut block = [0.0; LOCAL_DOFS];
                    for (fq, gq) in f.iter().zip(g) {
                        let fa = fq[a];
                        for b in 0..LOCAL_DOFS {
                            block[b] += fa * gq[b];
                        }
                    }
                    let row = &mut rows[r * ndof..(r + 1) * ndof];
                    for b in 0..LOCAL_DOFS {
                        row[cols[b]] += block[b];
                    }
                }
            }
        }
    });
    DMatrix::from_row_slice(ndof, ndof, &data)
}
