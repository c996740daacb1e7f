use std::f64::consts::PI;

use bofem::diagnostics::skew_ratio;
use bofem::harness::{ConvergenceReport, ReportRow};
use bofem::mesh::local_shape;
use bofem::operators::{assemble_hilbert_stiffness, assemble_weighted_mass, l2_inner, nonlinear_form, unit_norm};
use bofem::quadrature::{gauss_legendre, integrate_panel};
use bofem::{
    interpolate, project, step, AssembledOperators, DoubleSolitonParams, HermiteField, PeriodicWaveParams,
    QuadratureOrders, SchemeConfig, UniformPeriodicMesh, WeightFunction,
};
use nalgebra::DVector;
use proptest::prelude::*;

fn mesh_strategy() -> impl Strategy<Value = UniformPeriodicMesh> {
    (-20.0f64..20.0, 0.5f64..40.0, 4usize..40, any::<bool>()).prop_map(|(left, width, n, free)| {
        if free {
            UniformPeriodicMesh::free(left, left + width, n).unwrap()
        } else {
            UniformPeriodicMesh::new(left, left + width, n).unwrap()
        }
    })
}

fn field_strategy() -> impl Strategy<Value = HermiteField> {
    mesh_strategy().prop_flat_map(|mesh| {
        prop::collection::vec(-2.0f64..2.0, mesh.num_dofs())
            .prop_map(move |c| HermiteField::from_coeffs(mesh, c).unwrap())
    })
}

proptest! {
    #[test]
    fn fields_are_c1_across_nodes(f in field_strategy()) {
        let mesh = *f.mesh();
        let n = mesh.num_elements();
        let interior = if mesh.boundary() == bofem::Boundary::Periodic { n } else { n - 1 };
        let scale = 1.0 + f.coeffs().iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for e in 0..interior {
            let next = (e + 1) % n;
            for order in [0u8, 1] {
                let left = f.evaluate_on_element(e, 1.0, order);
                let right = f.evaluate_on_element(next, 0.0, order);
                prop_assert!((left - right).abs() <= 1e-12 * scale / mesh.dx().powi(order as i32));
            }
        }
    }

    #[test]
    fn value_shapes_form_a_partition_of_unity(xi in 0.0f64..=1.0) {
        let s = local_shape(0, xi)[0] + local_shape(2, xi)[0];
        prop_assert!((s - 1.0).abs() <= 1e-15);
        let d = local_shape(0, xi)[1] + local_shape(2, xi)[1];
        prop_assert!(d.abs() <= 1e-14);
    }

    #[test]
    fn cubics_are_interpolated_exactly(
        mesh in mesh_strategy(),
        a in prop::array::uniform4(-1.0f64..1.0),
        t in 0.0f64..1.0,
    ) {
        // Centre the cubic on the mesh to keep magnitudes moderate.
        let c = 0.5 * (mesh.left() + mesh.right());
        let s = 2.0 / (mesh.right() - mesh.left());
        let p = |x: f64| { let y = s * (x - c); a[0] + y * (a[1] + y * (a[2] + y * a[3])) };
        let dp = |x: f64| { let y = s * (x - c); s * (a[1] + y * (2.0 * a[2] + 3.0 * y * a[3])) };
        // A periodic mesh only reproduces the cubic away from the seam.
        let free = UniformPeriodicMesh::free(mesh.left(), mesh.right(), mesh.num_elements()).unwrap();
        let f = interpolate(p, dp, &free);
        let x = free.left() + t * (free.right() - free.left());
        prop_assert!((f.evaluate(x, 0) - p(x)).abs() <= 1e-12);
        prop_assert!((f.evaluate(x, 1) - dp(x)).abs() <= 1e-10 * (1.0 + s));
    }

    #[test]
    fn gauss_legendre_is_exact_for_low_degree_monomials(
        n in 1usize..=10,
        d_frac in 0.0f64..1.0,
        a in -3.0f64..3.0,
        w in 0.1f64..3.0,
    ) {
        let d = ((2 * n) as f64 * d_frac) as i32;
        let b = a + w;
        let rule = gauss_legendre(n).unwrap();
        let got = integrate_panel(rule, a, b, |x| x.powi(d));
        let exact = (b.powi(d + 1) - a.powi(d + 1)) / (d + 1) as f64;
        let scale = a.abs().max(b.abs()).powi(d) * w;
        prop_assert!((got - exact).abs() <= 1e-13 * scale.max(1e-300) * 10.0,
            "n={n} d={d} [{a},{b}] got {got} exact {exact}");
    }

    #[test]
    fn translation_covariance_of_the_double_soliton(x in -80.0f64..80.0, t in 0.0f64..200.0, s in -30.0f64..30.0) {
        let p = DoubleSolitonParams::overtaking();
        let (d1, d2) = p.offsets();
        let (c1, c2) = p.speeds();
        let q = DoubleSolitonParams::new(c1, c2, d1 + s, d2 + s).unwrap();
        prop_assert!((p.value(x, t) - q.value(x + s, t)).abs() <= 1e-12);
    }

    #[test]
    fn periodic_wave_travels_rigidly(x in -15.0f64..15.0, t in 0.0f64..500.0, shift in -50.0f64..50.0) {
        let p = PeriodicWaveParams::reference();
        let u = p.value(x, t);
        prop_assert!((u - p.value(x - p.speed() * shift, t - shift)).abs() <= 1e-12);
        prop_assert!((u - p.value(x + 2.0 * p.half_period(), t)).abs() <= 1e-12);
    }

    #[test]
    fn rates_match_their_error_column(e0 in 1e-6f64..1.0, ratios in prop::collection::vec(1.1f64..20.0, 1..6)) {
        let mut errors = vec![e0];
        for r in &ratios {
            let last = *errors.last().unwrap();
            errors.push(last / r);
        }
        let rows = errors.iter().enumerate().map(|(k, &e)| ReportRow {
            n: 16 << k, error: e, rate: None, dt: 0.1, time: 1.0, steps: 10,
        }).collect();
        let report = ConvergenceReport::new("prop", 1.0, "dt = 0.1", rows);
        let rates = report.rates();
        prop_assert_eq!(rates.len(), errors.len() - 1);
        for (k, r) in rates.iter().enumerate() {
            prop_assert!((r - (errors[k] / errors[k + 1]).log2()).abs() <= 1e-12);
        }
        prop_assert!(report.rows.last().unwrap().rate.is_none());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn unit_weight_hilbert_stiffness_is_skew(n in 4usize..24, half in 1.0f64..30.0) {
        let mesh = UniformPeriodicMesh::new(-half, half, n).unwrap();
        let (inner, outer) = QuadratureOrders::default().rules().unwrap();
        let k = assemble_hilbert_stiffness(&mesh, &WeightFunction::Unit, inner, outer);
        prop_assert!(skew_ratio(&k) <= 1e-10);
    }

    #[test]
    fn weighted_mass_is_positive_definite(
        f in field_strategy(),
        rel_slope in -0.9f64..0.9,
    ) {
        let mesh = *f.mesh();
        let reach = mesh.left().abs().max(mesh.right().abs());
        let weight = WeightFunction::Linear { intercept: reach + 1.0, slope: rel_slope };
        let rule = gauss_legendre(8).unwrap();
        let m = assemble_weighted_mass(&mesh, &weight, rule);
        prop_assert!(m.clone().cholesky().is_some());
        let c = DVector::from_column_slice(f.coeffs());
        let quad = c.dot(&(&m * &c));
        let direct = l2_inner(&mesh, &f, &f, &weight).unwrap();
        prop_assert!(quad > 0.0 || c.norm() == 0.0);
        prop_assert!((quad - direct).abs() <= 1e-10 * direct.abs().max(1e-12));
    }

    #[test]
    fn projection_is_idempotent(f in field_strategy(), weighted in any::<bool>()) {
        let mesh = *f.mesh();
        let weight = if weighted {
            WeightFunction::Linear { intercept: mesh.left().abs().max(mesh.right().abs()) + 2.0, slope: 1.0 }
        } else {
            WeightFunction::Unit
        };
        let p = project(|x| f.evaluate(x, 0), &mesh, &weight).unwrap();
        let scale = f.coeffs().iter().fold(1.0f64, |m, c| m.max(c.abs()));
        for (a, b) in p.coeffs().iter().zip(f.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-8 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn nonlinear_form_is_orthogonal_to_its_argument(n in 4usize..32, amp in prop::array::uniform3(-1.0f64..1.0)) {
        let l = 10.0;
        let mesh = UniformPeriodicMesh::new(-l, l, n).unwrap();
        let k = PI / l;
        let u = interpolate(
            |x| amp[0] * (k * x).sin() + amp[1] * (2.0 * k * x).cos() + amp[2],
            |x| amp[0] * k * (k * x).cos() - 2.0 * k * amp[1] * (2.0 * k * x).sin(),
            &mesh,
        );
        let b = nonlinear_form(&u, &WeightFunction::Unit, gauss_legendre(8).unwrap());
        let c = DVector::from_column_slice(u.coeffs());
        let norm = unit_norm(&mesh, u.coeffs());
        prop_assert!(c.dot(&b).abs() <= 1e-11 * (1.0 + norm.powi(3)));
    }

    #[test]
    fn converged_steps_conserve_the_l2_norm(n in 8usize..32, amp in 0.05f64..0.6, phase in 0.0f64..6.3) {
        let l = 10.0;
        let mesh = UniformPeriodicMesh::new(-l, l, n).unwrap();
        let k = PI / l;
        let u = interpolate(|x| amp * (k * x + phase).cos() + 0.3 * amp, |x| -amp * k * (k * x + phase).sin(), &mesh);
        let dt = 0.5 * mesh.dx();
        let ops = AssembledOperators::new(&mesh, WeightFunction::Unit, dt, QuadratureOrders::default()).unwrap();
        let cfg = SchemeConfig { dt, t_end: dt, stop_factor: 1e-12, max_iters: 200 };
        let (next, report) = step(&u, &ops, &cfg).unwrap();
        let before = unit_norm(&mesh, u.coeffs());
        prop_assert!((report.l2_norm_after - unit_norm(&mesh, next.coeffs())).abs() <= 1e-14 * before);
        prop_assert!((report.l2_norm_after - before).abs() <= 1e-10 * before);
    }
}
