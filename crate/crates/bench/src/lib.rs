//! Fixtures shared by the benchmarks.

use bofem::{
    project, AssembledOperators, HermiteField, PeriodicWaveParams, QuadratureOrders, UniformPeriodicMesh,
    WeightFunction,
};

/// Periodic wave on `[-15, 15]` with `n` elements and `dt = 0.5 dx`.
pub fn periodic_wave(n: usize) -> (HermiteField, AssembledOperators) {
    let p = PeriodicWaveParams::reference();
    let mesh = UniformPeriodicMesh::new(-p.half_period(), p.half_period(), n).expect("valid mesh");
    let u0 = project(|x| p.value(x, 0.0), &mesh, &WeightFunction::Unit).expect("projection");
    let ops = AssembledOperators::new(&mesh, WeightFunction::Unit, 0.5 * mesh.dx(), QuadratureOrders::default())
        .expect("assembly");
    (u0, ops)
}
