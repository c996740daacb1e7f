//! Closed-form solutions of `u_t + u u_x - H u_xx = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two interacting solitons on the line.
///
/// With `λ_i = x - c_i t - d_i`, `K = (c1 + c2)² / (c1 - c2)²`:
///
/// ```text
/// u = 4 c1 c2 (c1 λ1² + c2 λ2² + (c1 + c2)³ / (c1 c2 (c1 - c2)²))
///     / ((c1 c2 λ1 λ2 - K)² + (c1 λ1 + c2 λ2)²)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DoubleSolitonParams {
    c1: f64,
    c2: f64,
    d1: f64,
    d2: f64,
}

impl DoubleSolitonParams {
    pub fn new(c1: f64, c2: f64, d1: f64, d2: f64) -> Result<Self> {
        if !(c1.is_finite() && c2.is_finite() && d1.is_finite() && d2.is_finite()) {
            return Err(Error::InvalidParameter("soliton parameters must be finite".into()));
        }
        if c1 <= 0.0 || c2 <= 0.0 {
            return Err(Error::InvalidParameter(format!("soliton speeds must be positive, got {c1}, {c2}")));
        }
        if c1 == c2 {
            return Err(Error::InvalidParameter("soliton speeds must differ".into()));
        }
        Ok(Self { c1, c2, d1, d2 })
    }

    /// `c1 = 0.3, c2 = 0.6, d1 = -30, d2 = -55`
    pub fn overtaking() -> Self {
        Self { c1: 0.3, c2: 0.6, d1: -30.0, d2: -55.0 }
    }

    pub fn speeds(&self) -> (f64, f64) {
        (self.c1, self.c2)
    }

    pub fn offsets(&self) -> (f64, f64) {
        (self.d1, self.d2)
    }

    fn parts(&self, x: f64, t: f64) -> (f64, f64, f64, f64) {
        let (c1, c2) = (self.c1, self.c2);
        let l1 = x - c1 * t - self.d1;
        let l2 = x - c2 * t - self.d2;
        let s = c1 + c2;
        let q = (c1 - c2) * (c1 - c2);
        let num = 4.0 * c1 * c2 * (c1 * l1 * l1 + c2 * l2 * l2 + s * s * s / (c1 * c2 * q));
        let a = c1 * c2 * l1 * l2 - s * s / q;
        let b = c1 * l1 + c2 * l2;
        (num, a, b, a * a + b * b)
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let (num, _, _, den) = self.parts(x, t);
        num / den
    }

    pub fn dx(&self, x: f64, t: f64) -> f64 {
        let (c1, c2) = (self.c1, self.c2);
        let l1 = x - c1 * t - self.d1;
        let l2 = x - c2 * t - self.d2;
        let (num, a, b, den) = self.parts(x, t);
        let num_x = 8.0 * c1 * c2 * (c1 * l1 + c2 * l2);
        let den_x = 2.0 * a * c1 * c2 * (l1 + l2) + 2.0 * b * (c1 + c2);
        (num_x * den - num * den_x) / (den * den)
    }
}

/// The `2L`-periodic travelling wave
/// `u = 2 c δ² / (1 - √(1 - δ²) cos(c δ (x - c t)))` with `δ = π / (c L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicWaveParams {
    c: f64,
    half_period: f64,
    delta: f64,
}

impl PeriodicWaveParams {
    pub fn new(c: f64, half_period: f64) -> Result<Self> {
        if !(c.is_finite() && half_period.is_finite() && c > 0.0 && half_period > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "wave speed and half period must be positive, got c={c}, L={half_period}"
            )));
        }
        let delta = PI / (c * half_period);
        if delta >= 1.0 {
            return Err(Error::InvalidParameter(format!("δ = π/(cL) = {delta} must be below 1; increase c or L")));
        }
        Ok(Self { c, half_period, delta })
    }

    /// `c = 0.25, L = 15`
    pub fn reference() -> Self {
        Self::new(0.25, 15.0).expect("reference parameters are valid")
    }

    pub fn speed(&self) -> f64 {
        self.c
    }

    pub fn half_period(&self) -> f64 {
        self.half_period
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Time for the wave to travel one period.
    pub fn temporal_period(&self) -> f64 {
        2.0 * self.half_period / self.c
    }

    fn phase(&self, x: f64, t: f64) -> (f64, f64) {
        let k = self.c * self.delta;
        let theta = k * (x - self.c * t);
        (theta, k)
    }

    fn amplitude(&self) -> (f64, f64) {
        (2.0 * self.c * self.delta * self.delta, (1.0 - self.delta * self.delta).sqrt())
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let (theta, _) = self.phase(x, t);
        let (amp, a) = self.amplitude();
        amp / (1.0 - a * theta.cos())
    }

    pub fn dx(&self, x: f64, t: f64) -> f64 {
        let (theta, k) = self.phase(x, t);
        let (amp, a) = self.amplitude();
        let d = 1.0 - a * theta.cos();
        -amp * a * k * theta.sin() / (d * d)
    }

    pub fn dxx(&self, x: f64, t: f64) -> f64 {
        let (theta, k) = self.phase(x, t);
        let (amp, a) = self.amplitude();
        let d = 1.0 - a * theta.cos();
        let d1 = a * k * theta.sin();
        let d2 = a * k * k * theta.cos();
        -amp * (d2 / (d * d) - 2.0 * d1 * d1 / (d * d * d))
    }

    pub fn dt(&self, x: f64, t: f64) -> f64 {
        -self.c * self.dx(x, t)
    }

    /// Value at the crest, `x = c t`.
    pub fn crest(&self) -> f64 {
        let (amp, a) = self.amplitude();
        amp / (1.0 - a)
    }

    /// Spatial mean over one period, `2 c δ`.
    pub fn mean(&self) -> f64 {
        2.0 * self.c * self.delta
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{gauss_legendre, integrate_composite};

    #[test]
    fn periodic_wave_rejects_delta_at_least_one() {
        assert!(PeriodicWaveParams::new(0.25, 15.0).is_ok());
        assert!(matches!(PeriodicWaveParams::new(0.1, 15.0), Err(Error::InvalidParameter(_))));
        assert!(PeriodicWaveParams::new(1.0, PI).is_err());
        assert!(PeriodicWaveParams::new(-1.0, 15.0).is_err());
    }

    #[test]
    fn periodic_wave_crest_and_mean() {
        let p = PeriodicWaveParams::reference();
        let d = PI / 3.75;
        let crest = 2.0 * 0.25 * d * d / (1.0 - (1.0 - d * d).sqrt());
        assert!((p.value(0.0, 0.0) - crest).abs() < 1e-14);
        assert!((p.crest() - crest).abs() < 1e-14);
        assert!((p.value(120.0, 480.0) - crest).abs() < 1e-12);
        let r = gauss_legendre(16).unwrap();
        let mean = integrate_composite(r, -15.0, 15.0, 64, |x| p.value(x, 0.0)) / 30.0;
        assert!((mean - 2.0 * 0.25 * d).abs() < 1e-12, "{mean}");
        assert!((p.mean() - mean).abs() < 1e-12);
    }

    #[test]
    fn periodic_wave_is_periodic_and_travelling() {
        let p = PeriodicWaveParams::reference();
        for &x in &[-14.0, -2.5, 0.3, 9.9] {
            assert!((p.value(x + 30.0, 1.3) - p.value(x, 1.3)).abs() < 1e-12);
            for &s in &[0.7, -3.0, 41.0] {
                assert!((p.value(x, 2.0) - p.value(x - 0.25 * s, 2.0 - s)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn periodic_wave_derivatives_match_finite_differences() {
        let p = PeriodicWaveParams::reference();
        let h = 1e-5;
        for &x in &[-11.0, -1.2, 0.0, 4.4] {
            let fd = (p.value(x + h, 0.6) - p.value(x - h, 0.6)) / (2.0 * h);
            assert!((fd - p.dx(x, 0.6)).abs() < 1e-9);
            let fd2 = (p.dx(x + h, 0.6) - p.dx(x - h, 0.6)) / (2.0 * h);
            assert!((fd2 - p.dxx(x, 0.6)).abs() < 1e-9);
            let ft = (p.value(x, 0.6 + h) - p.value(x, 0.6 - h)) / (2.0 * h);
            assert!((ft - p.dt(x, 0.6)).abs() < 1e-9);
        }
    }

    #[test]
    fn double_soliton_decays_and_translates() {
        let p = DoubleSolitonParams::overtaking();
        assert!(p.value(1e6, 0.0).abs() <= 1e-9);
        assert!(p.value(-1e6, 50.0).abs() <= 1e-9);
        let s = 13.7;
        let q = DoubleSolitonParams::new(0.3, 0.6, -30.0 + s, -55.0 + s).unwrap();
        for &x in &[-60.0, -31.0, 0.0, 42.0] {
            assert!((p.value(x, 20.0) - q.value(x + s, 20.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn double_soliton_derivative_matches_finite_differences() {
        let p = DoubleSolitonParams::overtaking();
        let h = 1e-5;
        for &x in &[-70.0, -50.0, -30.0, 10.0] {
            let fd = (p.value(x + h, 3.0) - p.value(x - h, 3.0)) / (2.0 * h);
            assert!((fd - p.dx(x, 3.0)).abs() < 1e-8, "x={x}");
        }
    }

    #[test]
    fn double_soliton_rejects_equal_speeds() {
        assert!(DoubleSolitonParams::new(0.5, 0.5, 0.0, 1.0).is_err());
        assert!(DoubleSolitonParams::new(0.0, 0.5, 0.0, 1.0).is_err());
    }
}
