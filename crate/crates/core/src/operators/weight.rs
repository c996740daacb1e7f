use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::UniformPeriodicMesh;

/// The weight `φ` multiplying every test function in the scheme.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightFunction {
    /// `φ ≡ 1`; the periodic problem.
    #[default]
    Unit,
    /// `φ(x) = intercept + slope * x`.
    Linear { intercept: f64, slope: f64 },
    /// Increasing weight whose derivative is a cut-off: `φ' = 1` on `|x| < R`,
    /// a quintic smoothstep down to `0` on `R <= |x| <= R + 1`, and `0`
    /// beyond. Point-symmetric about `(0, R + 3/2)`, hence `1 <= φ <= 2 + 2R`.
    SmoothCutoff { radius: f64 },
}

fn smoothstep(t: f64) -> f64 {
    (t * t * t * (10.0 + t * (-15.0 + 6.0 * t))).clamp(0.0, 1.0)
}

/// `∫_0^t smoothstep`
fn smoothstep_integral(t: f64) -> f64 {
    let t4 = t * t * t * t;
    t4 * (2.5 + t * (-3.0 + t))
}

impl WeightFunction {
    /// Returns `(φ(x), φ'(x))`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        match *self {
            Self::Unit => (1.0, 0.0),
            Self::Linear { intercept, slope } => (intercept + slope * x, slope),
            Self::SmoothCutoff { radius } => {
                let a = x.abs();
                let s = x.signum();
                let center = radius + 1.5;
                if a < radius {
                    (center + x, 1.0)
                } else if a < radius + 1.0 {
                    let t = a - radius;
                    let rise = radius + t - smoothstep_integral(t);
                    (center + s * rise, 1.0 - smoothstep(t))
                } else {
                    (center + s * (radius + 0.5), 0.0)
                }
            }
        }
    }

    pub fn is_unit(&self) -> bool {
        matches!(self, Self::Unit)
    }

    /// Checks the weight is admissible on the mesh's interval.
    pub fn validate(&self, mesh: &UniformPeriodicMesh) -> Result<()> {
        match *self {
            Self::Unit => Ok(()),
            Self::Linear { intercept, slope } => {
                if !(intercept.is_finite() && slope.is_finite()) {
                    return Err(Error::InvalidWeight("coefficients must be finite".into()));
                }
                let lo = (intercept + slope * mesh.left()).min(intercept + slope * mesh.right());
                if lo <= 0.0 {
                    return Err(Error::InvalidWeight(format!(
                        "linear weight {intercept} + {slope} x is not positive on [{}, {}]",
                        mesh.left(),
                        mesh.right()
                    )));
                }
                Ok(())
            }
            Self::SmoothCutoff { radius } => {
                if !(radius.is_finite() && radius > 0.0) {
                    return Err(Error::InvalidWeight(format!("cut-off radius must be positive, got {radius}")));
                }
                Ok(())
            }
        }
    }
}
