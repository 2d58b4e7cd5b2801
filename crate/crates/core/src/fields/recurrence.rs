//! The glued Lyapunov function V = H̃ + θ₁ψ₁ + θ₂ψ₂ for the β = 0, ρ = 0 system.
//!
//! ψ₁ and ψ₂ are singular on {xz = 0} and {z = 0}; the cutoffs θ₁, θ₂ vanish
//! identically there, so each product is evaluated only when every cutoff
//! factor is off its zero plateau.

use serde::{Deserialize, Serialize};

use super::cutoff::{chi, chi_tilde};
use crate::error::{Error, Result};
use crate::generator::GenericField;
use crate::jet::Real;
use crate::model::ModelParams;

/// Region radii and weights of the recurrence construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecurrenceParams {
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl RecurrenceParams {
    pub fn validate(&self) -> Result<()> {
        let radii = [self.r0, self.r1, self.r2, self.r3];
        if radii.iter().any(|r| !(r.is_finite() && *r >= 1.0)) {
            return Err(Error::InvalidParams(format!("radii must be finite and >= 1: {radii:?}")));
        }
        if self.r2 < self.r0 {
            return Err(Error::InvalidParams(format!(
                "R2 = {} must be >= R0 = {}",
                self.r2, self.r0
            )));
        }
        let weights = [self.kappa0, self.kappa1, self.kappa2];
        if weights.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
            return Err(Error::InvalidParams(format!("weights must be positive: {weights:?}")));
        }
        Ok(())
    }
}

fn require_gamma1(params: &ModelParams) -> Result<f64> {
    let g1 = params.gamma()[0];
    if g1 > 0.0 {
        Ok(g1)
    } else {
        Err(Error::Construction("psi2 needs gamma1 > 0".into()))
    }
}

/// ψ₁ = κ₁ y / (xz).
#[derive(Debug, Clone, Copy)]
pub struct FieldPsi1 {
    pub kappa1: f64,
}

impl GenericField for FieldPsi1 {
    fn label(&self) -> String {
        "psi1".into()
    }

    fn eval<T: Real>(&self, [x, y, z]: [T; 3]) -> T {
        y * self.kappa1 / (x * z)
    }
}

/// ψ₂ = κ₂/(2γ₁) · (4R₁²/|z|^{2/3} − x²).
#[derive(Debug, Clone, Copy)]
pub struct FieldPsi2 {
    coef: f64,
    four_r1_sq: f64,
}

impl FieldPsi2 {
    pub fn new(params: &ModelParams, kappa2: f64, r1: f64) -> Result<Self> {
        let g1 = require_gamma1(params)?;
        Ok(FieldPsi2 {
            coef: kappa2 / (2.0 * g1),
            four_r1_sq: 4.0 * r1 * r1,
        })
    }
}

impl GenericField for FieldPsi2 {
    fn label(&self) -> String {
        "psi2".into()
    }

    fn eval<T: Real>(&self, [x, _y, z]: [T; 3]) -> T {
        ((z * z).powf(-1.0 / 3.0) * self.four_r1_sq - x * x) * self.coef
    }
}

/// θ₁ = χ((x²+y²)/R₀) χ̃(|x||z|^{1/3}/R₁) χ̃(|z|/R₃).
#[derive(Debug, Clone, Copy)]
pub struct FieldTheta1(pub RecurrenceParams);

/// θ₂ = χ((x²+y²)/R₂) χ(|x||z|^{1/3}/R₁) χ̃(|z|/R₃).
#[derive(Debug, Clone, Copy)]
pub struct FieldTheta2(pub RecurrenceParams);

struct Cutoffs<T> {
    theta1: Option<T>,
    theta2: Option<T>,
}

/// Evaluates θ₁, θ₂; `None` marks a factor on its zero plateau.
fn cutoffs<T: Real>(rp: &RecurrenceParams, [x, y, z]: [T; 3]) -> Cutoffs<T> {
    let tz = chi_tilde(z.abs() / rp.r3);
    if tz.is_zero() {
        return Cutoffs {
            theta1: None,
            theta2: None,
        };
    }
    let rr = x * x + y * y;
    let w = x.abs() * (z * z).powf(1.0 / 6.0) / rp.r1;

    let theta1 = {
        let a = chi(rr / rp.r0);
        let b = chi_tilde(w);
        if a.is_zero() || b.is_zero() {
            None
        } else {
            Some(a * b * tz)
        }
    };
    let theta2 = {
        let a = chi(rr / rp.r2);
        let b = chi(w);
        if a.is_zero() || b.is_zero() {
            None
        } else {
            Some(a * b * tz)
        }
    };
    Cutoffs { theta1, theta2 }
}

impl GenericField for FieldTheta1 {
    fn label(&self) -> String {
        "theta1".into()
    }

    fn eval<T: Real>(&self, p: [T; 3]) -> T {
        cutoffs(&self.0, p).theta1.unwrap_or(T::cst(0.0))
    }
}

impl GenericField for FieldTheta2 {
    fn label(&self) -> String {
        "theta2".into()
    }

    fn eval<T: Real>(&self, p: [T; 3]) -> T {
        cutoffs(&self.0, p).theta2.unwrap_or(T::cst(0.0))
    }
}

/// V = H̃ + θ₁ψ₁ + θ₂ψ₂ with H̃ = x² + y² + z² − 2σz + κ₀.
#[derive(Debug, Clone, Copy)]
pub struct FieldV {
    pub sigma: f64,
    pub rp: RecurrenceParams,
    psi1: FieldPsi1,
    psi2: FieldPsi2,
}

impl FieldV {
    pub fn new(params: &ModelParams, rp: RecurrenceParams) -> Result<Self> {
        rp.validate()?;
        Ok(FieldV {
            sigma: params.sigma(),
            rp,
            psi1: FieldPsi1 { kappa1: rp.kappa1 },
            psi2: FieldPsi2::new(params, rp.kappa2, rp.r1)?,
        })
    }

    /// The pieces (H̃, θ₁ψ₁, θ₂ψ₂) separately.
    pub fn parts<T: Real>(&self, p: [T; 3]) -> [T; 3] {
        let [x, y, z] = p;
        let ht = x * x + y * y + z * z - z * (2.0 * self.sigma) + self.rp.kappa0;
        let c = cutoffs(&self.rp, p);
        let zero = T::cst(0.0);
        let g1 = c.theta1.map_or(zero, |t| t * self.psi1.eval(p));
        let g2 = c.theta2.map_or(zero, |t| t * self.psi2.eval(p));
        [ht, g1, g2]
    }
}

impl GenericField for FieldV {
    fn label(&self) -> String {
        "V".into()
    }

    fn eval<T: Real>(&self, p: [T; 3]) -> T {
        let [a, b, c] = self.parts(p);
        a + b + c
    }
}
