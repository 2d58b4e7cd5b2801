//! The quadratic energy H, its reduced shift H̃, and M = 2σz − x².

use crate::generator::GenericField;
use crate::jet::Real;
use crate::model::ModelParams;

/// H = x² + y² + z² − 2(σ+ρ)z.
#[derive(Debug, Clone, Copy)]
pub struct FieldH {
    pub sigma: f64,
    pub rho: f64,
}

impl FieldH {
    pub fn new(params: &ModelParams) -> Self {
        FieldH {
            sigma: params.sigma(),
            rho: params.rho(),
        }
    }
}

impl GenericField for FieldH {
    fn label(&self) -> String {
        "H".into()
    }

    fn eval<T: Real>(&self, [x, y, z]: [T; 3]) -> T {
        x * x + y * y + z * z - z * (2.0 * (self.sigma + self.rho))
    }
}

/// H̃ = x² + y² + z² − 2σz + κ₀, the energy of the ρ = 0 system.
#[derive(Debug, Clone, Copy)]
pub struct FieldHTilde {
    pub sigma: f64,
    pub kappa0: f64,
}

impl FieldHTilde {
    pub fn new(params: &ModelParams, kappa0: f64) -> Self {
        FieldHTilde {
            sigma: params.sigma(),
            kappa0,
        }
    }
}

impl GenericField for FieldHTilde {
    fn label(&self) -> String {
        "H_tilde".into()
    }

    fn eval<T: Real>(&self, [x, y, z]: [T; 3]) -> T {
        x * x + y * y + z * z - z * (2.0 * self.sigma) + self.kappa0
    }
}

/// M = 2σz − x².
#[derive(Debug, Clone, Copy)]
pub struct FieldM {
    pub sigma: f64,
}

impl FieldM {
    pub fn new(params: &ModelParams) -> Self {
        FieldM {
            sigma: params.sigma(),
        }
    }
}

impl GenericField for FieldM {
    fn label(&self) -> String {
        "M".into()
    }

    fn eval<T: Real>(&self, [x, _y, z]: [T; 3]) -> T {
        z * (2.0 * self.sigma) - x * x
    }
}
