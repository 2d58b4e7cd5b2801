//! Model parameters and state points of the stochastic Lorenz '63 system
//!
//! ```text
//! dx = σ(y − x) dt            + √(2γ₁) dB₁
//! dy = (x(ρ − z) − y) dt      + √(2γ₂) dB₂
//! dz = (xy − βz) dt           + √(2γ₃) dB₃
//! ```

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six scalars defining the system.
///
/// Construction rejects `σ ≤ 0`, `ρ < 0`, negative noise intensities and the
/// all-zero noise vector, as well as non-finite values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelParams", into = "RawModelParams")]
pub struct ModelParams {
    sigma: f64,
    rho: f64,
    beta: f64,
    gamma: [f64; 3],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelParams {
    sigma: f64,
    rho: f64,
    beta: f64,
    gamma: [f64; 3],
}

impl TryFrom<RawModelParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawModelParams) -> Result<Self> {
        ModelParams::new(raw.sigma, raw.rho, raw.beta, raw.gamma)
    }
}

impl From<ModelParams> for RawModelParams {
    fn from(p: ModelParams) -> Self {
        RawModelParams {
            sigma: p.sigma,
            rho: p.rho,
            beta: p.beta,
            gamma: p.gamma,
        }
    }
}

impl ModelParams {
    pub fn new(sigma: f64, rho: f64, beta: f64, gamma: [f64; 3]) -> Result<Self> {
        let all = [sigma, rho, beta, gamma[0], gamma[1], gamma[2]];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidParams(format!("sigma must be > 0, got {sigma}")));
        }
        if rho < 0.0 {
            return Err(Error::InvalidParams(format!("rho must be >= 0, got {rho}")));
        }
        if gamma.iter().any(|&g| g < 0.0) {
            return Err(Error::InvalidParams(format!(
                "noise intensities must be >= 0, got {gamma:?}"
            )));
        }
        if gamma.iter().all(|&g| g == 0.0) {
            return Err(Error::InvalidParams(
                "at least one noise intensity must be positive".into(),
            ));
        }
        Ok(ModelParams {
            sigma,
            rho,
            beta,
            gamma,
        })
    }

    /// The classical Lorenz parameters σ = 10, ρ = 28, β = 8/3 with the given noise.
    pub fn classical(gamma: [f64; 3]) -> Result<Self> {
        Self::new(10.0, 28.0, 8.0 / 3.0, gamma)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> [f64; 3] {
        self.gamma
    }

    /// γ₁ + γ₂ + γ₃.
    pub fn gamma_sum(&self) -> f64 {
        self.gamma.iter().sum()
    }

    /// Same parameters with ρ = 0 (the shifted system dy = −xz − y).
    pub fn reduced(&self) -> Self {
        ModelParams { rho: 0.0, ..*self }
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.sigma, self.rho, beta, self.gamma)
    }

    /// Drift vector field evaluated at `p`.
    pub fn drift(&self, p: Point3) -> Point3 {
        Point3 {
            x: self.sigma * (p.y - p.x),
            y: p.x * (self.rho - p.z) - p.y,
            z: p.x * p.y - self.beta * p.z,
        }
    }

    /// Per-coordinate noise amplitudes (√(2γ₁), √(2γ₂), √(2γ₃)).
    pub fn diffusion_row(&self) -> Point3 {
        Point3 {
            x: (2.0 * self.gamma[0]).sqrt(),
            y: (2.0 * self.gamma[1]).sqrt(),
            z: (2.0 * self.gamma[2]).sqrt(),
        }
    }
}

/// A state (x, y, z).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const ORIGIN: Point3 = Point3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Point3 { x, y, z }
    }

    /// Checked constructor rejecting NaN and infinities.
    pub fn finite(x: f64, y: f64, z: f64) -> Result<Self> {
        let p = Point3 { x, y, z };
        if p.is_finite() {
            Ok(p)
        } else {
            Err(Error::NonFinitePoint { x, y, z })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Point3::new(a[0], a[1], a[2])
    }

    /// Componentwise product.
    pub fn hadamard(self, other: Point3) -> Point3 {
        Point3::new(self.x * other.x, self.y * other.y, self.z * other.z)
    }

    pub fn dot(self, other: Point3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }
}

impl Add for Point3 {
    type Output = Point3;

    fn add(self, o: Point3) -> Point3 {
        Point3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Point3;

    fn sub(self, o: Point3) -> Point3 {
        Point3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Point3;

    fn mul(self, s: f64) -> Point3 {
        Point3::new(self.x * s, self.y * s, self.z * s)
    }
}
