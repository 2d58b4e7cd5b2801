//! The odd C² truncation family F_N.
//!
//! The profile h on [0, 2] is the lowest-degree polynomial with
//! h(0) = h''(0) = 0, h'(0) = 1, h(2) = 1, h'(2) = h''(2) = 0. Imposing those
//! six conditions on a quintic forces the t⁵ coefficient to zero, leaving
//! h(t) = t − t³/4 + t⁴/16 with h'(t) = (t + 1)(t − 2)²/4 ∈ [0, 1].

use crate::generator::GenericField;
use crate::jet::Real;
use crate::model::ModelParams;

/// sup |h''| on [0, 2], attained at t = 1.
pub const TRUNCATION_C_STAR: f64 = 0.75;

pub fn h_profile(t: f64) -> f64 {
    t - t.powi(3) / 4.0 + t.powi(4) / 16.0
}

pub fn h_profile_d1(t: f64) -> f64 {
    1.0 - 0.75 * t * t + 0.25 * t.powi(3)
}

pub fn h_profile_d2(t: f64) -> f64 {
    -1.5 * t + 0.75 * t * t
}

/// F_N: identity on [−N, N], saturating at ±(N + 1) beyond ±(N + 2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    n: f64,
}

impl Truncation {
    pub fn new(n: u32) -> crate::Result<Self> {
        if n < 1 {
            return Err(crate::Error::InvalidArgument("F_N requires N >= 1".into()));
        }
        Ok(Truncation { n: n as f64 })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// (F_N, F_N', F_N'') at `x`.
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        let s = if x < 0.0 { -1.0 } else { 1.0 };
        let a = x.abs();
        let n = self.n;
        if a <= n {
            (x, 1.0, 0.0)
        } else if a >= n + 2.0 {
            (s * (n + 1.0), 0.0, 0.0)
        } else {
            let t = a - n;
            (s * (h_profile(t) + n), h_profile_d1(t), s * h_profile_d2(t))
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval3(x).0
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval3(x).1
    }

    pub fn apply<T: Real>(&self, x: T) -> T {
        let (v, d1, d2) = self.eval3(x.val());
        // Reassemble through a shifted quadratic in (x − x₀) so jets pick up d1, d2.
        let dx = x - x.val();
        dx * dx * (0.5 * d2) + dx * d1 + v
    }
}

/// F_N(2σz − x²): the truncated M used in the degenerate-noise argument.
#[derive(Debug, Clone, Copy)]
pub struct FieldFN {
    pub truncation: Truncation,
    pub sigma: f64,
}

impl FieldFN {
    pub fn new(params: &ModelParams, n: u32) -> crate::Result<Self> {
        Ok(FieldFN {
            truncation: Truncation::new(n)?,
            sigma: params.sigma(),
        })
    }
}

impl GenericField for FieldFN {
    fn label(&self) -> String {
        format!("F_N:{}", self.truncation.n())
    }

    fn eval<T: Real>(&self, [x, _y, z]: [T; 3]) -> T {
        self.truncation.apply(z * (2.0 * self.sigma) - x * x)
    }
}
