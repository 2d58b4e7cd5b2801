//! The pair (V₁, V₂) used to show infinite expected return times when β < 0.
//!
//! V₁ = Ψ(λ(2σz − x² − A)) where Ψ is 0 on (−∞, 0), f(ζ) = (1 − cos ζ)² on
//! [0, B] and c₀ ln ln(ζ + c₁) + c₂ beyond B, glued C² at B.
//! V₂ = ln(H + κ₀)/K with κ₀ = (σ + ρ)² + e so the logarithm is global.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generator::GenericField;
use crate::jet::Real;
use crate::model::ModelParams;

/// Solved constants of the transience construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransienceParams {
    pub a: f64,
    pub m: f64,
    pub b: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub lambda: f64,
    /// Normalizer of V₂; LV₂ ≤ 1 follows from LW₂ ≤ `k_bound` ≤ K.
    pub k: f64,
    /// Closed-form upper bound for L ln(H + κ₀).
    pub k_bound: f64,
    pub kappa0: f64,
    /// Beyond this radius H > 1.
    pub radius: f64,
}

pub fn f0(z: f64) -> f64 {
    let u = 1.0 - z.cos();
    u * u
}

pub fn f1(z: f64) -> f64 {
    2.0 * (1.0 - z.cos()) * z.sin()
}

pub fn f2(z: f64) -> f64 {
    let (s, c) = z.sin_cos();
    2.0 * s * s + 2.0 * (1.0 - c) * c
}

/// (1 + ln t)/(t ln t), strictly decreasing from +∞ to 0 on t > 1.
pub fn log_ratio(t: f64) -> f64 {
    let l = t.ln();
    (1.0 + l) / (t * l)
}

/// Headroom between the closed-form bound on L ln(H + κ₀) and K, so that
/// LV₂ ≤ 1 holds with room for the checker's slack.
pub const K_HEADROOM: f64 = 0.98;

/// Grid size for the f' + m f'' ≥ 0 scan on (2π/3, B).
const B_SCAN_POINTS: usize = 1000;

/// Solves B, c₀, c₁, c₂, λ and the V₂ normalization for `params` (β < 0).
pub fn solve_transience_constants(params: &ModelParams) -> Result<TransienceParams> {
    let beta = params.beta();
    if !(beta < 0.0) {
        return Err(Error::Construction(format!(
            "transience construction needs beta < 0, got {beta}"
        )));
    }
    let [g1, _, g3] = params.gamma();
    let sigma = params.sigma();
    let a = (2.0 * g1 + 2.0) / beta.abs();
    // LV₁ ≥ 0 needs Ψ' ≥ λ m |Ψ''| with m dominating both 2γ₁/σ and 2σ²γ₃.
    let m = (2.0 * g1 / sigma.min(1.0)).max(2.0 * sigma * sigma * g3);

    let lo = 2.0 * PI / 3.0;
    let admissible = |b: f64| {
        (1..=B_SCAN_POINTS).all(|i| {
            let z = lo + (b - lo) * i as f64 / B_SCAN_POINTS as f64;
            f1(z) + m * f2(z) >= 0.0
        })
    };
    let b = (1..60)
        .map(|k| lo + (PI / 3.0) * 0.5f64.powi(k))
        .find(|&b| b < PI && f2(b) < 0.0 && admissible(b))
        .ok_or_else(|| Error::Construction("no admissible B in (2pi/3, pi)".into()))?;

    let target = -f2(b) / f1(b);
    let t = solve_log_ratio(target)?;
    let c1 = t - b;
    let c0 = f1(b) * t * t.ln();
    let c2 = f0(b) - c0 * t.ln().ln();
    let lambda = 0.99 * (1.0f64).min(1.0 / (m * log_ratio(t)));

    let s = sigma + params.rho();
    let kappa0 = s * s + E;
    let k_bound = 2.0 * beta.abs() * (1.0 + s / (2.0 * E.sqrt())) + 2.0 * params.gamma_sum() / E;
    let k = k_bound / K_HEADROOM;
    let radius = s + (s * s + 1.0).sqrt();

    Ok(TransienceParams {
        a,
        m,
        b,
        c0,
        c1,
        c2,
        lambda,
        k,
        k_bound,
        kappa0,
        radius,
    })
}

/// Bisection for t > 1 with log_ratio(t) = target.
fn solve_log_ratio(target: f64) -> Result<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::Construction(format!("bad gluing ratio {target}")));
    }
    let mut lo = 1.0 + 1e-12;
    let mut hi = 2.0;
    while log_ratio(hi) > target {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Construction("gluing ratio unreachable".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if log_ratio(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

impl TransienceParams {
    /// (Ψ, Ψ', Ψ'') at ζ.
    pub fn psi3(&self, z: f64) -> (f64, f64, f64) {
        if z < 0.0 {
            (0.0, 0.0, 0.0)
        } else if z <= self.b {
            (f0(z), f1(z), f2(z))
        } else {
            let t = z + self.c1;
            let l = t.ln();
            (
                self.log_branch_value(z),
                self.c0 / (t * l),
                -self.c0 * (1.0 + l) / (t * t * l * l),
            )
        }
    }

    /// c₀ ln ln(ζ + c₁) + c₂, written as Ψ(B) + c₀ ln(1 + ln(t/t_B)/ln t_B)
    /// with t = ζ + c₁, t_B = B + c₁. The direct form loses about three
    /// digits to cancellation between c₀ ln ln t and c₂.
    fn log_branch_value(&self, z: f64) -> f64 {
        let tb = self.b + self.c1;
        let r = ((z - self.b) / tb).ln_1p() / tb.ln();
        f0(self.b) + self.c0 * r.ln_1p()
    }

    pub fn psi(&self, z: f64) -> f64 {
        self.psi3(z).0
    }

    /// Left/right mismatch of (Ψ, Ψ', Ψ'') at B, each relative to max(1, |left|).
    pub fn gluing_mismatch(&self) -> [f64; 3] {
        let left = [f0(self.b), f1(self.b), f2(self.b)];
        let t = self.b + self.c1;
        let l = t.ln();
        let right = [
            self.c0 * l.ln() + self.c2,
            self.c0 / (t * l),
            -self.c0 * (1.0 + l) / (t * t * l * l),
        ];
        [0, 1, 2].map(|i| (left[i] - right[i]).abs() / left[i].abs().max(1.0))
    }

    fn psi_jet<T: Real>(&self, z: T) -> T {
        let (v, d1, d2) = self.psi3(z.val());
        let dz = z - z.val();
        dz * dz * (0.5 * d2) + dz * d1 + v
    }
}

/// V₁ = Ψ(λ(2σz − x² − A)).
#[derive(Debug, Clone, Copy)]
pub struct FieldV1 {
    pub sigma: f64,
    pub tp: TransienceParams,
}

impl FieldV1 {
    pub fn new(params: &ModelParams, tp: TransienceParams) -> Self {
        FieldV1 {
            sigma: params.sigma(),
            tp,
        }
    }
}

impl GenericField for FieldV1 {
    fn label(&self) -> String {
        "V1".into()
    }

    fn eval<T: Real>(&self, [x, _y, z]: [T; 3]) -> T {
        let zeta = (z * (2.0 * self.sigma) - x * x - self.tp.a) * self.tp.lambda;
        self.tp.psi_jet(zeta)
    }
}

/// V₂ = ln(H + κ₀)/K.
#[derive(Debug, Clone, Copy)]
pub struct FieldV2 {
    pub shift: f64,
    pub kappa0: f64,
    pub k: f64,
}

impl FieldV2 {
    pub fn new(params: &ModelParams, k: f64, kappa0: f64) -> Self {
        FieldV2 {
            shift: params.sigma() + params.rho(),
            kappa0,
            k,
        }
    }
}

impl GenericField for FieldV2 {
    fn label(&self) -> String {
        "V2".into()
    }

    fn eval<T: Real>(&self, [x, y, z]: [T; 3]) -> T {
        let h = x * x + y * y + z * z - z * (2.0 * self.shift) + self.kappa0;
        h.ln() / self.k
    }
}
