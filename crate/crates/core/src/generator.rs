//! The infinitesimal generator
//!
//! ```text
//! L = σ(y−x)∂x + [x(ρ−z) − y]∂y + [xy − βz]∂z + γ₁∂x² + γ₂∂y² + γ₃∂z²
//! ```
//!
//! applied through jets, plus a central-difference oracle.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::jet::{Jet2, Real};
use crate::model::{ModelParams, Point3};

/// A C² test function on ℝ³.
///
/// Implementations are immutable so they can be evaluated from many workers.
pub trait ScalarField: Send + Sync {
    fn label(&self) -> String;

    /// Second-order Taylor data at a lifted point.
    fn jet(&self, p: [Jet2; 3]) -> Jet2;

    /// Plain evaluation.
    fn value(&self, p: Point3) -> f64;
}

/// Fields written once over [`Real`]; a blanket impl provides [`ScalarField`].
pub trait GenericField: Send + Sync {
    fn label(&self) -> String;
    fn eval<T: Real>(&self, p: [T; 3]) -> T;
}

impl<F: GenericField> ScalarField for F {
    fn label(&self) -> String {
        GenericField::label(self)
    }

    fn jet(&self, p: [Jet2; 3]) -> Jet2 {
        self.eval(p)
    }

    fn value(&self, p: Point3) -> f64 {
        self.eval(p.to_array())
    }
}

pub type SharedField = Arc<dyn ScalarField>;

/// Σ cᵢ fᵢ.
#[derive(Clone)]
pub struct Combination {
    pub terms: Vec<(f64, SharedField)>,
}

impl ScalarField for Combination {
    fn label(&self) -> String {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, f)| format!("{c}*{}", f.label()))
            .collect();
        parts.join(" + ")
    }

    fn jet(&self, p: [Jet2; 3]) -> Jet2 {
        self.terms
            .iter()
            .fold(Jet2::constant(0.0), |acc, (c, f)| acc + f.jet(p) * *c)
    }

    fn value(&self, p: Point3) -> f64 {
        self.terms.iter().map(|(c, f)| c * f.value(p)).sum()
    }
}

/// A constant function.
#[derive(Debug, Clone, Copy)]
pub struct Constant(pub f64);

impl GenericField for Constant {
    fn label(&self) -> String {
        format!("const({})", self.0)
    }

    fn eval<T: Real>(&self, _p: [T; 3]) -> T {
        T::cst(self.0)
    }
}

/// Lf(p) = drift(p)·∇f(p) + Σ γᵢ ∂ᵢ²f(p).
pub fn apply_generator(params: &ModelParams, f: &dyn ScalarField, p: Point3) -> Result<f64> {
    let j = f.jet(Jet2::lift(p.to_array()));
    if !j.is_finite() {
        return Err(Error::NotC2 {
            point: p,
            reason: format!("non-finite jet for {}", f.label()),
        });
    }
    Ok(generator_from_jet(params, &j, p))
}

#[inline]
pub fn generator_from_jet(params: &ModelParams, j: &Jet2, p: Point3) -> f64 {
    let d = params.drift(p);
    let g = params.gamma();
    d.x * j.grad[0]
        + d.y * j.grad[1]
        + d.z * j.grad[2]
        + g[0] * j.diag2[0]
        + g[1] * j.diag2[1]
        + g[2] * j.diag2[2]
}

/// Default relative finite-difference step, near ε^{1/4} to balance
/// truncation against roundoff in second differences.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Generator by central differences with step `h·max(1, |p|)` in every coordinate.
pub fn apply_generator_fd<F>(params: &ModelParams, f: F, p: Point3, h: f64) -> Result<f64>
where
    F: Fn(Point3) -> f64,
{
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("fd step must be > 0, got {h}")));
    }
    let (grad, diag2) = central_differences(&f, p, h);
    let out = generator_from_parts(params, p, grad, diag2);
    if !out.is_finite() {
        return Err(Error::NotC2 {
            point: p,
            reason: "non-finite finite-difference stencil".into(),
        });
    }
    Ok(out)
}

/// Central-difference gradient and pure second partials.
pub fn central_differences<F>(f: &F, p: Point3, h: f64) -> ([f64; 3], [f64; 3])
where
    F: Fn(Point3) -> f64,
{
    let base = p.to_array();
    let f0 = f(p);
    let mut grad = [0.0; 3];
    let mut diag2 = [0.0; 3];
    // Roundoff in a second difference scales with |f|, which follows |p|
    // rather than the single coordinate being differenced.
    let scale = p.norm().max(1.0);
    for i in 0..3 {
        let hi = h * scale;
        let mut plus = base;
        let mut minus = base;
        plus[i] += hi;
        minus[i] -= hi;
        // Use the representable step actually taken.
        let step = (plus[i] - minus[i]) / 2.0;
        let fp = f(Point3::from_array(plus));
        let fm = f(Point3::from_array(minus));
        grad[i] = (fp - fm) / (2.0 * step);
        diag2[i] = (fp - 2.0 * f0 + fm) / (step * step);
    }
    (grad, diag2)
}

fn generator_from_parts(params: &ModelParams, p: Point3, grad: [f64; 3], diag2: [f64; 3]) -> f64 {
    let j = Jet2 {
        value: 0.0,
        grad,
        diag2,
    };
    generator_from_jet(params, &j, p)
}

/// One-sided estimates of f''(t₀⁻) and f''(t₀⁺) from five-point stencils
/// lying entirely on each side (third-order accurate).
pub fn one_sided_second_derivatives<F>(f: F, t0: f64, h: f64) -> (f64, f64)
where
    F: Fn(f64) -> f64,
{
    const W: [f64; 5] = [35.0, -104.0, 114.0, -56.0, 11.0];
    let side = |dir: f64| {
        let acc: f64 = W
            .iter()
            .enumerate()
            .map(|(k, w)| w * f(t0 + dir * k as f64 * h))
            .sum();
        acc / (12.0 * h * h)
    };
    (side(-1.0), side(1.0))
}

/// Relative error with a unit floor on the scale.
pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::basic::{FieldH, FieldM};

    #[test]
    fn generator_of_h_at_sample_point() {
        let params = ModelParams::new(10.0, 28.0, 0.0, [1.0, 1.0, 1.0]).unwrap();
        let h = FieldH::new(&params);
        let v = apply_generator(&params, &h, Point3::new(1.0, 2.0, 3.0)).unwrap();
        assert!((v - (-22.0)).abs() < 1e-12, "{v}");
    }

    #[test]
    fn constants_are_annihilated() {
        let params = ModelParams::classical([1.0, 2.0, 3.0]).unwrap();
        for p in [Point3::new(1.0, -4.0, 9.0), Point3::ORIGIN, Point3::new(1e3, 2.0, -7.0)] {
            assert_eq!(apply_generator(&params, &Constant(5.0), p).unwrap(), 0.0);
        }
    }

    #[test]
    fn generator_of_m_at_sample_point() {
        let params = ModelParams::new(1.0, 0.0, -1.0, [1.0, 0.0, 0.0]).unwrap();
        let m = FieldM::new(&params);
        let p = Point3::new(1.0, 0.0, 2.0);
        let ad = apply_generator(&params, &m, p).unwrap();
        let fd = apply_generator_fd(&params, |q| m.value(q), p, 1e-4).unwrap();
        assert!((fd - 4.0).abs() < 1e-6, "fd {fd}");
        assert!((ad - 4.0).abs() < 1e-12, "ad {ad}");
    }

    #[test]
    fn fd_linear_in_z_has_no_curvature_term() {
        let params = ModelParams::new(2.0, 1.0, 0.5, [0.0, 0.0, 7.0]).unwrap();
        let p = Point3::new(0.3, 0.4, 0.5);
        // f = 3z: L f = 3(xy − βz).
        let f = |q: Point3| 3.0 * q.z;
        let (_, d2) = central_differences(&f, p, DEFAULT_FD_STEP);
        assert!(d2[2].abs() < 1e-5, "{}", d2[2]);
        let fd = apply_generator_fd(&params, f, p, DEFAULT_FD_STEP).unwrap();
        let exact = 3.0 * (0.3 * 0.4 - 0.5 * 0.5);
        assert!((fd - exact).abs() < 1e-4);
    }

    #[test]
    fn fd_second_order_term_of_x_squared() {
        // Isolate γ₁∂x²(x²) by evaluating at the origin where the drift vanishes.
        let params = ModelParams::new(2.0, 1.0, 0.5, [1.0, 0.0, 0.0]).unwrap();
        let fd = apply_generator_fd(&params, |q| q.x * q.x, Point3::ORIGIN, 1e-3).unwrap();
        assert!((fd - 2.0).abs() < 1e-9);
    }

    #[test]
    fn singular_field_reports_not_c2() {
        struct InvX;
        impl GenericField for InvX {
            fn label(&self) -> String {
                "1/x".into()
            }
            fn eval<T: Real>(&self, p: [T; 3]) -> T {
                T::cst(1.0) / p[0]
            }
        }
        let params = ModelParams::classical([1.0, 0.0, 0.0]).unwrap();
        let e = apply_generator(&params, &InvX, Point3::new(0.0, 1.0, 1.0));
        assert!(matches!(e, Err(Error::NotC2 { .. })));
    }
}
