//! Second-order forward-mode jets with diagonal Hessian.
//!
//! The diffusion matrix of the model is diagonal, so the generator only needs
//! the pure second partials ∂ᵢ²; mixed partials are never propagated.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, gradient and diagonal second derivatives of a scalar at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub value: f64,
    pub grad: [f64; 3],
    pub diag2: [f64; 3],
}

impl Jet2 {
    pub const fn constant(value: f64) -> Self {
        Jet2 {
            value,
            grad: [0.0; 3],
            diag2: [0.0; 3],
        }
    }

    /// Coordinate `i` at value `v`: gradient eᵢ, zero curvature.
    pub fn variable(i: usize, v: f64) -> Self {
        let mut grad = [0.0; 3];
        grad[i] = 1.0;
        Jet2 {
            value: v,
            grad,
            diag2: [0.0; 3],
        }
    }

    /// Lifts a point into three coordinate jets.
    pub fn lift(p: [f64; 3]) -> [Jet2; 3] {
        [
            Jet2::variable(0, p[0]),
            Jet2::variable(1, p[1]),
            Jet2::variable(2, p[2]),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().all(|v| v.is_finite())
            && self.diag2.iter().all(|v| v.is_finite())
    }

    /// Applies a scalar function given g(v), g'(v), g''(v).
    #[inline]
    pub fn chain(&self, g0: f64, g1: f64, g2: f64) -> Jet2 {
        let mut out = Jet2::constant(g0);
        for i in 0..3 {
            let d = self.grad[i];
            out.grad[i] = g1 * d;
            out.diag2[i] = g2 * d * d + g1 * self.diag2[i];
        }
        out
    }

    fn scale(&self, s: f64) -> Jet2 {
        Jet2 {
            value: self.value * s,
            grad: self.grad.map(|g| g * s),
            diag2: self.diag2.map(|g| g * s),
        }
    }
}

impl Add for Jet2 {
    type Output = Jet2;

    #[inline]
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 {
            value: self.value + o.value,
            grad: [
                self.grad[0] + o.grad[0],
                self.grad[1] + o.grad[1],
                self.grad[2] + o.grad[2],
            ],
            diag2: [
                self.diag2[0] + o.diag2[0],
                self.diag2[1] + o.diag2[1],
                self.diag2[2] + o.diag2[2],
            ],
        }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;

    #[inline]
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;

    #[inline]
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;

    #[inline]
    fn mul(self, o: Jet2) -> Jet2 {
        let mut out = Jet2::constant(self.value * o.value);
        for i in 0..3 {
            out.grad[i] = self.grad[i] * o.value + self.value * o.grad[i];
            out.diag2[i] = self.diag2[i] * o.value
                + 2.0 * self.grad[i] * o.grad[i]
                + self.value * o.diag2[i];
        }
        out
    }
}

impl Div for Jet2 {
    type Output = Jet2;

    #[inline]
    fn div(self, o: Jet2) -> Jet2 {
        let v = o.value;
        self * o.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v))
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;

    fn add(self, c: f64) -> Jet2 {
        Jet2 {
            value: self.value + c,
            ..self
        }
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;

    fn sub(self, c: f64) -> Jet2 {
        self + (-c)
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;

    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

impl Div<f64> for Jet2 {
    type Output = Jet2;

    fn div(self, c: f64) -> Jet2 {
        self.scale(1.0 / c)
    }
}

/// Scalar arithmetic shared by plain floats and jets, so that each test
/// function is written once and evaluated either way.
pub trait Real:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    fn val(&self) -> f64;
    /// True when the value and every tracked derivative vanish.
    fn is_zero(&self) -> bool;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn cos(self) -> Self;
    fn sin(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, p: f64) -> Self;
    /// |v|, with the derivative at exactly 0 taken as 0.
    fn abs(self) -> Self;

    fn square(self) -> Self {
        self * self
    }
}

impl Real for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn val(&self) -> f64 {
        *self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
}

impl Real for Jet2 {
    fn cst(v: f64) -> Self {
        Jet2::constant(v)
    }
    fn val(&self) -> f64 {
        self.value
    }
    fn is_zero(&self) -> bool {
        self.value == 0.0
            && self.grad.iter().all(|&g| g == 0.0)
            && self.diag2.iter().all(|&g| g == 0.0)
    }
    fn ln(self) -> Self {
        let v = self.value;
        self.chain(v.ln(), 1.0 / v, -1.0 / (v * v))
    }
    fn exp(self) -> Self {
        let e = self.value.exp();
        self.chain(e, e, e)
    }
    fn cos(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(c, -s, -c)
    }
    fn sin(self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.chain(s, c, -s)
    }
    fn sqrt(self) -> Self {
        let r = self.value.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.value))
    }
    fn powf(self, p: f64) -> Self {
        let v = self.value;
        self.chain(v.powf(p), p * v.powf(p - 1.0), p * (p - 1.0) * v.powf(p - 2.0))
    }
    fn abs(self) -> Self {
        let s = if self.value > 0.0 {
            1.0
        } else if self.value < 0.0 {
            -1.0
        } else {
            0.0
        };
        self.chain(self.value.abs(), s, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(p: [f64; 3]) -> [Jet2; 3] {
        Jet2::lift(p)
    }

    #[test]
    fn lifting_seeds_unit_gradients() {
        let [x, y, z] = at([1.5, -2.0, 3.0]);
        assert_eq!(x.value, 1.5);
        assert_eq!(x.grad, [1.0, 0.0, 0.0]);
        assert_eq!(y.grad, [0.0, 1.0, 0.0]);
        assert_eq!(z.grad, [0.0, 0.0, 1.0]);
        assert_eq!(z.diag2, [0.0; 3]);
    }

    #[test]
    fn product_rule_on_polynomial() {
        // f = x²y + z³ at (2, 3, -1): ∂x = 2xy = 12, ∂y = x² = 4, ∂z = 3z² = 3,
        // ∂x² = 2y = 6, ∂y² = 0, ∂z² = 6z = -6.
        let [x, y, z] = at([2.0, 3.0, -1.0]);
        let f = x * x * y + z * z * z;
        assert_eq!(f.value, 11.0);
        assert_eq!(f.grad, [12.0, 4.0, 3.0]);
        assert_eq!(f.diag2, [6.0, 0.0, -6.0]);
    }

    #[test]
    fn quotient_rule() {
        // f = y / x at (2, 3): ∂x = -y/x² = -0.75, ∂x² = 2y/x³ = 0.75, ∂y = 0.5, ∂y² = 0.
        let [x, y, _] = at([2.0, 3.0, 0.0]);
        let f = y / x;
        assert_eq!(f.value, 1.5);
        assert_eq!(f.grad, [-0.75, 0.5, 0.0]);
        assert_eq!(f.diag2, [0.75, 0.0, 0.0]);
    }

    #[test]
    fn elementary_functions() {
        let [x, _, _] = at([0.7, 0.0, 0.0]);
        let c = x.cos();
        assert!((c.grad[0] + 0.7f64.sin()).abs() < 1e-15);
        assert!((c.diag2[0] + 0.7f64.cos()).abs() < 1e-15);
        let l = x.ln();
        assert!((l.grad[0] - 1.0 / 0.7).abs() < 1e-14);
        assert!((l.diag2[0] + 1.0 / 0.49).abs() < 1e-13);
        let p = x.powf(1.0 / 3.0);
        assert!((p.grad[0] - (1.0 / 3.0) * 0.7f64.powf(-2.0 / 3.0)).abs() < 1e-14);
        let s = x.sqrt();
        assert!((s.diag2[0] + 0.25 * 0.7f64.powf(-1.5)).abs() < 1e-14);
    }

    #[test]
    fn abs_reflects_sign() {
        let [x, _, _] = at([-2.0, 0.0, 0.0]);
        let a = x.abs();
        assert_eq!(a.value, 2.0);
        assert_eq!(a.grad[0], -1.0);
        let [x0, _, _] = at([0.0, 0.0, 0.0]);
        assert!(x0.abs().is_finite());
    }

    #[test]
    fn constant_jet_is_zero_only_when_zero() {
        assert!(Jet2::constant(0.0).is_zero());
        assert!(!Jet2::constant(1.0).is_zero());
        assert!(!Jet2::variable(0, 0.0).is_zero());
    }
}
