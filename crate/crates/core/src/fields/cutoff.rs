//! Plateaued C² cutoffs built from the quintic smoothstep s(t) = 6t⁵ − 15t⁴ + 10t³.
//!
//! On a plateau the cutoffs return an exact constant (zero derivatives), which
//! lets products with singular factors be skipped outside their supports.

use crate::jet::Real;

/// s(t) for t ∈ [0, 1]; s, s', s'' vanish appropriately at both ends.
pub fn smoothstep<T: Real>(t: T) -> T {
    let t2 = t * t;
    let t3 = t2 * t;
    t3 * ((t * 6.0 - 15.0) * t + 10.0)
}

/// χ: 1 on |t| ≤ 1, 0 on |t| ≥ 2.
pub fn chi<T: Real>(t: T) -> T {
    let a = t.val().abs();
    if a <= 1.0 {
        T::cst(1.0)
    } else if a >= 2.0 {
        T::cst(0.0)
    } else {
        -smoothstep(t.abs() - 1.0) + 1.0
    }
}

/// χ̃: 1 on |t| ≥ 1, 0 on |t| ≤ 1/2.
pub fn chi_tilde<T: Real>(t: T) -> T {
    let a = t.val().abs();
    if a >= 1.0 {
        T::cst(1.0)
    } else if a <= 0.5 {
        T::cst(0.0)
    } else {
        smoothstep(t.abs() * 2.0 - 1.0)
    }
}
