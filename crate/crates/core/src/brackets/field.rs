//! Polynomial vector fields U = Σ Uʲ ∂ⱼ on ℝ³ and their Lie brackets.

use std::fmt;

use num::BigRational;

use super::poly::{Poly, Var, NVARS};
use crate::error::{Error, Result};
use crate::model::ModelParams;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PolyVectorField {
    pub c: [Poly; 3],
}

impl PolyVectorField {
    pub fn new(c: [Poly; 3]) -> Self {
        PolyVectorField { c }
    }

    pub fn zero() -> Self {
        PolyVectorField::default()
    }

    /// coef · ∂ᵢ.
    pub fn axis(i: usize, coef: Poly) -> Self {
        let mut c: [Poly; 3] = Default::default();
        c[i] = coef;
        PolyVectorField { c }
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(Poly::is_zero)
    }

    /// No component depends on x, y or z.
    pub fn is_constant(&self) -> bool {
        self.c.iter().all(Poly::is_state_constant)
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        PolyVectorField {
            c: [self.c[0].scale(s), self.c[1].scale(s), self.c[2].scale(s)],
        }
    }

    /// Applies the field as a derivation: U(f) = Σ Uᵏ ∂ₖ f.
    pub fn derive(&self, f: &Poly) -> Poly {
        Var::STATE
            .iter()
            .zip(&self.c)
            .fold(Poly::zero(), |acc, (&v, uk)| &acc + &(uk * &f.derivative(v)))
    }

    /// Substitutes values for the non-state symbols.
    pub fn substitute(&self, map: &dyn Fn(Var) -> Option<Poly>) -> Self {
        PolyVectorField {
            c: [self.c[0].substitute(map), self.c[1].substitute(map), self.c[2].substitute(map)],
        }
    }

    pub fn eval(&self, values: &[f64; NVARS]) -> [f64; 3] {
        [self.c[0].eval(values), self.c[1].eval(values), self.c[2].eval(values)]
    }
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})∂x + ({})∂y + ({})∂z", self.c[0], self.c[1], self.c[2])
    }
}

/// [U, W]ʲ = Uᵏ ∂ₖWʲ − Wᵏ ∂ₖUʲ.
pub fn lie_bracket(u: &PolyVectorField, w: &PolyVectorField) -> PolyVectorField {
    PolyVectorField {
        c: std::array::from_fn(|j| &u.derive(&w.c[j]) - &w.derive(&u.c[j])),
    }
}

/// adⁿ U(W) = [U, [U, ..., [U, W]]].
pub fn ad(u: &PolyVectorField, n: u32, w: &PolyVectorField) -> PolyVectorField {
    (0..n).fold(w.clone(), |acc, _| lie_bracket(u, &acc))
}

/// 𝔫(G, W): the largest λ-degree of Wⱼ(λG) over the components, with the
/// constant field G read as a vector. Zero when W(λG) vanishes identically.
pub fn degree_n(g: &PolyVectorField, w: &PolyVectorField) -> Result<u32> {
    if !g.is_constant() {
        return Err(Error::InvalidArgument(format!("degree_n needs a constant field, got {g}")));
    }
    let mut best = 0;
    for wj in &w.c {
        // Wⱼ(λG) = Σ_d λ^d · (degree-d part of Wⱼ)(G).
        for (d, part) in wj.by_state_degree() {
            let at_g = part.substitute(&|v| match v {
                Var::X => Some(g.c[0].clone()),
                Var::Y => Some(g.c[1].clone()),
                Var::Z => Some(g.c[2].clone()),
                _ => None,
            });
            if !at_g.is_zero() {
                best = best.max(d);
            }
        }
    }
    Ok(best)
}

/// The Lorenz drift with σ, ρ, β kept symbolic.
pub fn lorenz_drift_symbolic() -> PolyVectorField {
    let (x, y, z) = (Poly::var(Var::X), Poly::var(Var::Y), Poly::var(Var::Z));
    let (s, r, b) = (Poly::var(Var::Sigma), Poly::var(Var::Rho), Poly::var(Var::Beta));
    PolyVectorField::new([
        &s * &(&y - &x),
        &(&x * &(&r - &z)) - &y,
        &(&x * &y) - &(&b * &z),
    ])
}

/// The Lorenz drift with σ, ρ, β replaced by their exact rational values.
pub fn lorenz_drift(params: &ModelParams) -> PolyVectorField {
    let values = [params.sigma(), params.rho(), params.beta()];
    lorenz_drift_symbolic().substitute(&|v| match v {
        Var::Sigma => Poly::from_f64(values[0]),
        Var::Rho => Poly::from_f64(values[1]),
        Var::Beta => Poly::from_f64(values[2]),
        _ => None,
    })
}

/// Noise fields Gᵢ = aᵢ ∂ᵢ for every γᵢ > 0, labelled G1, G2, G3.
pub fn lorenz_noise(params: &ModelParams) -> Vec<(String, PolyVectorField)> {
    params
        .gamma()
        .iter()
        .enumerate()
        .filter(|(_, &g)| g > 0.0)
        .map(|(i, _)| (format!("G{}", i + 1), PolyVectorField::axis(i, Poly::var(Var::ATOMS[i]))))
        .collect()
}

/// Variable values for floating evaluation: state p, model symbols and aᵢ = √(2γᵢ).
pub fn eval_values(params: &ModelParams, p: [f64; 3]) -> [f64; NVARS] {
    let g = params.gamma();
    [
        p[0],
        p[1],
        p[2],
        params.sigma(),
        params.rho(),
        params.beta(),
        (2.0 * g[0]).sqrt(),
        (2.0 * g[1]).sqrt(),
        (2.0 * g[2]).sqrt(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(var: Var) -> Poly {
        Poly::var(var)
    }

    fn g(i: usize) -> PolyVectorField {
        PolyVectorField::axis(i, v(Var::ATOMS[i]))
    }

    #[test]
    fn first_bracket_with_drift() {
        let f = lorenz_drift_symbolic();
        let b = lie_bracket(&g(0), &f);
        let a1 = v(Var::A1);
        let expected = PolyVectorField::new([
            -(&a1 * &v(Var::Sigma)),
            &a1 * &(&v(Var::Rho) - &v(Var::Z)),
            &a1 * &v(Var::Y),
        ]);
        assert_eq!(b, expected);
    }

    #[test]
    fn second_brackets_are_constant() {
        let g1p = lie_bracket(&g(0), &lorenz_drift_symbolic());
        let a12 = &v(Var::A1) * &v(Var::A2);
        let a13 = &v(Var::A1) * &v(Var::A3);
        assert_eq!(lie_bracket(&g(1), &g1p), PolyVectorField::axis(2, a12));
        assert_eq!(lie_bracket(&g(2), &g1p), PolyVectorField::axis(1, -a13));
    }

    #[test]
    fn degrees_of_lorenz_fields() {
        let f = lorenz_drift_symbolic();
        assert_eq!(degree_n(&g(0), &f).unwrap(), 1);
        assert_eq!(degree_n(&g(2), &f).unwrap(), 1);
        let g1p = lie_bracket(&g(0), &f);
        assert_eq!(degree_n(&g(1), &g1p).unwrap(), 1);
        assert_eq!(degree_n(&g(2), &g1p).unwrap(), 1);
        assert_eq!(degree_n(&g(0), &g(1)).unwrap(), 0);
        assert_eq!(degree_n(&g(0), &PolyVectorField::zero()).unwrap(), 0);
        assert!(degree_n(&f, &g(0)).is_err());
    }

    #[test]
    fn quadratic_degree_along_diagonal() {
        // W = xy ∂z along G = ∂x + ∂y has degree 2; along ∂x alone it vanishes.
        let w = PolyVectorField::axis(2, &v(Var::X) * &v(Var::Y));
        let diag = PolyVectorField::new([Poly::int(1), Poly::int(1), Poly::zero()]);
        assert_eq!(degree_n(&diag, &w).unwrap(), 2);
        assert_eq!(degree_n(&PolyVectorField::axis(0, Poly::int(1)), &w).unwrap(), 0);
    }

    #[test]
    fn numeric_drift_matches_model() {
        let params = ModelParams::classical([1.0, 0.0, 0.0]).unwrap();
        let f = lorenz_drift(&params);
        let p = [0.3, -1.2, 4.5];
        let d = params.drift(crate::model::Point3::from_array(p));
        let e = f.eval(&eval_values(&params, p));
        for (a, b) in e.iter().zip(d.to_array()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_skips_zero_intensities() {
        let params = ModelParams::new(1.0, 0.0, 0.0, [1.0, 0.0, 2.0]).unwrap();
        let names: Vec<String> = lorenz_noise(&params).into_iter().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["G1", "G3"]);
    }
}
