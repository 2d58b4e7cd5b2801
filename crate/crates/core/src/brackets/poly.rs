//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Variables are the state coordinates x, y, z (the only ones differentiated)
//! followed by the model symbols σ, ρ, β and the noise amplitudes a₁, a₂, a₃,
//! where aᵢ stands for √(2γᵢ) as an opaque positive atom.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

pub const NVARS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    Y,
    Z,
    Sigma,
    Rho,
    Beta,
    A1,
    A2,
    A3,
}

impl Var {
    pub const ALL: [Var; NVARS] = [
        Var::X,
        Var::Y,
        Var::Z,
        Var::Sigma,
        Var::Rho,
        Var::Beta,
        Var::A1,
        Var::A2,
        Var::A3,
    ];
    pub const STATE: [Var; 3] = [Var::X, Var::Y, Var::Z];
    pub const ATOMS: [Var; 3] = [Var::A1, Var::A2, Var::A3];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
            Var::Sigma => "sigma",
            Var::Rho => "rho",
            Var::Beta => "beta",
            Var::A1 => "a1",
            Var::A2 => "a2",
            Var::A3 => "a3",
        }
    }

    pub fn is_state(self) -> bool {
        self.index() < 3
    }
}

/// Exponent vector, ordered lexicographically in the order of [`Var::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(pub [u8; NVARS]);

impl Monomial {
    pub const ONE: Monomial = Monomial([0; NVARS]);

    pub fn var(v: Var) -> Self {
        let mut e = [0; NVARS];
        e[v.index()] = 1;
        Monomial(e)
    }

    pub fn times(self, o: Monomial) -> Monomial {
        let mut e = self.0;
        for (a, b) in e.iter_mut().zip(o.0) {
            *a += b;
        }
        Monomial(e)
    }

    /// Total degree in x, y, z.
    pub fn state_degree(&self) -> u32 {
        self.0[..3].iter().map(|&e| e as u32).sum()
    }
}

/// A polynomial; zero coefficients are never stored, so equality is structural.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct Poly {
    terms: BTreeMap<Monomial, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::monomial(c, Monomial::ONE)
    }

    pub fn int(c: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn var(v: Var) -> Self {
        Poly::monomial(BigRational::one(), Monomial::var(v))
    }

    pub fn monomial(c: BigRational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    /// Exact rational value of a finite float.
    pub fn from_f64(v: f64) -> Option<Self> {
        BigRational::from_float(v).map(Poly::constant)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    /// True when no term involves x, y or z.
    pub fn is_state_constant(&self) -> bool {
        self.terms.keys().all(|m| m.state_degree() == 0)
    }

    pub fn mentions(&self, v: Var) -> bool {
        self.terms.keys().any(|m| m.0[v.index()] > 0)
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(BigRational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn derivative(&self, v: Var) -> Poly {
        let i = v.index();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let e = m.0[i];
            if e > 0 {
                let mut m2 = *m;
                m2.0[i] -= 1;
                out.add_term(m2, c * BigRational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::int(1), |acc, _| &acc * self)
    }

    /// Replaces each variable with the given polynomial (or keeps it).
    pub fn substitute(&self, map: &dyn Fn(Var) -> Option<Poly>) -> Poly {
        let images: Vec<Option<Poly>> = Var::ALL.iter().map(|&v| map(v)).collect();
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            let mut kept = Monomial::ONE;
            let mut term = Poly::constant(c.clone());
            for (i, img) in images.iter().enumerate() {
                let e = m.0[i];
                if e == 0 {
                    continue;
                }
                match img {
                    Some(p) => term = &term * &p.pow(e as u32),
                    None => kept.0[i] = e,
                }
            }
            let kept_poly = Poly::monomial(BigRational::one(), kept);
            out = &out + &(&term * &kept_poly);
        }
        out
    }

    /// Groups terms by total degree in x, y, z.
    pub fn by_state_degree(&self) -> BTreeMap<u32, Poly> {
        let mut out: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.state_degree())
                .or_default()
                .add_term(*m, c.clone());
        }
        out
    }

    /// Floating evaluation with one value per variable.
    pub fn eval(&self, values: &[f64; NVARS]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (i, &e) in m.0.iter().enumerate() {
                    if e > 0 {
                        t *= values[i].powi(e as i32);
                    }
                }
                t
            })
            .sum()
    }

    /// The constant term's value if the polynomial is a pure rational.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                (*m == Monomial::ONE).then(|| c.clone())
            }
            _ => None,
        }
    }
}

impl Add for &Poly {
    type Output = Poly;

    fn add(self, o: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;

    fn sub(self, o: &Poly) -> Poly {
        self + &(-o)
    }
}

impl Neg for &Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }
}

impl Mul for &Poly {
    type Output = Poly;

    fn mul(self, o: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.times(*m2), c1 * c2);
            }
        }
        out
    }
}

macro_rules! owned_ops {
    ($($tr:ident $f:ident),*) => {$(
        impl $tr for Poly {
            type Output = Poly;
            fn $f(self, o: Poly) -> Poly {
                (&self).$f(&o)
            }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);

impl Neg for Poly {
    type Output = Poly;

    fn neg(self) -> Poly {
        -&self
    }
}

impl fmt::Display for Poly {
    /// Terms in descending monomial order, e.g. `-sigma*a1 + z*a1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !mag.is_one() || *m == Monomial::ONE {
                factors.push(mag.to_string());
            }
            for v in Var::ALL {
                match m.0[v.index()] {
                    0 => {}
                    1 => factors.push(v.name().to_string()),
                    e => factors.push(format!("{}^{e}", v.name())),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Poly {
        Poly::var(Var::X)
    }
    fn y() -> Poly {
        Poly::var(Var::Y)
    }

    #[test]
    fn cancellation_prunes_terms() {
        let p = &(&x() * &y()) - &(&y() * &x());
        assert!(p.is_zero());
        assert_eq!(p, Poly::zero());
    }

    #[test]
    fn derivative_of_power() {
        let p = x().pow(3) * y();
        assert_eq!(p.derivative(Var::X), Poly::int(3) * x().pow(2) * y());
        assert!(p.derivative(Var::Z).is_zero());
    }

    #[test]
    fn substitution_and_grouping() {
        // x²y + 3x at x = λa, y = 2: groups by state degree before substitution.
        let p = x().pow(2) * y() + Poly::int(3) * x();
        let groups = p.by_state_degree();
        assert_eq!(groups.keys().copied().collect::<Vec<_>>(), vec![1, 3]);
        let s = p.substitute(&|v| match v {
            Var::X => Some(Poly::var(Var::A1)),
            Var::Y => Some(Poly::int(2)),
            _ => None,
        });
        assert_eq!(s, Poly::int(2) * Poly::var(Var::A1).pow(2) + Poly::int(3) * Poly::var(Var::A1));
    }

    #[test]
    fn display_is_readable() {
        let p = Poly::int(-2) * Poly::var(Var::Sigma) + Poly::var(Var::Z);
        assert_eq!(p.to_string(), "z - 2*sigma");
        assert_eq!(Poly::zero().to_string(), "0");
        assert_eq!(Poly::int(-1).to_string(), "-1");
    }

    #[test]
    fn exact_float_conversion() {
        let p = Poly::from_f64(0.1).unwrap();
        let r = p.as_rational().unwrap();
        assert_eq!(r.to_f64().unwrap(), 0.1);
        assert!(Poly::from_f64(f64::NAN).is_none());
    }
}
