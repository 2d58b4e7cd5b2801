//! The odd/even iterated-bracket hierarchy for constant noise fields and a
//! polynomial drift, and the constant-field spanning test.
//!
//! Level 1 brackets the noise generators against the drift F. Level j+1
//! brackets each constant odd-produced field G against every generator H of
//! level j, using adⁿ with n = 𝔫(G, H) and sorting by the parity of n.

use num::{BigRational, Zero};
use serde::Serialize;

use super::field::{ad, degree_n, PolyVectorField};
use super::poly::{Poly, Var};
use crate::error::{Error, Result};

/// A field together with the bracket expression that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub label: String,
    pub field: PolyVectorField,
    /// First level at which the field appeared.
    pub level: usize,
}

/// Cumulative sets at one level.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Level {
    pub odd: Vec<Entry>,
    pub odd_constant: Vec<Entry>,
    /// Generators of the nonnegative cone; kept for reporting only.
    pub even: Vec<Entry>,
}

impl Level {
    fn generators(&self) -> impl Iterator<Item = &Entry> {
        self.odd.iter().chain(&self.even)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketHierarchy {
    pub noise: Vec<Entry>,
    /// levels[0] is level 1.
    pub levels: Vec<Level>,
}

fn push_unique(set: &mut Vec<Entry>, e: Entry) -> bool {
    if e.field.is_zero() || set.iter().any(|o| o.field == e.field) {
        return false;
    }
    set.push(e);
    true
}

fn ad_label(g: &str, n: u32, h: &str) -> String {
    match n {
        0 => h.to_string(),
        1 => format!("[{g}, {h}]"),
        _ => format!("ad^{n} {g}({h})"),
    }
}

/// Sorts adⁿ G(H) with n = 𝔫(G, H) into the odd or even set.
fn extend(level: &mut Level, g: &Entry, h_label: &str, h: &PolyVectorField, at: usize) -> Result<bool> {
    let n = degree_n(&g.field, h)?;
    let e = Entry {
        label: ad_label(&g.label, n, h_label),
        field: ad(&g.field, n, h),
        level: at,
    };
    Ok(if n % 2 == 1 {
        push_unique(&mut level.odd, e)
    } else {
        push_unique(&mut level.even, e)
    })
}

fn refresh_constants(level: &mut Level) {
    level.odd_constant = level.odd.iter().filter(|e| e.field.is_constant()).cloned().collect();
}

/// Builds levels 1..=max_level, stopping early once a level adds nothing.
///
/// The noise fields must be constant. Only the listed generators of each
/// level's span and cone are bracketed, which is enough for the spanning
/// test since brackets are bilinear.
pub fn build_hierarchy(
    drift: &PolyVectorField,
    noise: &[(String, PolyVectorField)],
    max_level: usize,
) -> Result<BracketHierarchy> {
    if let Some((name, _)) = noise.iter().find(|(_, g)| !g.is_constant()) {
        return Err(Error::InvalidArgument(format!("noise field {name} is not constant")));
    }
    let noise: Vec<Entry> = noise
        .iter()
        .map(|(label, field)| Entry {
            label: label.clone(),
            field: field.clone(),
            level: 0,
        })
        .collect();
    let mut levels = Vec::new();
    if max_level == 0 {
        return Ok(BracketHierarchy { noise, levels });
    }

    let mut first = Level::default();
    for g in &noise {
        push_unique(&mut first.odd, g.clone());
    }
    for g in &noise {
        extend(&mut first, g, "F", drift, 1)?;
    }
    refresh_constants(&mut first);
    levels.push(first);

    for j in 1..max_level {
        let prev = &levels[j - 1];
        let mut next = prev.clone();
        let mut grew = false;
        for g in &prev.odd_constant {
            for h in prev.generators() {
                grew |= extend(&mut next, g, &h.label, &h.field, j + 1)?;
            }
        }
        refresh_constants(&mut next);
        levels.push(next);
        if !grew {
            break;
        }
    }
    Ok(BracketHierarchy { noise, levels })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessField {
    pub label: String,
    pub level: usize,
    pub field: [String; 3],
}

impl From<&Entry> for WitnessField {
    fn from(e: &Entry) -> Self {
        WitnessField {
            label: e.label.clone(),
            level: e.level,
            field: [e.field.c[0].to_string(), e.field.c[1].to_string(), e.field.c[2].to_string()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpanResult {
    pub spans: bool,
    pub rank: usize,
    pub basis: Vec<WitnessField>,
}

/// Constant vector with every atom aᵢ set to 1; errors if another symbol remains.
fn constant_vector(e: &Entry) -> Result<[BigRational; 3]> {
    let unit = e.field.substitute(&|v| Var::ATOMS.contains(&v).then(|| Poly::int(1)));
    let mut out: [BigRational; 3] = Default::default();
    for (k, c) in unit.c.iter().enumerate() {
        out[k] = c.as_rational().ok_or_else(|| {
            Error::InvalidArgument(format!(
                "constant field {} still has symbolic coefficient {c}; substitute parameter values first",
                e.label
            ))
        })?;
    }
    Ok(out)
}

/// Exact rank of a list of rational 3-vectors.
fn rank(rows: &[[BigRational; 3]]) -> usize {
    let mut m: Vec<[BigRational; 3]> = rows.to_vec();
    let mut r = 0;
    for col in 0..3 {
        let Some(pivot) = (r..m.len()).find(|&i| !m[i][col].is_zero()) else {
            continue;
        };
        m.swap(r, pivot);
        let p = m[r][col].clone();
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = &m[i][col] / &p;
                let row_r = m[r].clone();
                for (dst, src) in m[i].iter_mut().zip(row_r.iter()) {
                    *dst -= src * &f;
                }
            }
        }
        r += 1;
    }
    r
}

/// True iff the constant odd-produced fields over all levels span ℝ³.
///
/// Atoms are positive scalars multiplying whole fields, so replacing them by 1
/// does not change linear independence.
pub fn spanning_test(h: &BracketHierarchy) -> Result<SpanResult> {
    let mut chosen: Vec<[BigRational; 3]> = Vec::new();
    let mut basis = Vec::new();
    let Some(last) = h.levels.last() else {
        return Ok(SpanResult {
            spans: false,
            rank: 0,
            basis,
        });
    };
    // Levels are cumulative, so the last one holds every constant odd field.
    let mut candidates: Vec<&Entry> = last.odd_constant.iter().collect();
    candidates.sort_by_key(|e| e.level);
    for e in candidates {
        let v = constant_vector(e)?;
        let mut trial = chosen.clone();
        trial.push(v);
        if rank(&trial) > chosen.len() {
            chosen = trial;
            basis.push(WitnessField::from(e));
        }
        if chosen.len() == 3 {
            break;
        }
    }
    Ok(SpanResult {
        spans: chosen.len() == 3,
        rank: chosen.len(),
        basis,
    })
}

/// JSON-ready view of a hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub odd: Vec<WitnessField>,
    pub odd_constant: Vec<WitnessField>,
    pub even: Vec<WitnessField>,
}

impl BracketHierarchy {
    pub fn report(&self) -> Vec<LevelReport> {
        self.levels
            .iter()
            .enumerate()
            .map(|(j, l)| LevelReport {
                level: j + 1,
                odd: l.odd.iter().map(WitnessField::from).collect(),
                odd_constant: l.odd_constant.iter().map(WitnessField::from).collect(),
                even: l.even.iter().map(WitnessField::from).collect(),
            })
            .collect()
    }

    /// First field with the given structural value, if any level produced it.
    pub fn find(&self, field: &PolyVectorField) -> Option<&Entry> {
        self.levels.last()?.odd.iter().chain(&self.levels.last()?.even).find(|e| &e.field == field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brackets::field::{lie_bracket, lorenz_drift, lorenz_drift_symbolic, lorenz_noise};
    use crate::model::ModelParams;

    fn atoms(a: Var, b: Var) -> Poly {
        &Poly::var(a) * &Poly::var(b)
    }

    #[test]
    fn lorenz_x_and_y_noise_spans() {
        let params = ModelParams::classical([1.0, 1.0, 0.0]).unwrap();
        let h = build_hierarchy(&lorenz_drift(&params), &lorenz_noise(&params), 4).unwrap();
        let target = PolyVectorField::axis(2, atoms(Var::A1, Var::A2));
        let e = h.levels[1].odd_constant.iter().find(|e| e.field == target).expect("level-2 a1*a2 ∂z");
        assert_eq!(e.level, 2);
        assert!(["[G2, [G1, F]]", "[G1, [G2, F]]"].contains(&e.label.as_str()), "{}", e.label);
        let s = spanning_test(&h).unwrap();
        assert!(s.spans);
        assert_eq!(s.basis.len(), 3);
    }

    #[test]
    fn lorenz_x_and_z_noise_spans_symbolically() {
        let params = ModelParams::new(10.0, 28.0, 0.0, [1.0, 0.0, 1.0]).unwrap();
        let h = build_hierarchy(&lorenz_drift_symbolic(), &lorenz_noise(&params), 3).unwrap();
        let target = PolyVectorField::axis(1, -atoms(Var::A1, Var::A3));
        assert!(h.levels[1].odd_constant.iter().any(|e| e.field == target));
        assert!(spanning_test(&h).unwrap().spans);
    }

    #[test]
    fn zero_drift_stalls() {
        let g = vec![("G1".to_string(), PolyVectorField::axis(0, Poly::var(Var::A1)))];
        let h = build_hierarchy(&PolyVectorField::zero(), &g, 5).unwrap();
        let n = h.levels.len();
        assert!(n < 5);
        assert_eq!(h.levels[n - 1], h.levels[n - 2]);
        assert_eq!(h.levels.last().unwrap().odd.len(), 1);
        let s = spanning_test(&h).unwrap();
        assert!(!s.spans);
        assert_eq!(s.rank, 1);
    }

    #[test]
    fn only_z_noise_does_not_span() {
        // With noise only along z the drift's ∂z bracket is (0, −x, −β): the
        // hierarchy never produces constant x or y directions.
        let params = ModelParams::classical([0.0, 0.0, 1.0]).unwrap();
        let h = build_hierarchy(&lorenz_drift(&params), &lorenz_noise(&params), 4).unwrap();
        assert!(!spanning_test(&h).unwrap().spans);
    }

    #[test]
    fn levels_are_monotone() {
        let params = ModelParams::classical([1.0, 1.0, 1.0]).unwrap();
        let h = build_hierarchy(&lorenz_drift(&params), &lorenz_noise(&params), 4).unwrap();
        for w in h.levels.windows(2) {
            assert!(w[0].odd.iter().all(|e| w[1].odd.contains(e)));
            assert!(w[0].even.iter().all(|e| w[1].even.contains(e)));
            assert!(w[1].odd_constant.iter().all(|e| e.field.is_constant() && w[1].odd.contains(e)));
        }
    }

    #[test]
    fn non_constant_noise_is_rejected() {
        let f = lorenz_drift_symbolic();
        let g1p = lie_bracket(&PolyVectorField::axis(0, Poly::int(1)), &f);
        assert!(build_hierarchy(&f, &[("bad".into(), g1p)], 2).is_err());
    }
}
