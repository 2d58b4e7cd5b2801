//! Sampled verification of drift inequalities over described regions.
//!
//! A pass is a numerical certificate on a truncated domain, never a proof.

pub mod recurrence;
pub mod transience;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::generator::{apply_generator, ScalarField};
use crate::model::{ModelParams, Point3};
use crate::sampling::RegionSpec;

pub use recurrence::{search_recurrence_params, verify_recurrence_params, RecurrenceCertificate, SearchBudget};
pub use transience::{check_wonham_hypotheses, WonhamOptions, WonhamReport};

/// Multiplicative slack applied to every target bound.
pub const SLACK: f64 = 0.99;

/// Number of worst offenders retained in a report.
pub const MAX_WITNESSES: usize = 10;

pub const TRUNCATED_LABEL: &str = "numerical certificate (truncated)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// sup ≤ bound.
    Upper,
    /// inf ≥ bound.
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    /// `None` when the expression could not be evaluated at this point.
    pub value: Option<f64>,
}

/// Verdict of a sampled inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub region: String,
    pub params: BTreeMap<String, f64>,
    pub n_samples: usize,
    /// sup (upper checks) or inf (lower checks) of the checked expression.
    pub worst_margin: f64,
    pub pass: bool,
    pub witnesses: Vec<Witness>,
    pub expression: String,
    pub direction: Direction,
    pub bound: f64,
    /// The value actually compared against: `SLACK · bound`.
    pub threshold: f64,
    /// Samples at which evaluation failed (each one fails the check).
    pub n_errors: usize,
    pub status: String,
}

impl CertificateReport {
    pub fn with_params(mut self, params: BTreeMap<String, f64>) -> Self {
        self.params = params;
        self
    }
}

/// Model parameters as a flat map for reports.
pub fn model_param_map(params: &ModelParams) -> BTreeMap<String, f64> {
    let g = params.gamma();
    BTreeMap::from([
        ("sigma".to_string(), params.sigma()),
        ("rho".to_string(), params.rho()),
        ("beta".to_string(), params.beta()),
        ("gamma1".to_string(), g[0]),
        ("gamma2".to_string(), g[1]),
        ("gamma3".to_string(), g[2]),
    ])
}

/// Evaluates `expr` at the given points and compares the extreme value with `bound`.
pub fn check_points<F>(
    region: &str,
    expression: &str,
    points: &[Point3],
    expr: F,
    direction: Direction,
    bound: f64,
) -> CertificateReport
where
    F: Fn(Point3) -> Result<f64> + Sync,
{
    let values: Vec<Option<f64>> = points
        .par_iter()
        .map(|&p| expr(p).ok().filter(|v| v.is_finite()))
        .collect();
    let threshold = SLACK * bound;
    let sign = match direction {
        Direction::Upper => 1.0,
        Direction::Lower => -1.0,
    };
    let mut worst = match direction {
        Direction::Upper => f64::NEG_INFINITY,
        Direction::Lower => f64::INFINITY,
    };
    let mut n_errors = 0;
    // Ranking key: larger is worse; failed evaluations rank first.
    let mut ranked: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for (i, v) in values.iter().enumerate() {
        match v {
            Some(v) => {
                if sign * v > sign * worst {
                    worst = *v;
                }
                ranked.push((sign * v, i));
            }
            None => {
                n_errors += 1;
                ranked.push((f64::INFINITY, i));
            }
        }
    }
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let witnesses = ranked
        .iter()
        .take(MAX_WITNESSES)
        .map(|&(_, i)| {
            let p = points[i];
            Witness {
                x: p.x,
                y: p.y,
                z: p.z,
                value: values[i],
            }
        })
        .collect();
    let within = match direction {
        Direction::Upper => worst <= threshold,
        Direction::Lower => worst >= threshold,
    };
    let pass = !points.is_empty() && n_errors == 0 && within;
    CertificateReport {
        region: region.to_string(),
        params: BTreeMap::new(),
        n_samples: points.len(),
        worst_margin: worst,
        pass,
        witnesses,
        expression: expression.to_string(),
        direction,
        bound,
        threshold,
        n_errors,
        status: if pass { TRUNCATED_LABEL.into() } else { "failed".into() },
    }
}

/// sup over the region of L`field` ≤ `bound` (up to [`SLACK`]).
pub fn check_drift_upper(
    params: &ModelParams,
    field: &dyn ScalarField,
    region: &RegionSpec,
    bound: f64,
    seed: u64,
) -> CertificateReport {
    check_drift(params, field, region, bound, seed, Direction::Upper)
}

/// inf over the region of L`field` ≥ `bound` (up to [`SLACK`]).
pub fn check_drift_lower(
    params: &ModelParams,
    field: &dyn ScalarField,
    region: &RegionSpec,
    bound: f64,
    seed: u64,
) -> CertificateReport {
    check_drift(params, field, region, bound, seed, Direction::Lower)
}

fn check_drift(
    params: &ModelParams,
    field: &dyn ScalarField,
    region: &RegionSpec,
    bound: f64,
    seed: u64,
    direction: Direction,
) -> CertificateReport {
    let points = region.samples(seed);
    let label = format!("L({})", field.label());
    check_points(
        &region.name,
        &label,
        &points,
        |p| apply_generator(params, field, p),
        direction,
        bound,
    )
    .with_params(model_param_map(params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FieldH, FieldM};
    use crate::generator::Constant;
    use crate::sampling::Shell;

    fn far_box(r0: f64) -> RegionSpec {
        RegionSpec::new(
            "x^2+y^2 >= R0",
            move |p: Point3| p.x * p.x + p.y * p.y >= r0,
            vec![Shell::boxed(
                "box",
                Point3::new(-100.0, -100.0, -100.0),
                Point3::new(100.0, 100.0, 100.0),
            )],
            2000,
        )
    }

    #[test]
    fn energy_decays_away_from_the_axis_without_damping() {
        let params = ModelParams::new(10.0, 0.0, 0.0, [1.0, 0.0, 0.0]).unwrap();
        let g = params.gamma_sum();
        // LH = −2(σx² + y²) + 2Σγ ≤ −Σγ once x² + y² ≥ 3Σγ/2.
        let r = check_drift_upper(&params, &FieldH::new(&params), &far_box(1.5 * g / 0.99 + 0.1), -g, 3);
        assert!(r.pass, "{r:?}");
        assert_eq!(r.n_samples, 2000);
        assert!(r.worst_margin <= -0.99 * g);
    }

    #[test]
    fn constant_field_fails_a_negative_bound() {
        let params = ModelParams::classical([1.0, 0.0, 0.0]).unwrap();
        let r = check_drift_upper(&params, &Constant(3.0), &far_box(1.0), -1.0, 0);
        assert!(!r.pass);
        assert_eq!(r.worst_margin, 0.0);
        assert_eq!(r.witnesses.len(), MAX_WITNESSES);
    }

    #[test]
    fn negated_energy_fails_the_lower_mirror() {
        let params = ModelParams::new(10.0, 0.0, 0.0, [1.0, 0.0, 0.0]).unwrap();
        let neg = crate::generator::Combination {
            terms: vec![(-1.0, std::sync::Arc::new(FieldH::new(&params)) as _)],
        };
        let r = check_drift_lower(&params, &neg, &far_box(10.0), 1e9, 1);
        assert!(!r.pass);
        let r = check_drift_upper(&params, &neg, &far_box(10.0), -1.0, 1);
        assert!(!r.pass);
    }

    #[test]
    fn m_grows_inside_the_paraboloid_when_damping_is_negative() {
        let params = ModelParams::new(10.0, 28.0, -0.5, [1.0, 1.0, 1.0]).unwrap();
        let a = (2.0 * 1.0 + 2.0) / 0.5;
        let sigma = params.sigma();
        let region = RegionSpec::new(
            "2 sigma z - x^2 >= A",
            move |p: Point3| 2.0 * sigma * p.z - p.x * p.x >= a,
            vec![Shell::boxed("box", Point3::new(-50.0, -50.0, 0.0), Point3::new(50.0, 50.0, 200.0))],
            2000,
        );
        let r = check_drift_lower(&params, &FieldM::new(&params), &region, 0.0, 9);
        assert!(r.pass, "{r:?}");
        assert!(r.worst_margin >= 2.0 - 1e-9);
    }

    #[test]
    fn evaluation_failures_are_reported_as_failures() {
        let params = ModelParams::classical([1.0, 0.0, 0.0]).unwrap();
        let pts = [Point3::new(1.0, 1.0, 1.0), Point3::new(0.0, 1.0, 1.0)];
        let r = check_points(
            "r",
            "e",
            &pts,
            |p| {
                if p.x == 0.0 {
                    Err(crate::Error::NotC2 {
                        point: p,
                        reason: "x = 0".into(),
                    })
                } else {
                    Ok(-5.0)
                }
            },
            Direction::Upper,
            -1.0,
        );
        let _ = params;
        assert!(!r.pass);
        assert_eq!(r.n_errors, 1);
        assert_eq!(r.witnesses[0].value, None);
    }
}
