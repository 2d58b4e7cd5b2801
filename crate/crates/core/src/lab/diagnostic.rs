//! Ensemble drift of M = 2σz − x² when γ₁ = 0 and β = 0.
//!
//! Under those conditions LM = 2σx² ≥ 0, so the ensemble mean of M cannot
//! settle, which rules out an invariant probability measure.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hitting::mean_stderr;
use crate::error::{Error, Result};
use crate::model::{ModelParams, Point3};
use crate::sde::{escaped, fmt17, Stepper};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftDiagnostic {
    pub t: Vec<f64>,
    pub mean_m: Vec<f64>,
    pub stderr_m: Vec<f64>,
    pub mean_z2: Vec<f64>,
    pub stderr_z2: Vec<f64>,
    pub mean_x2: Vec<f64>,
    /// Least-squares slope of mean z² against t.
    pub slope_z2: f64,
    pub n_traj: usize,
    pub n_escaped: usize,
}

impl DriftDiagnostic {
    /// Largest drop of mean M between two recorded times, in units of the
    /// combined standard error. Values below ~3 mean no significant decrease.
    pub fn max_drop_z_score(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.t.len() {
            for j in i + 1..self.t.len() {
                let drop = self.mean_m[i] - self.mean_m[j];
                let se = (self.stderr_m[i].powi(2) + self.stderr_m[j].powi(2)).sqrt();
                if drop > 0.0 {
                    worst = worst.max(if se > 0.0 { drop / se } else { f64::INFINITY });
                }
            }
        }
        worst
    }

    /// Writes `t,mean_M,stderr` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,mean_M,stderr")?;
        for k in 0..self.t.len() {
            writeln!(w, "{},{},{}", fmt17(self.t[k]), fmt17(self.mean_m[k]), fmt17(self.stderr_m[k]))?;
        }
        Ok(())
    }
}

pub fn least_squares_slope(t: &[f64], v: &[f64]) -> f64 {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let vm = v.iter().sum::<f64>() / n;
    let num: f64 = t.iter().zip(v).map(|(a, b)| (a - tm) * (b - vm)).sum();
    let den: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
    num / den
}

/// Ensemble statistics of M and z² at `n_out + 1` evenly spaced times in [0, T].
#[allow(clippy::too_many_arguments)]
pub fn nonstationarity_drift_diagnostic(
    params: &ModelParams,
    start: Point3,
    dt: f64,
    horizon: f64,
    n_traj: usize,
    n_out: usize,
    seed: u64,
) -> Result<DriftDiagnostic> {
    let g = params.gamma();
    if g[0] != 0.0 || params.beta() != 0.0 || g[1] + g[2] <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "diagnostic needs gamma1 = 0, beta = 0 and gamma2 + gamma3 > 0; got gamma = {g:?}, beta = {}",
            params.beta()
        )));
    }
    if !(horizon > 0.0) || n_out == 0 || n_traj < 2 {
        return Err(Error::InvalidArgument(
            "need horizon > 0, n_out >= 1 and n_traj >= 2".into(),
        ));
    }
    Stepper::new(*params, dt, seed, 0)?;
    let n_steps = (horizon / dt).round() as u64;
    let every = (n_steps / n_out as u64).max(1);
    let record: Vec<u64> = (0..=n_steps).step_by(every as usize).collect();
    let sigma = params.sigma();

    // Per trajectory: states at the recorded steps, or None if it escaped.
    let paths: Vec<Option<Vec<Point3>>> = (0..n_traj as u64)
        .into_par_iter()
        .map(|id| {
            let stepper = Stepper::new(*params, dt, seed, id).expect("dt validated above");
            let mut p = start;
            let mut out = Vec::with_capacity(record.len());
            let mut next = 0;
            for k in 0..=n_steps {
                if k > 0 {
                    p = stepper.advance(p, k - 1);
                    if escaped(p) {
                        return None;
                    }
                }
                if next < record.len() && record[next] == k {
                    out.push(p);
                    next += 1;
                }
            }
            Some(out)
        })
        .collect();
    let kept: Vec<&Vec<Point3>> = paths.iter().flatten().collect();
    let n_escaped = n_traj - kept.len();
    if kept.len() < 2 {
        return Err(Error::InvalidArgument("fewer than two trajectories stayed finite".into()));
    }

    let mut d = DriftDiagnostic {
        t: record.iter().map(|&k| k as f64 * dt).collect(),
        mean_m: vec![],
        stderr_m: vec![],
        mean_z2: vec![],
        stderr_z2: vec![],
        mean_x2: vec![],
        slope_z2: 0.0,
        n_traj,
        n_escaped,
    };
    for i in 0..record.len() {
        let m: Vec<f64> = kept.iter().map(|p| 2.0 * sigma * p[i].z - p[i].x * p[i].x).collect();
        let z2: Vec<f64> = kept.iter().map(|p| p[i].z * p[i].z).collect();
        let x2: Vec<f64> = kept.iter().map(|p| p[i].x * p[i].x).collect();
        let (a, b) = mean_stderr(&m);
        let (c, e) = mean_stderr(&z2);
        d.mean_m.push(a);
        d.stderr_m.push(b);
        d.mean_z2.push(c);
        d.stderr_z2.push(e);
        d.mean_x2.push(x2.iter().sum::<f64>() / x2.len() as f64);
    }
    d.slope_z2 = least_squares_slope(&d.t, &d.mean_z2);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preconditions() {
        let start = Point3::ORIGIN;
        let bad = [
            ModelParams::new(10.0, 28.0, 0.0, [1.0, 0.0, 1.0]).unwrap(),
            ModelParams::new(10.0, 28.0, 1.0, [0.0, 0.0, 1.0]).unwrap(),
        ];
        for p in bad {
            assert!(nonstationarity_drift_diagnostic(&p, start, 1e-3, 1.0, 10, 10, 0).is_err());
        }
    }

    #[test]
    fn x_stays_zero_without_x_and_y_noise() {
        let p = ModelParams::new(10.0, 28.0, 0.0, [0.0, 0.0, 1.0]).unwrap();
        let d = nonstationarity_drift_diagnostic(&p, Point3::ORIGIN, 1e-3, 1.0, 50, 10, 2).unwrap();
        assert!(d.mean_x2.iter().all(|&v| v == 0.0));
        assert_eq!(d.t.len(), 11);
        assert_eq!(d.mean_z2[0], 0.0);
    }

    #[test]
    fn slope_of_a_line() {
        let t = [0.0, 1.0, 2.0, 3.0];
        assert!((least_squares_slope(&t, &[1.0, 3.0, 5.0, 7.0]) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn csv_header() {
        let p = ModelParams::new(10.0, 28.0, 0.0, [0.0, 1.0, 0.0]).unwrap();
        let d = nonstationarity_drift_diagnostic(&p, Point3::ORIGIN, 1e-2, 0.1, 4, 2, 2).unwrap();
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("t,mean_M,stderr\n"));
    }
}
