//! Time-averaged empirical law along one long trajectory.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{ModelParams, Point3};
use crate::sde::{escaped, fmt17, Stepper};

/// Fraction of the sampling window discarded as burn-in when none is given.
pub const DEFAULT_BURN_FRACTION: f64 = 0.2;
pub const DEFAULT_BINS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

impl Histogram {
    /// Equal-width bins over [lo, hi]; the last bin is closed.
    pub fn build(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut counts = vec![0u64; bins];
        for &v in values {
            let k = if width > 0.0 {
                (((v - lo) / width).floor() as isize).clamp(0, bins as isize - 1) as usize
            } else {
                0
            };
            counts[k] += 1;
        }
        Histogram { edges, counts }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Writes `bin_lo,bin_hi,count` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "bin_lo,bin_hi,count")?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(w, "{},{},{}", fmt17(self.edges[k]), fmt17(self.edges[k + 1]), c)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateLaw {
    pub histogram: Histogram,
    pub mean: f64,
    pub second_moment: f64,
    pub variance: f64,
    /// Every sample is bitwise equal to the first.
    pub constant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    pub coords: [CoordinateLaw; 3],
    pub n_samples: usize,
    pub burn_in: f64,
    pub dt: f64,
    /// Steps between recorded samples.
    pub thin: usize,
    #[serde(skip)]
    pub samples: Vec<Point3>,
}

impl EmpiricalLaw {
    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|p| p.to_array()[k]).collect()
    }
}

fn coordinate_law(values: &[f64], bins: usize) -> CoordinateLaw {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let second_moment = values.iter().map(|v| v * v).sum::<f64>() / n;
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    CoordinateLaw {
        histogram: Histogram::build(values, lo, hi, bins),
        mean,
        second_moment,
        variance: values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n,
        constant: values.iter().all(|v| v.to_bits() == values[0].to_bits()),
    }
}

/// Options for [`estimate_stationary`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StationaryOptions {
    /// Burn-in time; defaults to 20% of the sampling window.
    pub burn_in: Option<f64>,
    pub thin: usize,
    pub bins: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions {
            burn_in: None,
            thin: 1,
            bins: DEFAULT_BINS,
        }
    }
}

/// Runs one trajectory for burn-in plus `t_sample` and records every
/// `thin`-th state of the sampling window.
pub fn estimate_stationary(
    params: &ModelParams,
    start: Point3,
    dt: f64,
    t_sample: f64,
    seed: u64,
    opts: StationaryOptions,
) -> Result<EmpiricalLaw> {
    if !(t_sample > 0.0) {
        return Err(Error::InvalidArgument(format!("t_sample must be > 0, got {t_sample}")));
    }
    if opts.thin == 0 {
        return Err(Error::InvalidArgument("thin must be >= 1".into()));
    }
    let burn_in = opts.burn_in.unwrap_or(DEFAULT_BURN_FRACTION * t_sample);
    if !(burn_in >= 0.0) {
        return Err(Error::InvalidArgument(format!("burn-in must be >= 0, got {burn_in}")));
    }
    let stepper = Stepper::new(*params, dt, seed, 0)?;
    let n_burn = (burn_in / dt).round() as u64;
    let n_sample = (t_sample / dt).round() as u64;
    let mut p = start;
    let mut samples = Vec::with_capacity((n_sample as usize) / opts.thin + 1);
    for k in 0..n_burn + n_sample {
        p = stepper.advance(p, k);
        if escaped(p) {
            return Err(Error::Escaped { step: k as usize + 1 });
        }
        if k >= n_burn && (k - n_burn).is_multiple_of(opts.thin as u64) {
            samples.push(p);
        }
    }
    let coords = std::array::from_fn(|k| {
        let v: Vec<f64> = samples.iter().map(|q| q.to_array()[k]).collect();
        coordinate_law(&v, opts.bins)
    });
    Ok(EmpiricalLaw {
        coords,
        n_samples: samples.len(),
        burn_in,
        dt,
        thin: opts.thin,
        samples,
    })
}

/// Kolmogorov–Smirnov distance between the samples and N(mean, variance).
pub fn ks_distance_normal(samples: &[f64], mean: f64, variance: f64) -> Result<f64> {
    let normal = Normal::new(mean, variance.sqrt())
        .map_err(|e| Error::InvalidArgument(format!("bad normal reference: {e}")))?;
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max))
}

/// Total-variation distance between the histograms of two samples on a shared grid.
pub fn tv_distance(a: &[f64], b: &[f64], bins: usize) -> f64 {
    let lo = a.iter().chain(b).copied().fold(f64::INFINITY, f64::min);
    let hi = a.iter().chain(b).copied().fold(f64::NEG_INFINITY, f64::max);
    let ha = Histogram::build(a, lo, hi, bins);
    let hb = Histogram::build(b, lo, hi, bins);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    0.5 * ha
        .counts
        .iter()
        .zip(&hb.counts)
        .map(|(&x, &y)| (x as f64 / na - y as f64 / nb).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_counts_sum_to_samples() {
        let v: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin()).collect();
        let h = Histogram::build(&v, -1.0, 1.0, 17);
        assert_eq!(h.total(), 1000);
        assert_eq!(h.edges.len(), 18);
    }

    #[test]
    fn constant_samples_collapse_to_one_bin() {
        let law = coordinate_law(&[28.0; 10], 5);
        assert!(law.constant);
        assert_eq!(law.histogram.total(), 10);
        assert_eq!(law.variance, 0.0);
    }

    #[test]
    fn ks_against_exact_quantiles_is_small() {
        let normal = Normal::new(0.0, 1.0).unwrap();
        let n = 2000;
        let v: Vec<f64> = (0..n).map(|i| normal.inverse_cdf((i as f64 + 0.5) / n as f64)).collect();
        let d = ks_distance_normal(&v, 0.0, 1.0).unwrap();
        // statrs inverts the CDF to about 1e-10.
        assert!(d <= 0.5 / n as f64 + 1e-9, "{d}");
        assert!(ks_distance_normal(&v, 1.0, 1.0).unwrap() > 0.3);
    }

    #[test]
    fn degenerate_subspace_is_bitwise_constant() {
        let params = ModelParams::new(10.0, 28.0, 0.0, [1.0, 0.0, 0.0]).unwrap();
        let law = estimate_stationary(
            &params,
            Point3::new(5.0, 0.0, 28.0),
            1e-3,
            20.0,
            5,
            StationaryOptions::default(),
        )
        .unwrap();
        assert!(law.coords[1].constant && law.coords[2].constant);
        assert!(law.samples.iter().all(|p| p.y.to_bits() == 0 && p.z == 28.0));
        assert!(!law.coords[0].constant);
        assert!((law.burn_in - 4.0).abs() < 1e-12);
    }

    #[test]
    fn escape_is_an_error() {
        let params = ModelParams::new(10.0, 28.0, -5.0, [1.0, 0.0, 0.0]).unwrap();
        let e = estimate_stationary(&params, Point3::new(0.0, 0.0, 1e6), 0.5, 1e4, 0, StationaryOptions::default());
        assert!(matches!(e, Err(Error::Escaped { .. })));
    }
}
