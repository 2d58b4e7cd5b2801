//! First-passage times into a target set, censored at a horizon.

use std::io::{self, Write};
use std::ops::Range;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelParams, Point3};
use crate::sde::{escaped, fmt17, Stepper};

/// Target sets for hitting times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Target {
    /// Closed ball |X| ≤ radius.
    Ball { radius: f64 },
    /// Cylinder {x² + y² ≤ r0, |z| ≤ r3}.
    Cylinder { r0: f64, r3: f64 },
}

impl Target {
    pub fn contains(&self, p: Point3) -> bool {
        match *self {
            Target::Ball { radius } => p.norm() <= radius,
            Target::Cylinder { r0, r3 } => p.x * p.x + p.y * p.y <= r0 && p.z.abs() <= r3,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Target::Ball { radius } => radius > 0.0,
            Target::Cylinder { r0, r3 } => r0 > 0.0 && r3 > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("target sizes must be > 0: {self:?}")))
        }
    }
}

/// Outcome of one trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HitSample {
    pub traj_id: u64,
    /// Hitting time, or `None` if censored or escaped.
    pub time: Option<f64>,
    pub escaped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingTimeStats {
    pub start: Point3,
    pub target: Target,
    pub dt: f64,
    pub censored_at: f64,
    pub n_traj: usize,
    pub n_hit: usize,
    pub n_escaped: usize,
    /// Hitting times of the trajectories that hit, in trajectory order.
    pub hit_times: Vec<f64>,
    /// Mean over hits only; `None` when nothing hit.
    pub mean: Option<f64>,
    /// Mean and standard error of min(ξ, T).
    pub censored_mean: f64,
    pub censored_stderr: f64,
    pub survival_fraction: f64,
}

impl HittingTimeStats {
    /// Aggregates per-trajectory samples (order-independent up to sorting by id).
    pub fn from_samples(start: Point3, target: Target, dt: f64, horizon: f64, samples: &[HitSample]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by_key(|s| s.traj_id);
        let n = sorted.len();
        let hit_times: Vec<f64> = sorted.iter().filter_map(|s| s.time).collect();
        let n_hit = hit_times.len();
        let n_escaped = sorted.iter().filter(|s| s.escaped).count();
        let censored: Vec<f64> = sorted.iter().map(|s| s.time.unwrap_or(horizon)).collect();
        let (censored_mean, censored_stderr) = mean_stderr(&censored);
        HittingTimeStats {
            start,
            target,
            dt,
            censored_at: horizon,
            n_traj: n,
            n_hit,
            n_escaped,
            mean: (n_hit > 0).then(|| hit_times.iter().sum::<f64>() / n_hit as f64),
            hit_times,
            censored_mean,
            censored_stderr,
            survival_fraction: if n == 0 { 1.0 } else { 1.0 - n_hit as f64 / n as f64 },
        }
    }
}

pub(crate) fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs trajectories `ids` of the batch keyed by `seed`. Each trajectory's
/// noise depends only on (seed, id), so any partition of the ids across
/// calls or workers yields the same samples.
pub fn hitting_samples(
    params: &ModelParams,
    start: Point3,
    target: Target,
    dt: f64,
    horizon: f64,
    seed: u64,
    ids: Range<u64>,
) -> Result<Vec<HitSample>> {
    target.validate()?;
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be > 0, got {horizon}")));
    }
    if !start.is_finite() {
        return Err(Error::NonFinitePoint {
            x: start.x,
            y: start.y,
            z: start.z,
        });
    }
    Stepper::new(*params, dt, seed, 0)?;
    let n_steps = (horizon / dt).round() as u64;
    let ids: Vec<u64> = ids.collect();
    Ok(ids
        .par_iter()
        .map(|&id| {
            if target.contains(start) {
                return HitSample {
                    traj_id: id,
                    time: Some(0.0),
                    escaped: false,
                };
            }
            let stepper = Stepper::new(*params, dt, seed, id).expect("dt validated above");
            let mut p = start;
            for k in 0..n_steps {
                p = stepper.advance(p, k);
                if escaped(p) {
                    return HitSample {
                        traj_id: id,
                        time: None,
                        escaped: true,
                    };
                }
                if target.contains(p) {
                    return HitSample {
                        traj_id: id,
                        time: Some((k + 1) as f64 * dt),
                        escaped: false,
                    };
                }
            }
            HitSample {
                traj_id: id,
                time: None,
                escaped: false,
            }
        })
        .collect())
}

/// Hitting statistics for `n_traj` trajectories from `start`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_hitting(
    params: &ModelParams,
    start: Point3,
    target: Target,
    dt: f64,
    horizon: f64,
    n_traj: usize,
    seed: u64,
) -> Result<HittingTimeStats> {
    let samples = hitting_samples(params, start, target, dt, horizon, seed, 0..n_traj as u64)?;
    Ok(HittingTimeStats::from_samples(start, target, dt, horizon, &samples))
}

/// Writes `traj_id,hit,who_time` rows; `who_time` is the hitting time, or the
/// horizon for censored and escaped trajectories.
pub fn write_hitting_csv<W: Write>(mut w: W, samples: &[HitSample], horizon: f64) -> io::Result<()> {
    writeln!(w, "traj_id,hit,who_time")?;
    let mut sorted = samples.to_vec();
    sorted.sort_by_key(|s| s.traj_id);
    for s in sorted {
        writeln!(
            w,
            "{},{},{}",
            s.traj_id,
            u8::from(s.time.is_some()),
            fmt17(s.time.unwrap_or(horizon))
        )?;
    }
    Ok(())
}
