//! Euler–Maruyama integration with counter-based noise.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ModelParams, Point3};
use crate::rng::NoiseStream;

/// States with Euclidean norm above this (or non-finite) count as escaped.
pub const ESCAPE_RADIUS: f64 = 1e12;

/// One Euler–Maruyama step; `noise` must already be scaled by √dt.
#[inline]
pub fn step_em(params: &ModelParams, p: Point3, dt: f64, noise: [f64; 3]) -> Point3 {
    let d = params.drift(p);
    let amp = params.diffusion_row();
    Point3::new(
        p.x + d.x * dt + amp.x * noise[0],
        p.y + d.y * dt + amp.y * noise[1],
        p.z + d.z * dt + amp.z * noise[2],
    )
}

#[inline]
pub fn escaped(p: Point3) -> bool {
    !p.is_finite() || p.norm() > ESCAPE_RADIUS
}

/// Stepper bound to one trajectory's noise stream.
#[derive(Debug, Clone, Copy)]
pub struct Stepper {
    params: ModelParams,
    dt: f64,
    sqrt_dt: f64,
    stream: NoiseStream,
}

impl Stepper {
    pub fn new(params: ModelParams, dt: f64, seed: u64, trajectory: u64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt must be > 0, got {dt}")));
        }
        Ok(Stepper {
            params,
            dt,
            sqrt_dt: dt.sqrt(),
            stream: NoiseStream::new(seed, trajectory),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `p` across step index `k` (from time k·dt to (k+1)·dt).
    #[inline]
    pub fn advance(&self, p: Point3, k: u64) -> Point3 {
        let n = self.stream.normals3(k);
        let s = self.sqrt_dt;
        step_em(&self.params, p, self.dt, [n[0] * s, n[1] * s, n[2] * s])
    }
}

/// A simulated path sampled on the uniform grid `t_k = k·step`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Point3>,
    pub seed: u64,
    pub step: f64,
    /// Step index at which the state left the numeric range, if it did.
    pub escaped_at: Option<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> Point3 {
        *self.states.last().expect("trajectory always holds the initial state")
    }

    /// Writes `t,x,y,z` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,x,y,z")?;
        for (t, p) in self.times.iter().zip(&self.states) {
            writeln!(w, "{},{},{},{}", fmt17(*t), fmt17(p.x), fmt17(p.y), fmt17(p.z))?;
        }
        Ok(())
    }
}

/// Formats a float with 17 significant decimal digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Simulates trajectory 0 of the batch keyed by `seed`.
pub fn simulate(
    params: &ModelParams,
    p0: Point3,
    dt: f64,
    n_steps: usize,
    seed: u64,
) -> Result<Trajectory> {
    simulate_indexed(params, p0, dt, n_steps, seed, 0)
}

/// Simulates trajectory `trajectory` of the batch keyed by `seed`.
pub fn simulate_indexed(
    params: &ModelParams,
    p0: Point3,
    dt: f64,
    n_steps: usize,
    seed: u64,
    trajectory: u64,
) -> Result<Trajectory> {
    if !p0.is_finite() {
        return Err(Error::NonFinitePoint {
            x: p0.x,
            y: p0.y,
            z: p0.z,
        });
    }
    let stepper = Stepper::new(*params, dt, seed, trajectory)?;
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    states.push(p0);
    let mut p = p0;
    let mut escaped_at = None;
    for k in 0..n_steps {
        let next = stepper.advance(p, k as u64);
        if escaped(next) {
            escaped_at = Some(k + 1);
            break;
        }
        p = next;
        times.push((k + 1) as f64 * dt);
        states.push(p);
    }
    Ok(Trajectory {
        times,
        states,
        seed,
        step: dt,
        escaped_at,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classical() -> ModelParams {
        ModelParams::classical([1.0, 1.0, 1.0]).unwrap()
    }

    #[test]
    fn zero_noise_keeps_origin_fixed() {
        let p = step_em(&classical(), Point3::ORIGIN, 0.01, [0.0; 3]);
        assert_eq!(p, Point3::ORIGIN);
    }

    #[test]
    fn zero_noise_single_step_from_unit_point() {
        let p = step_em(&classical(), Point3::new(1.0, 1.0, 1.0), 0.01, [0.0; 3]);
        assert_eq!(p.x, 1.0);
        assert!((p.y - 1.26).abs() < 1e-14);
        assert!((p.z - (1.0 - 0.05 / 3.0)).abs() < 1e-14);
    }

    #[test]
    fn zero_steps_returns_initial_state() {
        let tr = simulate(&classical(), Point3::new(1.0, 2.0, 3.0), 0.01, 0, 9).unwrap();
        assert_eq!(tr.states, vec![Point3::new(1.0, 2.0, 3.0)]);
        assert_eq!(tr.times, vec![0.0]);
        assert!(tr.escaped_at.is_none());
    }

    #[test]
    fn same_seed_same_path() {
        let a = simulate(&classical(), Point3::new(1.0, 1.0, 1.0), 1e-3, 500, 11).unwrap();
        let b = simulate(&classical(), Point3::new(1.0, 1.0, 1.0), 1e-3, 500, 11).unwrap();
        let c = simulate(&classical(), Point3::new(1.0, 1.0, 1.0), 1e-3, 500, 12).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.states, c.states);
    }

    #[test]
    fn rejects_bad_step_and_start() {
        assert!(simulate(&classical(), Point3::ORIGIN, 0.0, 3, 0).is_err());
        assert!(simulate(&classical(), Point3::ORIGIN, -1.0, 3, 0).is_err());
        assert!(simulate(&classical(), Point3::new(f64::NAN, 0.0, 0.0), 0.1, 3, 0).is_err());
    }

    #[test]
    fn escape_truncates_and_flags() {
        let params = ModelParams::new(10.0, 28.0, -5.0, [1.0, 0.0, 0.0]).unwrap();
        // z grows like e^{5t}; with a coarse step it leaves the numeric range quickly.
        let tr = simulate(&params, Point3::new(0.0, 0.0, 1e6), 0.5, 10_000, 3).unwrap();
        let k = tr.escaped_at.expect("should escape");
        assert_eq!(tr.len(), k);
        assert!(tr.states.iter().all(|p| !escaped(*p)));
    }

    #[test]
    fn times_are_uniform() {
        let tr = simulate(&classical(), Point3::new(1.0, 1.0, 1.0), 0.25, 8, 0).unwrap();
        for (k, t) in tr.times.iter().enumerate() {
            assert_eq!(*t, k as f64 * 0.25);
        }
    }

    #[test]
    fn csv_header_and_precision() {
        let tr = simulate(&classical(), Point3::new(0.1, 0.2, 0.3), 0.5, 1, 0).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("t,x,y,z"));
        let first: Vec<f64> = lines
            .next()
            .unwrap()
            .split(',')
            .map(|v| v.parse().unwrap())
            .collect();
        assert_eq!(first, vec![0.0, 0.1, 0.2, 0.3]);
        assert_eq!(s.lines().count(), 3);
    }
}
