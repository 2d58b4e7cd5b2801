//! Sampled verification of the two-function criterion for infinite expected
//! return times when β < 0:
//!
//! - (p1) V₁ is unbounded, probed along (0, 0, S);
//! - (p2) V₂ > 0 outside a compact set;
//! - (p3) max_{|X|=S} V₁ / min_{|X|=S} V₂ decreases to 0 along S₀·2^k;
//! - (p4) LV₁ ≥ 0 and LV₂ ≤ 1 outside the radius R.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{check_drift_lower, check_drift_upper, model_param_map, CertificateReport};
use crate::error::{Error, Result};
use crate::fields::transience::{FieldV1, FieldV2, TransienceParams};
use crate::generator::ScalarField;
use crate::model::{ModelParams, Point3};
use crate::sampling::{direction, log_lerp, split_sign, RegionSpec, Shell};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WonhamOptions {
    pub samples_per_shell: usize,
    pub ladder_steps: u32,
    /// Quasi-random directions per sphere before local refinement.
    pub sphere_directions: usize,
    pub seed: u64,
}

impl Default for WonhamOptions {
    fn default() -> Self {
        WonhamOptions {
            samples_per_shell: 10_000,
            ladder_steps: 20,
            sphere_directions: 1000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereExtremum {
    pub radius: f64,
    pub value: f64,
    pub at: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub radius: f64,
    pub v1_max: SphereExtremum,
    pub v2_min: SphereExtremum,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WonhamReport {
    pub pass: bool,
    pub params: BTreeMap<String, f64>,
    pub constants: TransienceParams,
    /// Relative branch mismatch of (Ψ, Ψ', Ψ'') at B.
    pub gluing_mismatch: [f64; 3],
    pub gluing_pass: bool,
    /// V₁(0, 0, S) along the ladder.
    pub p1_axis_values: Vec<[f64; 2]>,
    pub p1_pass: bool,
    /// Sampled min of V₂ over spheres |X| = S.
    pub p2_sphere_minima: Vec<[f64; 2]>,
    pub p2_pass: bool,
    pub p3_start_radius: f64,
    pub p3_ladder: Vec<LadderRow>,
    /// Largest angle between the V₁ argmax and the +z axis.
    pub p3_argmax_angle: f64,
    pub p3_pass: bool,
    pub p4_lv1: CertificateReport,
    pub p4_lv2: CertificateReport,
    pub p4_pass: bool,
}

/// Fibonacci-lattice directions plus a ring refinement around +z.
fn sphere_directions(n: usize) -> Vec<Point3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut out: Vec<Point3> = (0..n)
        .map(|i| {
            let cz = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let s = (1.0 - cz * cz).sqrt();
            let phi = golden * i as f64;
            Point3::new(s * phi.cos(), s * phi.sin(), cz)
        })
        .collect();
    out.push(Point3::new(0.0, 0.0, 1.0));
    out.push(Point3::new(0.0, 0.0, -1.0));
    for k in 0..48 {
        let theta = 10f64.powf(-(k as f64) / 6.0);
        for j in 0..8 {
            let phi = j as f64 * PI / 4.0;
            out.push(Point3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()));
        }
    }
    out
}

fn to_angles(d: Point3) -> (f64, f64) {
    (d.z.clamp(-1.0, 1.0).acos(), d.y.atan2(d.x))
}

fn from_angles(theta: f64, phi: f64) -> Point3 {
    Point3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Maximizes `sign · f` over the sphere of radius `s` (sampling plus pattern search).
fn sphere_extremum<F: Fn(Point3) -> f64>(f: F, s: f64, sign: f64, dirs: &[Point3]) -> SphereExtremum {
    let mut scored: Vec<(f64, Point3)> = dirs.iter().map(|&d| (sign * f(d * s), d)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored[0];
    for &(v0, d0) in scored.iter().take(5) {
        let (mut th, mut ph) = to_angles(d0);
        let mut v = v0;
        let mut step = 0.05;
        for _ in 0..60 {
            let mut improved = false;
            for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let cand = (th + dt).clamp(0.0, PI);
                let val = sign * f(from_angles(cand, ph + dp) * s);
                if val > v {
                    v = val;
                    th = cand;
                    ph += dp;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if v > best.0 {
            best = (v, from_angles(th, ph));
        }
    }
    let at = best.1 * s;
    SphereExtremum {
        radius: s,
        value: f(at),
        at: at.to_array(),
    }
}

/// Region {|X| ≥ R} with shells concentrated on the paraboloid cap where V₁ ≠ 0.
fn cap_region(params: &ModelParams, tp: &TransienceParams, per_shell: usize, steps: u32) -> RegionSpec {
    let sigma = params.sigma();
    let a = tp.a;
    let r = tp.radius;
    let mut shells = Vec::new();
    for k in 0..=steps {
        let lo = (r * 2f64.powi(k as i32)).max(a / (2.0 * sigma) * 1.01);
        let hi = 2.0 * r * 2f64.powi(k as i32);
        if hi <= lo {
            continue;
        }
        shells.push(Shell::new(format!("cap k={k}"), move |u| {
            let z = log_lerp(u[0], lo, hi);
            let room = 2.0 * sigma * z - a;
            let zeta = log_lerp(u[1], 1e-9 * room.max(1e-300), room);
            let (sx, _) = split_sign(u[3]);
            let (sy, vy) = split_sign(u[2]);
            let x = sx * (room - zeta).max(0.0).sqrt();
            Point3::new(x, sy * log_lerp(vy, 1e-3, 4.0 * z), z)
        }));
        shells.push(Shell::spherical(format!("sphere k={k}"), lo.max(r), hi));
    }
    RegionSpec::new(
        "|X| >= R (paraboloid cap focus)",
        move |p: Point3| p.norm() >= r,
        shells,
        per_shell,
    )
}

fn sphere_region(r: f64, per_shell: usize, steps: u32) -> RegionSpec {
    let mut shells: Vec<Shell> = (0..=steps)
        .map(|k| {
            let lo = r * 2f64.powi(k as i32);
            Shell::spherical(format!("sphere k={k}"), lo, 2.0 * lo)
        })
        .collect();
    // Uniform-in-volume near the inner radius, where the bound is tightest.
    shells.push(Shell::new("inner band", move |u| {
        let rad = r + 3.0 * r * u[0];
        direction(u[1], u[2]) * rad
    }));
    RegionSpec::new("|X| >= R", move |p: Point3| p.norm() >= r, shells, per_shell)
}

pub fn check_wonham_hypotheses(
    params: &ModelParams,
    tp: &TransienceParams,
    opts: WonhamOptions,
) -> Result<WonhamReport> {
    if !(params.beta() < 0.0) {
        return Err(Error::InvalidParams(format!(
            "transience check needs beta < 0, got {}",
            params.beta()
        )));
    }
    let v1 = FieldV1::new(params, *tp);
    let v2 = FieldV2::new(params, tp.k, tp.kappa0);

    let gluing_mismatch = tp.gluing_mismatch();
    let gluing_pass = gluing_mismatch.iter().all(|&e| e < 1e-8);

    let steps = opts.ladder_steps as i32;
    let pole = |s: f64| v1.value(Point3::new(0.0, 0.0, s));
    let pole2 = |s: f64| v2.value(Point3::new(0.0, 0.0, s));

    // The ratio is only eventually monotone; start where V₁ sits on its
    // double-log branch and the pole ratio decreases along the whole ladder.
    let mut s0 = tp.radius;
    for _ in 0..200 {
        let on_log_branch = tp.lambda * (2.0 * params.sigma() * s0 - tp.a) > tp.b;
        let decreasing = (0..=steps).all(|k| {
            let s = s0 * 2f64.powi(k);
            pole(2.0 * s) / pole2(2.0 * s) < pole(s) / pole2(s)
        });
        if on_log_branch && decreasing {
            break;
        }
        s0 *= 2.0;
    }
    let radii: Vec<f64> = (0..=steps).map(|k| s0 * 2f64.powi(k)).collect();

    let p1_axis_values: Vec<[f64; 2]> = radii.iter().map(|&s| [s, pole(s)]).collect();
    let p1_pass = p1_axis_values.windows(2).all(|w| w[1][1] > w[0][1]) && p1_axis_values[0][1] > 0.0;

    let dirs = sphere_directions(opts.sphere_directions);
    let s_min = 2.0 * (params.sigma() + params.rho()) + 10.0;
    let mut p2_radii = vec![s_min];
    p2_radii.extend((0..=steps).map(|k| s_min * 2f64.powi(k)).skip(1));
    let p2_sphere_minima: Vec<[f64; 2]> = p2_radii
        .iter()
        .map(|&s| [s, sphere_extremum(|p| v2.value(p), s, -1.0, &dirs).value])
        .collect();
    let p2_pass = p2_sphere_minima.iter().all(|m| m[1] > 0.0);

    let p3_ladder: Vec<LadderRow> = radii
        .iter()
        .map(|&s| {
            let v1_max = sphere_extremum(|p| v1.value(p), s, 1.0, &dirs);
            let v2_min = sphere_extremum(|p| v2.value(p), s, -1.0, &dirs);
            let ratio = v1_max.value / v2_min.value;
            LadderRow {
                radius: s,
                v1_max,
                v2_min,
                ratio,
            }
        })
        .collect();
    let p3_argmax_angle = p3_ladder
        .iter()
        .map(|r| {
            let p = Point3::from_array(r.v1_max.at);
            (p.z / p.norm()).clamp(-1.0, 1.0).acos()
        })
        .fold(0.0, f64::max);
    let ratios: Vec<f64> = p3_ladder.iter().map(|r| r.ratio).collect();
    let p3_pass = ratios.windows(2).all(|w| w[1] < w[0])
        && ratios.last().copied().unwrap_or(f64::NAN) < ratios[0]
        && ratios.iter().all(|r| r.is_finite() && *r > 0.0)
        && p3_argmax_angle < 0.05;

    let cap = cap_region(params, tp, opts.samples_per_shell, opts.ladder_steps);
    let spheres = sphere_region(tp.radius, opts.samples_per_shell, opts.ladder_steps);
    let mut pmap = model_param_map(params);
    pmap.insert("R".into(), tp.radius);
    pmap.insert("K".into(), tp.k);
    let p4_lv1 = check_drift_lower(params, &v1, &cap, 0.0, opts.seed).with_params(pmap.clone());
    let p4_lv2 = check_drift_upper(params, &v2, &spheres, 1.0, opts.seed ^ 0x9E37).with_params(pmap.clone());
    let p4_pass = p4_lv1.pass && p4_lv2.pass;

    let mut params_out = pmap;
    for (k, v) in [
        ("A", tp.a),
        ("m", tp.m),
        ("B", tp.b),
        ("c0", tp.c0),
        ("c1", tp.c1),
        ("c2", tp.c2),
        ("lambda", tp.lambda),
        ("kappa0", tp.kappa0),
    ] {
        params_out.insert(k.into(), v);
    }

    Ok(WonhamReport {
        pass: gluing_pass && p1_pass && p2_pass && p3_pass && p4_pass,
        params: params_out,
        constants: *tp,
        gluing_mismatch,
        gluing_pass,
        p1_axis_values,
        p1_pass,
        p2_sphere_minima,
        p2_pass,
        p3_start_radius: s0,
        p3_ladder,
        p3_argmax_angle,
        p3_pass,
        p4_lv1,
        p4_lv2,
        p4_pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::transience::solve_transience_constants;

    #[test]
    fn hypotheses_hold_at_reduced_sampling() {
        let params = ModelParams::new(10.0, 28.0, -0.5, [1.0, 1.0, 1.0]).unwrap();
        let tp = solve_transience_constants(&params).unwrap();
        let opts = WonhamOptions {
            samples_per_shell: 500,
            ladder_steps: 8,
            sphere_directions: 200,
            seed: 4,
        };
        let r = check_wonham_hypotheses(&params, &tp, opts).unwrap();
        assert!(r.gluing_pass && r.p1_pass && r.p2_pass, "{r:#?}");
        assert!(r.p3_pass, "{:#?}", r.p3_ladder);
        assert!(r.p4_lv1.pass, "{:#?}", r.p4_lv1);
        assert!(r.p4_lv2.pass, "{:#?}", r.p4_lv2);
    }

    #[test]
    fn rejects_nonnegative_beta() {
        let params = ModelParams::new(10.0, 28.0, -0.5, [1.0, 1.0, 1.0]).unwrap();
        let tp = solve_transience_constants(&params).unwrap();
        let p0 = params.with_beta(0.0).unwrap();
        assert!(check_wonham_hypotheses(&p0, &tp, WonhamOptions::default()).is_err());
    }
}
