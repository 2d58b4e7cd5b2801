use lorenz_stability::certificate::recurrence::recurrence_regions;
use lorenz_stability::fields::cutoff::{chi, chi_tilde};
use lorenz_stability::fields::{field_by_name, solve_transience_constants, FieldContext, FieldHTilde, FieldV, RecurrenceParams, Truncation};
use lorenz_stability::generator::{central_differences, one_sided_second_derivatives, DEFAULT_FD_STEP};
use lorenz_stability::sampling::{lerp, QuasiSequence};
use lorenz_stability::{Jet2, ModelParams, Point3, ScalarField};

fn rp() -> RecurrenceParams {
    RecurrenceParams {
        r0: 4.0,
        r1: 2.0,
        r2: 8.0,
        r3: 16.0,
        kappa0: 500.0,
        kappa1: 10.0,
        kappa2: 32.0,
    }
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn assert_jet_matches_fd(f: &dyn ScalarField, points: &[Point3]) {
    for &p in points {
        let j = f.jet(Jet2::lift(p.to_array()));
        // One Richardson step removes the h² term, which matters for ψ₁ at small |x|.
        let (g1, d1) = central_differences(&|q| f.value(q), p, DEFAULT_FD_STEP);
        let (g2, d2) = central_differences(&|q| f.value(q), p, DEFAULT_FD_STEP / 2.0);
        let grad: [f64; 3] = std::array::from_fn(|i| (4.0 * g2[i] - g1[i]) / 3.0);
        let diag2: [f64; 3] = std::array::from_fn(|i| (4.0 * d2[i] - d1[i]) / 3.0);
        for i in 0..3 {
            assert!(close(j.grad[i], grad[i], 1e-5), "{} grad[{i}] at {p:?}: {} vs {}", f.label(), j.grad[i], grad[i]);
            assert!(close(j.diag2[i], diag2[i], 1e-5), "{} d2[{i}] at {p:?}: {} vs {}", f.label(), j.diag2[i], diag2[i]);
        }
    }
}

/// 200 points in a box, keeping |x|, |z| ≥ `gap` so singular factors stay finite.
fn box_points(seed: u64, half: [f64; 3], gap: f64) -> Vec<Point3> {
    let q = QuasiSequence::new(seed);
    (0..200)
        .map(|i| {
            let u = q.point(i);
            let c = |v: f64, h: f64| {
                let s = lerp(v, -h, h);
                if s.abs() < gap { gap.copysign(s) } else { s }
            };
            Point3::new(c(u[0], half[0]), lerp(u[1], -half[1], half[1]), c(u[2], half[2]))
        })
        .collect()
}

#[test]
fn every_named_field_jet_matches_finite_differences() {
    let reduced = ModelParams::new(10.0, 0.0, 0.0, [1.0, 0.5, 0.5]).unwrap();
    let mut ctx = FieldContext::new(reduced);
    ctx.recurrence = Some(rp());
    for name in ["H", "H_tilde", "M", "psi1", "psi2", "V", "F_N:5"] {
        let f = field_by_name(name, &ctx).unwrap();
        assert_jet_matches_fd(f.as_ref(), &box_points(1, [6.0, 6.0, 60.0], 0.5));
    }

    let negative = ModelParams::new(10.0, 28.0, -0.5, [1.0, 1.0, 1.0]).unwrap();
    let tp = solve_transience_constants(&negative).unwrap();
    let mut ctx = FieldContext::new(negative);
    ctx.transience = Some(tp);
    // Points straddling the paraboloid 2σz − x² = A, where V₁ is non-trivial.
    // Central differences lose an order where Ψ''' jumps, so stencils keep
    // clear of the branch joints ζ = 0 and ζ = B (checked one-sidedly elsewhere).
    let q = QuasiSequence::new(2);
    let near: Vec<Point3> = (0..400)
        .map(|i| {
            let u = q.point(i);
            let x = lerp(u[0], -5.0, 5.0);
            (x, lerp(u[1], -5.0, 5.0), lerp(u[2], -1.0, 8.0))
        })
        .filter(|&(_, _, zeta)| zeta.abs() > 0.1 && (zeta - tp.b).abs() > 0.1)
        .take(200)
        .map(|(x, y, zeta)| Point3::new(x, y, (zeta / tp.lambda + x * x + tp.a) / 20.0))
        .collect();
    assert_eq!(near.len(), 200);
    for name in ["V1", "V2"] {
        let f = field_by_name(name, &ctx).unwrap();
        assert_jet_matches_fd(f.as_ref(), &near);
    }
}

fn joint_mismatch(g: impl Fn(f64) -> f64, t0: f64) -> f64 {
    let (l, r) = one_sided_second_derivatives(g, t0, 1e-4);
    (l - r).abs() / l.abs().max(r.abs()).max(1.0)
}

#[test]
fn scalar_profiles_are_c2_at_every_joint() {
    for t0 in [-2.0, -1.0, 1.0, 2.0] {
        assert!(joint_mismatch(chi::<f64>, t0) < 1e-5, "chi at {t0}");
    }
    for t0 in [-1.0, -0.5, 0.5, 1.0] {
        assert!(joint_mismatch(chi_tilde::<f64>, t0) < 1e-5, "chi_tilde at {t0}");
    }
    for n in [1, 3, 10] {
        let f = Truncation::new(n).unwrap();
        let n = n as f64;
        for t0 in [-(n + 2.0), -n, n, n + 2.0] {
            assert!(joint_mismatch(|x| f.value(x), t0) < 1e-5, "F_{n} at {t0}");
        }
    }
}

#[test]
fn v_is_asymptotic_to_the_energy_on_the_axis() {
    let reduced = ModelParams::new(10.0, 0.0, 0.0, [1.0, 0.0, 0.0]).unwrap();
    let v = FieldV::new(&reduced, rp()).unwrap();
    let ht = FieldHTilde::new(&reduced, rp().kappa0);
    let mut last = f64::INFINITY;
    for k in 0..20 {
        let p = Point3::new(0.0, 0.0, rp().r3 * 2f64.powi(k));
        let gap = (v.value(p) / ht.value(p) - 1.0).abs();
        assert!(gap <= last, "ratio gap grew at k = {k}");
        last = gap;
    }
    assert!(last < 1e-9, "final gap {last}");
}

#[test]
fn cylinder_beyond_r3_lies_in_r1_or_r2() {
    let rp = rp();
    let regions = recurrence_regions(&rp, 10, 4);
    let q = QuasiSequence::new(5);
    for i in 0..10_000 {
        let u = q.point(i);
        let rr = rp.r0 * u[0];
        let phi = 2.0 * std::f64::consts::PI * u[1];
        let z = if u[3] < 0.5 { -1.0 } else { 1.0 } * rp.r3 * 2f64.powf(lerp(u[2], 0.0, 5.0));
        let p = Point3::new(rr.sqrt() * phi.cos(), rr.sqrt() * phi.sin(), z);
        assert!(regions.r1.contains(p) || regions.r2.contains(p), "{p:?} in neither R1 nor R2");
    }
}
