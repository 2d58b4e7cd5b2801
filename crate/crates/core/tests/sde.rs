use lorenz_stability::model::Point3;
use lorenz_stability::sde::{simulate, simulate_indexed, step_em};
use lorenz_stability::ModelParams;
use proptest::prelude::*;

fn classical() -> ModelParams {
    ModelParams::new(10.0, 28.0, 8.0 / 3.0, [1.0, 1.0, 1.0]).unwrap()
}

fn rk4(params: &ModelParams, mut p: Point3, dt: f64, n: usize) -> Point3 {
    let add = |p: Point3, k: Point3, s: f64| Point3::new(p.x + s * k.x, p.y + s * k.y, p.z + s * k.z);
    for _ in 0..n {
        let k1 = params.drift(p);
        let k2 = params.drift(add(p, k1, dt / 2.0));
        let k3 = params.drift(add(p, k2, dt / 2.0));
        let k4 = params.drift(add(p, k3, dt));
        p = Point3::new(
            p.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            p.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
            p.z + dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
        );
    }
    p
}

fn euler(params: &ModelParams, mut p: Point3, dt: f64, n: usize) -> Point3 {
    for _ in 0..n {
        p = step_em(params, p, dt, [0.0; 3]);
    }
    p
}

fn dist(a: Point3, b: Point3) -> f64 {
    Point3::new(a.x - b.x, a.y - b.y, a.z - b.z).norm()
}

#[test]
fn deterministic_endpoint_error_is_first_order() {
    let params = classical();
    let p0 = Point3::new(1.0, 1.0, 1.0);
    let reference = rk4(&params, p0, 1e-5, 100_000);
    let errors: Vec<f64> = [1000, 2000, 4000, 8000]
        .iter()
        .map(|&n| dist(euler(&params, p0, 1.0 / n as f64, n), reference))
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 1.0).abs() < 0.1, "observed order {order}, errors {errors:?}");
    }
}

#[test]
fn one_step_defect_is_quadratic() {
    let params = classical();
    let p0 = Point3::new(1.0, 1.0, 1.0);
    let defect = |dt: f64| dist(euler(&params, p0, dt, 1), euler(&params, p0, dt / 2.0, 2));
    for dt in [1e-2, 5e-3, 2.5e-3] {
        let ratio = defect(dt) / defect(dt / 2.0);
        assert!((ratio - 4.0).abs() < 0.2, "dt {dt}: ratio {ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn degenerate_subspace_is_exact(
        x0 in -20.0f64..20.0,
        sigma in 0.5f64..20.0,
        rho in 0.0f64..50.0,
        g1 in 0.1f64..3.0,
        seed in any::<u64>(),
    ) {
        let params = ModelParams::new(sigma, rho, 0.0, [g1, 0.0, 0.0]).unwrap();
        let tr = simulate(&params, Point3::new(x0, 0.0, rho), 1e-3, 2000, seed).unwrap();
        for p in &tr.states {
            prop_assert_eq!(p.y.to_bits(), 0f64.to_bits());
            prop_assert_eq!(p.z.to_bits(), rho.to_bits());
        }
    }

    #[test]
    fn simulate_is_pure(seed in any::<u64>(), traj in 0u64..1000) {
        let params = classical();
        let p0 = Point3::new(1.0, 2.0, 3.0);
        let a = simulate_indexed(&params, p0, 1e-3, 500, seed, traj).unwrap();
        let b = simulate_indexed(&params, p0, 1e-3, 500, seed, traj).unwrap();
        prop_assert_eq!(a, b);
    }
}
