//! One function per subcommand. Each computes everything in memory and
//! returns the files to write, so nothing reaches disk when a run errors.

use lorenz_stability::brackets::{build_hierarchy, lorenz_drift, lorenz_noise, spanning_test};
use lorenz_stability::certificate::transience::WonhamOptions;
use lorenz_stability::certificate::{
    check_wonham_hypotheses, search_recurrence_params, verify_recurrence_params, SearchBudget,
};
use lorenz_stability::fields::{field_by_name, solve_transience_constants, FieldContext, FieldH, FieldM};
use lorenz_stability::generator::rel_err;
use lorenz_stability::lab::{
    estimate_stationary, hitting_samples, ks_distance_normal, nonstationarity_drift_diagnostic, write_hitting_csv,
    HittingTimeStats, StationaryOptions,
};
use lorenz_stability::sampling::{lerp, QuasiSequence};
use lorenz_stability::sde::simulate_indexed;
use lorenz_stability::{apply_generator, apply_generator_fd, Error, ModelParams, Point3};
use serde::Serialize;

use crate::config::RunConfig;

pub struct Outcome {
    pub pass: bool,
    pub summary: String,
    pub files: Vec<(String, Vec<u8>)>,
}

#[derive(Debug)]
pub enum RunError {
    /// Exit code 2: the configuration cannot be run as given.
    Config(String),
    /// Exit code 1: the run itself failed.
    Failed(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_) | Error::InvalidArgument(_) | Error::Construction(_) => {
                RunError::Config(e.to_string())
            }
            _ => RunError::Failed(e.to_string()),
        }
    }
}

type RunResult = Result<Outcome, RunError>;

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a str,
    pass: bool,
    config: &'a RunConfig,
    result: T,
}

fn report<T: Serialize>(command: &str, pass: bool, cfg: &RunConfig, result: T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(&Report {
        command,
        pass,
        config: cfg,
        result,
    })
    .expect("reports serialize");
    out.push(b'\n');
    out
}

fn csv<F>(write: F) -> Result<Vec<u8>, RunError>
where
    F: FnOnce(&mut Vec<u8>) -> std::io::Result<()>,
{
    let mut buf = Vec::new();
    write(&mut buf).map_err(|e| RunError::Failed(e.to_string()))?;
    Ok(buf)
}

fn point(a: [f64; 3]) -> Point3 {
    Point3::from_array(a)
}

fn params(cfg: &RunConfig) -> Result<ModelParams, RunError> {
    cfg.model_params().map_err(RunError::Config)
}

pub fn simulate(cfg: &RunConfig) -> RunResult {
    let p = params(cfg)?;
    let s = cfg.simulate;
    let n_steps = (s.t / s.dt).round() as usize;
    let tr = simulate_indexed(&p, point(s.start), s.dt, n_steps, cfg.seed, s.trajectory)?;

    #[derive(Serialize)]
    struct Summary {
        n_steps: usize,
        n_states: usize,
        escaped_at: Option<usize>,
        final_state: [f64; 3],
    }
    let summary = Summary {
        n_steps,
        n_states: tr.len(),
        escaped_at: tr.escaped_at,
        final_state: tr.last().to_array(),
    };
    let pass = tr.escaped_at.is_none();
    let text = match tr.escaped_at {
        None => format!("simulated {n_steps} steps"),
        Some(k) => format!("trajectory escaped at step {k}"),
    };
    Ok(Outcome {
        pass,
        summary: text,
        files: vec![
            ("trajectory.csv".into(), csv(|w| tr.write_csv(w))?),
            ("simulate.json".into(), report("simulate", pass, cfg, summary)),
        ],
    })
}

#[derive(Serialize)]
struct FieldCheck {
    field: String,
    n_points: u64,
    max_rel_err: f64,
    worst_point: [f64; 3],
    n_errors: u64,
    pass: bool,
}

pub fn generator_check(cfg: &RunConfig) -> RunResult {
    let p = params(cfg)?;
    let g = &cfg.generator_check;
    let mut ctx = FieldContext::new(p);
    ctx.recurrence = g.recurrence;
    let q = QuasiSequence::new(cfg.seed);
    let w = g.half_width;
    let points: Vec<Point3> = (0..g.n_points)
        .map(|i| {
            let u = q.point(i);
            Point3::new(lerp(u[0], -w, w), lerp(u[1], -w, w), lerp(u[2], -w, w))
        })
        .collect();

    let mut checks = Vec::new();
    for name in &g.fields {
        let f = field_by_name(name, &ctx)?;
        let mut worst = (0.0f64, [0.0; 3]);
        let mut n_errors = 0;
        for &x in &points {
            let ad = apply_generator(&p, f.as_ref(), x);
            let fd = apply_generator_fd(&p, |y| f.value(y), x, g.fd_step);
            match (ad, fd) {
                (Ok(a), Ok(b)) => {
                    let e = rel_err(a, b);
                    if !(e <= worst.0) {
                        worst = (e, x.to_array());
                    }
                }
                _ => n_errors += 1,
            }
        }
        checks.push(FieldCheck {
            field: name.clone(),
            n_points: g.n_points,
            max_rel_err: worst.0,
            worst_point: worst.1,
            n_errors,
            pass: n_errors == 0 && worst.0 < g.fd_tolerance,
        });
    }

    // Closed forms: LH = −2σx² − 2y² − 2βz² + 2β(σ+ρ)z + 2Σγ, LM = 2σ(x² − βz) − 2γ₁.
    let (s, r, b) = (p.sigma(), p.rho(), p.beta());
    let (mut lh_err, mut lm_err) = (0.0f64, 0.0f64);
    for &x in &points {
        let lh = apply_generator(&p, &FieldH::new(&p), x)?;
        let lm = apply_generator(&p, &FieldM::new(&p), x)?;
        let lh_exact =
            -2.0 * s * x.x * x.x - 2.0 * x.y * x.y - 2.0 * b * x.z * x.z + 2.0 * b * (s + r) * x.z + 2.0 * p.gamma_sum();
        let lm_exact = 2.0 * s * (x.x * x.x - b * x.z) - 2.0 * p.gamma()[0];
        lh_err = lh_err.max(rel_err(lh, lh_exact));
        lm_err = lm_err.max(rel_err(lm, lm_exact));
    }

    #[derive(Serialize)]
    struct Result<'a> {
        fields: &'a [FieldCheck],
        max_rel_err: f64,
        energy_oracle_rel_err: f64,
        m_oracle_rel_err: f64,
    }
    let max_rel_err = checks.iter().map(|c| c.max_rel_err).fold(0.0, f64::max);
    let pass = checks.iter().all(|c| c.pass) && lh_err < g.oracle_tolerance && lm_err < g.oracle_tolerance;
    let result = Result {
        fields: &checks,
        max_rel_err,
        energy_oracle_rel_err: lh_err,
        m_oracle_rel_err: lm_err,
    };
    Ok(Outcome {
        pass,
        summary: format!(
            "autodiff vs FD max rel err {max_rel_err:.2e}; LH oracle {lh_err:.2e}; LM oracle {lm_err:.2e}"
        ),
        files: vec![("generator_check.json".into(), report("generator-check", pass, cfg, result))],
    })
}

pub fn certificate_recurrence(cfg: &RunConfig) -> RunResult {
    let p = params(cfg)?;
    let c = &cfg.certificate.recurrence;
    let budget = SearchBudget {
        max_doublings: c.max_doublings,
        search_samples: c.search_samples,
        final_samples: c.final_samples,
        ladder_steps: c.ladder_steps,
        seed: cfg.seed,
    };
    let cert = match c.params {
        Some(rp) => verify_recurrence_params(&p, rp, budget)?,
        None => search_recurrence_params(&p, budget)?,
    };
    let summary = format!(
        "{}; c = {}, sup MV outside K = {:.4}, min V = {:.4}",
        cert.status, cert.c, cert.sup_outside_k, cert.min_v
    );
    Ok(Outcome {
        pass: cert.pass,
        summary,
        files: vec![(
            "recurrence_certificate.json".into(),
            report("certificate recurrence", cert.pass, cfg, &cert),
        )],
    })
}

pub fn certificate_transience(cfg: &RunConfig) -> RunResult {
    let p = params(cfg)?;
    let t = cfg.certificate.transience;
    let tp = solve_transience_constants(&p)?;
    let opts = WonhamOptions {
        samples_per_shell: t.samples_per_shell,
        ladder_steps: t.ladder_steps,
        sphere_directions: t.sphere_directions,
        seed: cfg.seed,
    };
    let r = check_wonham_hypotheses(&p, &tp, opts)?;
    let summary = format!(
        "gluing {} p1 {} p2 {} p3 {} p4 {}",
        r.gluing_pass, r.p1_pass, r.p2_pass, r.p3_pass, r.p4_pass
    );
    Ok(Outcome {
        pass: r.pass,
        summary,
        files: vec![(
            "transience_report.json".into(),
            report("certificate transience", r.pass, cfg, &r),
        )],
    })
}

pub fn brackets(cfg: &RunConfig) -> RunResult {
    let p = params(cfg)?;
    let h = build_hierarchy(&lorenz_drift(&p), &lorenz_noise(&p), cfg.brackets.max_level)?;
    let span = spanning_test(&h)?;

    #[derive(Serialize)]
    struct Result<T, U> {
        span: T,
        levels: U,
    }
    let pass = span.spans;
    let summary = format!(
        "rank {} after {} levels; basis: {}",
        span.rank,
        h.levels.len(),
        span.basis.iter().map(|b| b.label.as_str()).collect::<Vec<_>>().join("; ")
    );
    let result = Result {
        span: &span,
        levels: h.report(),
    };
    Ok(Outcome {
        pass,
        summary,
        files: vec![("brackets.json".into(), report("brackets", pass, cfg, result))],
    })
}

pub fn hitting_time(cfg: &RunConfig) -> RunResult {
    let p = params(cfg)?;
    let h = cfg.hitting_time;
    let start = point(h.start);
    let samples = hitting_samples(&p, start, h.target, h.dt, h.horizon, cfg.seed, 0..h.n_traj)?;
    let stats = HittingTimeStats::from_samples(start, h.target, h.dt, h.horizon, &samples);
    let within = h
        .mean_bound
        .map(|b| stats.censored_mean <= b + 3.0 * stats.censored_stderr);

    #[derive(Serialize)]
    struct Result<'a> {
        stats: &'a HittingTimeStats,
        mean_bound: Option<f64>,
        within_bound: Option<bool>,
    }
    let pass = within.unwrap_or(true);
    let summary = format!(
        "{} of {} hit; censored mean {:.4} ± {:.4}; survival {:.4}",
        stats.n_hit, stats.n_traj, stats.censored_mean, stats.censored_stderr, stats.survival_fraction
    );
    let result = Result {
        stats: &stats,
        mean_bound: h.mean_bound,
        within_bound: within,
    };
    Ok(Outcome {
        pass,
        summary,
        files: vec![
            ("hitting_samples.csv".into(), csv(|w| write_hitting_csv(w, &samples, h.horizon))?),
            ("hitting_stats.json".into(), report("hitting-time", pass, cfg, result)),
        ],
    })
}

pub fn stationary(cfg: &RunConfig) -> RunResult {
    let p = params(cfg)?;
    let s = cfg.stationary;
    let opts = StationaryOptions {
        burn_in: s.burn_in,
        thin: s.thin,
        bins: s.bins,
    };
    let law = estimate_stationary(&p, point(s.start), s.dt, s.t_sample, cfg.seed, opts)?;

    #[derive(Serialize)]
    struct Ks {
        coordinate: usize,
        distance: f64,
        max_ks: f64,
        pass: bool,
    }
    let ks = match s.gaussian_check {
        Some(g) => {
            let d = ks_distance_normal(&law.coordinate(g.coordinate), g.mean, g.variance)?;
            Some(Ks {
                coordinate: g.coordinate,
                distance: d,
                max_ks: g.max_ks,
                pass: d < g.max_ks,
            })
        }
        None => None,
    };

    #[derive(Serialize)]
    struct Result<'a> {
        law: &'a lorenz_stability::lab::EmpiricalLaw,
        gaussian_check: Option<Ks>,
    }
    let pass = ks.as_ref().is_none_or(|k| k.pass);
    let mut summary = format!("{} samples", law.n_samples);
    for (k, c) in law.coords.iter().enumerate() {
        summary += &format!("; {}: mean {:.4} var {:.4}", ["x", "y", "z"][k], c.mean, c.variance);
    }
    if let Some(k) = &ks {
        summary += &format!("; KS {:.4}", k.distance);
    }
    let mut files = Vec::new();
    for (k, c) in law.coords.iter().enumerate() {
        files.push((format!("histogram_{}.csv", ["x", "y", "z"][k]), csv(|w| c.histogram.write_csv(w))?));
    }
    files.push((
        "stationary.json".into(),
        report("stationary", pass, cfg, Result { law: &law, gaussian_check: ks }),
    ));
    Ok(Outcome { pass, summary, files })
}

pub fn diagnose_degenerate(cfg: &RunConfig) -> RunResult {
    let p = params(cfg)?;
    let d = cfg.diagnose_degenerate;
    let diag = nonstationarity_drift_diagnostic(
        &p,
        point(d.start),
        d.dt,
        d.horizon,
        d.n_traj as usize,
        d.n_out,
        cfg.seed,
    )?;
    let expected = 2.0 * p.gamma()[2];
    // With γ₃ = 0 the z² slope has no nonzero reference, so only M is judged.
    let slope_ok = (expected > 0.0).then(|| (diag.slope_z2 - expected).abs() <= d.slope_tolerance * expected);
    let drop = diag.max_drop_z_score();
    let pass = slope_ok.unwrap_or(true) && drop <= d.max_drop_z;

    #[derive(Serialize)]
    struct Result<'a> {
        diagnostic: &'a lorenz_stability::lab::DriftDiagnostic,
        expected_slope_z2: f64,
        slope_ok: Option<bool>,
        max_drop_z_score: f64,
    }
    let summary = format!(
        "slope of mean z² {:.4} (2γ₃ = {expected}); largest drop of mean M {drop:.2} SE",
        diag.slope_z2
    );
    let result = Result {
        diagnostic: &diag,
        expected_slope_z2: expected,
        slope_ok,
        max_drop_z_score: drop,
    };
    Ok(Outcome {
        pass,
        summary,
        files: vec![
            ("diagnostic.csv".into(), csv(|w| diag.write_csv(w))?),
            ("diagnostic.json".into(), report("diagnose-degenerate", pass, cfg, result)),
        ],
    })
}
