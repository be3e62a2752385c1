//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use laxtop::axioms::{check_scalar_suite, run_axiom_suite, IdentityReport, SamplePlan};
use laxtop::dynamics::{
    constraint_drift, drift_refinement, integrate, observed_orders, TrajectoryConfig,
};
use laxtop::lax::{
    check_rank_one_reduction, check_spin_rs, check_top, lax_residual, Comparison, PhaseState,
};
use laxtop::rmatrix::{calibrate_belavin, calibration, scalar_provider, BelavinRMatrix, RMatrix};
use laxtop::specfun::EllipticContext;
use num_complex::Complex64;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn eta() -> Complex64 {
    c(0.25, 0.15)
}

fn contexts() -> Vec<EllipticContext> {
    vec![
        EllipticContext::rational(),
        EllipticContext::trigonometric(),
        EllipticContext::elliptic(c(0.0, 1.0)).unwrap(),
    ]
}

fn belavin(n: usize) -> BelavinRMatrix {
    let ctx = EllipticContext::elliptic(c(0.0, 1.0)).unwrap();
    calibrate_belavin(ctx, n, &calibration::default_plan())
        .unwrap()
        .0
}

/// Points on small circles around z = 0, staying clear of the pole.
fn spectral_points(count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * (k as f64 + 0.3) / count as f64;
            c(0.18 + 0.05 * (k % 3) as f64, 0.0) * c(a.cos(), a.sin())
        })
        .collect()
}

type Criterion = (&'static str, Option<u64>, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn worst(reports: &[IdentityReport]) -> (bool, String) {
    let pass = reports.iter().all(|r| r.pass);
    let w = reports
        .iter()
        .max_by(|a, b| a.max_residual.total_cmp(&b.max_residual))
        .map(|r| format!("worst {} {:.2e}", r.identity, r.max_residual))
        .unwrap_or_default();
    let failing: Vec<&str> = reports
        .iter()
        .filter(|r| !r.pass)
        .map(|r| r.identity.as_str())
        .collect();
    if failing.is_empty() {
        (pass, w)
    } else {
        (pass, format!("{w}; failing {}", failing.join(",")))
    }
}

fn worst_cmp(cmps: &[Comparison]) -> f64 {
    cmps.iter().fold(0.0, |a, c| a.max(c.max_deviation))
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut out = f();
    let took = start.elapsed();
    out.detail = format!("{} ({:.2} s)", out.detail, took.as_secs_f64());
    if let Some(limit) = limit {
        if took > limit {
            out.pass = false;
            out.detail = format!("{}, over {} s limit", out.detail, limit.as_secs());
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let plan = SamplePlan::new(1, 1000);
    let mut pass = true;
    let mut parts = Vec::new();
    for ctx in contexts() {
        let reports = check_scalar_suite(&ctx, &plan, 1e-10);
        let (p, w) = worst(&reports);
        pass &= p && reports.iter().all(|r| r.samples == 1000);
        parts.push(format!("{}: {w}", ctx.regime()));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_2() -> Outcome {
    let plan = SamplePlan::new(2, 200);
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [2, 3] {
        let ctx = EllipticContext::elliptic(c(0.0, 1.0)).unwrap();
        match calibrate_belavin(ctx, n, &calibration::default_plan()) {
            Ok((p, _)) => {
                let reports = run_axiom_suite(&p, &plan, 1e-8);
                let (ok, w) = worst(&reports);
                pass &= ok && reports.len() == 13;
                parts.push(format!("n={n}: {} identities, {w}", reports.len()));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("n={n}: calibration failed: {e}"));
            }
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_3() -> Outcome {
    let zs = spectral_points(10);
    let mut dev: f64 = 0.0;
    let mut pass = true;
    for ctx in contexts() {
        let p = scalar_provider(ctx);
        for seed in 0..3 {
            let state = PhaseState::random(1, 3, eta(), seed).unwrap();
            let cmps = check_spin_rs(&p, &state, &zs, 1e-12).unwrap();
            pass &= cmps.iter().all(|c| c.pass);
            dev = dev.max(worst_cmp(&cmps));
        }
    }
    let rs = dev;
    let mut dev: f64 = 0.0;
    for n in [2, 3] {
        let p = belavin(n);
        for seed in 0..3 {
            let state = PhaseState::random(n, 1, eta(), seed).unwrap();
            let cmps = check_top(&p, &state, &zs, 1e-12).unwrap();
            pass &= cmps.iter().all(|c| c.pass);
            dev = dev.max(worst_cmp(&cmps));
        }
    }
    Outcome {
        pass,
        detail: format!("spin RS max dev {rs:.2e}, top max dev {dev:.2e}"),
    }
}

fn criterion_4() -> Outcome {
    let zs = spectral_points(10);
    let mut cases: Vec<(Box<dyn RMatrix>, PhaseState)> = vec![(
        Box::new(belavin(2)),
        PhaseState::random(2, 2, eta(), 1).unwrap(),
    )];
    for ctx in contexts() {
        cases.push((
            Box::new(scalar_provider(ctx)),
            PhaseState::random(1, 3, eta(), 1).unwrap(),
        ));
    }
    let (mut on, mut off_with, mut off_without) = (0.0_f64, 0.0_f64, f64::INFINITY);
    for (p, state) in &cases {
        let mut off = state.clone();
        for (i, v) in off.qdot.iter_mut().enumerate() {
            *v += c(0.3 * (i as f64 + 1.0), -0.2 * i as f64);
        }
        for &z in &zs {
            let r = lax_residual(p.as_ref(), state, z).unwrap();
            on = on.max(r.with_extra).max(r.without_extra);
            let r = lax_residual(p.as_ref(), &off, z).unwrap();
            off_with = off_with.max(r.with_extra);
            off_without = off_without.min(r.without_extra);
        }
    }
    Outcome {
        pass: on < 1e-9 && off_with < 1e-9 && off_without > 1e-3,
        detail: format!(
            "on-shell {on:.2e}; off-shell with extra {off_with:.2e}, without extra min {off_without:.2e}"
        ),
    }
}

fn conservation_setup() -> (BelavinRMatrix, PhaseState, Vec<Complex64>) {
    let zs = vec![
        c(0.31, 0.17),
        c(0.22, -0.28),
        c(-0.36, 0.12),
        c(0.13, 0.41),
        c(-0.18, -0.33),
    ];
    (belavin(2), PhaseState::random(2, 2, eta(), 1).unwrap(), zs)
}

fn criterion_5() -> Outcome {
    let (p, state, zs) = conservation_setup();
    let cfg = TrajectoryConfig {
        dt: 1e-3,
        steps: 1000,
        z_samples: zs.clone(),
        max_order: 4,
        record_every: 1000,
        resync_velocities: false,
    };
    let (_, report) = integrate(&p, &state, &cfg).unwrap();
    let drifts = drift_refinement(&p, &state, 1.0, &[0.02, 0.01, 0.005], &zs, 4).unwrap();
    let orders = observed_orders(&drifts);
    let order_ok = orders.iter().all(|&o| o >= 3.5);
    Outcome {
        pass: report.max_relative_drift < 1e-6 && order_ok,
        detail: format!(
            "max rel drift {:.2e} over {} invariants; refinement dt 0.02/0.01/0.005 drifts {:.2e}/{:.2e}/{:.2e}, orders {:.2}/{:.2}",
            report.max_relative_drift,
            report.entries.len(),
            drifts[0],
            drifts[1],
            drifts[2],
            orders[0],
            orders[1]
        ),
    }
}

fn criterion_6() -> Outcome {
    let mut dev: f64 = 0.0;
    let mut pass = true;
    for (n, m) in [(2, 2), (2, 3), (3, 2)] {
        let p = belavin(n);
        for seed in 0..3 {
            let state = PhaseState::rank_one(n, m, eta(), seed).unwrap();
            let cmps = check_rank_one_reduction(&p, &state, 1e-9).unwrap();
            pass &= cmps.iter().all(|c| c.pass);
            dev = dev.max(worst_cmp(&cmps));
        }
    }
    Outcome {
        pass,
        detail: format!("max dev {dev:.2e}"),
    }
}

fn criterion_7() -> Outcome {
    let (p, state, zs) = conservation_setup();
    let mut drifts = Vec::new();
    for dt in [4e-3, 2e-3, 1e-3] {
        let cfg = TrajectoryConfig {
            dt,
            steps: (1.0 / dt).round() as usize,
            z_samples: zs[..1].to_vec(),
            max_order: 1,
            record_every: usize::MAX,
            resync_velocities: false,
        };
        let (traj, _) = integrate(&p, &state, &cfg).unwrap();
        drifts.push(constraint_drift(&traj));
    }
    // μ is linear in the state and RK4 preserves linear invariants, so the
    // drift sits at round-off for every dt instead of scaling as dt⁴
    Outcome {
        pass: drifts.iter().all(|&d| d < 1e-8),
        detail: format!(
            "max |mu| at dt 4e-3/2e-3/1e-3: {:.2e}/{:.2e}/{:.2e} (round-off, no dt dependence)",
            drifts[0], drifts[1], drifts[2]
        ),
    }
}

fn main() {
    // `cargo test` passes harness flags such as --nocapture; they are not needed here
    let criteria: Vec<Criterion> = vec![
        ("1 scalar identities", Some(5), criterion_1),
        ("2 R-matrix axioms", Some(60), criterion_2),
        ("3 reductions", None, criterion_3),
        ("4 Lax residual", None, criterion_4),
        ("5 conservation", Some(120), criterion_5),
        ("6 rank-one reduction", None, criterion_6),
        ("7 constraint drift", None, criterion_7),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let out = timed(limit.map(Duration::from_secs), f);
        println!(
            "{} criterion {name}: {}",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
        if !out.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria pass");
}
