//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use common::{five_point_min_eigenvalue, unit_disk, unit_square};
use sobolev_lab::asymptotics::{
    hyperdiffusive_compare, run_sweep, scaling_check, HyperdiffusiveOptions, MuProfile, QProfile, SweepOptions,
    SweepRun,
};
use sobolev_lab::cli::{execute, parse_config};
use sobolev_lab::geometry::{distance_field, inradius, max_set};
use sobolev_lab::inflap::{cone_solution, solve_inf_laplace, InfLapOptions, ObstacleProblem};
use sobolev_lab::plap::{least_energy_from_extremal, minimize_extremal, SolveStatus, SolverOptions};

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn FnOnce() -> Outcome + 'a>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_oracle() -> Outcome {
    let domain = unit_square(1.0 / 16.0);
    let t = Instant::now();
    let res = minimize_extremal(&domain, 2.0, 2.0, &SolverOptions::default()).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let oracle = five_point_min_eigenvalue(&domain);
    let rel = (res.lambda - oracle).abs() / oracle;
    check(
        rel <= 1e-6 && secs < 10.0 && res.status == SolveStatus::Converged,
        format!("lambda {:.12} vs oracle {oracle:.12}, rel err {rel:.1e}, {secs:.2}s", res.lambda),
    )
}

fn c2_disk_limit(run: &SweepRun, secs: f64) -> Outcome {
    let rows = &run.report.rows;
    let errs: Vec<f64> = rows.iter().map(|r| (r.lambda_root - 1.0).abs()).collect();
    let tail = &errs[errs.len() - 3..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    let last = rows.last().expect("rows");
    let sup_err = (last.sup_norm - 1.0).abs();
    check(
        monotone && tail[2] <= 0.15 && sup_err <= 0.1 && secs < 600.0,
        format!("errors {errs:.4?}, final sup-norm error {sup_err:.4}, sweep {secs:.1}s"),
    )
}

fn c3_sandwich(runs: &[&SweepRun]) -> Outcome {
    let mut worst = f64::INFINITY;
    let mut all = true;
    for run in runs {
        for r in &run.report.rows {
            all &= r.within_sandwich() && r.lambda_p.is_finite();
            worst = worst.min((r.lambda_root - (r.sandwich_lo - r.slack)).min(r.sandwich_hi + r.slack - r.lambda_root));
        }
    }
    check(all, format!("{} rows, smallest margin {worst:.4}", runs.iter().map(|r| r.report.rows.len()).sum::<usize>()))
}

fn c4_square_q1(run: &SweepRun) -> Outcome {
    let rows = &run.report.rows;
    let errs: Vec<f64> = rows.iter().map(|r| (r.lambda_root - 6.0).abs()).collect();
    let trending = errs.windows(2).all(|w| w[1] < w[0]);
    let last = rows.last().expect("rows");
    check(
        trending && errs[errs.len() - 1] <= 0.2 && last.gap_r <= 0.1,
        format!("|lambda^(1/p) - 6| = {errs:.4?}, final gap to tent {:.4}", last.gap_r),
    )
}

fn c5_ball(run: &SweepRun) -> Outcome {
    let domain = run.extremals[0].u.domain().clone();
    let last = run.extremals.last().expect("rungs");
    let c = hyperdiffusive_compare(&domain, &run.report, &last.u, &HyperdiffusiveOptions::default())
        .map_err(|e| e.to_string())?;
    let spread = c.m.max_distance_to([0.0, 0.0]) / domain.h();
    check(
        spread <= 3.0 && c.containment && c.sup_gap <= 0.1 && c.cone_bound,
        format!(
            "M: {} nodes within {spread:.2}h, containment {}, sup gap {:.4}, cone excess {:.4}",
            c.m.len(),
            c.containment,
            c.sup_gap,
            c.cone_excess
        ),
    )
}

fn c6_inflap_cone() -> Outcome {
    let mut errs = Vec::new();
    let mut violations = 0;
    for n in [32.0, 64.0, 128.0] {
        let domain = unit_disk(1.0 / n);
        let m = max_set(&distance_field(&domain), domain.h());
        let sol = solve_inf_laplace(&ObstacleProblem::new(&domain, m, 1.0), &InfLapOptions::default())
            .map_err(|e| e.to_string())?;
        if !sol.converged {
            return Err(format!("no convergence at h=1/{n}"));
        }
        violations += sol.comparison_violations;
        let cone = cone_solution(&domain).map_err(|e| e.to_string())?;
        errs.push((sol.u.sup_distance(&cone), domain.h()));
    }
    // The comparison principle is a hard requirement.
    assert_eq!(violations, 0, "discrete comparison principle violated");
    let within = errs.iter().all(|&(e, h)| e <= 5.0 * h);
    let decreasing = errs.windows(2).all(|w| w[1].0 < w[0].0);
    let text: Vec<String> = errs.iter().map(|(e, h)| format!("{e:.4} ({:.2}h)", e / h)).collect();
    check(within && decreasing, format!("errors {}, violations {violations}", text.join(", ")))
}

fn c7_dichotomy() -> Outcome {
    let gap = |domain: &std::sync::Arc<sobolev_lab::geometry::GridDomain>| -> Result<f64, String> {
        let d = distance_field(domain);
        let tent = d.scaled(1.0 / inradius(&d));
        let prob = ObstacleProblem::new(domain, max_set(&d, domain.h()), 1.0);
        let sol = solve_inf_laplace(&prob, &InfLapOptions::default()).map_err(|e| e.to_string())?;
        Ok(domain.interior().iter().map(|&id| (sol.u.get(id) - tent.get(id)).abs()).fold(0.0, f64::max))
    };
    let h = 1.0 / 64.0;
    let square = gap(&unit_square(h))?;
    let disk = gap(&unit_disk(h))?;
    check(square >= 0.05 && disk <= 5.0 * h, format!("square gap {square:.4}, disk gap {disk:.4} ({:.2}h)", disk / h))
}

fn c8_monotone_in_q() -> Outcome {
    let domain = unit_square(1.0 / 32.0);
    let measure = domain.measure();
    let mut worst = f64::NEG_INFINITY;
    for p in [4.0, 8.0] {
        for (q1, q2) in [(1.0, 2.0), (2.0, 4.0), (4.0, 8.0)] {
            let scaled = |q: f64| -> Result<f64, String> {
                let r = minimize_extremal(&domain, p, q, &SolverOptions::default()).map_err(|e| e.to_string())?;
                Ok((r.log_lambda + p / q * measure.ln()).exp())
            };
            let (a, b) = (scaled(q1)?, scaled(q2)?);
            worst = worst.max((b - a) / a);
        }
    }
    check(worst <= 1e-3, format!("largest relative increase {worst:.3e}"))
}

fn c9_scaling(run: &SweepRun) -> Outcome {
    let res = run.extremals.iter().find(|e| e.p == 16.0).ok_or("no p = 16 rung")?;
    let s = scaling_check(res, &MuProfile::ThetaPower { theta: 2.0 }, &run.report.regime).map_err(|e| e.to_string())?;
    let v = least_energy_from_extremal(res, res.lambda).map_err(|e| e.to_string())?;
    let same = v.sup_distance(&res.u);
    check(
        s.ratio_err <= 0.1 && same <= 1e-14,
        format!("Theta=2 ratio err {:.4} (predicted {:.3}), mu=lambda max |v-u| = {same:.1e}", s.ratio_err, s.predicted),
    )
}

fn c10_determinism() -> Outcome {
    let cfg = parse_config(
        r#"
command = "sweep"
[domain]
shape = { kind = "disk", radius = 1.0 }
h = 0.03125
[sweep]
ladder = [4, 8, 16]
[inflap]
mode = "jacobi"
"#,
    )
    .map_err(|e| e.to_string())?;
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bodies = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        execute(&cfg, &dir, |_| {}).map_err(|e| e.to_string())?;
        bodies.push(std::fs::read(dir.join("report.csv")).map_err(|e| e.to_string())?);
    }
    check(bodies[0] == bodies[1], format!("report.csv, {} bytes each", bodies[0].len()))
}

fn run_guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(r) => r,
        Err(e) => Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into())),
    }
}

fn main() -> ExitCode {
    let ladder = [4.0, 8.0, 16.0, 32.0];
    let t = Instant::now();
    let disk = run_sweep(&unit_disk(1.0 / 64.0), &ladder, &QProfile::Power { alpha: 2.0 }, &SweepOptions::default());
    let disk_secs = t.elapsed().as_secs_f64();
    let square = run_sweep(&unit_square(1.0 / 64.0), &ladder, &QProfile::ConstantR { r: 1.0 }, &SweepOptions::default());

    let with = |run: &Result<SweepRun, _>, f: &dyn Fn(&SweepRun) -> Outcome| -> Outcome {
        match run {
            Ok(r) => f(r),
            Err(e) => Err(format!("sweep failed: {e}")),
        }
    };
    let criteria: Vec<Criterion<'_>> = vec![
        ("p=q=2 extremal matches the dense eigenvalue oracle", Box::new(c1_oracle)),
        ("disk q=p^2 ladder converges to 1/inradius", Box::new(|| with(&disk, &|r| c2_disk_limit(r, disk_secs)))),
        (
            "sandwich bounds hold on every sweep row",
            Box::new(|| match (&disk, &square) {
                (Ok(a), Ok(b)) => c3_sandwich(&[a, b]),
                _ => Err("a sweep failed".into()),
            }),
        ),
        ("square q=1 ladder approaches |Omega|/|d|_1 and the tent", Box::new(|| with(&square, &c4_square_q1))),
        ("ball case matches the cone off its maximum set", Box::new(|| with(&disk, &c5_ball))),
        ("infinity-Laplacian solver converges to the cone", Box::new(c6_inflap_cone)),
        ("square and disk differ in the obstacle dichotomy", Box::new(c7_dichotomy)),
        ("normalized quotient decreases in q", Box::new(c8_monotone_in_q)),
        ("least-energy rescaling identities", Box::new(|| with(&disk, &c9_scaling))),
        ("jacobi sweeps are byte-for-byte reproducible", Box::new(c10_determinism)),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.into_iter().enumerate() {
        match run_guarded(f) {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
