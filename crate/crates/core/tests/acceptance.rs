//! One pass/fail line per acceptance criterion, from default-configuration runs.

use std::time::Instant;

use covscat::cli::{execute, Experiment, RunConfig, RunOutput, RunSummary};

struct Line {
    id: usize,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn run(e: Experiment) -> (Result<RunOutput, String>, f64) {
    let cfg = RunConfig { experiment: e, ..RunConfig::default() };
    let start = Instant::now();
    let out = execute(&cfg).map_err(|f| f.to_string());
    (out, start.elapsed().as_secs_f64())
}

fn clock(s: &RunSummary, key: &str) -> f64 {
    s.wall_clock.get(key).and_then(|v| v.as_f64()).unwrap_or(f64::INFINITY)
}

/// Passes when every named verdict exists and passes, plus any extra condition.
fn judge(id: usize, name: &'static str, s: &RunSummary, checks: &[&str], extra: Option<(bool, String)>) -> Line {
    let mut pass = true;
    let mut parts = vec![];
    for c in checks {
        match s.verdict(c) {
            Some(v) => {
                pass &= v.pass;
                parts.push(format!("{c}={:.2e}/{:.0e}", v.value, v.tolerance));
            }
            None => {
                pass = false;
                parts.push(format!("{c}=missing"));
            }
        }
    }
    if let Some((ok, text)) = extra {
        pass &= ok;
        parts.push(text);
    }
    Line { id, name, pass, detail: parts.join(", ") }
}

fn failed(id: usize, name: &'static str, why: &str) -> Line {
    Line { id, name, pass: false, detail: why.to_string() }
}

fn main() {
    let mut lines = vec![];

    let (k, _) = run(Experiment::Kinematics);
    match &k {
        Ok(o) => {
            let s = &o.summary;
            let t = clock(s, "round_trip");
            lines.push(judge(
                1,
                "kinematics round trip",
                s,
                &["kinematics.round_trip_relative", "kinematics.constraint_residual"],
                Some((t < 10.0, format!("runtime={t:.2}s/10s"))),
            ));
            lines.push(judge(2, "center-variable covariance", s, &["kinematics.center_covariance", "kinematics.wigner_cocycle"], None));
            lines.push(judge(3, "two-body mass relation", s, &["kinematics.mass_relation_relative", "kinematics.inverse_round_trip_relative"], None));
        }
        Err(e) => {
            for (id, n) in [(1, "kinematics round trip"), (2, "center-variable covariance"), (3, "two-body mass relation")] {
                lines.push(failed(id, n, e));
            }
        }
    }

    let (r, _) = run(Experiment::RepCheck);
    match &r {
        Ok(o) => {
            let s = &o.summary;
            let t = clock(s, "closure_spin0").max(clock(s, "closure_spin1"));
            lines.push(judge(
                4,
                "generator algebra closure",
                s,
                &[
                    "closure.spin0.residual",
                    "closure.spin0.stability",
                    "closure.spin0.non_rational_constants",
                    "closure.spin1.residual",
                    "closure.spin1.stability",
                    "closure.spin1.non_rational_constants",
                    "hermiticity.spin0",
                    "hermiticity.spin1",
                ],
                Some((t < 60.0, format!("runtime={t:.2}s/60s per spin"))),
            ));
            lines.push(judge(5, "degenerate-representation phases", s, &["phases.observer_translation_change", "phases.momentum_translation_error"], None));
        }
        Err(e) => {
            lines.push(failed(4, "generator algebra closure", e));
            lines.push(failed(5, "degenerate-representation phases", e));
        }
    }

    let (m, _) = run(Experiment::Moeller);
    match &m {
        Ok(o) => {
            let s = &o.summary;
            let t = clock(s, "moeller_and_s");
            lines.push(judge(
                6,
                "Moeller convergence",
                s,
                &["moeller.last_increment", "moeller.intertwining_residual", "smatrix.norm_deviation"],
                Some((t < 300.0, format!("runtime={t:.1}s/300s"))),
            ));
            lines.push(judge(7, "stationary vs time-dependent S", s, &["smatrix.phase_vs_stationary", "smatrix.refinement_ratio"], None));
        }
        Err(e) => {
            lines.push(failed(6, "Moeller convergence", e));
            lines.push(failed(7, "stationary vs time-dependent S", e));
        }
    }

    let (p, _) = run(Experiment::Phaseshift);
    lines.push(match &p {
        Ok(o) => judge(8, "square-well phase shifts", &o.summary, &["phaseshift.closed_form_mod_pi"], None),
        Err(e) => failed(8, "square-well phase shifts", e),
    });

    let (n, _) = run(Experiment::DemoNogo);
    lines.push(match &n {
        Ok(o) => judge(
            9,
            "no-go demonstrations",
            &o.summary,
            &["nogo.verdict_no_limit", "nogo.increment_over_oscillation", "nogo.increments_never_decay", "nogo.difference_norm_spread"],
            None,
        ),
        Err(e) => failed(9, "no-go demonstrations", e),
    });

    let (x, tx) = run(Experiment::Xsection);
    lines.push(match &x {
        Ok(o) => judge(
            10,
            "cross-section consistency",
            &o.summary,
            &["xsection.oracle_deviation_sigmas", "xsection.boost_deviation_sigmas"],
            Some((tx < 120.0, format!("runtime={tx:.1}s/120s"))),
        ),
        Err(e) => failed(10, "cross-section consistency", e),
    });

    let (l, _) = run(Experiment::Luminosity);
    lines.push(match &l {
        Ok(o) => judge(
            11,
            "luminosity",
            &o.summary,
            &["luminosity.fixed_target_relative", "luminosity.flat_top_relative", "luminosity.probability_vs_sigma_over_area"],
            None,
        ),
        Err(e) => failed(11, "luminosity", e),
    });

    let (f, _) = run(Experiment::Factorization);
    lines.push(match &f {
        Ok(o) => judge(12, "factorization w = sigma L", &o.summary, &["factorization.first_ratio_deviation", "factorization.strictly_decreasing_error"], None),
        Err(e) => failed(12, "factorization w = sigma L", e),
    });

    lines.sort_by_key(|l| l.id);
    for l in &lines {
        println!("criterion {:>2} {} {}: {}", l.id, if l.pass { "PASS" } else { "FAIL" }, l.name, l.detail);
    }
    let failures = lines.iter().filter(|l| !l.pass).count();
    println!("acceptance: {} of {} criteria pass", lines.len() - failures, lines.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
