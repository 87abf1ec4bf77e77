use std::process::ExitCode;
use std::time::Instant;

use hypid::charpoly::DEFAULT_EPS;
use hypid::golden::{all_pass, golden_corpus};
use hypid::harness::{
    beta_suite, coherence_suite, consistency_suite, limit_suite, parse_identities, run_check,
    vanishing_suite, Report, RunConfig,
};

struct Line {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn suite(ids: &str, draws: usize, tol: f64) -> RunConfig {
    RunConfig {
        draws,
        rel_tol: tol,
        identities: parse_identities(ids).expect("identity list"),
        ..RunConfig::default()
    }
}

fn all_drawn_pass(r: &Report, draws: usize, ids: usize) -> bool {
    r.summary.pass == draws * ids && r.summary.count == draws * ids
}

fn describe(r: &Report) -> String {
    format!(
        "pass {}/{} max {:.2e} median {:.2e}",
        r.summary.pass, r.summary.count, r.summary.max_rel_err, r.summary.median_rel_err
    )
}

fn classical() -> Line {
    let cfg = suite("MP1,MP2,MP3", 200, 1e-6);
    let t = Instant::now();
    let r = run_check(&cfg);
    let secs = t.elapsed().as_secs_f64();
    Line {
        name: "classical Miller-Paris suite",
        pass: all_drawn_pass(&r, 200, 3) && r.summary.median_rel_err <= 1e-9 && secs <= 60.0,
        detail: format!("{} in {secs:.1}s", describe(&r)),
    }
}

fn degenerate() -> Line {
    let r = run_check(&suite("THM1,THM2,THM3", 200, 1e-6));
    Line {
        name: "degenerate theorems, all q",
        pass: all_drawn_pass(&r, 200, 3),
        detail: describe(&r),
    }
}

fn coherence() -> Line {
    match coherence_suite(&RunConfig::default(), 50) {
        Ok(rows) => {
            let worst = rows.iter().map(|r| r.diff).fold(0.0, f64::max);
            Line {
                name: "specialization coherence",
                pass: !rows.is_empty() && worst <= 1e-10,
                detail: format!("{} comparisons, max diff {worst:.2e}", rows.len()),
            }
        }
        Err(e) => Line {
            name: "specialization coherence",
            pass: false,
            detail: e.to_string(),
        },
    }
}

fn limits() -> Line {
    let cases = limit_suite(&RunConfig::default(), 10, &DEFAULT_EPS);
    let mut ok = 0;
    let mut worst_err = 0.0f64;
    let mut worst_slope = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for c in &cases {
        if let Ok(st) = &c.outcome {
            let at = st
                .rows
                .iter()
                .find(|r| r.eps == 1e-5)
                .map(|r| r.match_error);
            let err = at.unwrap_or(f64::INFINITY);
            worst_err = worst_err.max(err);
            worst_slope = worst_slope.max((st.slope - 1.0).abs());
            worst_ratio = worst_ratio.max(st.ratio_rel_err);
            if err <= 1e-3 && (st.slope - 1.0).abs() <= 0.2 && st.ratio_rel_err <= 0.01 {
                ok += 1;
            }
        }
    }
    Line {
        name: "lemma limit studies",
        pass: cases.len() == 20 && ok == 20,
        detail: format!(
            "{ok}/{} sets, max error {worst_err:.2e}, max |slope-1| {worst_slope:.3}, max ratio error {worst_ratio:.2e}",
            cases.len()
        ),
    }
}

fn karlsson() -> Line {
    let r = run_check(&suite("THM4", 50, 1e-6));
    let vanishing = vanishing_suite();
    let worst = vanishing
        .iter()
        .map(|c| c.outcome.as_ref().map_or(f64::INFINITY, |r| r.lhs.norm()))
        .fold(0.0, f64::max);
    Line {
        name: "generalized Karlsson summation",
        pass: all_drawn_pass(&r, 50, 1) && vanishing.len() == 5 && worst <= 1e-7,
        detail: format!("{}; vanishing cases max |sum| {worst:.2e}", describe(&r)),
    }
}

fn unit_transformations() -> Line {
    let t5 = run_check(&suite("THM5", 100, 1e-10));
    let t6 = run_check(&suite("THM6", 50, 1e-6));
    let beta = beta_suite(&RunConfig::default(), 10);
    let worst = beta
        .iter()
        .map(|c| c.outcome.as_ref().map_or(f64::INFINITY, |r| r.rel_err))
        .fold(0.0, f64::max);
    Line {
        name: "unit-argument transformations",
        pass: all_drawn_pass(&t5, 100, 1)
            && all_drawn_pass(&t6, 50, 1)
            && beta.len() == 10
            && worst <= 1e-6,
        detail: format!(
            "terminating {}; non-terminating {}; beta integral max {worst:.2e}",
            describe(&t5),
            describe(&t6)
        ),
    }
}

fn golden() -> Line {
    let recs = golden_corpus();
    let passed = recs
        .iter()
        .filter(|r| r.status == hypid::harness::Status::Pass)
        .count();
    let worst = recs.iter().filter_map(|r| r.rel_err).fold(0.0, f64::max);
    Line {
        name: "golden corpus",
        pass: all_pass(&recs),
        detail: format!("{passed}/{} records, max rel_err {worst:.2e}", recs.len()),
    }
}

fn consistency() -> Line {
    let r = consistency_suite(RunConfig::default().seed, 200);
    let dual = r.ckr_forms.max(r.r_forms).max(r.r_at).max(r.rhat_at);
    Line {
        name: "dual-formula consistency",
        pass: r.errors.is_empty() && dual <= 1e-10 && r.sigma_round_trip <= 1e-12,
        detail: format!(
            "{} specs, dual forms {dual:.2e}, sigma round trip {:.2e}, {} errors",
            r.specs,
            r.sigma_round_trip,
            r.errors.len()
        ),
    }
}

fn main() -> ExitCode {
    let checks: [fn() -> Line; 8] = [
        classical,
        degenerate,
        coherence,
        limits,
        karlsson,
        unit_transformations,
        golden,
        consistency,
    ];
    let mut failed = 0;
    for (i, check) in checks.iter().enumerate() {
        let line = check();
        if !line.pass {
            failed += 1;
        }
        println!(
            "{} {}. {}: {}",
            if line.pass { "PASS" } else { "FAIL" },
            i + 1,
            line.name,
            line.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
