//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria are reported, not asserted, so a known failure does not hide the
//! others. Set ENTROLAB_ACCEPTANCE_STRICT=1 to exit non-zero on any FAIL.
//! Set ENTROLAB_ACCEPTANCE_ONLY=3,7 to run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use clap::Parser;
use entrolab::entropy::{reconcile, EntropyConfig};
use entrolab_cli::experiments::{self, HorseshoeEntropy};
use entrolab_cli::{execute, Cli};

type Outcome = Result<(bool, String), String>;

fn selected(id: usize) -> bool {
    match std::env::var("ENTROLAB_ACCEPTANCE_ONLY") {
        Ok(s) => s.split(',').any(|t| t.trim().parse() == Ok(id)),
        Err(_) => true,
    }
}

fn criterion(id: usize, name: &str, results: &mut Vec<(usize, bool)>, f: impl FnOnce() -> Outcome) {
    if !selected(id) {
        return;
    }
    let start = Instant::now();
    let outcome = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(p) => Err(p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".into())),
    };
    let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    let secs = start.elapsed().as_secs_f64();
    println!("criterion {id:>2} [{}] {name}: {detail} ({secs:.1} s)", if pass { "PASS" } else { "FAIL" });
    results.push((id, pass));
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed().as_secs_f64())
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn main() {
    let mut results = Vec::new();
    let cfg = EntropyConfig::default();

    let mut horseshoes: Vec<(HorseshoeEntropy, f64)> = Vec::new();
    criterion(1, "horseshoe entropy within 15% of log N, < 60 s per N", &mut results, || {
        let mut parts = Vec::new();
        let mut pass = true;
        for n in [2, 3, 4] {
            let (h, secs) = timed(|| experiments::horseshoe_entropy(n, &cfg));
            let h = h.map_err(err)?;
            let ok = h.within && secs < 60.0;
            pass &= ok;
            parts.push(format!(
                "N={n} {:.3} vs {:.3} ({:+.1}%, {secs:.0} s){}",
                h.run.estimate.headline,
                h.log_n,
                100.0 * (h.run.estimate.headline - h.log_n) / h.log_n,
                if ok { "" } else { " FAIL" }
            ));
            horseshoes.push((h, secs));
        }
        Ok((pass, parts.join("; ")))
    });

    criterion(2, "certificate <= estimate <= Lipschitz bound", &mut results, || {
        if horseshoes.is_empty() {
            for n in [2, 3, 4] {
                horseshoes.push((experiments::horseshoe_entropy(n, &cfg).map_err(err)?, 0.0));
            }
        }
        let mut parts = Vec::new();
        let mut pass = true;
        for (h, _) in &horseshoes {
            let cert = h.run.certificate.ok_or("branch certificate failed")?;
            let v = reconcile(&h.run.estimate, cert, h.run.lip_bound, experiments::HORSESHOE_TOL * cert).map_err(err)?;
            pass &= v.pass;
            parts.push(format!(
                "N={} {:.3} <= {:.3} <= {:.3} (tol {:.3}){}",
                h.branches,
                v.lower,
                v.estimate,
                v.upper,
                v.tol,
                if v.pass { "" } else { " FAIL" }
            ));
        }
        Ok((pass, parts.join("; ")))
    });

    criterion(3, "nested-squares modulus, p = 1, 1e5 pairs, drift < 10%, < 120 s", &mut results, || {
        let (run, secs) = timed(|| experiments::appendix_modulus(4, 1.0, 100_000, 0));
        let run = run.map_err(err)?;
        let r = &run.report;
        let decades: Vec<String> = r.decades.iter().map(|b| format!("1e{}:{:.3}", b.decade, b.max)).collect();
        Ok((
            run.pass && secs < 120.0,
            format!("C = {:.3}, drift = {:.3}, decade maxima [{}]", r.constant, r.drift, decades.join(" ")),
        ))
    });

    criterion(4, "nested-squares entropy non-decreasing and >= 0.8 log m", &mut results, || {
        let g = experiments::appendix_growth(&[2, 3, 4], &cfg).map_err(err)?;
        let rows: Vec<String> =
            g.rows.iter().map(|r| format!("m={} {:.3} (floor {:.3})", r.m, r.headline, r.floor)).collect();
        Ok((
            g.pass,
            format!("{}; non-decreasing {}, above floor {}", rows.join(", "), g.non_decreasing, g.above_floor),
        ))
    });

    criterion(5, "truncation distances strictly decreasing over m = 2..5", &mut results, || {
        let t = experiments::truncation_scan(&[2, 3, 4, 5], 8, &[0.0, 0.5, 0.9], &[1.5, 2.0], 0).map_err(err)?;
        let col = |f: &dyn Fn(&experiments::TruncationRow) -> f64| {
            t.rows.iter().map(|r| format!("{:.3}", f(r))).collect::<Vec<_>>().join(" > ")
        };
        let mut parts = Vec::new();
        for (i, a) in [0.0, 0.5, 0.9].iter().enumerate() {
            parts.push(format!("C^{a}: {} [{}]", col(&|r| r.holder[i].1), t.holder_decreasing[i]));
        }
        for (i, p) in [1.5, 2.0].iter().enumerate() {
            parts.push(format!("W^{{1,{p}}}: {} [{}]", col(&|r| r.sobolev[i].1), t.sobolev_decreasing[i]));
        }
        Ok((t.pass, parts.join("; ")))
    });

    criterion(6, "closing on the golden twist, three halvings, < 60 s", &mut results, || {
        let (run, secs) = timed(experiments::golden_closing);
        let run = run.map_err(err)?;
        let ks: Vec<String> = run.demo.reports.iter().map(|r| r.segment.k.to_string()).collect();
        let size = |s: &[entrolab::perturb::SizeSample], e: f64| {
            s.iter().find(|x| x.exponent == e).map_or(f64::NAN, |x| x.value)
        };
        let h: Vec<String> = run.demo.reports.iter().map(|r| format!("{:.3}", size(&r.holder, 0.5))).collect();
        let w: Vec<String> = run.demo.reports.iter().map(|r| format!("{:.3}", size(&r.sobolev, 2.0))).collect();
        Ok((
            run.pass && secs < 60.0,
            format!(
                "k = [{}], residual {:.1e}, exterior ok {}, C^0.5 {} [{}], W^{{1,2}} {} [{}]",
                ks.join(" "),
                run.max_residual,
                run.exterior_ok,
                h.join(" > "),
                run.holder_half_decreasing,
                w.join(" > "),
                run.sobolev_two_decreasing
            ),
        ))
    });

    criterion(7, "Gronwall and bump-slope bounds on 10 translation moves", &mut results, || {
        let g = experiments::gronwall_suite(10, 0).map_err(err)?;
        let worst = g.rows.iter().map(|r| r.displacement_lip / r.bound).fold(0.0, f64::max);
        let slope = g.rows.iter().map(|r| r.slope / r.slope_bound).fold(0.0, f64::max);
        Ok((g.pass, format!("max [phi - id]_Lip / M e^M = {worst:.3}, max slope ratio = {slope:.4}")))
    });

    criterion(8, "analytic inequality suite, zero violations", &mut results, || {
        let s = experiments::inequality_suite(0).map_err(err)?;
        let failed: Vec<String> = s.rows.iter().filter(|r| !r.pass).map(|r| format!("{}/{} {:.3}", r.map, r.check, r.value)).collect();
        Ok((s.pass, format!("{} checks, {} violations {}", s.rows.len(), s.violations, failed.join(", "))))
    });

    criterion(9, "horseshoe chain on the period-5 twist, N = 2, < 180 s", &mut results, || {
        let (run, secs) = timed(|| experiments::rational_chain(&cfg));
        let run = run.map_err(err)?;
        let r = &run.report;
        let h = run.estimate.as_ref().map_or(f64::NAN, |e| e.headline);
        Ok((
            run.pass && r.certificates.len() == 6 && secs < 180.0,
            format!(
                "k0 = {}, kappa = {:.3}, certificates {}/{}, entropy {:.3} >= {:.3}",
                r.k0,
                r.kappa,
                r.passed(),
                r.certificates.len(),
                h,
                run.floor
            ),
        ))
    });

    criterion(10, "round trips <= 1e-6 and worker-independent reports", &mut results, || {
        let rows = experiments::round_trip_suite(1000, 256, 0).map_err(err)?;
        let worst = rows.iter().map(|r| r.max_error).fold(0.0, f64::max);
        let bad: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.kind.as_str()).collect();
        let runs: [&[&str]; 4] = [
            &["entropy", "--map", r#"horseshoe:{"N":3}"#, "--cloud", "grid:48", "--budget", "100000"],
            &["appendix-a", "--study", "modulus", "--pairs", "20000"],
            &["seminorm", "--map", "appendix-a", "--cloud", "pairs:5000", "--rounds", "4"],
            &["closing-demo", "--scales", "2"],
        ];
        let mut mismatched = Vec::new();
        for args in runs {
            let cli = Cli::try_parse_from(std::iter::once("entrolab").chain(args.iter().copied())).map_err(err)?;
            let mut texts = Vec::new();
            for workers in [1, 3] {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(err)?;
                let (rep, _) = pool.install(|| execute(cli.verb, &cli.config)).map_err(err)?;
                texts.push(rep.to_json());
            }
            if texts[0] != texts[1] {
                mismatched.push(args[0]);
            }
        }
        Ok((
            bad.is_empty() && mismatched.is_empty(),
            format!(
                "{} node kinds, worst round trip {worst:.1e}{}; {} reports byte-identical at 1 and 3 workers{}",
                rows.len(),
                if bad.is_empty() { String::new() } else { format!(" (over: {})", bad.join(", ")) },
                runs.len() - mismatched.len(),
                if mismatched.is_empty() { String::new() } else { format!(" (differ: {})", mismatched.join(", ")) }
            ),
        ))
    });

    let failed: Vec<String> = results.iter().filter(|r| !r.1).map(|r| r.0.to_string()).collect();
    println!("acceptance: {} of {} criteria pass", results.len() - failed.len(), results.len());
    if !failed.is_empty() {
        println!("acceptance: failing criteria {}", failed.join(", "));
        if std::env::var("ENTROLAB_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
            std::process::exit(1);
        }
    }
}
