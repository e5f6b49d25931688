//! Verb dispatch and output writing.

use std::fs;
use std::path::Path;

use entrolab::entropy::EntropyConfig;
use entrolab::estimators::{
    holder_distance, holder_seminorm, jacobian_bound_check, sobolev_distance, sobolev_energy, Exponent, SamplingPlan,
};
use entrolab::horseshoe::branch_certificate_at;
use entrolab::{check_crossing, identity, Point, Rect, Region, SolidCylinder};
use serde::Serialize;
use serde_json::json;

use crate::args::{Cli, Cloud, RunConfig, Study, Verb};
use crate::experiments::{self, ClosingRun};
use crate::maps::{resolve, ResolvedMap};
use crate::report::Report;
use crate::{sketch, CliError};

/// Side outputs of a run, written next to the report.
#[derive(Default)]
pub struct Artifacts {
    pub map_json: Option<String>,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn map_or(config: &RunConfig, default: Option<&str>) -> Result<ResolvedMap, CliError> {
    match (&config.map, default) {
        (Some(s), _) => resolve(s),
        (None, Some(d)) => resolve(d),
        (None, None) => Err(usage("this verb needs --map")),
    }
}

fn domain(config: &RunConfig, map: &ResolvedMap) -> Result<Rect, CliError> {
    match &config.domain {
        Some(d) => Ok(Rect::new(Point::new(d[0], d[1]), Point::new(d[2], d[3]))?),
        None => Ok(map.domain),
    }
}

fn plan(config: &RunConfig, d: Rect) -> SamplingPlan {
    match config.cloud {
        Cloud::Grid(res) => SamplingPlan::grid(d, res),
        Cloud::Pairs(n) => SamplingPlan::pairs(d, n, config.seed),
    }
    .refined(config.rounds)
}

fn cylinder(v: &[f64]) -> Result<SolidCylinder, CliError> {
    Ok(SolidCylinder::new(Point::new(v[0], v[1]), Point::new(v[2], v[3]), v[4])?)
}

/// Cylinder pair used by `certify` when neither --source nor the map's
/// own horseshoe spec applies: a thin horizontal cylinder mapped onto itself.
pub fn standard_cylinder() -> SolidCylinder {
    SolidCylinder::centered(Point::new(0.5, 0.5), Point::new(1.0, 0.0), 0.4, 0.05).expect("valid cylinder")
}

fn exponent(s: &str) -> Result<Exponent, CliError> {
    if s.eq_ignore_ascii_case("lip") {
        return Ok(Exponent::Lip);
    }
    match s.parse::<f64>() {
        Ok(a) if (0.0..=1.0).contains(&a) => Ok(if a == 1.0 { Exponent::Lip } else { Exponent::Holder(a) }),
        _ => Err(usage(format!("exponent must be in [0, 1] or lip, got {s:?}"))),
    }
}

fn entropy_config(config: &RunConfig) -> EntropyConfig {
    EntropyConfig { budget: config.budget, seed: config.seed, ..EntropyConfig::default() }
}

fn report(verb: Verb, config: &RunConfig, experiment: &str, result: impl Serialize, pass: bool) -> Result<Report, CliError> {
    Report::new(verb, config, experiment, result, pass)
}

/// Runs one verb on the current rayon pool.
pub fn execute(verb: Verb, config: &RunConfig) -> Result<(Report, Artifacts), CliError> {
    let mut art = Artifacts::default();
    let rep = match verb {
        Verb::Build => {
            let map = map_or(config, None)?;
            let text = map.expr.to_json();
            let result = json!({ "nodes": map.expr.size(), "map": serde_json::from_str::<serde_json::Value>(&text).map_err(|e| usage(e.to_string()))? });
            art.map_json = Some(text);
            report(verb, config, "map-build", result, true)?
        }
        Verb::Entropy => {
            let map = map_or(config, None)?;
            let d = domain(config, &map)?;
            let run = experiments::entropy_run(
                &map,
                &d,
                &plan(config, d),
                &config.n.values(),
                &config.eps,
                &entropy_config(config),
                config.tolerances.tol_entropy,
            )?;
            art.csv = Some(run.estimate.to_csv());
            let pass = run.verdict.as_ref().map_or(true, |v| v.pass);
            report(verb, config, "entropy-estimate", &run, pass)?
        }
        Verb::Seminorm => {
            let map = map_or(config, None)?;
            let d = domain(config, &map)?;
            let e = exponent(&config.exponent)?;
            let p = plan(config, d);
            match &config.against {
                Some(other) => {
                    let g = resolve(other)?;
                    let dist = holder_distance(&map.expr, &g.expr, e, &p)?;
                    report(verb, config, "holder-distance", json!({ "exponent": e, "distance": dist }), true)?
                }
                None => report(verb, config, "holder-seminorm", holder_seminorm(&map.expr, e, &p)?, true)?,
            }
        }
        Verb::Sobolev => {
            let map = map_or(config, None)?;
            let d = domain(config, &map)?;
            let h = config.h.unwrap_or(d.width() / 100.0);
            let energy = sobolev_energy(&map.expr, config.p, &d, h)?;
            let jac = jacobian_bound_check(&map.expr, &d, h, 2)?;
            let g = match &config.against {
                Some(s) => resolve(s)?.expr,
                None => identity(),
            };
            let dist = sobolev_distance(&map.expr, &g, config.p, config.p, &d, h)?;
            let pass = energy.double_inequality_holds() && jac.pass;
            let result = json!({
                "energy": energy,
                "double_inequality": energy.double_inequality_holds(),
                "jacobian_bound": jac,
                "distance": dist,
            });
            report(verb, config, "sobolev-energy", result, pass)?
        }
        Verb::Certify => certify(verb, config, &mut art)?,
        Verb::ClosingDemo => {
            let map = map_or(config, Some("golden-twist"))?;
            let y = Point::new(config.y[0], config.y[1]);
            let run = experiments::closing_run(&map.expr, y, config.eta, config.c, config.scales, config.max_iter)?;
            let pass = closing_pass(&run, config.tolerances.tol_residual);
            if let Some(last) = run.demo.reports.last() {
                art.svg = Some(sketch::closing(last));
            }
            report(verb, config, "closing-lemma", closing_summary(&run), pass)?
        }
        Verb::HorseshoeDemo => {
            let map = map_or(config, Some("rational-twist"))?;
            let y = Point::new(config.y[0], config.y[1]);
            let run = experiments::chain_run(
                &map.expr,
                y,
                config.eta,
                config.branches,
                config.r1,
                !config.skip_entropy,
                &entropy_config(config),
            )?;
            let centers: Vec<Point> = run.report.cylinders.iter().map(|c| c.center()).collect();
            art.svg = Some(sketch::chain(&run.report, &centers));
            if let Some(e) = &run.estimate {
                art.csv = Some(e.to_csv());
            }
            report(verb, config, "horseshoe-chain", &run, run.pass)?
        }
        Verb::AppendixA => appendix(verb, config, &mut art)?,
    };
    Ok((rep, art))
}

fn closing_pass(run: &ClosingRun, tol: f64) -> bool {
    run.max_residual <= tol && run.exterior_ok && run.holder_half_decreasing && run.sobolev_two_decreasing
}

/// The closing run without the perturbed maps, which can be large.
fn closing_summary(run: &ClosingRun) -> serde_json::Value {
    let reports: Vec<_> = run
        .demo
        .reports
        .iter()
        .map(|r| {
            json!({
                "k": r.segment.k,
                "rho": r.segment.rho,
                "x": r.segment.x,
                "support": r.support,
                "residual": r.residual,
                "exterior_samples": r.exterior_samples,
                "exterior_mismatches": r.exterior_mismatches,
                "holder": r.holder,
                "sobolev": r.sobolev,
                "map_nodes": r.g.size(),
            })
        })
        .collect();
    json!({
        "c": run.demo.reports.first().map(|r| r.c),
        "etas": run.demo.etas,
        "scales": reports,
        "max_residual": run.max_residual,
        "exterior_ok": run.exterior_ok,
        "holder_half_decreasing": run.holder_half_decreasing,
        "sobolev_two_decreasing": run.sobolev_two_decreasing,
    })
}

fn certify(verb: Verb, config: &RunConfig, art: &mut Artifacts) -> Result<Report, CliError> {
    let map = map_or(config, None)?;
    if let (Some(spec), None) = (&map.spec, &config.source) {
        let cert = branch_certificate_at(&map.expr, spec, config.resolution)?;
        let pass = cert.pass;
        return report(verb, config, "branch-certificate", json!({ "branches": spec.n, "certificate": cert }), pass);
    }
    let source = match &config.source {
        Some(v) => cylinder(v)?,
        None => standard_cylinder(),
    };
    let target = match &config.target {
        Some(v) => cylinder(v)?,
        None => source,
    };
    let cert = check_crossing(&map.expr, &source, &target, config.resolution)?;
    let image: Vec<Point> = Region::Cylinder(source).boundary(source.diam() / 200.0).iter().map(|&x| map.expr.apply(x)).collect();
    art.svg = Some(sketch::crossing(&source, &target, image));
    let result = json!({
        "source": source,
        "target": target,
        "certificate": cert,
        "failed_conditions": cert.failed_conditions(),
    });
    report(verb, config, "crossing-certificate", result, cert.pass())
}

fn appendix(verb: Verb, config: &RunConfig, art: &mut Artifacts) -> Result<Report, CliError> {
    let m_param = |default: usize| -> Result<usize, CliError> {
        match &config.map {
            Some(s) => {
                let v: serde_json::Value = match s.split_once(':') {
                    Some((_, p)) => serde_json::from_str(p).map_err(|e| usage(e.to_string()))?,
                    None => json!({}),
                };
                Ok(v.get("m").or(v.get("m_max")).and_then(|x| x.as_u64()).map_or(default, |x| x as usize))
            }
            None => Ok(default),
        }
    };
    match config.study {
        Study::Modulus => {
            let run = experiments::appendix_modulus(m_param(4)?, config.p, config.pairs, config.seed)?;
            let pass = run.report.constant.is_finite() && run.report.drift < config.tolerances.tol_drift;
            art.csv = Some(
                std::iter::once("decade,count,max\n".to_string())
                    .chain(run.report.decades.iter().map(|b| format!("{},{},{}\n", b.decade, b.count, b.max)))
                    .collect(),
            );
            report(verb, config, "nested-squares-modulus", &run, pass)
        }
        Study::Growth => {
            let ms = config.ms.clone().unwrap_or_else(|| vec![2, 3, 4]);
            let run = experiments::appendix_growth(&ms, &entropy_config(config))?;
            art.csv = Some(
                std::iter::once("m,headline,floor\n".to_string())
                    .chain(run.rows.iter().map(|r| format!("{},{},{}\n", r.m, r.headline, r.floor)))
                    .collect(),
            );
            report(verb, config, "nested-squares-entropy-growth", &run, run.pass)
        }
        Study::Truncation => {
            let ms = config.ms.clone().unwrap_or_else(|| vec![2, 3, 4, 5]);
            let run = experiments::truncation_scan(&ms, config.cap, &[0.0, 0.5, 0.9], &[1.5, 2.0], config.seed)?;
            let mut csv = String::from("m,kind,exponent,distance\n");
            for r in &run.rows {
                for (a, v) in &r.holder {
                    csv.push_str(&format!("{},holder,{a},{v}\n", r.m));
                }
                for (p, v) in &r.sobolev {
                    csv.push_str(&format!("{},sobolev,{p},{v}\n", r.m));
                }
            }
            art.csv = Some(csv);
            report(verb, config, "nested-squares-truncation", &run, run.pass)
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// Runs the parsed command line inside a pool of the requested size and
/// writes every output. Returns the report; a failed check is reported
/// through `Report::pass`, not as an error.
pub fn run(cli: &Cli) -> Result<Report, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cli.workers.filter(|&w| w > 0) {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| usage(format!("worker pool: {e}")))?;
    let (rep, art) = pool.install(|| execute(cli.verb, &cli.config))?;
    if let (Some(path), Some(text)) = (&cli.out, &art.map_json) {
        write(path, text)?;
    }
    if let (Some(path), Some(text)) = (&cli.csv, &art.csv) {
        write(path, text)?;
    }
    if let (Some(path), Some(text)) = (&cli.svg, &art.svg) {
        write(path, text)?;
    }
    match &cli.report {
        Some(path) => write(path, &rep.to_json())?,
        None => print!("{}", rep.to_json()),
    }
    Ok(rep)
}

/// Exit code for a finished run.
pub fn exit_code(result: &Result<Report, CliError>) -> i32 {
    match result {
        Ok(r) if r.pass => 0,
        Ok(_) => crate::EXIT_FAILED,
        Err(e) => e.exit_code(),
    }
}
