//! Reproducible experiments shared by the CLI verbs and the acceptance suite.

use entrolab::constructions::{appendix_a_map, golden_twist, rational_twist, square_piece, truncation_sequence, NestedSquares};
use entrolab::entropy::{entropy_estimate, lipschitz_upper_bound, reconcile, EntropyConfig, EntropyEstimate, Verdict};
use entrolab::estimators::{
    gluing_bound_check, gv_inequality_check, holder_distance, holder_seminorm, inverse_energy_check,
    jacobian_bound_check, modulus_profile, rescaling_bound_check, seminorm_of, sobolev_distance, sobolev_energy,
    Exponent, ModulusReport, SamplingPlan,
};
use entrolab::homeo::bump::{BumpProfile, SLOPE};
use entrolab::homeo::moves::gronwall_m;
use entrolab::homeo::{affine, affinity_move, rotation_move, translation_move};
use entrolab::horseshoe::make_horseshoe;
use entrolab::perturb::{closing_demo, find_return, insert_horseshoe_chain, ChainReport, ClosingDemo, DEFAULT_C};
use entrolab::{
    branch_certificate, compose, identity, inverse, piecewise, Ball, HomeoExpr, Part, Point, Rect, Region, Result,
    SolidCylinder,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::maps::ResolvedMap;

pub const N_VALUES: [usize; 7] = [2, 3, 4, 5, 6, 7, 8];
pub const HORSESHOE_EPS: [f64; 3] = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
pub const CLOUD_RES: usize = 128;
pub const REFINE_ROUNDS: usize = 40;
pub const HORSESHOE_TOL: f64 = 0.15;
pub const GROWTH_FACTOR: f64 = 0.8;
pub const CHAIN_FACTOR: f64 = 0.85;
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const INVERSE_ENERGY_TOL: f64 = 0.05;
pub const SLOPE_TOL: f64 = 0.01;
pub const ROUND_TRIP_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct EntropyRun {
    pub estimate: EntropyEstimate,
    /// log N from a passing branch certificate.
    pub certificate: Option<f64>,
    /// Sampled Lipschitz constant on the cloud domain.
    pub lipschitz: f64,
    pub lip_bound: f64,
    pub verdict: Option<Verdict>,
}

/// Entropy estimate over `plan`, bracketed by the branch certificate (when
/// the map carries one) and the Lipschitz bound sampled on `domain`.
pub fn entropy_run(
    map: &ResolvedMap,
    domain: &Rect,
    plan: &SamplingPlan,
    ns: &[usize],
    eps: &[f64],
    cfg: &EntropyConfig,
    rel_tol: f64,
) -> Result<EntropyRun> {
    let estimate = entropy_estimate(&map.expr, ns, eps, plan, cfg)?;
    let lip_plan = SamplingPlan::pairs(*domain, 20_000, cfg.seed).refined(8);
    let lipschitz = holder_seminorm(&map.expr, Exponent::Lip, &lip_plan)?.value;
    let lip_bound = lipschitz_upper_bound(lipschitz.max(f64::MIN_POSITIVE), 2.0)?;
    let certificate = match &map.spec {
        Some(spec) => branch_certificate(&map.expr, spec)?.bound,
        None => None,
    };
    let verdict = match certificate {
        Some(c) => Some(reconcile(&estimate, c, lip_bound, rel_tol * c)?),
        None => None,
    };
    let estimate = estimate.with_bounds(certificate, Some(lip_bound));
    Ok(EntropyRun { estimate, certificate, lipschitz, lip_bound, verdict })
}

#[derive(Clone, Debug, Serialize)]
pub struct HorseshoeEntropy {
    pub branches: usize,
    pub log_n: f64,
    pub relative_error: f64,
    /// Headline within the relative tolerance of log N.
    pub within: bool,
    pub run: EntropyRun,
}

/// make_horseshoe(N) on the inner square, sampled on the box of its core
/// cylinder, with the default ε-list and cloud.
pub fn horseshoe_entropy(branches: usize, cfg: &EntropyConfig) -> Result<HorseshoeEntropy> {
    let r = NestedSquares::inner();
    let (expr, spec) = make_horseshoe(branches, &r)?;
    let core = spec.core.bounding_rect();
    let map = ResolvedMap { expr, spec: Some(spec), domain: core };
    let plan = SamplingPlan::grid(core, CLOUD_RES).refined(REFINE_ROUNDS);
    let run = entropy_run(&map, &core, &plan, &N_VALUES, &HORSESHOE_EPS, cfg, HORSESHOE_TOL)?;
    let log_n = (branches as f64).ln();
    let relative_error = (run.estimate.headline - log_n).abs() / log_n;
    Ok(HorseshoeEntropy { branches, log_n, relative_error, within: relative_error <= HORSESHOE_TOL, run })
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusRun {
    pub m: usize,
    pub t_max: f64,
    pub report: ModulusReport,
    pub pass: bool,
}

/// Gauge ratios of appendix_a_map(m) over [1e-6, min(1/16, e^{−p})].
pub fn appendix_modulus(m: usize, p: f64, pairs: usize, seed: u64) -> Result<ModulusRun> {
    let f = appendix_a_map(m, None)?;
    let t_max = (1.0f64 / 16.0).min((-p).exp());
    let report = modulus_profile(&f, p, &Rect::square(0.0, 1.0)?, pairs, seed, 1e-6, t_max)?;
    let pass = report.constant.is_finite() && report.drift < 0.1;
    Ok(ModulusRun { m, t_max, report, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthRow {
    pub m: usize,
    pub headline: f64,
    pub floor: f64,
    pub estimate: EntropyEstimate,
}

#[derive(Clone, Debug, Serialize)]
pub struct Growth {
    pub rows: Vec<GrowthRow>,
    pub non_decreasing: bool,
    pub above_floor: bool,
    pub pass: bool,
}

/// Entropy of appendix_a_map(m) sampled on the core box of its m-branched
/// piece in Q_m, with the ε-list scaled by the chart factor 2⁻ᵐ.
pub fn appendix_growth(ms: &[usize], cfg: &EntropyConfig) -> Result<Growth> {
    let mut rows = Vec::new();
    for &m in ms {
        let f = appendix_a_map(m, None)?;
        let s = 0.5f64.powi(m as i32);
        let eps: Vec<f64> = HORSESHOE_EPS.iter().map(|e| e * s).collect();
        let core = square_piece(m, m)?.1.core.bounding_rect();
        let plan = SamplingPlan::grid(core, CLOUD_RES).refined(REFINE_ROUNDS);
        let estimate = entropy_estimate(&f, &N_VALUES, &eps, &plan, cfg)?;
        let floor = GROWTH_FACTOR * (m as f64).ln();
        rows.push(GrowthRow { m, headline: estimate.headline, floor, estimate });
    }
    let non_decreasing = rows.windows(2).all(|w| w[1].headline >= w[0].headline);
    let above_floor = rows.iter().all(|r| r.headline >= r.floor);
    Ok(Growth { rows, non_decreasing, above_floor, pass: non_decreasing && above_floor })
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationRow {
    pub m: usize,
    /// (α, distance) pairs.
    pub holder: Vec<(f64, f64)>,
    /// (p, distance) pairs.
    pub sobolev: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TruncationScan {
    pub cap: usize,
    pub rows: Vec<TruncationRow>,
    /// Per exponent, in the order of the rows' columns.
    pub holder_decreasing: Vec<bool>,
    pub sobolev_decreasing: Vec<bool>,
    pub pass: bool,
}

/// Distances of truncation_sequence(m, cap) to the identity, sampled on the
/// bounding square [0, 2^{1−m}]² of its support.
pub fn truncation_scan(ms: &[usize], cap: usize, alphas: &[f64], ps: &[f64], seed: u64) -> Result<TruncationScan> {
    let id = identity();
    let mut rows = Vec::new();
    for &m in ms {
        let t = truncation_sequence(m, cap)?;
        let dom = Rect::square(0.0, 0.5f64.powi(m as i32 - 1))?;
        let plan = SamplingPlan::pairs(dom, 20_000, seed).refined(8);
        let holder = alphas
            .iter()
            .map(|&a| Ok((a, holder_distance(&t, &id, Exponent::Holder(a), &plan)?)))
            .collect::<Result<Vec<_>>>()?;
        let h = dom.width() / 128.0;
        let sobolev =
            ps.iter().map(|&p| Ok((p, sobolev_distance(&t, &id, p, p, &dom, h)?))).collect::<Result<Vec<_>>>()?;
        rows.push(TruncationRow { m, holder, sobolev });
    }
    let dec = |col: &dyn Fn(&TruncationRow) -> f64| rows.windows(2).all(|w| col(&w[1]) < col(&w[0]));
    let holder_decreasing: Vec<bool> = (0..alphas.len()).map(|i| dec(&|r| r.holder[i].1)).collect();
    let sobolev_decreasing: Vec<bool> = (0..ps.len()).map(|i| dec(&|r| r.sobolev[i].1)).collect();
    let pass = holder_decreasing.iter().chain(&sobolev_decreasing).all(|&b| b);
    Ok(TruncationScan { cap, rows, holder_decreasing, sobolev_decreasing, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosingRun {
    pub demo: ClosingDemo,
    pub max_residual: f64,
    pub exterior_ok: bool,
    /// C^{0.5} and W^{1,2} distances strictly decrease across the scales.
    pub holder_half_decreasing: bool,
    pub sobolev_two_decreasing: bool,
    pub pass: bool,
}

fn column_decreasing(rows: &[&[entrolab::perturb::SizeSample]], exponent: f64) -> bool {
    let col: Vec<f64> =
        rows.iter().filter_map(|r| r.iter().find(|s| s.exponent == exponent).map(|s| s.value)).collect();
    col.len() == rows.len() && col.windows(2).all(|w| w[1] < w[0])
}

pub fn closing_run(f: &HomeoExpr, y: Point, eta: f64, c: f64, scales: usize, max_iter: usize) -> Result<ClosingRun> {
    let demo = closing_demo(f, y, eta, c, scales, max_iter)?;
    let max_residual = demo.reports.iter().map(|r| r.residual).fold(0.0, f64::max);
    let exterior_ok = demo.reports.iter().all(|r| r.exterior_mismatches == 0 && (r.segment.rho == 0.0 || r.exterior_samples == 1000));
    let holder: Vec<&[_]> = demo.reports.iter().map(|r| r.holder.as_slice()).collect();
    let sobolev: Vec<&[_]> = demo.reports.iter().map(|r| r.sobolev.as_slice()).collect();
    let holder_half_decreasing = column_decreasing(&holder, 0.5);
    let sobolev_two_decreasing = column_decreasing(&sobolev, 2.0);
    let pass = max_residual <= RESIDUAL_TOL && exterior_ok && holder_half_decreasing && sobolev_two_decreasing;
    Ok(ClosingRun { demo, max_residual, exterior_ok, holder_half_decreasing, sobolev_two_decreasing, pass })
}

/// The golden-twist closing experiment at four scales.
pub fn golden_closing() -> Result<ClosingRun> {
    closing_run(&golden_twist(), Point::new(0.6, 0.0), 0.1, DEFAULT_C, 4, 5000)
}

#[derive(Clone, Debug, Serialize)]
pub struct GronwallRow {
    pub p: Point,
    pub q: Point,
    pub r1: f64,
    pub r2: f64,
    pub m: f64,
    pub displacement_lip: f64,
    pub bound: f64,
    pub slope: f64,
    pub slope_bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GronwallSuite {
    pub rows: Vec<GronwallRow>,
    pub pass: bool,
}

/// Random translation moves: [φ − id]_Lip ≤ M·e^M and the sampled bump slope
/// stays within 1% of (15/8)/(r2 − r1).
pub fn gronwall_suite(count: usize, seed: u64) -> Result<GronwallSuite> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let p = Point::new(rng.gen_range(0.3..0.7), rng.gen_range(0.3..0.7));
        let q = p + Point::new(1.0, 0.0).rotate(rng.gen_range(0.0..std::f64::consts::TAU)) * rng.gen_range(0.02..0.2);
        let r1 = rng.gen_range(0.05..0.2);
        let r2 = r1 + rng.gen_range(0.05..0.3);
        let phi = translation_move(p, q, r1, r2)?;
        let dom = Rect::bounding(&[p, q])?.expand(r2);
        let disp = |x: Point| phi.apply(x) - x;
        let lip = seminorm_of(&disp, Exponent::Lip, &SamplingPlan::grid(dom, 48).refined(6))?.value;
        let b = BumpProfile::new(r1, r2)?;
        let k = 10_000;
        let dt = (r2 - r1) / k as f64;
        let slope = (0..k)
            .map(|i| {
                let t = r1 + i as f64 * dt;
                (b.value(t + dt) - b.value(t)).abs() / dt
            })
            .fold(0.0, f64::max);
        let m = gronwall_m(p, q, r1, r2);
        rows.push(GronwallRow {
            p,
            q,
            r1,
            r2,
            m,
            displacement_lip: lip,
            bound: m * m.exp(),
            slope,
            slope_bound: SLOPE / (r2 - r1),
        });
    }
    let pass = rows.iter().all(|r| r.displacement_lip <= r.bound && r.slope <= r.slope_bound * (1.0 + SLOPE_TOL));
    Ok(GronwallSuite { rows, pass })
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityRow {
    pub map: String,
    pub check: String,
    pub pass: bool,
    /// Check-specific figure: worst ratio, measured constant or slack.
    pub value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalitySuite {
    pub rows: Vec<InequalityRow>,
    pub violations: usize,
    pub pass: bool,
}

struct Subject {
    name: &'static str,
    map: HomeoExpr,
    domain: Rect,
    smooth: bool,
    glued: bool,
}

fn subjects() -> Result<Vec<Subject>> {
    let unit = Rect::square(0.0, 1.0)?;
    let r = NestedSquares::inner();
    let c = SolidCylinder::centered(Point::new(0.5, 0.5), Point::new(1.0, 0.0), 0.3, 0.08)?;
    let c2 = SolidCylinder::centered(Point::new(0.5, 0.5), Point::new(1.0, 0.0), 0.2, 0.1)?;
    let bumps = piecewise(
        vec![
            Part { region: Region::Rect(Rect::square(0.0, 0.45)?), map: rotation_move(Point::new(0.225, 0.225), 0.7, 0.1)? },
            Part {
                region: Region::Rect(Rect::new(Point::new(0.55, 0.0), Point::new(1.0, 0.45))?),
                map: rotation_move(Point::new(0.775, 0.225), -0.5, 0.1)?,
            },
        ],
        identity(),
        1e-3,
    )?;
    let (h0, _) = make_horseshoe(2, &Rect::square(0.1, 0.2)?)?;
    let (h1, _) = make_horseshoe(3, &Rect::new(Point::new(0.6, 0.1), Point::new(0.7, 0.2))?)?;
    let horseshoes = piecewise(
        vec![
            Part { region: Region::Rect(Rect::square(0.0, 0.3)?), map: h0 },
            Part { region: Region::Rect(Rect::new(Point::new(0.5, 0.0), Point::new(0.8, 0.3))?), map: h1 },
        ],
        identity(),
        1e-3,
    )?;
    let s = |name, map, domain, smooth, glued| Subject { name, map, domain, smooth, glued };
    Ok(vec![
        s("horseshoe-2", make_horseshoe(2, &r)?.0, r, false, false),
        s("horseshoe-3", make_horseshoe(3, &r)?.0, r, false, false),
        s("rotation", rotation_move(Point::new(0.5, 0.5), 1.0, 0.2)?, unit, true, false),
        s("translation", translation_move(Point::new(0.4, 0.5), Point::new(0.6, 0.5), 0.1, 0.3)?, unit, true, false),
        s("affinity", affinity_move(&c, &c2)?, unit, true, false),
        s("golden-twist", golden_twist(), Rect::square(-1.0, 1.0)?, false, false),
        s("appendix-a-3", appendix_a_map(3, None)?, unit, false, false),
        s("two-bumps", bumps, unit, true, true),
        s("two-horseshoes", horseshoes, unit, false, true),
    ])
}

/// Energy double inequality, |J| ≤ 2|Df|², GV, inverse energy, rescaling and
/// gluing on 100 × 100 cell grids over every constructed map.
pub fn inequality_suite(seed: u64) -> Result<InequalitySuite> {
    let mut rows = Vec::new();
    let phi0 = affine([[2.0, 0.0], [0.0, 2.0]], Point::new(-0.5, 0.25))?;
    let phi1 = affine([[0.5, 0.3], [0.0, 0.5]], Point::ORIGIN)?;
    for sub in subjects()? {
        let d = sub.domain;
        let h = d.width() / 100.0;
        let mut push = |check: &str, pass: bool, value: f64| {
            rows.push(InequalityRow { map: sub.name.into(), check: check.into(), pass, value })
        };
        for p in [1.5, 2.0] {
            let e = sobolev_energy(&sub.map, p, &d, h)?;
            push(&format!("energy-double-inequality-p{p}"), e.double_inequality_holds(), e.df_p / e.e_p.max(f64::MIN_POSITIVE));
        }
        let j = jacobian_bound_check(&sub.map, &d, h, 2)?;
        push("jacobian-bound", j.pass, j.worst_ratio);
        let gv = gv_inequality_check(&sub.map, &Ball::new(d.center(), d.width() / 4.0), 2000, seed, h)?;
        push("gv", gv.pass, gv.worst_ratio);
        if sub.smooth {
            let inner = d.expand(-d.width() / 8.0);
            let ie = inverse_energy_check(&sub.map, &inner, 2.0, h, INVERSE_ENERGY_TOL)?;
            push("inverse-energy", ie.pass, ie.lhs / ie.rhs);
        }
        let image = Rect::bounding(&[phi0.apply(d.min), phi0.apply(d.max)])?;
        let rs = rescaling_bound_check(&sub.map, &phi0, &phi1, 0.5, 1.0, &SamplingPlan::pairs(image, 4000, seed))?;
        push("rescaling", rs.pass, rs.lhs / rs.rhs);
        if sub.glued {
            let gl = gluing_bound_check(&sub.map, 0.5, &SamplingPlan::grid(d, 48))?;
            push("gluing", gl.pass, gl.k_measured);
        }
    }
    let violations = rows.iter().filter(|r| !r.pass).count();
    Ok(InequalitySuite { rows, violations, pass: violations == 0 })
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainRun {
    pub report: ChainReport,
    pub estimate: Option<EntropyEstimate>,
    pub floor: f64,
    pub certificates_ok: bool,
    pub pass: bool,
}

/// Horseshoe chain along the return segment of `y` under `f`, with the
/// entropy of the result sampled on the box of C_0.
pub fn chain_run(
    f: &HomeoExpr,
    y: Point,
    eta: f64,
    branches: usize,
    r1: f64,
    entropy: bool,
    cfg: &EntropyConfig,
) -> Result<ChainRun> {
    let seg = find_return(f, y, eta, 10_000)?;
    let (g, report) = insert_horseshoe_chain(f, &seg, branches, r1)?;
    let floor = CHAIN_FACTOR * (branches as f64).ln();
    let certificates_ok = !report.certificates.is_empty() && report.passed() == report.certificates.len();
    let estimate = if entropy {
        let l = report.len;
        let eps: Vec<f64> = [3.0 / 16.0, 3.0 / 32.0, 3.0 / 64.0].iter().map(|e| e * l).collect();
        let plan = SamplingPlan::grid(report.cylinders[0].bounding_rect(), CLOUD_RES).refined(REFINE_ROUNDS);
        Some(entropy_estimate(&g, &N_VALUES, &eps, &plan, cfg)?)
    } else {
        None
    };
    let pass = certificates_ok && estimate.as_ref().map_or(true, |e| e.headline >= floor);
    Ok(ChainRun { report, estimate, floor, certificates_ok, pass })
}

/// The period-5 rational-twist chain with two branches.
pub fn rational_chain(cfg: &EntropyConfig) -> Result<ChainRun> {
    chain_run(&rational_twist(2, 5)?, Point::new(0.6, 0.0), 0.1, 2, 0.15, true, cfg)
}

#[derive(Clone, Debug, Serialize)]
pub struct RoundTripRow {
    pub kind: String,
    pub max_error: f64,
    pub pass: bool,
}

/// One expression of every node kind, flows at `steps` RK4 steps.
pub fn node_kinds(steps: usize) -> Result<Vec<(&'static str, HomeoExpr, Rect)>> {
    let unit = Rect::square(0.0, 1.0)?;
    let c = SolidCylinder::centered(Point::new(0.5, 0.5), Point::new(1.0, 0.0), 0.3, 0.08)?;
    let c2 = SolidCylinder::centered(Point::new(0.5, 0.5), Point::new(1.0, 0.0), 0.2, 0.1)?;
    let tr = translation_move(Point::new(0.4, 0.5), Point::new(0.6, 0.5), 0.1, 0.3)?;
    let rot = rotation_move(Point::new(0.5, 0.5), 1.0, 0.2)?;
    let aff = affine([[1.0, 0.4], [-0.2, 0.9]], Point::new(0.1, 0.0))?;
    let flow = |m: HomeoExpr| m.with_steps(steps);
    Ok(vec![
        ("identity", identity(), unit),
        ("affine", aff.clone(), unit),
        ("translation_move", flow(tr.clone()), unit),
        ("rotation_move", flow(rot.clone()), unit),
        ("affinity_move", flow(affinity_move(&c, &c2)?), unit),
        ("twist", golden_twist(), Rect::square(-1.0, 1.0)?),
        ("horseshoe", make_horseshoe(3, &unit)?.0, unit),
        ("piecewise", appendix_a_map(3, None)?, unit),
        ("compose", compose(vec![flow(tr), aff.clone(), flow(rot)]), unit),
        ("inverse", inverse(aff), unit),
    ])
}

pub fn round_trip_suite(points: usize, steps: usize, seed: u64) -> Result<Vec<RoundTripRow>> {
    let mut out = Vec::new();
    for (kind, m, d) in node_kinds(steps)? {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..points {
            let x = Point::new(rng.gen_range(d.min.x..d.max.x), rng.gen_range(d.min.y..d.max.y));
            worst = worst.max(m.apply_inv(m.apply(x)).dist(x)).max(m.apply(m.apply_inv(x)).dist(x));
        }
        out.push(RoundTripRow { kind: kind.into(), max_error: worst, pass: worst <= ROUND_TRIP_TOL });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gronwall_rows_respect_their_bounds() {
        let g = gronwall_suite(3, 1).unwrap();
        assert!(g.pass);
        for r in &g.rows {
            assert!(r.r2 > r.r1 && r.m > 0.0);
            assert!(r.slope <= r.slope_bound * (1.0 + SLOPE_TOL));
        }
    }

    #[test]
    fn every_node_kind_round_trips() {
        let rows = round_trip_suite(50, 256, 1).unwrap();
        assert_eq!(rows.len(), 10);
        assert!(rows.iter().all(|r| r.pass), "{rows:?}");
    }

    #[test]
    fn truncation_distances_vanish_past_the_cap() {
        let t = truncation_scan(&[9], 8, &[0.5], &[2.0], 0).unwrap();
        assert_eq!(t.rows[0].holder[0].1, 0.0);
        assert_eq!(t.rows[0].sobolev[0].1, 0.0);
    }
}
