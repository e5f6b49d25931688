//! Orbit closing and horseshoe insertion along a returning orbit segment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::{holder_distance, seminorm_of, sobolev_distance_split, Exponent, SamplingPlan};
use crate::geometry::{dist_to_segment, Ball, ElongatedNbhd, Point, Rect, Region, SolidCylinder};
use crate::homeo::{compose, cylinder_isometry, cylinder_transport, piecewise, translation_move, HomeoExpr, Part};
use crate::horseshoe::{
    branch_certificate_at, check_crossing, horseshoe_on_cylinder, CrossingCertificate, HorseshoeSpec,
};

/// Intermediate orbit points must avoid balls of this fraction of ρ about
/// both ends of a segment.
pub const EXCLUSION: f64 = 0.75;
/// Default width factor of the closing neighbourhood E(x^k, x⁰; c·ρ).
pub const DEFAULT_C: f64 = 0.25;
pub const CLOSING_ALPHAS: [f64; 2] = [0.5, 0.9];
pub const CLOSING_PS: [f64; 2] = [1.5, 2.0];
const EXTERIOR_SAMPLES: usize = 1000;
const PIECEWISE_RES: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReturnSegment {
    pub y: Point,
    pub eta: f64,
    /// x⁰.
    pub x: Point,
    pub k: usize,
    /// |x⁰ − x^k|.
    pub rho: f64,
    /// x⁰, …, x^k.
    pub orbit: Vec<Point>,
    pub exclusion: f64,
}

impl ReturnSegment {
    pub fn end(&self) -> Point {
        self.orbit[self.k]
    }
}

/// First return of the orbit of `y` to B(y, η/10), then shrunk until no
/// intermediate point comes within ¾ρ of either end.
pub fn find_return(f: &HomeoExpr, y: Point, eta: f64, max_iter: usize) -> Result<ReturnSegment> {
    if !(eta > 0.0) {
        return invalid("find_return needs eta > 0");
    }
    let mut orbit = vec![y];
    let mut z = y;
    let mut hit = None;
    for step in 1..=max_iter {
        z = f.apply(z);
        if !z.is_finite() {
            return Err(Error::NonFinite(orbit[step - 1]));
        }
        orbit.push(z);
        if z.dist(y) < eta / 10.0 {
            hit = Some(step);
            break;
        }
    }
    let Some(k) = hit else {
        return Err(Error::NoReturn(max_iter));
    };
    let (mut a, mut b) = (0, k);
    loop {
        let r = EXCLUSION * orbit[a].dist(orbit[b]);
        let Some(j) = (a + 1..b).find(|&j| orbit[j].dist(orbit[a]) < r || orbit[j].dist(orbit[b]) < r) else {
            break;
        };
        if orbit[j].dist(orbit[a]) < r {
            b = j;
        } else {
            a = j;
        }
    }
    if orbit[a].dist(y) >= eta || orbit[b].dist(y) >= eta {
        return invalid("refined pair left B(y, eta)");
    }
    let orbit = orbit[a..=b].to_vec();
    Ok(ReturnSegment {
        y,
        eta,
        x: orbit[0],
        k: b - a,
        rho: orbit[0].dist(orbit[b - a]),
        orbit,
        exclusion: EXCLUSION,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSample {
    /// α for Hölder sizes, p (= p*) for Sobolev sizes.
    pub exponent: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosingReport {
    pub segment: ReturnSegment,
    pub c: f64,
    /// E(x^k, x⁰; c·ρ); absent when the segment is already periodic.
    pub support: Option<ElongatedNbhd>,
    /// |g^k(x^k) − x^k|.
    pub residual: f64,
    pub exterior_samples: usize,
    pub exterior_mismatches: usize,
    pub holder: Vec<SizeSample>,
    pub sobolev: Vec<SizeSample>,
    pub g: HomeoExpr,
}

fn box_of(pts: &[Point], pad: f64) -> Result<Rect> {
    Ok(Rect::bounding(pts)?.expand(pad))
}

/// Replaces f by f ∘ φ on E(x^k, x⁰; c·ρ), where φ slides x^k onto x⁰.
pub fn close_orbit(f: &HomeoExpr, seg: &ReturnSegment, c: f64) -> Result<ClosingReport> {
    if !(c > 0.0) {
        return invalid("closing needs c > 0");
    }
    let (x0, xk) = (seg.orbit[0], seg.end());
    if seg.rho == 0.0 {
        return Ok(ClosingReport {
            segment: seg.clone(),
            c,
            support: None,
            residual: 0.0,
            exterior_samples: 0,
            exterior_mismatches: 0,
            holder: CLOSING_ALPHAS.iter().map(|&a| SizeSample { exponent: a, value: 0.0 }).collect(),
            sobolev: CLOSING_PS.iter().map(|&p| SizeSample { exponent: p, value: 0.0 }).collect(),
            g: f.clone(),
        });
    }
    let r = c * seg.rho;
    let e = ElongatedNbhd::new(xk, x0, r)?;
    if let Some(index) = (1..seg.k).find(|&j| e.contains(seg.orbit[j])) {
        return Err(Error::Precondition { index });
    }
    let phi = translation_move(xk, x0, r / 2.0, r)?;
    let g = piecewise(
        vec![Part { region: Region::Elongated(e), map: compose(vec![f.clone(), phi]) }],
        f.clone(),
        PIECEWISE_RES,
    )?;
    let back = g.iterate(xk, seg.k)?;
    let residual = back[seg.k].dist(xk);

    let around = box_of(&[x0, xk], 2.0 * r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut mismatches = 0;
    let mut drawn = 0;
    while drawn < EXTERIOR_SAMPLES {
        let x = Point::new(rng.gen_range(around.min.x..around.max.x), rng.gen_range(around.min.y..around.max.y));
        if e.contains(x) {
            continue;
        }
        drawn += 1;
        if g.apply(x) != f.apply(x) {
            mismatches += 1;
        }
    }

    let fwd = box_of(&[x0, xk], r)?;
    let images: Vec<Point> = Region::Elongated(e).boundary(r / 16.0).into_iter().map(|x| f.apply(x)).collect();
    let h = r / 8.0;
    let inv = box_of(&images, h)?;
    // Pairs are laid out in the frame of the segment x^k → x⁰.
    let u = (x0 - xk) / seg.rho;
    let to_plane = |s: Point| xk + u * s.x + u.perp() * s.y;
    let diff = |s: Point| {
        let x = to_plane(s);
        g.apply(x) - f.apply(x)
    };
    let frame = Rect::new(Point::new(-2.0 * r, -2.0 * r), Point::new(seg.rho + 2.0 * r, 2.0 * r))?;
    let plan = SamplingPlan::grid(frame, 40).refined(6);
    let sup = plan.points()?.iter().map(|&s| diff(s).norm()).fold(0.0, f64::max);
    let holder = CLOSING_ALPHAS
        .iter()
        .map(|&a| Ok(SizeSample { exponent: a, value: sup + seminorm_of(&diff, Exponent::Holder(a), &plan)?.value }))
        .collect::<Result<Vec<_>>>()?;
    let sobolev = CLOSING_PS
        .iter()
        .map(|&p| Ok(SizeSample { exponent: p, value: sobolev_distance_split(f, &g, p, p, &fwd, &inv, h)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClosingReport {
        segment: seg.clone(),
        c,
        support: Some(e),
        residual,
        exterior_samples: drawn,
        exterior_mismatches: mismatches,
        holder,
        sobolev,
        g,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosingDemo {
    pub reports: Vec<ClosingReport>,
    /// η actually used at each scale after retries.
    pub etas: Vec<f64>,
    pub holder_decreasing: bool,
    pub sobolev_decreasing: bool,
}

fn strictly_decreasing(rows: &[&Vec<SizeSample>]) -> bool {
    rows.windows(2).all(|w| w[0].iter().zip(w[1].iter()).all(|(a, b)| b.value < a.value))
}

/// Closes the orbit of `y` at η, η/2, …, η/2^(scales−1). A precondition
/// failure halves η and retries, at most three times per scale.
pub fn closing_demo(f: &HomeoExpr, y: Point, eta: f64, c: f64, scales: usize, max_iter: usize) -> Result<ClosingDemo> {
    let mut reports = Vec::with_capacity(scales);
    let mut etas = Vec::with_capacity(scales);
    for s in 0..scales {
        let mut e = eta / 2f64.powi(s as i32);
        let mut retries = 0;
        let report = loop {
            let seg = find_return(f, y, e, max_iter)?;
            match close_orbit(f, &seg, c) {
                Err(Error::Precondition { .. }) if retries < 3 => {
                    retries += 1;
                    e /= 2.0;
                }
                other => break other?,
            }
        };
        etas.push(e);
        reports.push(report);
    }
    let holder: Vec<&Vec<SizeSample>> = reports.iter().map(|r| &r.holder).collect();
    let sobolev: Vec<&Vec<SizeSample>> = reports.iter().map(|r| &r.sobolev).collect();
    Ok(ClosingDemo { holder_decreasing: strictly_decreasing(&holder), sobolev_decreasing: strictly_decreasing(&sobolev), reports, etas })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub branches: usize,
    pub r1: f64,
    /// Relative sampling step of the crossing certificates.
    pub resolution: f64,
    /// Links whose Hölder and Sobolev sizes are measured.
    pub size_links: usize,
    pub seed: u64,
}

impl ChainConfig {
    pub fn new(branches: usize, r1: f64) -> Self {
        ChainConfig { branches, r1, resolution: 1e-3, size_links: 2, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkCertificate {
    pub link: usize,
    pub pass: bool,
    pub crossings: Vec<CrossingCertificate>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkSize {
    pub link: usize,
    pub holder_half: f64,
    pub sobolev_two: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub branches: usize,
    pub k0: usize,
    /// Measured bi-Lipschitz constant of f near the segment.
    pub kappa: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    /// Lateral-to-axial ratio bound 1/(3κ²).
    pub shape_bound: f64,
    pub len: f64,
    pub rho_c: f64,
    /// C_0, …, C_{k0}.
    pub cylinders: Vec<SolidCylinder>,
    /// Links 0..k0 followed by the closing transport C_{k0} → C_0.
    pub certificates: Vec<LinkCertificate>,
    pub entropy_lower_bound: f64,
    pub sizes: Vec<LinkSize>,
}

impl ChainReport {
    pub fn passed(&self) -> usize {
        self.certificates.iter().filter(|c| c.pass).count()
    }
}

/// Sampled bi-Lipschitz constant of `f` on the balls B(c, r), at least 1.
pub fn bilipschitz_constant(f: &HomeoExpr, centers: &[Point], r: f64, seed: u64) -> Result<f64> {
    let mut kappa: f64 = 1.0;
    for (i, &c) in centers.iter().enumerate() {
        let plan = SamplingPlan::pairs(box_of(&[c], r)?, 400, seed + i as u64);
        for (x, y) in plan.pair_list()? {
            let d = x.dist(y);
            if d == 0.0 || x.dist(c) > r || y.dist(c) > r {
                continue;
            }
            let q = f.apply(x).dist(f.apply(y)) / d;
            kappa = kappa.max(q).max(1.0 / q);
        }
    }
    Ok(kappa)
}

pub fn insert_horseshoe_chain(
    f: &HomeoExpr,
    seg: &ReturnSegment,
    branches: usize,
    r1: f64,
) -> Result<(HomeoExpr, ChainReport)> {
    insert_horseshoe_chain_with(f, seg, &ChainConfig::new(branches, r1))
}

/// Replaces f near x⁰, …, x^{k0−1} so that cylinders C_j ⊂ B(x^j, r3) form
/// a closed chain of N-branched horseshoe links.
pub fn insert_horseshoe_chain_with(f: &HomeoExpr, seg: &ReturnSegment, cfg: &ChainConfig) -> Result<(HomeoExpr, ChainReport)> {
    let (n, r1) = (cfg.branches, cfg.r1);
    if n < 1 || !(r1 > 0.0) || seg.k < 1 {
        return invalid("chain needs N >= 1, r1 > 0 and k >= 1");
    }
    let k0 = seg.k;
    let x = &seg.orbit;
    for i in 1..k0 {
        if dist_to_segment(x[i], x[0], x[k0]) <= 2.0 * r1 {
            return Err(Error::Overlap { i: 0, j: i, resolution: r1 });
        }
        for j in i + 1..k0 {
            if x[i].dist(x[j]) <= 2.0 * r1 {
                return Err(Error::Overlap { i, j, resolution: r1 });
            }
        }
    }

    let kappa = bilipschitz_constant(f, &x[..k0], r1, cfg.seed)?;
    let r2 = r1 / (20.0 * (1.0 + kappa));
    let r3 = r2 / kappa;
    let shape_bound = 1.0 / (3.0 * kappa * kappa);
    let len = 0.9 * r3 / (0.25 + (0.6 * shape_bound).powi(2)).sqrt();
    let rho_c = 0.6 * shape_bound * len;
    let up = Point::new(0.0, 1.0);
    let (short_len, fat_rho) = (0.8 * len, 1.05 * rho_c);

    let mut cyl = vec![SolidCylinder::centered(x[0], up, short_len, fat_rho)?];
    for &p in &x[1..=k0] {
        cyl.push(SolidCylinder::centered(p, up, len, rho_c)?);
    }
    let c0_long = SolidCylinder::centered(x[0], up, len, rho_c)?;
    let c1_short = SolidCylinder::centered(x[1], up, short_len, fat_rho)?;

    let mut links = Vec::with_capacity(k0);
    let mut specs = Vec::with_capacity(k0);
    for j in 0..k0 {
        let (h, spec) = horseshoe_on_cylinder(n, &cyl[j])?;
        let c = &cyl[j];
        let image = SolidCylinder::centered(f.apply(c.center()), f.apply(c.b) - f.apply(c.a), c.len(), c.rho)?;
        let target = if j == 0 { c1_short } else { cyl[j + 1] };
        let t = cylinder_isometry(&image, &target, &Ball::new(x[j + 1], r3))?;
        links.push(compose(vec![t, f.clone(), h]));
        specs.push(HorseshoeSpec { n, support: spec.support, core: cyl[j + 1], strips: spec.strips });
    }
    let close = cylinder_transport(&cyl[k0], x[k0], &c0_long, x[0], r3)?;

    let omega0 = if x[0] == x[k0] {
        Region::Ball(Ball::new(x[0], r1))
    } else {
        Region::Elongated(ElongatedNbhd::new(x[0], x[k0], r1)?)
    };
    let mut parts = vec![Part { region: omega0, map: compose(vec![links[0].clone(), close.clone()]) }];
    for j in 1..k0 {
        parts.push(Part { region: Region::Ball(Ball::new(x[j], r1)), map: links[j].clone() });
    }
    let g = piecewise(parts, f.clone(), PIECEWISE_RES)?;

    let mut certificates = Vec::with_capacity(k0 + 1);
    for j in 0..k0 {
        let bc = branch_certificate_at(&links[j], &specs[j], cfg.resolution)?;
        if !bc.pass {
            let failed: Vec<Vec<usize>> = bc.strips.iter().map(|s| s.failed_conditions()).collect();
            return Err(Error::Certificate { link: j, reason: format!("strip conditions failed: {failed:?}") });
        }
        certificates.push(LinkCertificate { link: j, pass: true, crossings: bc.strips });
    }
    let cc = check_crossing(&close, &cyl[k0], &cyl[0], cfg.resolution)?;
    if !cc.pass() {
        return Err(Error::Certificate {
            link: k0,
            reason: format!("closing transport conditions failed: {:?}", cc.failed_conditions()),
        });
    }
    certificates.push(LinkCertificate { link: k0, pass: true, crossings: vec![cc] });

    let reach = (3.0 * kappa + 1.0) * r3;
    let h = len / 16.0;
    let mut sizes = Vec::new();
    for j in 0..k0.min(cfg.size_links) {
        let fwd = if j == 0 { box_of(&[x[0], x[k0]], reach)? } else { box_of(&[x[j]], reach)? };
        let inv = box_of(&[x[j + 1]], reach)?;
        let plan = SamplingPlan::pairs(fwd, 2000, cfg.seed + j as u64);
        sizes.push(LinkSize {
            link: j,
            holder_half: holder_distance(f, &g, Exponent::Holder(0.5), &plan)?,
            sobolev_two: sobolev_distance_split(f, &g, 2.0, 2.0, &fwd, &inv, h)?,
        });
    }

    let report = ChainReport {
        branches: n,
        k0,
        kappa,
        r1,
        r2,
        r3,
        shape_bound,
        len,
        rho_c,
        cylinders: cyl,
        certificates,
        entropy_lower_bound: (n as f64).ln(),
        sizes,
    };
    Ok((g, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{golden_twist, rational_twist};
    use crate::homeo::{affine, identity};

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn fixed_point_returns_immediately() {
        let s = find_return(&identity(), pt(0.3, 0.4), 0.1, 10).unwrap();
        assert_eq!((s.k, s.rho), (1, 0.0));
        let r = close_orbit(&identity(), &s, DEFAULT_C).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.g, identity());
    }

    #[test]
    fn expanding_map_never_returns() {
        let f = affine([[2.0, 0.0], [0.0, 2.0]], Point::ORIGIN).unwrap();
        assert_eq!(find_return(&f, pt(1.0, 1.0), 0.1, 50), Err(Error::NoReturn(50)));
        assert!(find_return(&f, pt(1.0, 1.0), 0.0, 50).is_err());
    }

    #[test]
    fn segment_invariants_hold() {
        let f = golden_twist();
        for eta in [0.2, 0.1, 0.05] {
            let s = find_return(&f, pt(0.6, 0.0), eta, 5000).unwrap();
            assert_eq!(s.orbit.len(), s.k + 1);
            assert!(s.x.dist(s.y) < eta && s.end().dist(s.y) < eta);
            for j in 1..s.k {
                assert!(s.orbit[j].dist(s.x) >= 0.75 * s.rho);
                assert!(s.orbit[j].dist(s.end()) >= 0.75 * s.rho);
            }
        }
    }

    #[test]
    fn closing_is_exactly_periodic() {
        let f = golden_twist();
        let s = find_return(&f, pt(0.6, 0.0), 0.1, 5000).unwrap();
        let r = close_orbit(&f, &s, DEFAULT_C).unwrap();
        assert!(r.residual <= 1e-9, "{}", r.residual);
        assert_eq!(r.exterior_samples, 1000);
        assert_eq!(r.exterior_mismatches, 0);
        assert!(r.holder.iter().chain(&r.sobolev).all(|s| s.value > 0.0 && s.value.is_finite()));
    }

    #[test]
    fn fat_neighbourhood_violates_precondition() {
        let f = golden_twist();
        let s = find_return(&f, pt(0.6, 0.0), 0.1, 5000).unwrap();
        assert!(matches!(close_orbit(&f, &s, 50.0), Err(Error::Precondition { .. })));
    }

    #[test]
    fn fixed_point_self_link() {
        let f = identity();
        let s = find_return(&f, pt(0.5, 0.5), 0.1, 10).unwrap();
        let (_, rep) = insert_horseshoe_chain(&f, &s, 2, 0.1).unwrap();
        assert_eq!(rep.certificates.len(), 2);
        assert_eq!(rep.passed(), 2);
        assert!((rep.entropy_lower_bound - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn rational_chain_certificates() {
        let f = rational_twist(2, 5).unwrap();
        let s = find_return(&f, pt(0.6, 0.0), 0.1, 100).unwrap();
        assert_eq!(s.k, 5);
        let (g, rep) = insert_horseshoe_chain(&f, &s, 2, 0.15).unwrap();
        assert_eq!(rep.passed(), 6);
        assert!((rep.kappa - 1.0).abs() < 1e-6);
        let far = pt(0.0, 0.95);
        assert_eq!(g.apply(far), f.apply(far));
        assert!(rep.sizes.iter().all(|s| s.holder_half > 0.0 && s.sobolev_two > 0.0));
    }

    #[test]
    fn crowded_balls_are_rejected() {
        let f = rational_twist(2, 5).unwrap();
        let s = find_return(&f, pt(0.6, 0.0), 0.1, 100).unwrap();
        assert!(matches!(insert_horseshoe_chain(&f, &s, 2, 0.4), Err(Error::Overlap { .. })));
    }
}
