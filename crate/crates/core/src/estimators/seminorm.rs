use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plan::{PlanKind, SamplingPlan};
use crate::error::{invalid, Result};
use crate::geometry::{Point, Rect};
use crate::homeo::HomeoExpr;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Holder(f64),
    Lip,
}

impl Exponent {
    pub fn value(self) -> f64 {
        match self {
            Exponent::Holder(a) => a,
            Exponent::Lip => 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleBin {
    /// Separations in [10^decade, 10^(decade+1)).
    pub decade: i32,
    pub count: usize,
    pub max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormReport {
    pub exponent: Exponent,
    pub value: f64,
    pub pair: (Point, Point),
    pub pairs: usize,
    pub skipped: usize,
    pub histogram: Vec<ScaleBin>,
}

#[derive(Clone, Copy)]
struct Best {
    q: f64,
    i: usize,
    j: usize,
}

fn better(a: Best, b: Best) -> Best {
    if b.q > a.q || (b.q == a.q && (b.i, b.j) < (a.i, a.j)) {
        b
    } else {
        a
    }
}

/// Pairs closer than this fraction of the sampled region's diameter are
/// skipped; their quotients are rounding noise.
pub const MIN_SEPARATION: f64 = 1e-9;

/// Difference quotients |F(x) − F(y)| / |x − y|^α over a pair list.
struct Quotients<'a, F: Fn(Point) -> Point + Sync> {
    f: &'a F,
    alpha: f64,
    min_sep: f64,
}

impl<F: Fn(Point) -> Point + Sync> Quotients<'_, F> {
    fn q(&self, x: Point, fx: Point, y: Point, fy: Point) -> Option<f64> {
        let d = x.dist(y);
        if d <= self.min_sep {
            return None;
        }
        Some(fx.dist(fy) / d.powf(self.alpha))
    }

    /// All pairs among `pts`; deterministic regardless of thread count.
    fn all_pairs(&self, pts: &[Point]) -> (Best, usize, usize, Vec<(i32, usize, f64)>) {
        let img: Vec<Point> = pts.par_iter().map(|&x| (self.f)(x)).collect();
        let rows: Vec<(Best, usize, Vec<(i32, usize, f64)>)> = (0..pts.len())
            .into_par_iter()
            .map(|i| {
                let mut best = Best { q: f64::NEG_INFINITY, i: usize::MAX, j: usize::MAX };
                let mut skipped = 0;
                let mut hist: Vec<(i32, usize, f64)> = Vec::new();
                for j in i + 1..pts.len() {
                    match self.q(pts[i], img[i], pts[j], img[j]) {
                        Some(q) => {
                            best = better(best, Best { q, i, j });
                            add_hist(&mut hist, pts[i].dist(pts[j]), q);
                        }
                        None => skipped += 1,
                    }
                }
                (best, skipped, hist)
            })
            .collect();
        let n = pts.len();
        let mut best = Best { q: f64::NEG_INFINITY, i: usize::MAX, j: usize::MAX };
        let mut skipped = 0;
        let mut hist = Vec::new();
        for (b, s, h) in rows {
            best = better(best, b);
            skipped += s;
            merge_hist(&mut hist, &h);
        }
        (best, n * (n - 1) / 2 - skipped, skipped, hist)
    }

    fn pair_list(&self, pairs: &[(Point, Point)]) -> (Best, usize, usize, Vec<(i32, usize, f64)>) {
        let vals: Vec<Option<f64>> = pairs.par_iter().map(|&(x, y)| self.q(x, (self.f)(x), y, (self.f)(y))).collect();
        let mut best = Best { q: f64::NEG_INFINITY, i: usize::MAX, j: usize::MAX };
        let mut skipped = 0;
        let mut hist = Vec::new();
        for (k, v) in vals.into_iter().enumerate() {
            match v {
                Some(q) => {
                    best = better(best, Best { q, i: k, j: k });
                    add_hist(&mut hist, pairs[k].0.dist(pairs[k].1), q);
                }
                None => skipped += 1,
            }
        }
        (best, pairs.len() - skipped, skipped, hist)
    }
}

fn add_hist(h: &mut Vec<(i32, usize, f64)>, d: f64, q: f64) {
    let dec = d.log10().floor() as i32;
    match h.iter_mut().find(|e| e.0 == dec) {
        Some(e) => {
            e.1 += 1;
            e.2 = e.2.max(q);
        }
        None => h.push((dec, 1, q)),
    }
}

fn merge_hist(h: &mut Vec<(i32, usize, f64)>, other: &[(i32, usize, f64)]) {
    for &(dec, c, m) in other {
        match h.iter_mut().find(|e| e.0 == dec) {
            Some(e) => {
                e.1 += c;
                e.2 = e.2.max(m);
            }
            None => h.push((dec, c, m)),
        }
    }
}

fn local_grid(center: Point, half: f64, k: usize, domain: &Rect) -> Vec<Point> {
    let mut out = Vec::with_capacity(k * k);
    for i in 0..k {
        for j in 0..k {
            let p = center
                + Point::new(
                    half * (2.0 * i as f64 / (k - 1) as f64 - 1.0),
                    half * (2.0 * j as f64 / (k - 1) as f64 - 1.0),
                );
            if domain.contains(p) {
                out.push(p);
            }
        }
    }
    out
}

/// Sampled α-Hölder seminorm of an arbitrary planar function.
pub fn seminorm_of<F: Fn(Point) -> Point + Sync>(f: &F, exponent: Exponent, plan: &SamplingPlan) -> Result<SeminormReport> {
    let alpha = exponent.value();
    if !(0.0..=1.0).contains(&alpha) {
        return invalid("Hölder exponent must lie in [0, 1]");
    }
    let qs = Quotients { f, alpha, min_sep: MIN_SEPARATION * plan.domain.diam() };
    let (mut best, mut pairs, mut skipped, mut hist, mut pair) = match plan.base() {
        PlanKind::PairCloud { .. } => {
            let list = plan.pair_list()?;
            if list.is_empty() {
                return invalid("sampling plan needs at least one pair");
            }
            let (b, n, s, h) = qs.pair_list(&list);
            let pr = if b.i == usize::MAX { (list[0].0, list[0].1) } else { list[b.i] };
            (b, n, s, h, pr)
        }
        _ => {
            let pts = plan.points()?;
            let (b, n, s, h) = qs.all_pairs(&pts);
            let pr = if b.i == usize::MAX { (pts[0], pts[0]) } else { (pts[b.i], pts[b.j]) };
            (b, n, s, h, pr)
        }
    };
    let mut half = pair.0.dist(pair.1).max(plan.spacing()) / 2.0;
    for _ in 0..plan.rounds() {
        let mut pts = local_grid(pair.0, half, 12, &plan.domain);
        pts.extend(local_grid(pair.1, half, 12, &plan.domain));
        pts.push(pair.0);
        pts.push(pair.1);
        let (b, n, s, h) = qs.all_pairs(&pts);
        pairs += n;
        skipped += s;
        merge_hist(&mut hist, &h);
        if b.i != usize::MAX && b.q > best.q {
            best = b;
            pair = (pts[b.i], pts[b.j]);
        }
        half /= 2.0;
    }
    hist.sort_by_key(|e| e.0);
    Ok(SeminormReport {
        exponent,
        value: if best.q.is_finite() { best.q } else { 0.0 },
        pair,
        pairs,
        skipped,
        histogram: hist.into_iter().map(|(decade, count, max)| ScaleBin { decade, count, max }).collect(),
    })
}

pub fn holder_seminorm(m: &HomeoExpr, exponent: Exponent, plan: &SamplingPlan) -> Result<SeminormReport> {
    seminorm_of(&|x| m.apply(x), exponent, plan)
}

/// sup |f − g| plus the α-seminorm of f − g on the plan.
pub fn holder_distance(f: &HomeoExpr, g: &HomeoExpr, exponent: Exponent, plan: &SamplingPlan) -> Result<f64> {
    let diff = |x: Point| f.apply(x) - g.apply(x);
    let sup = plan.points()?.par_iter().map(|&x| diff(x).norm()).reduce(|| 0.0, f64::max);
    let semi = seminorm_of(&diff, exponent, plan)?;
    Ok(sup + semi.value)
}

/// [m]_{α, B(x, r)} for each radius, sampled on a `res × res` grid.
pub fn little_holder_profile(
    m: &HomeoExpr,
    exponent: Exponent,
    x: Point,
    radii: &[f64],
    res: usize,
    domain: Option<&Rect>,
) -> Result<Vec<f64>> {
    radii
        .iter()
        .map(|&r| {
            if !(r > 0.0) {
                return invalid("radii must be positive");
            }
            let sq = Rect::new(x - Point::new(r, r), x + Point::new(r, r))?;
            if let Some(d) = domain {
                if !(d.contains(sq.min) && d.contains(sq.max)) {
                    return invalid("ball leaves the domain");
                }
            }
            let pts: Vec<Point> = sq.grid(res).into_iter().filter(|p| p.dist(x) < r).collect();
            let plan_pts = pts;
            let f = |p: Point| m.apply(p);
            let qs = Quotients { f: &f, alpha: exponent.value(), min_sep: MIN_SEPARATION * 2.0 * r };
            let (b, _, _, _) = qs.all_pairs(&plan_pts);
            // The ball's diameter pair is always included.
            let ends = [x - Point::new(r, 0.0) * 0.999_999, x + Point::new(r, 0.0) * 0.999_999];
            let (b2, _, _, _) = qs.all_pairs(&ends);
            Ok(b.q.max(b2.q).max(0.0))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub p: f64,
    pub pairs: usize,
    /// Per-decade maxima of |m(z) − m(w)| / (t·log(1/t)^p), t = |z − w|.
    pub decades: Vec<ScaleBin>,
    /// Largest ratio over all pairs.
    pub constant: f64,
    /// Largest relative growth of the decade maxima from one decade to the
    /// next smaller one; negative when they only shrink.
    pub drift: f64,
}

/// Sampled ratios against the gauge t·log(1/t)^p over random pairs whose
/// separations are log-uniform in [t_min, t_max], with t_max < 1.
pub fn modulus_profile(
    m: &HomeoExpr,
    p: f64,
    domain: &Rect,
    pairs: usize,
    seed: u64,
    t_min: f64,
    t_max: f64,
) -> Result<ModulusReport> {
    use rand::{Rng, SeedableRng};
    if !(0.0 < t_min && t_min < t_max && t_max < 1.0) || pairs == 0 {
        return invalid("modulus profile needs 0 < t_min < t_max < 1 and pairs > 0");
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (t_min.ln(), t_max.ln());
    let mut list = Vec::with_capacity(pairs);
    while list.len() < pairs {
        let x = Point::new(rng.gen_range(domain.min.x..=domain.max.x), rng.gen_range(domain.min.y..=domain.max.y));
        let t = rng.gen_range(lo..hi).exp();
        let y = x + Point::new(t, 0.0).rotate(rng.gen_range(0.0..std::f64::consts::TAU));
        if domain.contains(y) {
            list.push((x, y));
        }
    }
    let ratios: Vec<(f64, f64)> = list
        .par_iter()
        .map(|&(x, y)| {
            let t = x.dist(y);
            (t, m.apply(x).dist(m.apply(y)) / (t * (1.0 / t).ln().powf(p)))
        })
        .collect();
    let mut hist = Vec::new();
    for &(t, q) in &ratios {
        add_hist(&mut hist, t, q);
    }
    hist.sort_by_key(|e| std::cmp::Reverse(e.0));
    let drift = hist.windows(2).map(|w| (w[1].2 - w[0].2) / w[0].2).fold(f64::NEG_INFINITY, f64::max);
    Ok(ModulusReport {
        p,
        pairs,
        constant: ratios.iter().map(|r| r.1).fold(0.0, f64::max),
        drift,
        decades: hist.into_iter().map(|(decade, count, max)| ScaleBin { decade, count, max }).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homeo::{affine, identity, translation_move};

    fn unit() -> Rect {
        Rect::square(0.0, 1.0).unwrap()
    }

    #[test]
    fn identity_half_holder_is_diameter_power() {
        let plan = SamplingPlan::grid(unit(), 24);
        let r = holder_seminorm(&identity(), Exponent::Holder(0.5), &plan).unwrap();
        // Extreme grid points are the outermost cell centres.
        let sampled = (2f64.sqrt() * 23.0 / 24.0).sqrt();
        assert!((r.value - sampled).abs() < 1e-12, "{}", r.value);
        let refined = holder_seminorm(&identity(), Exponent::Holder(0.5), &plan.refined(2)).unwrap();
        assert!(refined.value >= r.value && refined.value <= 2f64.sqrt().sqrt() + 1e-12);
    }

    #[test]
    fn affine_lipschitz_is_exact() {
        let a = affine([[2.0, 0.0], [0.0, 2.0]], Point::ORIGIN).unwrap();
        let r = holder_seminorm(&a, Exponent::Lip, &SamplingPlan::grid(unit(), 10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        let q = a.apply(r.pair.0).dist(a.apply(r.pair.1)) / r.pair.0.dist(r.pair.1);
        assert_eq!(q, r.value);
    }

    #[test]
    fn refinement_never_decreases() {
        let m = translation_move(Point::new(0.3, 0.3), Point::new(0.5, 0.4), 0.05, 0.2).unwrap();
        let base = SamplingPlan::grid(unit(), 16);
        let a = holder_seminorm(&m, Exponent::Lip, &base).unwrap().value;
        let b = holder_seminorm(&m, Exponent::Lip, &base.clone().refined(2)).unwrap().value;
        assert!(b >= a);
    }

    #[test]
    fn distance_examples() {
        let plan = SamplingPlan::grid(unit(), 12);
        let t = translation_move(Point::new(5.0, 5.0), Point::new(5.5, 5.0), 0.1, 0.2).unwrap();
        assert_eq!(holder_distance(&t, &identity(), Exponent::Holder(0.5), &plan).unwrap(), 0.0);
        assert_eq!(holder_distance(&t, &t, Exponent::Holder(0.5), &plan).unwrap(), 0.0);
    }

    #[test]
    fn refinement_ignores_coincident_pairs() {
        // Refining around a tight pair used to compare points 1e-16 apart.
        let m = translation_move(Point::new(0.5, 0.5), Point::new(0.52, 0.5), 0.1, 0.2).unwrap();
        let dom = Rect::square(0.2, 0.9).unwrap();
        let disp = |x: Point| m.apply(x) - x;
        let m_bound = crate::homeo::moves::gronwall_m(Point::new(0.5, 0.5), Point::new(0.52, 0.5), 0.1, 0.2);
        for rounds in [2, 8, 16] {
            let r = seminorm_of(&disp, Exponent::Lip, &SamplingPlan::grid(dom, 48).refined(rounds)).unwrap();
            assert!(r.value <= m_bound * m_bound.exp(), "{rounds}: {}", r.value);
        }
        let fine = seminorm_of(&disp, Exponent::Lip, &SamplingPlan::grid(dom, 48).refined(16)).unwrap();
        assert!(fine.pair.0.dist(fine.pair.1) > MIN_SEPARATION * dom.diam());
    }

    #[test]
    fn modulus_of_affine_map() {
        let m = affine([[2.0, 0.0], [0.0, 2.0]], Point::ORIGIN).unwrap();
        let r = modulus_profile(&m, 1.0, &unit(), 2000, 4, 1e-6, 1.0 / 16.0).unwrap();
        // Ratio 2/log(1/t) is largest at the upper end of the range.
        assert!(r.constant <= 2.0 / 16f64.ln() + 1e-12);
        assert!(r.drift < 0.0);
        assert_eq!(r.decades.iter().map(|b| b.count).sum::<usize>(), 2000);
        assert!(modulus_profile(&m, 1.0, &unit(), 10, 0, 0.1, 1.0).is_err());
    }

    #[test]
    fn little_holder_profile_examples() {
        let radii = [0.05, 0.1, 0.2];
        let prof = little_holder_profile(&identity(), Exponent::Holder(0.5), Point::new(0.5, 0.5), &radii, 16, Some(&unit()))
            .unwrap();
        for (v, r) in prof.iter().zip(radii) {
            let exact = (2.0 * r).powf(0.5);
            assert!((v - exact).abs() / exact < 0.05, "{v} vs {exact}");
        }
        let a = affine([[3.0, 0.0], [0.0, 3.0]], Point::ORIGIN).unwrap();
        let prof = little_holder_profile(&a, Exponent::Holder(0.5), Point::new(0.5, 0.5), &radii, 16, None).unwrap();
        for (v, r) in prof.iter().zip(radii) {
            assert!(*v <= 3.0 * (2.0 * r).powf(0.5) + 1e-9);
        }
        assert!(little_holder_profile(&a, Exponent::Holder(0.5), Point::new(0.95, 0.5), &radii, 8, Some(&unit())).is_err());
    }
}
