use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Ball, Point, Rect, Region};
use crate::homeo::{HomeoExpr, Node};

/// Row-major Jacobian [[∂u/∂x, ∂u/∂y], [∂v/∂x, ∂v/∂y]].
pub type Jacobian = [[f64; 2]; 2];

/// Sum of absolute entries, the matrix norm used for |Df|.
pub fn sum_norm(j: &Jacobian) -> f64 {
    j[0][0].abs() + j[0][1].abs() + j[1][0].abs() + j[1][1].abs()
}

pub fn det(j: &Jacobian) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

fn piece_label(m: &HomeoExpr, x: Point) -> usize {
    match &m.node {
        Node::Piecewise { parts, .. } => parts.iter().position(|p| p.region.contains(x)).unwrap_or(parts.len()),
        _ => 0,
    }
}

/// Finite-difference Jacobian; falls back to a one-sided stencil when the
/// central one would straddle a piece boundary.
pub fn jacobian_with<F, L>(f: &F, label: &L, x: Point, h: f64) -> Result<Jacobian>
where
    F: Fn(Point) -> Point,
    L: Fn(Point) -> usize,
{
    let l0 = label(x);
    let fx = f(x);
    let mut cols = [Point::ORIGIN; 2];
    for (k, e) in [Point::new(h, 0.0), Point::new(0.0, h)].into_iter().enumerate() {
        let (lp, lm) = (label(x + e), label(x - e));
        cols[k] = if lp == l0 && lm == l0 {
            (f(x + e) - f(x - e)) / (2.0 * h)
        } else if lp == l0 {
            (f(x + e) - fx) / h
        } else if lm == l0 {
            (fx - f(x - e)) / h
        } else {
            (f(x + e) - f(x - e)) / (2.0 * h)
        };
        if !cols[k].is_finite() {
            return Err(Error::NonFinite(x));
        }
    }
    Ok([[cols[0].x, cols[1].x], [cols[0].y, cols[1].y]])
}

pub fn jacobian(m: &HomeoExpr, x: Point, h: f64) -> Result<Jacobian> {
    jacobian_with(&|p| m.apply(p), &|p| piece_label(m, p), x, h)
}

pub fn jacobian_inv(m: &HomeoExpr, y: Point, h: f64) -> Result<Jacobian> {
    jacobian_with(&|p| m.apply_inv(p), &|p| piece_label(m, m.apply_inv(p)), y, h)
}

/// Cell centres and the common cell area of a grid with step about `h`.
fn cells(domain: &Rect, h: f64) -> Result<(Vec<Point>, f64)> {
    if !(h > 0.0) {
        return invalid("grid step must be positive");
    }
    let nx = (domain.width() / h).ceil().max(1.0) as usize;
    let ny = (domain.height() / h).ceil().max(1.0) as usize;
    let (hx, hy) = (domain.width() / nx as f64, domain.height() / ny as f64);
    let mut pts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            pts.push(Point::new(domain.min.x + (i as f64 + 0.5) * hx, domain.min.y + (j as f64 + 0.5) * hy));
        }
    }
    Ok((pts, hx * hy))
}

fn stencil(h: f64) -> f64 {
    h / 4.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub p: f64,
    pub h: f64,
    pub cells: usize,
    /// ∫ |∇u|^p + |∇v|^p.
    pub e_p: f64,
    /// ∫ |Df|^p with |Df| the entrywise sum norm.
    pub df_p: f64,
    /// ∫ |J_f|.
    pub jacobian: f64,
}

impl EnergyReport {
    /// E_p ≤ ∫|Df|^p ≤ 2^{3p/2}·E_p.
    pub fn double_inequality_holds(&self) -> bool {
        let slack = 1e-9 * self.df_p.abs().max(1.0);
        self.e_p <= self.df_p + slack && self.df_p <= 2f64.powf(1.5 * self.p) * self.e_p + slack
    }
}

pub fn sobolev_energy(m: &HomeoExpr, p: f64, domain: &Rect, h: f64) -> Result<EnergyReport> {
    if !(p >= 1.0) {
        return invalid("energy exponent must be >= 1");
    }
    let (pts, area) = cells(domain, h)?;
    let vals: Vec<[f64; 3]> = pts
        .par_iter()
        .map(|&x| {
            let j = jacobian(m, x, stencil(h))?;
            let gu = j[0][0].hypot(j[0][1]);
            let gv = j[1][0].hypot(j[1][1]);
            Ok([gu.powf(p) + gv.powf(p), sum_norm(&j).powf(p), det(&j).abs()])
        })
        .collect::<Result<_>>()?;
    let mut acc = [0.0; 3];
    for v in &vals {
        for k in 0..3 {
            acc[k] += v[k];
        }
    }
    Ok(EnergyReport { p, h, cells: pts.len(), e_p: acc[0] * area, df_p: acc[1] * area, jacobian: acc[2] * area })
}

fn w1p_norm_of_difference<F, G, L>(f: &F, g: &G, lf: &L, lg: &L, p: f64, domain: &Rect, h: f64) -> Result<f64>
where
    F: Fn(Point) -> Point + Sync,
    G: Fn(Point) -> Point + Sync,
    L: Fn(Point) -> usize + Sync,
{
    let (pts, area) = cells(domain, h)?;
    let vals: Vec<[f64; 2]> = pts
        .par_iter()
        .map(|&x| {
            let d0 = (f(x) - g(x)).norm();
            let jf = jacobian_with(f, lf, x, stencil(h))?;
            let jg = jacobian_with(g, lg, x, stencil(h))?;
            let dj = [[jf[0][0] - jg[0][0], jf[0][1] - jg[0][1]], [jf[1][0] - jg[1][0], jf[1][1] - jg[1][1]]];
            Ok([d0.powf(p), sum_norm(&dj).powf(p)])
        })
        .collect::<Result<_>>()?;
    let (mut a, mut b) = (0.0, 0.0);
    for v in &vals {
        a += v[0];
        b += v[1];
    }
    Ok((a * area).powf(1.0 / p) + (b * area).powf(1.0 / p))
}

/// ‖f − g‖_{W^{1,p}} + ‖f⁻¹ − g⁻¹‖_{W^{1,p*}} on `domain`.
pub fn sobolev_distance(f: &HomeoExpr, g: &HomeoExpr, p: f64, p_star: f64, domain: &Rect, h: f64) -> Result<f64> {
    sobolev_distance_split(f, g, p, p_star, domain, domain, h)
}

/// As [`sobolev_distance`], with separate domains for the forward and the
/// inverse term.
pub fn sobolev_distance_split(
    f: &HomeoExpr,
    g: &HomeoExpr,
    p: f64,
    p_star: f64,
    domain: &Rect,
    inv_domain: &Rect,
    h: f64,
) -> Result<f64> {
    if !(p >= 1.0 && p_star >= 1.0) {
        return invalid("Sobolev exponents must be >= 1");
    }
    let lab_fwd = |x: Point| piece_label(f, x) * 1_000_003 + piece_label(g, x);
    let fwd = w1p_norm_of_difference(
        &|x| f.apply(x),
        &|x| g.apply(x),
        &lab_fwd,
        &lab_fwd,
        p,
        domain,
        h,
    )?;
    let lab = |x: Point| piece_label(f, f.apply_inv(x)) * 1_000_003 + piece_label(g, g.apply_inv(x));
    let inv = w1p_norm_of_difference(&|x| f.apply_inv(x), &|x| g.apply_inv(x), &lab, &lab, p_star, inv_domain, h)?;
    Ok(fwd + inv)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub h: f64,
    pub centers: Vec<Point>,
    /// K per cell; infinite where the distortion is not finite.
    pub k: Vec<f64>,
    pub finite: Vec<bool>,
    pub max_k: f64,
}

impl DistortionReport {
    pub fn all_finite(&self) -> bool {
        self.finite.iter().all(|&f| f)
    }
}

/// (|f_z| + |f_z̄|)/(|f_z| − |f_z̄|) from the real Jacobian.
pub fn distortion(j: &Jacobian) -> Option<f64> {
    let (a, b, c, d) = (j[0][0], j[0][1], j[1][0], j[1][1]);
    let fz = 0.5 * (a + d).hypot(c - b);
    let fzb = 0.5 * (a - d).hypot(c + b);
    let den = fz - fzb;
    if den <= 1e-12 * (fz + fzb).max(f64::MIN_POSITIVE) {
        None
    } else {
        Some((fz + fzb) / den)
    }
}

pub fn distortion_field(m: &HomeoExpr, domain: &Rect, h: f64) -> Result<DistortionReport> {
    let (pts, _) = cells(domain, h)?;
    let ks: Vec<Option<f64>> =
        pts.par_iter().map(|&x| jacobian(m, x, stencil(h)).map(|j| distortion(&j))).collect::<Result<_>>()?;
    let finite: Vec<bool> = ks.iter().map(Option::is_some).collect();
    let k: Vec<f64> = ks.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect();
    let max_k = k.iter().cloned().fold(0.0, f64::max);
    Ok(DistortionReport { h, centers: pts, k, finite, max_k })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub pass: bool,
    /// Largest observed LHS / RHS.
    pub worst_ratio: f64,
    pub samples: usize,
}

/// |J_m| ≤ d!·|Dm|^d on every cell.
pub fn jacobian_bound_check(m: &HomeoExpr, domain: &Rect, h: f64, d: u32) -> Result<CheckReport> {
    let fact: f64 = (1..=d).map(f64::from).product();
    let (pts, _) = cells(domain, h)?;
    let ratios: Vec<f64> = pts
        .par_iter()
        .map(|&x| {
            let j = jacobian(m, x, stencil(h))?;
            let rhs = fact * sum_norm(&j).powi(d as i32);
            Ok(if rhs > 0.0 { det(&j).abs() / rhs } else { 0.0 })
        })
        .collect::<Result<_>>()?;
    let worst = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(CheckReport { pass: worst <= 1.0 + 1e-9, worst_ratio: worst, samples: pts.len() })
}

/// |m(z) − m(w)|² ≤ 2π·∫_{2D}|Dm|² / log(e + diam D / |z − w|) on sampled
/// pairs of the disk D.
pub fn gv_inequality_check(m: &HomeoExpr, disk: &Ball, pairs: usize, seed: u64, h: f64) -> Result<CheckReport> {
    let big = Ball::new(disk.center, 2.0 * disk.r);
    let bb = Rect::new(big.center - Point::new(big.r, big.r), big.center + Point::new(big.r, big.r))?;
    let (pts, area) = cells(&bb, h)?;
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|&x| {
            if x.dist(big.center) >= big.r {
                return Ok(0.0);
            }
            Ok(sum_norm(&jacobian(m, x, stencil(h))?).powi(2))
        })
        .collect::<Result<_>>()?;
    let energy: f64 = vals.iter().sum::<f64>() * area;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sample = || loop {
        let p = Point::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if p.norm() < 1.0 {
            return disk.center + p * disk.r;
        }
    };
    let mut zw: Vec<(Point, Point)> = (0..pairs).map(|_| (sample(), sample())).collect();
    let tip = disk.r * (1.0 - 1e-12);
    zw.push((disk.center - Point::new(tip, 0.0), disk.center + Point::new(tip, 0.0)));
    let diam = 2.0 * disk.r;
    let worst = zw
        .par_iter()
        .map(|&(z, w)| {
            let d = z.dist(w);
            if d == 0.0 {
                return 0.0;
            }
            let lhs = m.apply(z).dist(m.apply(w)).powi(2);
            let rhs = 2.0 * std::f64::consts::PI * energy / (std::f64::consts::E + diam / d).ln();
            lhs / rhs
        })
        .reduce(|| 0.0, f64::max);
    Ok(CheckReport { pass: worst <= 1.0 + 1e-9, worst_ratio: worst, samples: zw.len() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InverseEnergyReport {
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
    /// rhs − lhs.
    pub slack: f64,
    pub tolerance: f64,
}

/// E₁(m⁻¹ on m(D)) ≤ 4·Area(D)^{1−1/p}·E_p(m on D)^{1/p}, with a relative
/// numerical tolerance.
pub fn inverse_energy_check(m: &HomeoExpr, d: &Rect, p: f64, h: f64, tolerance: f64) -> Result<InverseEnergyReport> {
    let ep = sobolev_energy(m, p, d, h)?;
    let rhs = 4.0 * d.area().powf(1.0 - 1.0 / p) * ep.e_p.powf(1.0 / p);
    let mut grid = Region::Rect(*d).boundary(h / 4.0);
    grid.extend(cells(d, h)?.0);
    let imgs: Vec<Point> = grid.par_iter().map(|&x| m.apply(x)).collect();
    let img_box = Rect::bounding(&imgs)?.expand(h);
    let (pts, area) = cells(&img_box, h)?;
    let (hx, hy) = (img_box.width() / (img_box.width() / h).ceil(), img_box.height() / (img_box.height() / h).ceil());
    const SUB: usize = 4;
    let vals: Vec<f64> = pts
        .par_iter()
        .map(|&y| {
            let mut inside = 0;
            for a in 0..SUB {
                for b in 0..SUB {
                    let off = Point::new(
                        hx * ((a as f64 + 0.5) / SUB as f64 - 0.5),
                        hy * ((b as f64 + 0.5) / SUB as f64 - 0.5),
                    );
                    inside += d.contains(m.apply_inv(y + off)) as usize;
                }
            }
            if inside == 0 {
                return Ok(0.0);
            }
            let j = jacobian_inv(m, y, stencil(h))?;
            Ok((j[0][0].hypot(j[0][1]) + j[1][0].hypot(j[1][1])) * inside as f64 / (SUB * SUB) as f64)
        })
        .collect::<Result<_>>()?;
    let lhs = vals.iter().sum::<f64>() * area;
    Ok(InverseEnergyReport { pass: lhs <= rhs * (1.0 + tolerance), lhs, rhs, slack: rhs - lhs, tolerance })
}
