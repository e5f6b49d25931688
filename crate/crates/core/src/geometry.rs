//! Planar primitives: points, balls, elongated neighbourhoods, solid cylinders
//! and sampled region sets.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point::new(a[0], a[1])
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    /// Quarter turn counter-clockwise.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, o: Point) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

impl Div<f64> for Point {
    type Output = Point;
    fn div(self, s: f64) -> Point {
        Point::new(self.x / s, self.y / s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        Point::new(-self.x, -self.y)
    }
}

/// Distance from `x` to the closed segment `[p, q]`.
pub fn dist_to_segment(x: Point, p: Point, q: Point) -> f64 {
    let d = q - p;
    let l2 = d.norm2();
    if l2 == 0.0 {
        return x.dist(p);
    }
    let t = (x - p).dot(d) / l2;
    if t <= 0.0 {
        x.dist(p)
    } else if t >= 1.0 {
        x.dist(q)
    } else {
        x.dist(p + d * t)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Point,
    pub r: f64,
}

impl Ball {
    pub fn new(center: Point, r: f64) -> Self {
        Ball { center, r }
    }

    pub fn contains(&self, x: Point) -> bool {
        x.dist(self.center) < self.r
    }
}

/// E(p, q; r): the open r-neighbourhood of the segment [p, q].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElongatedNbhd {
    pub p: Point,
    pub q: Point,
    pub r: f64,
}

impl ElongatedNbhd {
    pub fn new(p: Point, q: Point, r: f64) -> Result<Self> {
        if !(r > 0.0) || !p.is_finite() || !q.is_finite() {
            return invalid("elongated neighbourhood needs r > 0 and finite endpoints");
        }
        Ok(ElongatedNbhd { p, q, r })
    }

    pub fn dist(&self, x: Point) -> f64 {
        dist_to_segment(x, self.p, self.q)
    }

    pub fn contains(&self, x: Point) -> bool {
        self.dist(x) < self.r
    }
}

/// Rigid solid cylinder C(a, b; rho). In the plane this is the rectangle of
/// half-width `rho` about the axis [a, b]; the marked ends are the sides
/// through `a` (C⁻) and `b` (C⁺).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolidCylinder {
    pub a: Point,
    pub b: Point,
    pub rho: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryPart {
    Lateral,
    Minus,
    Plus,
}

impl SolidCylinder {
    pub fn new(a: Point, b: Point, rho: f64) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || !(rho > 0.0) || a == b {
            return invalid("solid cylinder needs a != b and rho > 0");
        }
        Ok(SolidCylinder { a, b, rho })
    }

    /// Cylinder with the given centre, unit axis direction, length and radius.
    pub fn centered(center: Point, dir: Point, len: f64, rho: f64) -> Result<Self> {
        let u = dir / dir.norm();
        SolidCylinder::new(center - u * (len / 2.0), center + u * (len / 2.0), rho)
    }

    pub fn len(&self) -> f64 {
        self.a.dist(self.b)
    }

    pub fn rad(&self) -> f64 {
        self.rho
    }

    pub fn center(&self) -> Point {
        (self.a + self.b) * 0.5
    }

    pub fn axis(&self) -> Point {
        (self.b - self.a) / self.len()
    }

    pub fn normal(&self) -> Point {
        self.axis().perp()
    }

    pub fn diam(&self) -> f64 {
        self.len().hypot(2.0 * self.rho)
    }

    /// Radius of the smallest ball about the centre containing the cylinder.
    pub fn circumradius(&self) -> f64 {
        self.diam() / 2.0
    }

    /// Straightened coordinates (s, t): s = ±1 on the marked ends, t = ±1 on
    /// the lateral sides.
    pub fn local(&self, x: Point) -> (f64, f64) {
        let d = x - self.center();
        (2.0 * d.dot(self.axis()) / self.len(), d.dot(self.normal()) / self.rho)
    }

    pub fn from_local(&self, s: f64, t: f64) -> Point {
        self.center() + self.axis() * (s * self.len() / 2.0) + self.normal() * (t * self.rho)
    }

    pub fn contains(&self, x: Point) -> bool {
        let (s, t) = self.local(x);
        s.abs() <= 1.0 && t.abs() <= 1.0
    }

    /// Euclidean distance from `x` to the closed rectangle (0 inside).
    pub fn dist(&self, x: Point) -> f64 {
        let d = x - self.center();
        let ds = (d.dot(self.axis()).abs() - self.len() / 2.0).max(0.0);
        let dt = (d.dot(self.normal()).abs() - self.rho).max(0.0);
        ds.hypot(dt)
    }

    pub fn corners(&self) -> [Point; 4] {
        [
            self.from_local(-1.0, -1.0),
            self.from_local(1.0, -1.0),
            self.from_local(1.0, 1.0),
            self.from_local(-1.0, 1.0),
        ]
    }

    /// Whether the marked ends lie on opposite sides of the perpendicular
    /// bisector of [a, b] with room to spare.
    pub fn separated_marks(&self) -> bool {
        self.rho < self.len() / 2.0
    }

    /// Boundary samples with spacing at most `h`, tagged by boundary part.
    pub fn boundary_samples(&self, h: f64) -> Vec<(Point, BoundaryPart)> {
        let ns = ((self.len() / h).ceil() as usize).max(1);
        let nt = ((2.0 * self.rho / h).ceil() as usize).max(1);
        let mut out = Vec::with_capacity(2 * (ns + nt + 2));
        for i in 0..=nt {
            let t = -1.0 + 2.0 * i as f64 / nt as f64;
            out.push((self.from_local(-1.0, t), BoundaryPart::Minus));
            out.push((self.from_local(1.0, t), BoundaryPart::Plus));
        }
        for i in 1..ns {
            let s = -1.0 + 2.0 * i as f64 / ns as f64;
            out.push((self.from_local(s, -1.0), BoundaryPart::Lateral));
            out.push((self.from_local(s, 1.0), BoundaryPart::Lateral));
        }
        out
    }

    pub fn bounding_rect(&self) -> Rect {
        Rect::bounding(&self.corners()).expect("four corners")
    }
}

/// Closed axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point,
    pub max: Point,
}

impl Rect {
    pub fn new(min: Point, max: Point) -> Result<Self> {
        if !(min.x < max.x && min.y < max.y) {
            return invalid("rectangle needs min < max in both coordinates");
        }
        Ok(Rect { min, max })
    }

    pub fn square(lo: f64, hi: f64) -> Result<Self> {
        Rect::new(Point::new(lo, lo), Point::new(hi, hi))
    }

    pub fn bounding(pts: &[Point]) -> Result<Self> {
        let first = *pts.first().ok_or(Error::EmptyCloud)?;
        let (mut min, mut max) = (first, first);
        for p in pts {
            min = Point::new(min.x.min(p.x), min.y.min(p.y));
            max = Point::new(max.x.max(p.x), max.y.max(p.y));
        }
        Ok(Rect { min, max })
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn center(&self) -> Point {
        (self.min + self.max) * 0.5
    }

    pub fn diam(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: Point) -> bool {
        x.x >= self.min.x && x.x <= self.max.x && x.y >= self.min.y && x.y <= self.max.y
    }

    pub fn dist(&self, x: Point) -> f64 {
        let dx = (self.min.x - x.x).max(x.x - self.max.x).max(0.0);
        let dy = (self.min.y - x.y).max(x.y - self.max.y).max(0.0);
        dx.hypot(dy)
    }

    pub fn expand(&self, m: f64) -> Rect {
        Rect { min: self.min - Point::new(m, m), max: self.max + Point::new(m, m) }
    }

    /// Cell-centred grid with `n × n` points.
    pub fn grid(&self, n: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                out.push(Point::new(
                    self.min.x + (i as f64 + 0.5) / n as f64 * self.width(),
                    self.min.y + (j as f64 + 0.5) / n as f64 * self.height(),
                ));
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Region {
    Ball(Ball),
    Elongated(ElongatedNbhd),
    Cylinder(SolidCylinder),
    Rect(Rect),
    Annulus { center: Point, r_in: f64, r_out: f64 },
}

impl Region {
    pub fn contains(&self, x: Point) -> bool {
        match self {
            Region::Ball(b) => b.contains(x),
            Region::Elongated(e) => e.contains(x),
            Region::Cylinder(c) => c.contains(x),
            Region::Rect(r) => r.contains(x),
            Region::Annulus { center, r_in, r_out } => {
                let d = x.dist(*center);
                d >= *r_in && d < *r_out
            }
        }
    }

    /// Whether `x` lies in the region with clearance greater than `margin`
    /// from its boundary.
    pub fn contains_deep(&self, x: Point, margin: f64) -> bool {
        match self {
            Region::Ball(b) => x.dist(b.center) < b.r - margin,
            Region::Elongated(e) => e.dist(x) < e.r - margin,
            Region::Cylinder(c) => {
                let (s, t) = c.local(x);
                (1.0 - s.abs()) * c.len() / 2.0 > margin && (1.0 - t.abs()) * c.rho > margin
            }
            Region::Rect(r) => {
                x.x - r.min.x > margin
                    && r.max.x - x.x > margin
                    && x.y - r.min.y > margin
                    && r.max.y - x.y > margin
            }
            Region::Annulus { center, r_in, r_out } => {
                let d = x.dist(*center);
                d > r_in + margin && d < r_out - margin
            }
        }
    }

    pub fn bounding_rect(&self) -> Rect {
        match self {
            Region::Ball(b) => Rect {
                min: b.center - Point::new(b.r, b.r),
                max: b.center + Point::new(b.r, b.r),
            },
            Region::Elongated(e) => Rect {
                min: Point::new(e.p.x.min(e.q.x) - e.r, e.p.y.min(e.q.y) - e.r),
                max: Point::new(e.p.x.max(e.q.x) + e.r, e.p.y.max(e.q.y) + e.r),
            },
            Region::Cylinder(c) => c.bounding_rect(),
            Region::Rect(r) => *r,
            Region::Annulus { center, r_out, .. } => Rect {
                min: *center - Point::new(*r_out, *r_out),
                max: *center + Point::new(*r_out, *r_out),
            },
        }
    }

    pub fn diam(&self) -> f64 {
        match self {
            Region::Ball(b) => 2.0 * b.r,
            Region::Elongated(e) => e.p.dist(e.q) + 2.0 * e.r,
            Region::Cylinder(c) => c.diam(),
            Region::Rect(r) => r.diam(),
            Region::Annulus { r_out, .. } => 2.0 * r_out,
        }
    }

    /// Grid samples of the region at spacing `h`.
    pub fn sample(&self, h: f64) -> Vec<Point> {
        let bb = self.bounding_rect();
        let nx = ((bb.width() / h).ceil() as usize).max(1);
        let ny = ((bb.height() / h).ceil() as usize).max(1);
        let mut out = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                let p = Point::new(
                    bb.min.x + bb.width() * i as f64 / nx as f64,
                    bb.min.y + bb.height() * j as f64 / ny as f64,
                );
                if self.contains(p) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Samples of the region boundary at spacing about `h`.
    pub fn boundary(&self, h: f64) -> Vec<Point> {
        let circle = |c: Point, r: f64| -> Vec<Point> {
            let n = ((std::f64::consts::TAU * r / h).ceil() as usize).max(8);
            (0..n)
                .map(|k| c + Point::new(r, 0.0).rotate(std::f64::consts::TAU * k as f64 / n as f64))
                .collect()
        };
        match self {
            Region::Ball(b) => circle(b.center, b.r),
            Region::Annulus { center, r_in, r_out } => {
                let mut v = circle(*center, *r_out);
                if *r_in > 0.0 {
                    v.extend(circle(*center, *r_in));
                }
                v
            }
            Region::Cylinder(c) => c.boundary_samples(h).into_iter().map(|(p, _)| p).collect(),
            Region::Rect(r) => {
                let c = SolidCylinder {
                    a: Point::new(r.min.x, r.center().y),
                    b: Point::new(r.max.x, r.center().y),
                    rho: r.height() / 2.0,
                };
                c.boundary_samples(h).into_iter().map(|(p, _)| p).collect()
            }
            Region::Elongated(e) => {
                let d = e.q - e.p;
                let l = d.norm();
                if l == 0.0 {
                    return circle(e.p, e.r);
                }
                let u = d / l;
                let nrm = u.perp();
                let ns = ((l / h).ceil() as usize).max(1);
                let mut v = Vec::new();
                for i in 0..=ns {
                    let s = e.p + d * (i as f64 / ns as f64);
                    v.push(s + nrm * e.r);
                    v.push(s - nrm * e.r);
                }
                let na = ((std::f64::consts::PI * e.r / h).ceil() as usize).max(4);
                for k in 0..=na {
                    let a = std::f64::consts::PI * k as f64 / na as f64;
                    v.push(e.q + nrm.rotate(-a) * e.r);
                    v.push(e.p + nrm.rotate(a) * e.r);
                }
                v
            }
        }
    }
}

/// Brute-force Hausdorff distance between two point clouds, with the usual
/// early break on the inner scan.
pub fn hausdorff_distance(s0: &[Point], s1: &[Point]) -> Result<f64> {
    if s0.is_empty() || s1.is_empty() {
        return Err(Error::EmptyCloud);
    }
    Ok(directed_hausdorff(s0, s1).max(directed_hausdorff(s1, s0)))
}

fn directed_hausdorff(a: &[Point], b: &[Point]) -> f64 {
    let mut cmax = 0.0f64;
    for &x in a {
        let mut cmin = f64::INFINITY;
        for &y in b {
            let d = x.dist(y);
            if d < cmin {
                cmin = d;
                if cmin <= cmax {
                    break;
                }
            }
        }
        if cmin > cmax {
            cmax = cmin;
        }
    }
    cmax
}

/// Smallest distance between the two clouds.
pub fn cloud_gap(s0: &[Point], s1: &[Point]) -> f64 {
    let mut best = f64::INFINITY;
    for &x in s0 {
        for &y in s1 {
            best = best.min(x.dist(y));
        }
    }
    best
}

pub fn cloud_diam(s: &[Point]) -> f64 {
    let mut best = 0.0f64;
    for (i, &x) in s.iter().enumerate() {
        for &y in &s[i + 1..] {
            best = best.max(x.dist(y));
        }
    }
    best
}

/// max diam(Ω_m) / min dist_H(Ω_i, Ω_j) over sampled regions. Regions whose
/// clouds come within `resolution` of each other are rejected.
pub fn well_positioned_ratio(clouds: &[Vec<Point>], resolution: f64) -> Result<f64> {
    if clouds.len() < 2 {
        return invalid("well-positioned ratio needs at least two regions");
    }
    let mut dmin = f64::INFINITY;
    for i in 0..clouds.len() {
        for j in i + 1..clouds.len() {
            if cloud_gap(&clouds[i], &clouds[j]) <= resolution {
                return Err(Error::Overlap { i, j, resolution });
            }
            dmin = dmin.min(hausdorff_distance(&clouds[i], &clouds[j])?);
        }
    }
    let dmax = clouds.iter().map(|c| cloud_diam(c)).fold(0.0, f64::max);
    Ok(dmax / dmin)
}

/// Regions verified pairwise disjoint by a sampled test at `resolution`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSet {
    pub regions: Vec<Region>,
    pub resolution: f64,
}

impl RegionSet {
    pub fn new(regions: Vec<Region>, resolution: f64) -> Result<Self> {
        for i in 0..regions.len() {
            let pts = regions[i].sample(resolution);
            for j in 0..regions.len() {
                if i == j {
                    continue;
                }
                if pts
                    .iter()
                    .any(|&p| regions[i].contains_deep(p, resolution) && regions[j].contains_deep(p, resolution))
                {
                    return Err(Error::Overlap { i: i.min(j), j: i.max(j), resolution });
                }
            }
        }
        Ok(RegionSet { regions, resolution })
    }

    pub fn clouds(&self) -> Vec<Vec<Point>> {
        self.regions.iter().map(|r| r.boundary(self.resolution)).collect()
    }

    pub fn well_positioned_ratio(&self) -> Result<f64> {
        well_positioned_ratio(&self.clouds(), self.resolution)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn elongated_membership() {
        let e = ElongatedNbhd::new(pt(0.0, 0.0), pt(1.0, 0.0), 0.5).unwrap();
        assert!(e.contains(pt(0.5, 0.0)));
        assert!(!e.contains(pt(0.5, 1.0)));
    }

    #[test]
    fn cylinder_membership() {
        let c = SolidCylinder::new(pt(0.0, 0.0), pt(0.0, 1.0), 0.25).unwrap();
        assert!(c.contains(pt(0.2, 0.5)));
        assert!(!c.contains(pt(0.3, 0.5)));
        let (s, t) = c.local(c.b);
        assert!((s - 1.0).abs() < 1e-15 && t.abs() < 1e-15);
    }

    #[test]
    fn degenerate_cylinder_rejected() {
        assert!(SolidCylinder::new(pt(1.0, 1.0), pt(1.0, 1.0), 0.1).is_err());
        assert!(SolidCylinder::new(pt(0.0, 0.0), pt(1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn hausdorff_basics() {
        let s = vec![pt(0.0, 0.0), pt(1.0, 2.0)];
        assert_eq!(hausdorff_distance(&s, &s).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&[pt(0.0, 0.0)], &[pt(3.0, 4.0)]).unwrap(), 5.0);
        assert_eq!(hausdorff_distance(&[], &s), Err(Error::EmptyCloud));
    }

    #[test]
    fn hausdorff_matches_double_loop() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut cloud = || (0..10).map(|_| pt(rng.gen(), rng.gen())).collect::<Vec<_>>();
        let (a, b) = (cloud(), cloud());
        let sup_inf = |u: &[Point], v: &[Point]| {
            u.iter()
                .map(|x| v.iter().map(|y| x.dist(*y)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        let oracle = sup_inf(&a, &b).max(sup_inf(&b, &a));
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), oracle);
    }

    #[test]
    fn well_positioned_two_disks() {
        // Unit-diameter disks two apart: dist_H = 2, diam = 1.
        let d0 = Region::Ball(Ball::new(pt(0.0, 0.0), 0.5));
        let d1 = Region::Ball(Ball::new(pt(2.0, 0.0), 0.5));
        let rs = RegionSet::new(vec![d0, d1], 1e-3).unwrap();
        let k = rs.well_positioned_ratio().unwrap();
        assert!((k - 0.5).abs() < 1e-4, "{k}");
    }

    #[test]
    fn well_positioned_translated_copies() {
        let base = SolidCylinder::new(pt(0.0, 0.0), pt(0.3, 0.1), 0.05).unwrap();
        let shift = |v: Point| SolidCylinder { a: base.a + v, b: base.b + v, rho: base.rho };
        let clouds: Vec<Vec<Point>> = [pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.5)]
            .iter()
            .map(|&v| Region::Cylinder(shift(v)).boundary(0.01))
            .collect();
        let mut dmin = f64::INFINITY;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    dmin = dmin.min(hausdorff_distance(&clouds[i], &clouds[j]).unwrap());
                }
            }
        }
        let oracle = cloud_diam(&clouds[0]) / dmin;
        assert!((well_positioned_ratio(&clouds, 1e-3).unwrap() - oracle).abs() < 1e-12 * oracle);
    }

    #[test]
    fn overlapping_regions_rejected() {
        let d0 = Region::Ball(Ball::new(pt(0.0, 0.0), 0.5));
        let d1 = Region::Ball(Ball::new(pt(0.6, 0.0), 0.5));
        assert!(matches!(RegionSet::new(vec![d0.clone(), d1.clone()], 1e-2), Err(Error::Overlap { .. })));
        let clouds = vec![d0.boundary(1e-2), d1.boundary(1e-2)];
        assert!(well_positioned_ratio(&clouds, 1e-2).is_err());
    }

    #[test]
    fn abutting_rects_are_disjoint() {
        let a = Region::Rect(Rect::square(0.0, 1.0).unwrap());
        let b = Region::Rect(Rect::new(pt(1.0, 0.0), pt(2.0, 1.0)).unwrap());
        assert!(RegionSet::new(vec![a, b], 1e-2).is_ok());
    }

    proptest! {
        #[test]
        fn contains_agrees_with_distance(
            px in -2.0..2.0f64, py in -2.0..2.0f64, qx in -2.0..2.0f64, qy in -2.0..2.0f64,
            r in 0.01..1.0f64, x in -3.0..3.0f64, y in -3.0..3.0f64,
        ) {
            let e = ElongatedNbhd::new(pt(px, py), pt(qx, qy), r).unwrap();
            let x = pt(x, y);
            // Brute-force distance along a fine parametrisation of the segment.
            let brute = (0..=4000)
                .map(|k| x.dist(pt(px, py).lerp(pt(qx, qy), k as f64 / 4000.0)))
                .fold(f64::INFINITY, f64::min);
            prop_assert!(e.dist(x) <= brute + 1e-12);
            prop_assert!(brute - e.dist(x) < 1e-3);
            prop_assert_eq!(e.contains(x), e.dist(x) < r);
        }

        #[test]
        fn hausdorff_is_pseudometric(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut cloud = |n: usize| (0..n).map(|_| pt(rng.gen(), rng.gen())).collect::<Vec<_>>();
            let (a, b, c) = (cloud(5), cloud(7), cloud(4));
            let ab = hausdorff_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
            let ac = hausdorff_distance(&a, &c).unwrap();
            let cb = hausdorff_distance(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-12);
        }

        #[test]
        fn marks_on_opposite_sides_of_bisector(
            ax in -1.0..1.0f64, ay in -1.0..1.0f64, ang in 0.0..6.28f64, len in 0.1..2.0f64, frac in 0.01..0.99f64,
        ) {
            let a = pt(ax, ay);
            let b = a + pt(len, 0.0).rotate(ang);
            let c = SolidCylinder::new(a, b, frac * len / 2.0).unwrap();
            prop_assert!(c.separated_marks());
            let mid = c.center();
            let u = c.axis();
            for (p, part) in c.boundary_samples(len / 20.0) {
                let side = (p - mid).dot(u);
                match part {
                    BoundaryPart::Minus => prop_assert!(side < 0.0),
                    BoundaryPart::Plus => prop_assert!(side > 0.0),
                    BoundaryPart::Lateral => {}
                }
            }
        }
    }
}
