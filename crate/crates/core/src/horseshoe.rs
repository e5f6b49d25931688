//! N-branched horseshoes and sampled "maps across" certificates.
//!
//! The horseshoe is built in a unit frame where the core is
//! K = [0.1, 0.9] × [0, 1] (axis vertical) and the support is R = [−1, 2]².
//! It is the composition V ∘ P2 ∘ P1 ∘ T of
//! - T: quarter turn about (½, ½), rigid on the core and cut off by a bump,
//! - P1, P2: piecewise-linear fibre maps squeezing the turned core onto a thin
//!   horizontal strip,
//! - V: a vertical fibre shear by a sawtooth with N legs,
//!
//! so that N horizontal slabs of K come out as N legs crossing K vertically.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;

use crate::error::{invalid, Result};
use crate::geometry::{Point, Rect, SolidCylinder};
use crate::homeo::{bump::BumpProfile, HomeoExpr, Node};

const LO: f64 = -1.0;
const HI: f64 = 2.0;
const HALF_WIDTH: f64 = 0.4;
const TURN_R1: f64 = 0.7;
const TURN_R2: f64 = 1.45;
const X0: f64 = 0.15;
const ELL: f64 = 0.7;
const STRIP_Y: f64 = 0.45;
const STRIP_T: f64 = 0.1;
const BAND: f64 = 0.02;
const AMPLITUDE: f64 = 1.0;
/// Gap left between neighbouring slabs, as a fraction of a slab period.
const SLAB_GAP: f64 = 0.1;

/// Default relative sampling step of crossing certificates.
pub const DEFAULT_RESOLUTION: f64 = 1e-3;

/// Unit-frame horseshoe placed in the plane by `x ↦ origin + matrix·x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeMap {
    pub branches: usize,
    pub origin: Point,
    pub matrix: [[f64; 2]; 2],
}

fn fiber(u: f64, knots: [f64; 4], vals: [f64; 4]) -> f64 {
    if u < knots[0] || u > knots[3] {
        return u;
    }
    let k = if u < knots[1] {
        0
    } else if u <= knots[2] {
        1
    } else {
        2
    };
    vals[k] + (u - knots[k]) * (vals[k + 1] - vals[k]) / (knots[k + 1] - knots[k])
}

fn taper(s: f64, a: f64, b: f64) -> f64 {
    ((s - LO) / (a - LO)).min((HI - s) / (HI - b)).clamp(0.0, 1.0)
}

impl HorseshoeMap {
    fn to_unit(&self, x: Point) -> Point {
        let m = self.matrix;
        let d = x - self.origin;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        Point::new((m[1][1] * d.x - m[0][1] * d.y) / det, (m[0][0] * d.y - m[1][0] * d.x) / det)
    }

    fn from_unit(&self, u: Point) -> Point {
        let m = self.matrix;
        self.origin + Point::new(m[0][0] * u.x + m[0][1] * u.y, m[1][0] * u.x + m[1][1] * u.y)
    }

    fn turn(u: Point, sign: f64) -> Point {
        let c = Point::new(0.5, 0.5);
        let d = u - c;
        let r = d.norm();
        if r >= TURN_R2 {
            return u;
        }
        c + d.rotate(sign * FRAC_PI_2 * BumpProfile { r1: TURN_R1, r2: TURN_R2 }.value(r))
    }

    fn p1(u: Point, inv: bool) -> Point {
        if u.x < LO || u.x > HI {
            return u;
        }
        let l = taper(u.y, 0.0, 1.0);
        let knots = [LO, 0.0, 1.0, HI];
        let vals = [LO, l * X0, l * (X0 + ELL) + (1.0 - l), HI];
        let x = if inv { fiber(u.x, vals, knots) } else { fiber(u.x, knots, vals) };
        Point::new(x, u.y)
    }

    fn p2(u: Point, inv: bool) -> Point {
        if u.y < LO || u.y > HI {
            return u;
        }
        let l = taper(u.x, X0, X0 + ELL);
        let knots = [LO, 0.0, 1.0, HI];
        let vals = [LO, l * STRIP_Y, l * (STRIP_Y + STRIP_T) + (1.0 - l), HI];
        let y = if inv { fiber(u.y, vals, knots) } else { fiber(u.y, knots, vals) };
        Point::new(u.x, y)
    }

    fn sawtooth(&self, x: f64) -> f64 {
        let n = self.branches as f64;
        let leg = |k: usize| if k % 2 == 0 { -AMPLITUDE } else { AMPLITUDE };
        if x <= LO || x >= HI {
            0.0
        } else if x < X0 {
            leg(0) * (x - LO) / (X0 - LO)
        } else if x > X0 + ELL {
            leg(self.branches) * (HI - x) / (HI - X0 - ELL)
        } else {
            let s = ((x - X0) / ELL * n).min(n);
            let k = (s.floor() as usize).min(self.branches - 1);
            let f = s - k as f64;
            leg(k) + (leg(k + 1) - leg(k)) * f
        }
    }

    fn shear(&self, u: Point, inv: bool) -> Point {
        if u.x < LO || u.x > HI || u.y < LO || u.y > HI {
            return u;
        }
        let ph = self.sawtooth(u.x);
        let knots = [LO, STRIP_Y - BAND, STRIP_Y + STRIP_T + BAND, HI];
        let vals = [LO, knots[1] + ph, knots[2] + ph, HI];
        let y = if inv { fiber(u.y, vals, knots) } else { fiber(u.y, knots, vals) };
        Point::new(u.x, y)
    }

    pub fn apply_unit(&self, u: Point) -> Point {
        self.shear(Self::p2(Self::p1(Self::turn(u, 1.0), false), false), false)
    }

    pub fn apply_inv_unit(&self, u: Point) -> Point {
        Self::turn(Self::p1(Self::p2(self.shear(u, true), true), true), -1.0)
    }

    pub fn apply(&self, x: Point) -> Point {
        let u = self.to_unit(x);
        if u.x <= LO || u.x >= HI || u.y <= LO || u.y >= HI {
            return x;
        }
        self.from_unit(self.apply_unit(u))
    }

    pub fn apply_inv(&self, x: Point) -> Point {
        let u = self.to_unit(x);
        if u.x <= LO || u.x >= HI || u.y <= LO || u.y >= HI {
            return x;
        }
        self.from_unit(self.apply_inv_unit(u))
    }

    fn cylinder(&self, ua: Point, ub: Point, half_width: f64) -> SolidCylinder {
        let a = self.from_unit(ua);
        let b = self.from_unit(ub);
        let m = self.matrix;
        let lateral = Point::new(m[0][0], m[1][0]).norm() * half_width;
        SolidCylinder { a, b, rho: lateral }
    }

    pub fn spec(&self) -> HorseshoeSpec {
        let core = self.cylinder(Point::new(0.5, 0.0), Point::new(0.5, 1.0), HALF_WIDTH);
        let n = self.branches;
        let strips = (0..n)
            .map(|k| {
                let lo = 1.0 - (k as f64 + 1.0 - SLAB_GAP) / n as f64;
                let hi = 1.0 - (k as f64 + SLAB_GAP) / n as f64;
                let (bottom, top) = (Point::new(0.5, lo), Point::new(0.5, hi));
                // Slab k is carried up by its bottom edge when k is even.
                if k % 2 == 0 {
                    self.cylinder(top, bottom, HALF_WIDTH)
                } else {
                    self.cylinder(bottom, top, HALF_WIDTH)
                }
            })
            .collect();
        let corners = [Point::new(LO, LO), Point::new(HI, LO), Point::new(HI, HI), Point::new(LO, HI)]
            .map(|u| self.from_unit(u));
        HorseshoeSpec { n, support: Rect::bounding(&corners).expect("corners"), core, strips }
    }
}

/// Geometry certifying an N-branched horseshoe: the strips are disjoint
/// sub-cylinders of the core, each mapped across the core.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HorseshoeSpec {
    pub n: usize,
    pub support: Rect,
    pub core: SolidCylinder,
    pub strips: Vec<SolidCylinder>,
}

fn horseshoe_expr(map: HorseshoeMap) -> HomeoExpr {
    let spec = map.spec();
    let m = map.matrix;
    let scale_sv = {
        let op = crate::homeo::op_norm(m);
        let det = (m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs();
        op * op / det
    };
    let lip = (8.0 + 6.0 * map.branches as f64) * scale_sv;
    HomeoExpr {
        node: Node::Horseshoe(map),
        support: Some(crate::geometry::Region::Rect(spec.support)),
        lipschitz: Some(lip),
    }
}

/// Horseshoe with `n` branches supported in the square `r`; the core is the
/// middle third of `r`, narrowed laterally.
pub fn make_horseshoe(n: usize, r: &Rect) -> Result<(HomeoExpr, HorseshoeSpec)> {
    if n < 1 {
        return invalid("horseshoe needs at least one branch");
    }
    if (r.width() - r.height()).abs() > 1e-12 * r.width() {
        return invalid("horseshoe support must be a square");
    }
    let s = r.width() / (HI - LO);
    let map = HorseshoeMap {
        branches: n,
        origin: r.min - Point::new(LO * s, LO * s),
        matrix: [[s, 0.0], [0.0, s]],
    };
    let spec = map.spec();
    Ok((horseshoe_expr(map), spec))
}

/// Horseshoe whose core is exactly the rigid cylinder `c`.
pub fn horseshoe_on_cylinder(n: usize, c: &SolidCylinder) -> Result<(HomeoExpr, HorseshoeSpec)> {
    if n < 1 {
        return invalid("horseshoe needs at least one branch");
    }
    let u = c.axis();
    let e1 = -u.perp() * (c.rho / HALF_WIDTH);
    let e2 = c.b - c.a;
    let origin = c.a - e1 * 0.5;
    let map = HorseshoeMap { branches: n, origin, matrix: [[e1.x, e2.x], [e1.y, e2.y]] };
    let spec = map.spec();
    Ok((horseshoe_expr(map), spec))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossingCertificate {
    /// Conditions (1)–(4): meets the target, avoids its lateral boundary,
    /// marked ends land off the closed target, each marked end reaches the
    /// matching axial end only.
    pub conditions: [bool; 4],
    pub resolution: f64,
    /// Smallest clearance observed, relative to the relevant diameter.
    pub margin: f64,
}

impl CrossingCertificate {
    pub fn pass(&self) -> bool {
        self.conditions.iter().all(|&c| c) && self.margin > 0.0
    }

    pub fn failed_conditions(&self) -> Vec<usize> {
        (0..4).filter(|&i| !self.conditions[i]).map(|i| i + 1).collect()
    }
}

/// Sampled check that `m` maps `source` across `target`. `h` is the sampling
/// step relative to the cylinder diameters.
pub fn check_crossing(m: &HomeoExpr, source: &SolidCylinder, target: &SolidCylinder, h: f64) -> Result<CrossingCertificate> {
    if !(h > 0.0) {
        return invalid("resolution must be positive");
    }
    if !target.separated_marks() {
        return invalid("degenerate target: rho >= len/2");
    }
    let dt = target.diam();
    let ds = source.diam();
    let inside = |y: Point| {
        let (s, t) = target.local(y);
        s.abs() < 1.0 && t.abs() < 1.0
    };
    let mut margin = f64::INFINITY;

    // (2) lateral sides pulled back must miss the source.
    let mut c2 = true;
    let n_side = ((target.len() / (h * dt)).ceil() as usize).max(2);
    for side in [-1.0, 1.0] {
        for i in 0..=n_side {
            let z = target.from_local(-1.0 + 2.0 * i as f64 / n_side as f64, side);
            let d = source.dist(m.apply_inv(z)) / ds;
            margin = margin.min(d);
            if d <= 0.0 {
                c2 = false;
            }
        }
    }

    // (3) images of the marked ends stay off the closed target.
    let mut c3 = true;
    let n_mark = ((2.0 * source.rho / (h * ds)).ceil() as usize).max(2);
    for s in [-1.0, 1.0] {
        for i in 0..=n_mark {
            let y = m.apply(source.from_local(s, -1.0 + 2.0 * i as f64 / n_mark as f64));
            let d = target.dist(y) / dt;
            margin = margin.min(d);
            if d <= 0.0 {
                c3 = false;
            }
        }
    }

    // (1) and (4): follow axial lines inward from each marked end until the
    // image enters the target; the entry must be through the matching end.
    let mut c1 = false;
    let mut c4 = true;
    let n_ax = ((source.len() / (h * ds)).ceil() as usize).max(2);
    let lines = 9;
    for side in [-1.0f64, 1.0] {
        let (face_a, face_b) = (target.from_local(-side, -1.0), target.from_local(-side, 1.0));
        for l in 0..lines {
            let t = -1.0 + 2.0 * l as f64 / (lines - 1) as f64;
            let mut entered = false;
            for i in 0..=n_ax {
                let s = side * (1.0 - 2.0 * i as f64 / n_ax as f64);
                let y = m.apply(source.from_local(s, t));
                if inside(y) {
                    c1 = true;
                    entered = true;
                    let (sy, _) = target.local(y);
                    let tie = sy.abs().min(1.0 - h);
                    margin = margin.min(tie * target.len() / (2.0 * dt));
                    if sy * side <= 0.0 || sy.abs() < h {
                        c4 = false;
                    }
                    break;
                }
                let d = crate::geometry::dist_to_segment(y, face_a, face_b) / dt;
                if d <= h {
                    c4 = false;
                }
                margin = margin.min(d);
            }
            if !entered {
                c4 = false;
            }
        }
    }
    Ok(CrossingCertificate { conditions: [c1, c2, c3, c4], resolution: h, margin })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchCertificate {
    pub pass: bool,
    /// log N when every strip passes.
    pub bound: Option<f64>,
    pub strips: Vec<CrossingCertificate>,
}

pub fn branch_certificate(m: &HomeoExpr, spec: &HorseshoeSpec) -> Result<BranchCertificate> {
    branch_certificate_at(m, spec, DEFAULT_RESOLUTION)
}

pub fn branch_certificate_at(m: &HomeoExpr, spec: &HorseshoeSpec, h: f64) -> Result<BranchCertificate> {
    for (i, a) in spec.strips.iter().enumerate() {
        for b in &spec.strips[i + 1..] {
            let gap = a.corners().iter().all(|&x| !b.contains(x)) && b.corners().iter().all(|&x| !a.contains(x));
            if !gap {
                return invalid("horseshoe strips overlap");
            }
        }
    }
    let strips = spec
        .strips
        .iter()
        .map(|s| check_crossing(m, s, &spec.core, h))
        .collect::<Result<Vec<_>>>()?;
    let pass = strips.iter().all(CrossingCertificate::pass);
    Ok(BranchCertificate { pass, bound: pass.then(|| (spec.n as f64).ln()), strips })
}
