//! Composable two-sided planar homeomorphisms.

pub mod bump;
pub mod flow;
pub mod moves;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{dist_to_segment, Point, Region, SolidCylinder};
use crate::horseshoe::HorseshoeMap;

pub use bump::{bump, BumpProfile};
pub use moves::{
    affinity_move, cylinder_isometry, cylinder_transport, rotation_move, translate_to_origin, translation_move,
    AFFINITY_MARGIN,
};

/// Expression tree for a planar homeomorphism together with optional declared
/// metadata.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomeoExpr {
    #[serde(flatten)]
    pub node: Node,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Region>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Node {
    Identity,
    Affine {
        matrix: [[f64; 2]; 2],
        offset: Point,
    },
    TranslationMove {
        p: Point,
        q: Point,
        r1: f64,
        r2: f64,
        steps: usize,
    },
    RotationMove {
        center: Point,
        angle: f64,
        r: f64,
    },
    AffinityMove {
        source: SolidCylinder,
        target: SolidCylinder,
        steps: usize,
    },
    /// (r, θ) ↦ (r, θ + ω(r)) about `center`, ω piecewise linear through the
    /// `(radius, angle)` knots and zero outside them.
    Twist {
        center: Point,
        profile: Vec<[f64; 2]>,
    },
    Horseshoe(HorseshoeMap),
    Piecewise {
        parts: Vec<Part>,
        default: Box<HomeoExpr>,
    },
    /// maps[0] ∘ maps[1] ∘ … ∘ maps[n−1].
    Compose {
        maps: Vec<HomeoExpr>,
    },
    Inverse {
        map: Box<HomeoExpr>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub region: Region,
    pub map: HomeoExpr,
}

impl From<Node> for HomeoExpr {
    fn from(node: Node) -> Self {
        HomeoExpr { node, support: None, lipschitz: None }
    }
}

pub fn identity() -> HomeoExpr {
    Node::Identity.into()
}

pub fn affine(matrix: [[f64; 2]; 2], offset: Point) -> Result<HomeoExpr> {
    let det = matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0];
    if !(det.abs() > 0.0) || !det.is_finite() {
        return invalid("affine map must be invertible");
    }
    if matrix == [[1.0, 0.0], [0.0, 1.0]] && offset == Point::ORIGIN {
        return Ok(identity());
    }
    let op = op_norm(matrix);
    Ok(HomeoExpr { node: Node::Affine { matrix, offset }, support: None, lipschitz: Some(op) })
}

/// Composition in mathematical order: `compose(vec![f, g])` is f ∘ g.
pub fn compose(maps: Vec<HomeoExpr>) -> HomeoExpr {
    let mut flat = Vec::with_capacity(maps.len());
    for m in maps {
        match m.node {
            Node::Identity => {}
            Node::Compose { maps: inner } if m.support.is_none() => flat.extend(inner),
            _ => flat.push(m),
        }
    }
    match flat.len() {
        0 => identity(),
        1 => flat.pop().unwrap(),
        _ => {
            let lip = flat.iter().map(|m| m.lipschitz).try_fold(1.0, |acc, l| l.map(|l| acc * l));
            HomeoExpr { node: Node::Compose { maps: flat }, support: None, lipschitz: lip }
        }
    }
}

pub fn inverse(m: HomeoExpr) -> HomeoExpr {
    match m.node {
        Node::Identity => m,
        Node::Inverse { map } => *map,
        _ => HomeoExpr { node: Node::Inverse { map: Box::new(m) }, support: None, lipschitz: None },
    }
}

/// Glue disjointly supported parts onto `default`. Each part must map its
/// region onto the image of that region under `default`; this is checked on
/// boundary samples, as is disjointness of the regions.
pub fn piecewise(parts: Vec<Part>, default: HomeoExpr, resolution: f64) -> Result<HomeoExpr> {
    if parts.is_empty() {
        return Ok(default);
    }
    let regions: Vec<Region> = parts.iter().map(|p| p.region.clone()).collect();
    let h = resolution.max(1e-12);
    for (i, ri) in regions.iter().enumerate() {
        let hi = ri.diam() * h;
        let pts = ri.sample(ri.diam() / 64.0);
        for (j, rj) in regions.iter().enumerate() {
            if i != j && pts.iter().any(|&p| ri.contains_deep(p, hi) && rj.contains_deep(p, hi)) {
                return Err(Error::Overlap { i: i.min(j), j: i.max(j), resolution });
            }
        }
    }
    for (k, part) in parts.iter().enumerate() {
        let scale = part.region.diam();
        for x in part.region.boundary(scale / 256.0) {
            let a = part.map.apply(x);
            let b = default.apply(x);
            let leak = a.dist(b);
            if !(leak <= scale * 1e-6) {
                return Err(Error::Leak { part: k, leak, at: x });
            }
        }
    }
    Ok(Node::Piecewise { parts, default: Box::new(default) }.into())
}

pub(crate) fn op_norm(m: [[f64; 2]; 2]) -> f64 {
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
}

fn mat_apply(m: &[[f64; 2]; 2], x: Point) -> Point {
    Point::new(m[0][0] * x.x + m[0][1] * x.y, m[1][0] * x.x + m[1][1] * x.y)
}

fn mat_inv(m: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]]
}

pub(crate) fn twist_angle(profile: &[[f64; 2]], r: f64) -> f64 {
    let (first, last) = match (profile.first(), profile.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return 0.0,
    };
    if r <= first[0] || r >= last[0] {
        return 0.0;
    }
    let k = profile.partition_point(|kn| kn[0] <= r);
    let (a, b) = (profile[k - 1], profile[k]);
    a[1] + (b[1] - a[1]) * (r - a[0]) / (b[0] - a[0])
}

/// Data of an affinity move in its cylinder frame.
pub(crate) struct AffinityFrame {
    pub c: Point,
    pub u: Point,
    pub log_ax: f64,
    pub log_lat: f64,
    pub p: Point,
    pub q: Point,
    pub bump: BumpProfile,
}

impl AffinityFrame {
    pub fn new(source: &SolidCylinder, target: &SolidCylinder) -> AffinityFrame {
        let lam_ax = target.len() / source.len() * (1.0 + AFFINITY_MARGIN);
        let lam_lat = target.rad() / source.rad() / (1.0 + AFFINITY_MARGIN);
        let half = source.len().max(lam_ax * source.len()) / 2.0;
        let r1 = source.rad().max(lam_lat * source.rad());
        let diam = (2.0 * half).hypot(2.0 * r1);
        let c = source.center();
        let u = source.axis();
        AffinityFrame {
            c,
            u,
            log_ax: lam_ax.ln(),
            log_lat: lam_lat.ln(),
            p: c - u * half,
            q: c + u * half,
            bump: BumpProfile { r1, r2: r1 + diam },
        }
    }

    pub fn linear(&self, x: Point) -> Point {
        let d = x - self.c;
        let n = self.u.perp();
        self.u * (self.log_ax * d.dot(self.u)) + n * (self.log_lat * d.dot(n))
    }

    pub fn field(&self, x: Point) -> Point {
        let b = self.bump.value(dist_to_segment(x, self.p, self.q));
        if b == 0.0 {
            Point::ORIGIN
        } else {
            self.linear(x) * b
        }
    }
}

impl HomeoExpr {
    pub fn with_support(mut self, region: Region) -> Self {
        self.support = Some(region);
        self
    }

    pub fn with_lipschitz(mut self, lip: f64) -> Self {
        self.lipschitz = Some(lip);
        self
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.node, Node::Identity)
    }

    /// Copy with every flow node integrated at `steps` fixed steps.
    pub fn with_steps(&self, steps: usize) -> HomeoExpr {
        let mut m = self.clone();
        m.set_steps(steps);
        m
    }

    fn set_steps(&mut self, n: usize) {
        match &mut self.node {
            Node::TranslationMove { steps, .. } | Node::AffinityMove { steps, .. } => *steps = n,
            Node::Piecewise { parts, default } => {
                parts.iter_mut().for_each(|p| p.map.set_steps(n));
                default.set_steps(n);
            }
            Node::Compose { maps } => maps.iter_mut().for_each(|m| m.set_steps(n)),
            Node::Inverse { map } => map.set_steps(n),
            _ => {}
        }
    }

    pub fn apply(&self, x: Point) -> Point {
        self.run(x, false)
    }

    pub fn apply_inv(&self, y: Point) -> Point {
        self.run(y, true)
    }

    pub fn eval(&self, x: Point) -> Result<Point> {
        if !x.is_finite() {
            return Err(Error::NonFinite(x));
        }
        let y = self.apply(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFinite(x))
        }
    }

    pub fn eval_inv(&self, y: Point) -> Result<Point> {
        if !y.is_finite() {
            return Err(Error::NonFinite(y));
        }
        let x = self.apply_inv(y);
        if x.is_finite() {
            Ok(x)
        } else {
            Err(Error::NonFinite(y))
        }
    }

    fn run(&self, x: Point, inv: bool) -> Point {
        match &self.node {
            Node::Identity => x,
            Node::Affine { matrix, offset } => {
                if inv {
                    mat_apply(&mat_inv(matrix), x - *offset)
                } else {
                    mat_apply(matrix, x) + *offset
                }
            }
            Node::TranslationMove { p, q, r1, r2, steps } => {
                if dist_to_segment(x, *p, *q) >= *r2 {
                    return x;
                }
                let b = BumpProfile { r1: *r1, r2: *r2 };
                let v = *q - *p;
                flow::rk4(x, |z| v * b.value(dist_to_segment(z, *p, *q)), *steps, inv)
            }
            Node::RotationMove { center, angle, r } => {
                let d = x - *center;
                let rho = d.norm();
                if rho >= 2.0 * r {
                    return x;
                }
                let w = angle * BumpProfile { r1: *r, r2: 2.0 * r }.value(rho);
                *center + d.rotate(if inv { -w } else { w })
            }
            Node::AffinityMove { source, target, steps } => {
                let fr = AffinityFrame::new(source, target);
                if dist_to_segment(x, fr.p, fr.q) >= fr.bump.r2 {
                    return x;
                }
                flow::rk4(x, |z| fr.field(z), *steps, inv)
            }
            Node::Twist { center, profile } => {
                let d = x - *center;
                let w = twist_angle(profile, d.norm());
                if w == 0.0 {
                    x
                } else {
                    *center + d.rotate(if inv { -w } else { w })
                }
            }
            Node::Horseshoe(h) => {
                if inv {
                    h.apply_inv(x)
                } else {
                    h.apply(x)
                }
            }
            Node::Piecewise { parts, default } => {
                if inv {
                    let z = default.apply_inv(x);
                    match parts.iter().find(|p| p.region.contains(z)) {
                        Some(p) => p.map.apply_inv(x),
                        None => z,
                    }
                } else {
                    match parts.iter().find(|p| p.region.contains(x)) {
                        Some(p) => p.map.apply(x),
                        None => default.apply(x),
                    }
                }
            }
            Node::Compose { maps } => {
                if inv {
                    maps.iter().fold(x, |z, m| m.apply_inv(z))
                } else {
                    maps.iter().rev().fold(x, |z, m| m.apply(z))
                }
            }
            Node::Inverse { map } => map.run(x, !inv),
        }
    }

    /// Orbit x, m(x), …, m^k(x); non-finite values count as escape.
    pub fn iterate(&self, x: Point, k: usize) -> Result<Vec<Point>> {
        self.iterate_within(x, k, None)
    }

    pub fn iterate_within(&self, x: Point, k: usize, domain: Option<&Region>) -> Result<Vec<Point>> {
        let mut orbit = Vec::with_capacity(k + 1);
        let mut z = x;
        for step in 0..=k {
            if !z.is_finite() || domain.is_some_and(|d| !d.contains(z)) {
                return Err(Error::Escape { step });
            }
            orbit.push(z);
            if step < k {
                z = self.apply(z);
            }
        }
        Ok(orbit)
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + match &self.node {
            Node::Piecewise { parts, default } => parts.iter().map(|p| p.map.size()).sum::<usize>() + default.size(),
            Node::Compose { maps } => maps.iter().map(HomeoExpr::size).sum(),
            Node::Inverse { map } => map.size(),
            _ => 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("expression trees serialise")
    }

    pub fn from_json(s: &str) -> Result<HomeoExpr> {
        Ok(serde_json::from_str(s)?)
    }
}
