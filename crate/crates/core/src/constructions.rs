//! Named constructions: the nested-squares family with horseshoes of growing
//! branch count, its truncations, and annulus twist maps.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{invalid, Result};
use crate::geometry::{Point, Rect, Region};
use crate::homeo::{affine, compose, identity, inverse, piecewise, HomeoExpr, Node, Part};
use crate::horseshoe::{make_horseshoe, HorseshoeSpec};

/// Upper index used by [`truncation_sequence`] unless told otherwise.
pub const DEFAULT_M_CAP: usize = 8;

/// Squares Q_n = I_n × I_n with I_n = [2⁻ⁿ, 2⁻⁽ⁿ⁻¹⁾] and the affine charts
/// A_n(x, y) = ((x + 1)/2ⁿ, (y + 1)/2ⁿ) from Q = [0, 1]² onto Q_n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedSquares {
    pub m_max: usize,
}

impl NestedSquares {
    pub fn new(m_max: usize) -> Result<Self> {
        if m_max < 1 {
            return invalid("nested squares need m_max >= 1");
        }
        Ok(NestedSquares { m_max })
    }

    pub fn interval(n: usize) -> (f64, f64) {
        let s = 0.5f64.powi(n as i32);
        (s, 2.0 * s)
    }

    pub fn square(n: usize) -> Rect {
        let (a, b) = Self::interval(n);
        Rect::square(a, b).expect("non-degenerate square")
    }

    /// Inner square R = [1/3, 2/3]² of Q.
    pub fn inner() -> Rect {
        Rect::square(1.0 / 3.0, 2.0 / 3.0).expect("non-degenerate square")
    }

    pub fn chart_apply(n: usize, x: Point) -> Point {
        let s = 0.5f64.powi(n as i32);
        Point::new((x.x + 1.0) * s, (x.y + 1.0) * s)
    }

    pub fn chart(n: usize) -> HomeoExpr {
        let s = 0.5f64.powi(n as i32);
        affine([[s, 0.0], [0.0, s]], Point::new(s, s)).expect("invertible chart")
    }

    pub fn inner_image(n: usize) -> Rect {
        let r = Self::inner();
        Rect::new(Self::chart_apply(n, r.min), Self::chart_apply(n, r.max)).expect("non-degenerate square")
    }

    /// Index n with x ∈ Q_n, boundaries going to the lower index.
    pub fn locate(&self, x: Point) -> Option<usize> {
        if !(x.x > 0.0 && x.y > 0.0 && x.x <= 1.0 && x.y <= 1.0) {
            return None;
        }
        let n = (-x.x.log2()).floor().max(0.0) as usize + 1;
        (1..=self.m_max)
            .filter(|&k| k + 1 >= n && k <= n + 1)
            .find(|&k| Self::square(k).contains(x))
    }
}

/// Horseshoe g_n on the inner square R of Q and its conjugate
/// f_n = A_n ∘ g_n ∘ A_n⁻¹ on Q_n.
pub fn square_piece(n: usize, branches: usize) -> Result<(HomeoExpr, HorseshoeSpec)> {
    let (g, spec) = make_horseshoe(branches, &NestedSquares::inner())?;
    let a = NestedSquares::chart(n);
    let lip = g.lipschitz;
    let mut f = compose(vec![a.clone(), g, inverse(a)]);
    f.support = Some(Region::Rect(NestedSquares::inner_image(n)));
    f.lipschitz = lip;
    let s = 0.5f64.powi(n as i32);
    let mv = |p: Point| NestedSquares::chart_apply(n, p);
    let spec = HorseshoeSpec {
        n: spec.n,
        support: NestedSquares::inner_image(n),
        core: crate::geometry::SolidCylinder { a: mv(spec.core.a), b: mv(spec.core.b), rho: spec.core.rho * s },
        strips: spec
            .strips
            .iter()
            .map(|c| crate::geometry::SolidCylinder { a: mv(c.a), b: mv(c.b), rho: c.rho * s })
            .collect(),
    };
    Ok((f, spec))
}

fn sewn(range: std::ops::RangeInclusive<usize>, branch_of: &dyn Fn(usize) -> usize) -> Result<HomeoExpr> {
    let mut parts = Vec::new();
    for n in range {
        let (f, _) = square_piece(n, branch_of(n))?;
        parts.push(Part { region: Region::Rect(NestedSquares::square(n)), map: f });
    }
    piecewise(parts, identity(), 1e-3)
}

/// f_n on each Q_n (n ≤ m_max) sewn together with the identity.
pub fn appendix_a_map(m_max: usize, branch_of: Option<&dyn Fn(usize) -> usize>) -> Result<HomeoExpr> {
    NestedSquares::new(m_max)?;
    sewn(1..=m_max, branch_of.unwrap_or(&|n| n))
}

/// The sewn map restricted to Q_m, …, Q_cap.
pub fn truncation_sequence(m: usize, cap: usize) -> Result<HomeoExpr> {
    if m < 1 {
        return invalid("truncation index must be >= 1");
    }
    if m > cap {
        return Ok(identity());
    }
    sewn(m..=cap, &|n| n)
}

/// (r, θ) ↦ (r, θ + ω(r)) about `center`, with ω piecewise linear through the
/// `(radius, angle)` knots and vanishing at both ends of the annulus.
pub fn annulus_twist(center: Point, profile: Vec<[f64; 2]>, r_in: f64, r_out: f64) -> Result<HomeoExpr> {
    if !(r_in >= 0.0 && r_out > r_in) {
        return invalid("annulus needs 0 <= r_in < r_out");
    }
    if profile.windows(2).any(|w| !(w[1][0] > w[0][0])) {
        return invalid("twist knots must have increasing radii");
    }
    if profile.iter().all(|k| k[1] == 0.0) {
        return Ok(identity());
    }
    let (first, last) = (profile[0], profile[profile.len() - 1]);
    if first[1] != 0.0 || last[1] != 0.0 || first[0] < r_in || last[0] > r_out {
        return invalid("twist profile must vanish inside the annulus boundary");
    }
    let shear = profile
        .windows(2)
        .map(|w| ((w[1][1] - w[0][1]) / (w[1][0] - w[0][0])).abs() * w[1][0])
        .fold(0.0, f64::max);
    Ok(HomeoExpr {
        node: Node::Twist { center, profile },
        support: Some(Region::Annulus { center, r_in, r_out }),
        lipschitz: Some((shear + (shear * shear + 4.0).sqrt()) / 2.0),
    })
}

/// Twist about the origin on the annulus 0.2 < r < 1, rigid rotation by
/// `turns · 2π` on 0.4 ≤ r ≤ 0.8.
pub fn plateau_twist(turns: f64) -> Result<HomeoExpr> {
    let w = turns * TAU;
    annulus_twist(Point::ORIGIN, vec![[0.2, 0.0], [0.4, w], [0.8, w], [1.0, 0.0]], 0.2, 1.0)
}

/// Plateau twist with rotation number (√5 − 1)/2.
pub fn golden_twist() -> HomeoExpr {
    plateau_twist((5f64.sqrt() - 1.0) / 2.0).expect("valid profile")
}

/// Plateau twist with rotation number p/q.
pub fn rational_twist(p: u32, q: u32) -> Result<HomeoExpr> {
    if q == 0 {
        return invalid("rotation number needs q > 0");
    }
    plateau_twist(p as f64 / q as f64)
}
