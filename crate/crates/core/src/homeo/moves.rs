//! Bump-flow moves: translations along segments, rotations, cylinder
//! affinities, and the isometric cylinder transports built from them.

use crate::error::{invalid, Result};
use crate::geometry::{Ball, ElongatedNbhd, Point, Region, SolidCylinder};

use super::bump::SLOPE;
use super::flow::DEFAULT_STEPS;
use super::{compose, AffinityFrame, HomeoExpr, Node};

/// Axial overshoot used by [`affinity_move`] so that the image of the source
/// reaches past the target's marked ends.
pub const AFFINITY_MARGIN: f64 = 0.25;

/// Grönwall constant M = (15/8)·|q − p|/(r2 − r1).
pub fn gronwall_m(p: Point, q: Point, r1: f64, r2: f64) -> f64 {
    SLOPE * p.dist(q) / (r2 - r1)
}

/// Time-one map of x ↦ b(dist(x, [p, q]))·(q − p).
pub fn translation_move(p: Point, q: Point, r1: f64, r2: f64) -> Result<HomeoExpr> {
    if !(r1 > 0.0 && r2 > r1) {
        return invalid(format!("translation move needs 0 < r1 < r2, got r1={r1}, r2={r2}"));
    }
    if p == q {
        return Ok(super::identity());
    }
    let m = gronwall_m(p, q, r1, r2);
    Ok(HomeoExpr {
        node: Node::TranslationMove { p, q, r1, r2, steps: DEFAULT_STEPS },
        support: Some(Region::Elongated(ElongatedNbhd { p, q, r: r2 })),
        lipschitz: Some(1.0 + m * m.exp()),
    })
}

/// Moves the centre of `c` to the origin, translating `c` rigidly.
pub fn translate_to_origin(c: &SolidCylinder) -> Result<HomeoExpr> {
    let centre = c.center();
    if centre == Point::ORIGIN {
        return Ok(super::identity());
    }
    let r = c.circumradius();
    translation_move(centre, Point::ORIGIN, r, r + centre.norm())
}

/// Rigid rotation by `angle` on B(center, r), identity outside B(center, 2r).
pub fn rotation_move(center: Point, angle: f64, r: f64) -> Result<HomeoExpr> {
    if !(r > 0.0) {
        return invalid("rotation move needs r > 0");
    }
    if angle == 0.0 {
        return Ok(super::identity());
    }
    let s = 2.0 * SLOPE * angle.abs();
    Ok(HomeoExpr {
        node: Node::RotationMove { center, angle, r },
        support: Some(Region::Ball(Ball::new(center, 2.0 * r))),
        lipschitz: Some((s + (s * s + 4.0).sqrt()) / 2.0),
    })
}

/// Flow of a bump-cut hyperbolic linear field that maps `source` across the
/// coaxial, concentric cylinder `target`.
pub fn affinity_move(source: &SolidCylinder, target: &SolidCylinder) -> Result<HomeoExpr> {
    let scale = source.diam().max(target.diam());
    if source.center().dist(target.center()) > 1e-12 * scale || source.axis().cross(target.axis()).abs() > 1e-12 {
        return invalid("affinity move needs concentric cylinders with a common axis");
    }
    if (source.len() - target.len()).abs() <= 1e-12 * scale && (source.rad() - target.rad()).abs() <= 1e-12 * scale
    {
        return Ok(super::identity());
    }
    let fr = AffinityFrame::new(source, target);
    let reach = fr.p.dist(fr.q) / 2.0 + fr.bump.r2;
    let gen = fr.log_ax.abs().max(fr.log_lat.abs());
    Ok(HomeoExpr {
        node: Node::AffinityMove { source: *source, target: *target, steps: DEFAULT_STEPS },
        support: Some(Region::Elongated(ElongatedNbhd { p: fr.p, q: fr.q, r: fr.bump.r2 })),
        lipschitz: Some((gen * (1.0 + fr.bump.slope_bound() * reach)).exp()),
    })
}

fn isometric(c: &SolidCylinder, d: &SolidCylinder) -> bool {
    let tol = 1e-12 * c.diam().max(d.diam());
    (c.len() - d.len()).abs() <= tol && (c.rad() - d.rad()).abs() <= tol
}

fn axis_angle(from: &SolidCylinder, to: &SolidCylinder) -> f64 {
    let (u, v) = (from.axis(), to.axis());
    u.cross(v).atan2(u.dot(v))
}

/// Isometry carrying `c` onto `c2` (marks matched), supported in a ball about
/// `ball.center` of three times its radius.
pub fn cylinder_isometry(c: &SolidCylinder, c2: &SolidCylinder, ball: &Ball) -> Result<HomeoExpr> {
    if !isometric(c, c2) {
        return invalid("cylinder isometry needs isometric cylinders");
    }
    let p = ball.center;
    let tol = 1e-12 * ball.r;
    if c.corners().iter().chain(c2.corners().iter()).any(|x| x.dist(p) > ball.r + tol) {
        return invalid("cylinders must lie in the ball");
    }
    if c == c2 {
        return Ok(super::identity());
    }
    let rc = c.circumradius();
    let to_p = transport_step(c.center(), p, rc)?;
    let turn = rotation_move(p, axis_angle(c, c2), ball.r)?;
    let from_p = transport_step(p, c2.center(), rc)?;
    Ok(compose(vec![from_p, turn, to_p]).with_support(Region::Ball(Ball::new(p, 3.0 * ball.r))))
}

fn transport_step(from: Point, to: Point, rc: f64) -> Result<HomeoExpr> {
    if from == to {
        return Ok(super::identity());
    }
    translation_move(from, to, rc, rc + from.dist(to))
}

/// Isometric transport of `cp ⊂ B(p, r)` onto `cq ⊂ B(q, r)`, supported in
/// E(p, q; 3r).
pub fn cylinder_transport(cp: &SolidCylinder, p: Point, cq: &SolidCylinder, q: Point, r: f64) -> Result<HomeoExpr> {
    if p == q {
        return cylinder_isometry(cp, cq, &Ball::new(p, r));
    }
    if !isometric(cp, cq) {
        return invalid("cylinder transport needs isometric cylinders");
    }
    let tol = 1e-12 * r;
    if cp.corners().iter().any(|x| x.dist(p) > r + tol) || cq.corners().iter().any(|x| x.dist(q) > r + tol) {
        return invalid("cylinders must lie in their balls");
    }
    let rc = cp.circumradius();
    let shift = if cp.center() == cq.center() {
        super::identity()
    } else {
        translation_move(cp.center(), cq.center(), rc, rc + r)?
    };
    let turn = rotation_move(cq.center(), axis_angle(cp, cq), rc)?;
    Ok(compose(vec![turn, shift]).with_support(Region::Elongated(ElongatedNbhd { p, q, r: 3.0 * r })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homeo::inverse;
    use std::f64::consts::PI;

    fn pt(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn translation_sends_p_to_q() {
        let m = translation_move(pt(0.0, 0.0), pt(0.1, 0.0), 0.2, 0.4).unwrap();
        let y = m.eval(pt(0.0, 0.0)).unwrap();
        assert!(y.dist(pt(0.1, 0.0)) <= 1e-12);
        let far = pt(0.05, 0.8);
        assert_eq!(m.eval(far).unwrap(), far);
        assert!(translation_move(pt(0.0, 0.0), pt(1.0, 0.0), 0.4, 0.2).is_err());
        assert!(translation_move(pt(0.2, 0.2), pt(0.2, 0.2), 0.1, 0.2).unwrap().is_identity());
    }

    #[test]
    fn translate_to_origin_centres_cylinder() {
        let c = SolidCylinder::new(pt(0.8, 0.0), pt(1.2, 0.0), 0.1).unwrap();
        let m = translate_to_origin(&c).unwrap();
        assert!(m.eval(c.center()).unwrap().norm() < 1e-12);
        for k in c.corners() {
            assert!(m.eval(k).unwrap().dist(k - c.center()) < 1e-12);
        }
        let r = c.circumradius() + 1.0;
        let far = pt(0.5, 3.0 * r);
        assert_eq!(m.eval(far).unwrap(), far);
        let centred = SolidCylinder::new(pt(-0.2, 0.0), pt(0.2, 0.0), 0.1).unwrap();
        assert!(translate_to_origin(&centred).unwrap().is_identity());
    }

    #[test]
    fn rotation_is_rigid_inside() {
        let c = pt(0.3, -0.2);
        let m = rotation_move(c, PI / 2.0, 0.5).unwrap();
        let y = m.eval(c + pt(0.25, 0.0)).unwrap();
        assert!(y.dist(c + pt(0.0, 0.25)) < 1e-9);
        assert_eq!(m.eval(c).unwrap(), c);
        assert!(rotation_move(c, 0.0, 0.5).unwrap().is_identity());
        assert_eq!(m.eval(c + pt(1.5, 0.0)).unwrap(), c + pt(1.5, 0.0));
    }

    #[test]
    fn rotation_full_turn_returns() {
        let m = rotation_move(Point::ORIGIN, PI / 3.0, 1.0).unwrap();
        let orbit = m.iterate(pt(0.4, 0.1), 6).unwrap();
        assert!(orbit[6].dist(orbit[0]) < 1e-9);
    }

    #[test]
    fn affinity_stretches_axially() {
        let cs = SolidCylinder::new(pt(-0.5, 0.0), pt(0.5, 0.0), 0.2).unwrap();
        let ct = SolidCylinder::new(pt(-1.0, 0.0), pt(1.0, 0.0), 0.1).unwrap();
        let m = affinity_move(&cs, &ct).unwrap();
        let ya = m.eval(cs.a).unwrap();
        let yb = m.eval(cs.b).unwrap();
        assert!(ya.x < -1.0 && yb.x > 1.0, "{ya:?} {yb:?}");
        assert!(affinity_move(&cs, &cs).unwrap().is_identity());
        let skew = SolidCylinder::new(pt(0.0, -1.0), pt(0.0, 1.0), 0.1).unwrap();
        assert!(affinity_move(&cs, &skew).is_err());
        let far = pt(0.0, 50.0);
        assert_eq!(m.eval(far).unwrap(), far);
    }

    #[test]
    fn isometry_swaps_endpoints_by_half_turn() {
        let c = SolidCylinder::new(pt(-0.3, 0.0), pt(0.3, 0.0), 0.1).unwrap();
        let c2 = SolidCylinder::new(c.b, c.a, 0.1).unwrap();
        let m = cylinder_isometry(&c, &c2, &Ball::new(Point::ORIGIN, 0.5)).unwrap();
        assert!(m.eval(c.a).unwrap().dist(c.b) < 1e-9);
        assert!(m.eval(c.b).unwrap().dist(c.a) < 1e-9);
        assert!(cylinder_isometry(&c, &c, &Ball::new(Point::ORIGIN, 0.5)).unwrap().is_identity());
    }

    #[test]
    fn isometry_matches_corners() {
        let c = SolidCylinder::new(pt(0.1, 0.1), pt(0.3, 0.2), 0.03).unwrap();
        let c2 = SolidCylinder::centered(pt(-0.2, 0.15), pt(-1.0, 2.0), c.len(), c.rad()).unwrap();
        let ball = Ball::new(pt(0.0, 0.1), 0.45);
        let m = cylinder_isometry(&c, &c2, &ball).unwrap();
        for (x, y) in c.corners().iter().zip(c2.corners().iter()) {
            assert!(m.eval(*x).unwrap().dist(*y) < 1e-6);
        }
        let far = pt(0.0, 0.1 + 10.0 * ball.r);
        assert_eq!(m.eval(far).unwrap(), far);
        let other = SolidCylinder::new(pt(0.0, 0.0), pt(0.1, 0.0), 0.03).unwrap();
        assert!(cylinder_isometry(&c, &other, &ball).is_err());
    }

    #[test]
    fn transport_moves_centres() {
        let cp = SolidCylinder::new(pt(0.0, 0.0), pt(0.1, 0.0), 0.02).unwrap();
        let cq = SolidCylinder::centered(pt(1.0, 0.5), pt(0.0, 1.0), 0.1, 0.02).unwrap();
        let m = cylinder_transport(&cp, pt(0.05, 0.0), &cq, pt(1.0, 0.5), 0.1).unwrap();
        assert!(m.eval(cp.center()).unwrap().dist(cq.center()) < 1e-9);
        for (x, y) in cp.corners().iter().zip(cq.corners().iter()) {
            assert!(m.eval(*x).unwrap().dist(*y) < 1e-6);
        }
        let far = pt(0.5, 2.0);
        assert_eq!(m.eval(far).unwrap(), far);
        let same = cylinder_transport(&cp, pt(0.05, 0.0), &cp, pt(0.05, 0.0), 0.1).unwrap();
        assert!(same.is_identity());
    }

    #[test]
    fn moves_invert_by_time_reversal() {
        let cs = SolidCylinder::new(pt(-0.5, 0.0), pt(0.5, 0.0), 0.2).unwrap();
        let ct = SolidCylinder::new(pt(-1.0, 0.0), pt(1.0, 0.0), 0.1).unwrap();
        let moves = [
            translation_move(pt(0.0, 0.0), pt(0.3, 0.2), 0.1, 0.3).unwrap(),
            affinity_move(&cs, &ct).unwrap(),
            rotation_move(pt(0.1, 0.0), 2.0, 0.3).unwrap(),
        ];
        for m in moves {
            let m = m.with_steps(256);
            let inv = inverse(m.clone());
            for k in 0..40 {
                let x = pt(-0.6 + 0.03 * k as f64, 0.1 * ((k * 7) % 5) as f64 - 0.2);
                assert!(inv.apply(m.apply(x)).dist(x) < 1e-6);
            }
        }
    }
}
