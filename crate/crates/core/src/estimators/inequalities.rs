use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Point, RegionSet};
use crate::homeo::{HomeoExpr, Node};

use super::plan::{PlanKind, SamplingPlan};
use super::seminorm::{seminorm_of, Exponent};

const SLACK: f64 = 1e-9;

fn plan_pairs(plan: &SamplingPlan) -> Result<Vec<(Point, Point)>> {
    if let PlanKind::PairCloud { .. } = plan.base() {
        return plan.pair_list();
    }
    let pts = plan.points()?;
    let mut out = Vec::with_capacity(pts.len() * pts.len().saturating_sub(1) / 2);
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            out.push((pts[i], pts[j]));
        }
    }
    Ok(out)
}

fn ratio(num: f64, den: f64, exponent: f64) -> f64 {
    if den <= 0.0 {
        0.0
    } else {
        num / den.powf(exponent)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RescalingReport {
    pub pass: bool,
    /// Sampled [φ1 ∘ f ∘ φ0⁻¹]_α.
    pub lhs: f64,
    pub rhs: f64,
    pub phi1_lip: f64,
    pub f_beta: f64,
    pub phi0_inv_lip: f64,
    pub diam: f64,
}

/// [φ1∘f∘φ0⁻¹]_α ≤ [φ1]_Lip·[f]_β·[φ0⁻¹]_Lip^β·diam^{β−α} on the plan's
/// domain, every factor measured on the same pairs carried along the chain.
pub fn rescaling_bound_check(
    f: &HomeoExpr,
    phi0: &HomeoExpr,
    phi1: &HomeoExpr,
    alpha: f64,
    beta: f64,
    plan: &SamplingPlan,
) -> Result<RescalingReport> {
    if !(0.0 <= alpha && alpha <= beta && beta <= 1.0) {
        return invalid("rescaling needs 0 <= alpha <= beta <= 1");
    }
    let pairs = plan_pairs(plan)?;
    if pairs.is_empty() {
        return invalid("sampling plan needs at least one pair");
    }
    let maxes = pairs
        .par_iter()
        .map(|&(x, y)| {
            let (u, v) = (phi0.apply_inv(x), phi0.apply_inv(y));
            let (fu, fv) = (f.apply(u), f.apply(v));
            let (hx, hy) = (phi1.apply(fu), phi1.apply(fv));
            [
                ratio(hx.dist(hy), x.dist(y), alpha),
                ratio(hx.dist(hy), fu.dist(fv), 1.0),
                ratio(fu.dist(fv), u.dist(v), beta),
                ratio(u.dist(v), x.dist(y), 1.0),
                x.dist(y),
            ]
        })
        .reduce(|| [0.0; 5], |a, b| std::array::from_fn(|k| a[k].max(b[k])));
    let diam = plan.domain.diam();
    let [lhs, phi1_lip, f_beta, phi0_inv_lip, _] = maxes;
    let rhs = phi1_lip * f_beta * phi0_inv_lip.powf(beta) * diam.powf(beta - alpha);
    Ok(RescalingReport { pass: lhs <= rhs + SLACK, lhs, rhs, phi1_lip, f_beta, phi0_inv_lip, diam })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GluingReport {
    pub pass: bool,
    /// [glued − id]_α / max over pieces of [piece − id]_α.
    pub k_measured: f64,
    pub k_bound: f64,
    /// Well-positioned ratio of the piece regions; zero for a single piece.
    pub kappa: f64,
    pub glued: f64,
    pub max_piece: f64,
}

/// K(α, κ) = 1 + 2·max(κ, 1)^α.
pub fn gluing_constant(alpha: f64, kappa: f64) -> f64 {
    1.0 + 2.0 * kappa.max(1.0).powf(alpha)
}

/// Sampled gluing inequality for a piecewise map whose default is the
/// identity, with each piece supported in its region.
pub fn gluing_bound_check(glued: &HomeoExpr, alpha: f64, plan: &SamplingPlan) -> Result<GluingReport> {
    let Node::Piecewise { parts, default, .. } = &glued.node else {
        return invalid("gluing check needs a piecewise map");
    };
    if !default.is_identity() {
        return invalid("gluing check needs an identity default");
    }
    if parts.is_empty() {
        return invalid("gluing check needs at least one piece");
    }
    let exp = Exponent::Holder(alpha);
    fn disp(m: &HomeoExpr) -> impl Fn(Point) -> Point + Sync + '_ {
        move |x| m.apply(x) - x
    }
    let g = seminorm_of(&disp(glued), exp, plan)?.value;
    let mut max_piece: f64 = 0.0;
    for p in parts {
        max_piece = max_piece.max(seminorm_of(&disp(&p.map), exp, plan)?.value);
    }
    let (kappa, k_bound) = if parts.len() == 1 {
        (0.0, 1.0)
    } else {
        let res = plan.spacing().min(plan.domain.diam() / 200.0);
        let rs = RegionSet::new(parts.iter().map(|p| p.region.clone()).collect(), res)?;
        let kappa = rs.well_positioned_ratio()?;
        (kappa, gluing_constant(alpha, kappa))
    };
    let k_measured = if max_piece > 0.0 { g / max_piece } else if g > 0.0 { f64::INFINITY } else { 1.0 };
    Ok(GluingReport { pass: k_measured <= k_bound + SLACK, k_measured, k_bound, kappa, glued: g, max_piece })
}
