//! Fixtures shared by the benchmarks.

use entrolab::constructions::{appendix_a_map, NestedSquares};
use entrolab::estimators::SamplingPlan;
use entrolab::{make_horseshoe, HomeoExpr, Point, Rect};

pub fn horseshoe(n: usize) -> HomeoExpr {
    make_horseshoe(n, &NestedSquares::inner()).expect("valid horseshoe").0
}

pub fn nested(m: usize) -> HomeoExpr {
    appendix_a_map(m, None).expect("valid nested-squares map")
}

/// `k` points on a diagonal of the unit square, away from any boundary.
pub fn probe_points(k: usize) -> Vec<Point> {
    (0..k).map(|i| Point::new(0.2 + 0.6 * i as f64 / k as f64, 0.3 + 0.4 * i as f64 / k as f64)).collect()
}

pub fn inner_plan(res: usize, rounds: usize) -> SamplingPlan {
    SamplingPlan::grid(NestedSquares::inner(), res).refined(rounds)
}

pub fn unit() -> Rect {
    Rect::square(0.0, 1.0).expect("unit square")
}
