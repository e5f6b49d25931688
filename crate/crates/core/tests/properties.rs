use entrolab::entropy::{separated_count, EntropyConfig};
use entrolab::estimators::{holder_seminorm, sobolev_energy, Exponent, SamplingPlan};
use entrolab::homeo::{affine, rotation_move, translation_move, BumpProfile};
use entrolab::{branch_certificate, compose, inverse, make_horseshoe, HomeoExpr, Point, Rect};
use proptest::prelude::*;

fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

fn unit() -> Rect {
    Rect::square(0.0, 1.0).unwrap()
}

/// Largest singular value of a 2 × 2 matrix, from the closed form.
fn op_norm(m: [[f64; 2]; 2]) -> f64 {
    let [[a, b], [c, d]] = m;
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
}

fn small_move() -> impl Strategy<Value = HomeoExpr> {
    prop_oneof![
        (0.3..0.7f64, 0.3..0.7f64, -0.1..0.1f64, -0.1..0.1f64, 0.05..0.15f64, 0.05..0.2f64).prop_map(
            |(x, y, dx, dy, r1, w)| translation_move(pt(x, y), pt(x + dx, y + dy), r1, r1 + w).unwrap()
        ),
        (0.3..0.7f64, 0.3..0.7f64, -3.0..3.0f64, 0.05..0.2f64)
            .prop_map(|(x, y, a, r)| rotation_move(pt(x, y), a, r).unwrap()),
        (0.5..1.5f64, -0.5..0.5f64, -0.5..0.5f64, 0.5..1.5f64)
            .prop_map(|(a, b, c, d)| affine([[a, b], [c, d + if (a * d - b * c).abs() < 0.1 { 1.0 } else { 0.0 }]], pt(0.0, 0.0)).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn compositions_invert(maps in prop::collection::vec(small_move(), 1..4), x in 0.0..1.0f64, y in 0.0..1.0f64) {
        let m = compose(maps).with_steps(256);
        let z = pt(x, y);
        prop_assert!(m.apply_inv(m.apply(z)).dist(z) <= 1e-6);
        prop_assert!(inverse(m.clone()).apply(m.apply(z)).dist(z) <= 1e-6);
    }

    #[test]
    fn expressions_survive_json(maps in prop::collection::vec(small_move(), 1..4)) {
        let m = compose(maps);
        let text = m.to_json();
        let back = HomeoExpr::from_json(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn bump_is_monotone_and_slope_bounded(r1 in 0.01..1.0f64, w in 0.01..1.0f64) {
        let b = BumpProfile::new(r1, r1 + w).unwrap();
        let k = 2000;
        let dt = 1.5 * (r1 + w) / k as f64;
        let mut prev = b.value(0.0);
        prop_assert_eq!(prev, 1.0);
        for i in 1..=k {
            let v = b.value(i as f64 * dt);
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v <= prev);
            prop_assert!((prev - v) / dt <= b.slope_bound() * (1.0 + 1e-9));
            prev = v;
        }
        prop_assert_eq!(prev, 0.0);
    }

    #[test]
    fn translation_fixes_points_off_its_support(
        dx in -0.2..0.2f64, dy in -0.2..0.2f64, r1 in 0.05..0.1f64, ang in 0.0..6.28f64, extra in 0.0..0.5f64,
    ) {
        let (p, q) = (pt(0.5, 0.5), pt(0.5 + dx, 0.5 + dy));
        let m = translation_move(p, q, r1, 2.0 * r1).unwrap();
        // Distance to the segment is at least 2·r1 for points this far from both ends.
        let z = p + pt(1.0, 0.0).rotate(ang) * (p.dist(q) + 2.0 * r1 + extra);
        prop_assert_eq!(m.apply(z), z);
    }

    #[test]
    fn affine_lipschitz_is_operator_norm(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, d in -2.0..2.0f64) {
        prop_assume!((a * d - b * c).abs() > 0.05);
        let m = [[a, b], [c, d]];
        let f = affine(m, pt(0.3, -0.1)).unwrap();
        let measured = holder_seminorm(&f, Exponent::Lip, &SamplingPlan::grid(unit(), 12)).unwrap().value;
        let exact = op_norm(m);
        prop_assert!(measured <= exact * (1.0 + 1e-9));
        prop_assert!(measured >= 0.97 * exact);
    }

    #[test]
    fn affine_energy_obeys_the_double_inequality(a in -2.0..2.0f64, b in -2.0..2.0f64, c in -2.0..2.0f64, d in -2.0..2.0f64, p in 1.0..3.0f64) {
        prop_assume!((a * d - b * c).abs() > 0.05);
        let f = affine([[a, b], [c, d]], pt(0.0, 0.0)).unwrap();
        let e = sobolev_energy(&f, p, &unit(), 0.05).unwrap();
        prop_assert!(e.double_inequality_holds());
        // |J| integrates to |det| over the unit square.
        prop_assert!((e.jacobian - (a * d - b * c).abs()).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn horseshoes_certify_anywhere(n in 2usize..6, x in -1.0..1.0f64, y in -1.0..1.0f64, side in 0.05..2.0f64) {
        let r = Rect::new(pt(x, y), pt(x + side, y + side)).unwrap();
        let (m, spec) = make_horseshoe(n, &r).unwrap();
        let cert = branch_certificate(&m, &spec).unwrap();
        prop_assert!(cert.pass);
        prop_assert_eq!(cert.bound, Some((n as f64).ln()));
        for z in r.grid(9) {
            prop_assert!(m.apply_inv(m.apply(z)).dist(z) <= 1e-9 * side.max(1.0));
        }
    }

    #[test]
    fn separated_counts_grow_with_n_and_shrinking_eps(n in 2usize..4) {
        let (m, _) = make_horseshoe(2, &Rect::square(1.0 / 3.0, 2.0 / 3.0).unwrap()).unwrap();
        let plan = SamplingPlan::grid(Rect::square(1.0 / 3.0, 2.0 / 3.0).unwrap(), 24).refined(4);
        let cfg = EntropyConfig { budget: 20_000, ..EntropyConfig::default() };
        let s = |n, e| separated_count(&m, n, e, &plan, &cfg).unwrap();
        prop_assert!(s(n, 0.05) <= s(n + 1, 0.05));
        prop_assert!(s(n, 0.05) <= s(n, 0.025));
    }
}
