use entrolab::constructions::{appendix_a_map, golden_twist, rational_twist, NestedSquares};
use entrolab::entropy::{entropy_estimate, EntropyConfig};
use entrolab::estimators::{holder_seminorm, Exponent, SamplingPlan};
use entrolab::{close_orbit, find_return, identity, insert_horseshoe_chain, make_horseshoe, Point, Rect};

fn pool(n: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap()
}

#[test]
fn closing_leaves_the_map_alone_off_the_support() {
    let f = golden_twist();
    let seg = find_return(&f, Point::new(0.6, 0.0), 0.1, 5000).unwrap();
    let rep = close_orbit(&f, &seg, 0.25).unwrap();
    assert!(rep.residual <= 1e-9);
    let e = rep.support.unwrap();
    for k in 0..200 {
        let x = Point::new(-0.95 + 0.0095 * k as f64, 0.3 * (k as f64).sin());
        if e.dist(x) > 1e-9 && e.dist(f.apply(x)) > 1e-9 {
            assert_eq!(rep.g.apply(x), f.apply(x));
        }
    }
}

#[test]
fn rational_chain_is_certified() {
    let f = rational_twist(2, 5).unwrap();
    let seg = find_return(&f, Point::new(0.6, 0.0), 0.1, 10_000).unwrap();
    assert_eq!(seg.k, 5);
    let (g, rep) = insert_horseshoe_chain(&f, &seg, 2, 0.15).unwrap();
    assert_eq!(rep.certificates.len(), 6);
    assert_eq!(rep.passed(), 6);
    // The chain leaves far-away points alone.
    let far = Point::new(-0.9, 0.0);
    assert_eq!(g.apply(far), f.apply(far));
}

#[test]
fn identity_has_zero_entropy_and_horseshoes_do_not() {
    let r = NestedSquares::inner();
    let plan = SamplingPlan::grid(r, 32).refined(10);
    let cfg = EntropyConfig { budget: 60_000, ..EntropyConfig::default() };
    let eps = [1.0 / 16.0, 1.0 / 32.0];
    let ns = [2, 3, 4, 5];
    let id = entropy_estimate(&identity(), &ns, &eps, &plan, &cfg).unwrap();
    assert!(id.headline.abs() < 1e-12);
    let (h, _) = make_horseshoe(2, &r).unwrap();
    let est = entropy_estimate(&h, &ns, &eps, &plan, &cfg).unwrap();
    assert!(est.headline > 0.3, "{}", est.headline);
}

#[test]
fn estimates_do_not_depend_on_worker_count() {
    let f = appendix_a_map(3, None).unwrap();
    let plan = SamplingPlan::grid(NestedSquares::inner_image(3), 32).refined(10);
    let cfg = EntropyConfig { budget: 40_000, ..EntropyConfig::default() };
    let run = |w| pool(w).install(|| entropy_estimate(&f, &[2, 3, 4, 5], &[1.0 / 128.0], &plan, &cfg).unwrap());
    assert_eq!(run(1), run(3));
    let lip = |w| {
        pool(w).install(|| holder_seminorm(&f, Exponent::Lip, &SamplingPlan::pairs(Rect::square(0.0, 1.0).unwrap(), 5000, 7).refined(6)).unwrap())
    };
    assert_eq!(lip(1), lip(4));
}
