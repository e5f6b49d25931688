use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use entrolab::constructions::golden_twist;
use entrolab::entropy::{separated_count, EntropyConfig};
use entrolab::estimators::{holder_seminorm, sobolev_energy, Exponent, SamplingPlan};
use entrolab::homeo::translation_move;
use entrolab::{close_orbit, find_return, Point};
use entrolab_bench::{horseshoe, inner_plan, nested, probe_points, unit};

fn evaluation(c: &mut Criterion) {
    let pts = probe_points(1000);
    let mut g = c.benchmark_group("apply");
    for (name, m) in [
        ("horseshoe-3", horseshoe(3)),
        ("nested-4", nested(4)),
        ("translation-64", translation_move(Point::new(0.4, 0.5), Point::new(0.6, 0.5), 0.1, 0.3).unwrap()),
    ] {
        g.bench_function(name, |b| b.iter(|| pts.iter().map(|&x| m.apply(black_box(x))).fold(0.0, |s, y| s + y.x)));
    }
    g.finish();
}

fn estimators(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimators");
    g.sample_size(10);
    let h = horseshoe(2);
    let cfg = EntropyConfig { budget: 50_000, ..EntropyConfig::default() };
    for n in [4, 6] {
        g.bench_with_input(BenchmarkId::new("separated-count", n), &n, |b, &n| {
            b.iter(|| separated_count(&h, n, 1.0 / 32.0, &inner_plan(32, 10), &cfg).unwrap())
        });
    }
    let m = nested(3);
    g.bench_function("holder-lip-pairs", |b| {
        b.iter(|| holder_seminorm(&m, Exponent::Lip, &SamplingPlan::pairs(unit(), 5000, 0).refined(4)).unwrap())
    });
    g.bench_function("sobolev-energy", |b| b.iter(|| sobolev_energy(&m, 2.0, &unit(), 0.01).unwrap()));
    g.finish();
}

fn closing(c: &mut Criterion) {
    let f = golden_twist();
    let seg = find_return(&f, Point::new(0.6, 0.0), 0.1, 5000).unwrap();
    let mut g = c.benchmark_group("perturb");
    g.sample_size(10);
    g.bench_function("find-return", |b| b.iter(|| find_return(&f, Point::new(0.6, 0.0), 0.1, 5000).unwrap()));
    g.bench_function("close-orbit", |b| b.iter(|| close_orbit(&f, &seg, 0.25).unwrap()));
    g.finish();
}

criterion_group!(benches, evaluation, estimators, closing);
criterion_main!(benches);
