//! Bowen separated-set entropy estimates.
//!
//! Orbit clouds are grown by refining the base plan: a cell is split across
//! the direction in which its orbit spreads fastest until its n-step Bowen
//! diameter drops below a fraction of ε or the point budget runs out. The
//! cloud used for a given (n, ε) is the cut of that tree, so clouds are nested
//! in n and in ε, and separated sets are seeded from the neighbouring entries
//! of the table.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustc_hash::FxHashMap;
use std::cmp::Reverse;
use std::collections::BinaryHeap;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimators::plan::SamplingPlan;
use crate::geometry::{Point, Region};
use crate::homeo::HomeoExpr;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyConfig {
    /// Maximum number of cloud points across the refinement tree.
    pub budget: usize,
    /// A cell is split while its Bowen diameter exceeds `split_frac · ε`.
    pub split_frac: f64,
    pub seed: u64,
    /// Orbits leaving this region count as escaped.
    pub domain: Option<Region>,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig { budget: 700_000, split_frac: 1.0, seed: 0, domain: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    pub n_values: Vec<usize>,
    pub eps: Vec<f64>,
    /// counts[i][j] = S(n_values[j], eps[i]).
    pub counts: Vec<Vec<usize>>,
    pub cloud_sizes: Vec<Vec<usize>>,
    /// Least-squares slope of log S against n over the upper half of the n-range.
    pub slopes: Vec<f64>,
    pub degenerate: Vec<bool>,
    pub headline: f64,
    pub escaped: usize,
    pub cloud_points: usize,
    pub unreliable: bool,
    pub maximal: bool,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
}

impl EntropyEstimate {
    pub fn with_bounds(mut self, lower: Option<f64>, upper: Option<f64>) -> Self {
        self.lower_bound = lower;
        self.upper_bound = upper;
        self
    }

    pub fn count(&self, n: usize, eps: f64) -> Option<usize> {
        let j = self.n_values.iter().position(|&v| v == n)?;
        let i = self.eps.iter().position(|&e| e == eps)?;
        Some(self.counts[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,eps,count,cloud,slope\n");
        for (i, e) in self.eps.iter().enumerate() {
            for (j, n) in self.n_values.iter().enumerate() {
                s.push_str(&format!("{n},{e},{},{},{}\n", self.counts[i][j], self.cloud_sizes[i][j], self.slopes[i]));
            }
        }
        s
    }
}

struct Tree {
    nmax: usize,
    orbits: Vec<Point>,
    spread: Vec<f32>,
    escape: Vec<u8>,
    children: Vec<u32>,
    roots: usize,
    keys: Vec<u64>,
}

const LEAF: u32 = u32::MAX;
const BATCH: usize = 4096;

#[derive(Clone, Copy, PartialEq, PartialOrd)]
struct OrdF32(f32);

impl Eq for OrdF32 {}

impl Ord for OrdF32 {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&o.0)
    }
}

struct Cell {
    c: Point,
    hx: f64,
    hy: f64,
}

struct Probe {
    orbit: Vec<Point>,
    spread: Vec<f32>,
    escape: u8,
    split_x: bool,
}

fn orbit_of(m: &HomeoExpr, x: Point, nmax: usize, domain: Option<&Region>) -> (Vec<Point>, usize) {
    let mut out = Vec::with_capacity(nmax);
    let mut z = x;
    for k in 0..nmax {
        if !z.is_finite() || domain.is_some_and(|d| !d.contains(z)) {
            out.resize(nmax, z);
            return (out, k);
        }
        out.push(z);
        if k + 1 < nmax {
            z = m.apply(z);
        }
    }
    (out, nmax)
}

fn probe(m: &HomeoExpr, cell: &Cell, nmax: usize, domain: Option<&Region>) -> Probe {
    let (orbit, esc) = orbit_of(m, cell.c, nmax, domain);
    let ex = Point::new(cell.hx, 0.0);
    let ey = Point::new(0.0, cell.hy);
    let (xp, _) = orbit_of(m, cell.c + ex, nmax, None);
    let (xm, _) = orbit_of(m, cell.c - ex, nmax, None);
    let (yp, _) = orbit_of(m, cell.c + ey, nmax, None);
    let (ym, _) = orbit_of(m, cell.c - ey, nmax, None);
    let mut spread = Vec::with_capacity(nmax);
    let (mut sx, mut sy, mut acc) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..nmax {
        let dx = xp[k].dist(xm[k]);
        let dy = yp[k].dist(ym[k]);
        sx = sx.max(dx);
        sy = sy.max(dy);
        acc = acc.max(dx + dy);
        spread.push(if acc.is_finite() { acc as f32 } else { f32::INFINITY });
    }
    Probe { orbit, spread, escape: esc as u8, split_x: sx >= sy }
}

fn build_tree(m: &HomeoExpr, plan: &SamplingPlan, nmax: usize, eps_min: f64, cfg: &EntropyConfig) -> Result<Tree> {
    let base = plan.points()?;
    let h = plan.spacing() / 2.0;
    let mut cells: Vec<Cell> = base.into_iter().map(|c| Cell { c, hx: h, hy: h }).collect();
    let roots = cells.len();
    let mut tree = Tree {
        nmax,
        orbits: Vec::new(),
        spread: Vec::new(),
        escape: Vec::new(),
        children: Vec::new(),
        roots,
        keys: Vec::new(),
    };
    let threshold = (cfg.split_frac * eps_min) as f32;
    let mut depth: Vec<u16> = vec![0; roots];
    let mut heap = BinaryHeap::new();
    let mut batch: Vec<usize> = (0..roots).collect();
    loop {
        let probes: Vec<Probe> = batch.par_iter().map(|&i| probe(m, &cells[i], nmax, cfg.domain.as_ref())).collect();
        for (&i, p) in batch.iter().zip(&probes) {
            debug_assert_eq!(i, tree.escape.len());
            tree.orbits.extend_from_slice(&p.orbit);
            tree.spread.extend_from_slice(&p.spread);
            tree.escape.push(p.escape);
            tree.children.push(LEAF);
            let s = p.spread[nmax - 1];
            if (depth[i] as usize) < plan.rounds() && (p.escape as usize) == nmax && s > threshold {
                heap.push((OrdF32(s), Reverse(i), p.split_x));
            }
        }
        let room = cfg.budget.saturating_sub(cells.len()) / 2;
        let take = room.min(BATCH).min(heap.len());
        if take == 0 {
            break;
        }
        batch.clear();
        for _ in 0..take {
            let (_, Reverse(idx), split_x) = heap.pop().expect("non-empty heap");
            tree.children[idx] = cells.len() as u32;
            let Cell { c, hx, hy } = cells[idx];
            let kids = if split_x {
                let d = Point::new(hx / 2.0, 0.0);
                [Cell { c: c - d, hx: hx / 2.0, hy }, Cell { c: c + d, hx: hx / 2.0, hy }]
            } else {
                let d = Point::new(0.0, hy / 2.0);
                [Cell { c: c - d, hx, hy: hy / 2.0 }, Cell { c: c + d, hx, hy: hy / 2.0 }]
            };
            for k in kids {
                batch.push(cells.len());
                cells.push(k);
                depth.push(depth[idx] + 1);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    tree.keys = (0..cells.len()).map(|_| rng.next_u64()).collect();
    Ok(tree)
}

impl Tree {
    fn orbit(&self, i: u32) -> &[Point] {
        let i = i as usize * self.nmax;
        &self.orbits[i..i + self.nmax]
    }

    fn cut(&self, n: usize, eps: f64, frac: f64) -> Vec<u32> {
        let thr = (frac * eps) as f32;
        let mut out = Vec::new();
        let mut stack: Vec<u32> = (0..self.roots as u32).rev().collect();
        while let Some(i) = stack.pop() {
            out.push(i);
            let c = self.children[i as usize];
            if c != LEAF && self.spread[i as usize * self.nmax + n - 1] > thr {
                stack.push(c + 1);
                stack.push(c);
            }
        }
        out
    }

    #[allow(dead_code)]
    fn bowen_close(&self, i: u32, j: u32, n: usize, eps: f64) -> bool {
        let (a, b) = (self.orbit(i), self.orbit(j));
        let e2 = eps * eps;
        (0..n).all(|k| (a[k] - b[k]).norm2() <= e2)
    }
}

/// Greedy first-fit over (n, ε)-separation. Chosen orbits are bucketed on up
/// to three orbit points (first, middle, last) with cell size 2ε, so a
/// conflicting orbit lies in one of the 2^d neighbouring buckets. Buckets keep
/// their orbits inline so a scan is a linear sweep.
struct Greedy<'a> {
    tree: &'a Tree,
    n: usize,
    eps: f64,
    at: Vec<usize>,
    buckets: FxHashMap<[i32; 6], Vec<Point>>,
    chosen: Vec<u32>,
}

impl<'a> Greedy<'a> {
    fn new(tree: &'a Tree, n: usize, eps: f64) -> Self {
        let mut at = vec![0, (n - 1) / 2, n - 1];
        at.dedup();
        Greedy { tree, n, eps, at, buckets: FxHashMap::default(), chosen: Vec::new() }
    }

    fn coords(&self, o: &[Point]) -> [f64; 6] {
        let mut u = [0.0; 6];
        for (k, &t) in self.at.iter().enumerate() {
            u[2 * k] = o[t].x / (2.0 * self.eps);
            u[2 * k + 1] = o[t].y / (2.0 * self.eps);
        }
        u
    }

    fn conflicts(&self, i: u32) -> bool {
        let o = &self.tree.orbit(i)[..self.n];
        let u = self.coords(o);
        let k = u.map(|v| v.floor() as i32);
        let dims = 2 * self.at.len();
        let mut side = [0i32; 6];
        for d in 0..dims {
            side[d] = if u[d] - k[d] as f64 >= 0.5 { 1 } else { -1 };
        }
        let e2 = self.eps * self.eps;
        for mask in 0..1usize << dims {
            let mut kk = k;
            for d in 0..dims {
                if mask >> d & 1 == 1 {
                    kk[d] += side[d];
                }
            }
            if let Some(b) = self.buckets.get(&kk) {
                for other in b.chunks_exact(self.n) {
                    if other.iter().zip(o).all(|(a, b)| (*a - *b).norm2() <= e2) {
                        return true;
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, i: u32) {
        let o = &self.tree.orbit(i)[..self.n];
        let k = self.coords(o).map(|v| v.floor() as i32);
        self.buckets.entry(k).or_default().extend_from_slice(o);
        self.chosen.push(i);
    }
}

struct Cell2 {
    chosen: Vec<u32>,
    cloud: usize,
    maximal: bool,
    escaped: usize,
}

fn separated(tree: &Tree, n: usize, eps: f64, frac: f64, seeds: &[u32]) -> Cell2 {
    let mut cloud = tree.cut(n, eps, frac);
    let escaped = cloud.iter().filter(|&&i| (tree.escape[i as usize] as usize) < n).count();
    cloud.retain(|&i| (tree.escape[i as usize] as usize) >= n);
    cloud.sort_by_key(|&i| (tree.keys[i as usize], i));
    let mut g = Greedy::new(tree, n, eps);
    let mut taken = std::collections::HashSet::with_capacity(seeds.len());
    for &s in seeds {
        if (tree.escape[s as usize] as usize) >= n {
            g.insert(s);
            taken.insert(s);
        }
    }
    let mut rejected = Vec::new();
    for &i in &cloud {
        if taken.contains(&i) {
            continue;
        }
        if g.conflicts(i) {
            rejected.push(i);
        } else {
            g.insert(i);
        }
    }
    let maximal = rejected.iter().all(|&i| g.conflicts(i));
    Cell2 { chosen: g.chosen, cloud: cloud.len(), maximal, escaped }
}

fn fit_slope(ns: &[usize], counts: &[usize]) -> f64 {
    let start = ns.len() / 2;
    let xs: Vec<f64> = ns[start..].iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = counts[start..].iter().map(|&c| (c.max(1) as f64).ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Size of a greedy maximal (n, ε)-separated subset of the refined cloud.
pub fn separated_count(m: &HomeoExpr, n: usize, eps: f64, plan: &SamplingPlan, cfg: &EntropyConfig) -> Result<usize> {
    if n < 1 || !(eps > 0.0) {
        return invalid("separated_count needs n >= 1 and eps > 0");
    }
    let tree = build_tree(m, plan, n, eps, cfg)?;
    Ok(separated(&tree, n, eps, cfg.split_frac, &[]).chosen.len())
}

pub fn entropy_estimate(
    m: &HomeoExpr,
    n_values: &[usize],
    eps_list: &[f64],
    plan: &SamplingPlan,
    cfg: &EntropyConfig,
) -> Result<EntropyEstimate> {
    let mut ns = n_values.to_vec();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 4 || ns[0] < 1 {
        return invalid("entropy estimate needs at least four values of n >= 1");
    }
    if eps_list.is_empty() || eps_list.iter().any(|e| !(*e > 0.0)) {
        return invalid("entropy estimate needs positive eps values");
    }
    let mut eps = eps_list.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    let nmax = *ns.last().unwrap();
    if nmax > u8::MAX as usize {
        return invalid("n is limited to 255");
    }
    let tree = build_tree(m, plan, nmax, *eps.last().unwrap(), cfg)?;
    let mut counts = vec![vec![0; ns.len()]; eps.len()];
    let mut clouds = vec![vec![0; ns.len()]; eps.len()];
    let mut prev_row: Vec<Vec<u32>> = vec![Vec::new(); ns.len()];
    let mut maximal = true;
    let mut escaped = 0;
    for (i, &e) in eps.iter().enumerate() {
        let mut left: Vec<u32> = Vec::new();
        let mut row = Vec::with_capacity(ns.len());
        for (j, &n) in ns.iter().enumerate() {
            let seeds = if left.len() >= prev_row[j].len() { &left } else { &prev_row[j] };
            let r = separated(&tree, n, e, cfg.split_frac, seeds);
            counts[i][j] = r.chosen.len();
            clouds[i][j] = r.cloud;
            maximal &= r.maximal;
            escaped = escaped.max(r.escaped);
            left = r.chosen;
            row.push(left.clone());
        }
        prev_row = row;
    }
    let slopes: Vec<f64> = counts.iter().map(|c| fit_slope(&ns, c)).collect();
    let degenerate: Vec<bool> = counts.iter().map(|c| c.iter().all(|&v| v == c[0])).collect();
    let slopes: Vec<f64> = slopes.iter().zip(&degenerate).map(|(&s, &d)| if d { 0.0 } else { s }).collect();
    let headline = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let cloud_points = tree.escape.len();
    Ok(EntropyEstimate {
        n_values: ns,
        eps,
        counts,
        cloud_sizes: clouds,
        slopes,
        degenerate,
        headline,
        escaped,
        cloud_points,
        unreliable: escaped as f64 > 0.01 * cloud_points as f64,
        maximal,
        lower_bound: None,
        upper_bound: None,
    })
}

/// dim · log⁺(L).
pub fn lipschitz_upper_bound(lip: f64, dim: f64) -> Result<f64> {
    if !(lip > 0.0) || !(dim >= 0.0) {
        return invalid("Lipschitz bound needs L > 0 and dim >= 0");
    }
    Ok(dim * lip.ln().max(0.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub pass: bool,
    pub lower: f64,
    pub estimate: f64,
    pub upper: f64,
    pub tol: f64,
}

pub fn reconcile(estimate: &EntropyEstimate, cert_bound: f64, lip_bound: f64, tol: f64) -> Result<Verdict> {
    if cert_bound > lip_bound + tol {
        return Err(Error::Inconsistent { cert: cert_bound, lip: lip_bound });
    }
    let s = estimate.headline;
    Ok(Verdict {
        pass: cert_bound - tol <= s && s <= lip_bound + tol,
        lower: cert_bound,
        estimate: s,
        upper: lip_bound,
        tol,
    })
}
