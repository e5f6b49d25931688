use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Point, Rect};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanKind {
    /// Cell-centred `resolution × resolution` grid.
    Grid { resolution: usize },
    /// `count` random pairs with log-uniform separations.
    PairCloud { count: usize, seed: u64 },
    /// `base` followed by `rounds` rounds of local refinement.
    Refined { base: Box<PlanKind>, rounds: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub kind: PlanKind,
    pub domain: Rect,
}

impl SamplingPlan {
    pub fn grid(domain: Rect, resolution: usize) -> Self {
        SamplingPlan { kind: PlanKind::Grid { resolution }, domain }
    }

    pub fn pairs(domain: Rect, count: usize, seed: u64) -> Self {
        SamplingPlan { kind: PlanKind::PairCloud { count, seed }, domain }
    }

    pub fn refined(self, rounds: usize) -> Self {
        SamplingPlan { kind: PlanKind::Refined { base: Box::new(self.kind), rounds }, domain: self.domain }
    }

    pub fn rounds(&self) -> usize {
        match &self.kind {
            PlanKind::Refined { rounds, .. } => *rounds,
            _ => 0,
        }
    }

    pub fn base(&self) -> &PlanKind {
        let mut k = &self.kind;
        while let PlanKind::Refined { base, .. } = k {
            k = base;
        }
        k
    }

    /// Base points of the plan (for a pair cloud, both ends of every pair).
    pub fn points(&self) -> Result<Vec<Point>> {
        let pts = match self.base() {
            PlanKind::Grid { resolution } => self.domain.grid(*resolution),
            PlanKind::PairCloud { .. } => self.pair_list()?.into_iter().flat_map(|(a, b)| [a, b]).collect(),
            PlanKind::Refined { .. } => unreachable!(),
        };
        if pts.len() < 2 {
            return invalid("sampling plan needs at least two points");
        }
        Ok(pts)
    }

    /// Grid spacing of the base plan (the typical spacing for random clouds).
    pub fn spacing(&self) -> f64 {
        match self.base() {
            PlanKind::Grid { resolution } => self.domain.width().max(self.domain.height()) / *resolution as f64,
            PlanKind::PairCloud { count, .. } => (self.domain.area() / (*count).max(1) as f64).sqrt(),
            PlanKind::Refined { .. } => unreachable!(),
        }
    }

    /// Random pairs inside the domain whose separations are log-uniform in
    /// [1e-6, 1]·diam.
    pub fn pair_list(&self) -> Result<Vec<(Point, Point)>> {
        let PlanKind::PairCloud { count, seed } = self.base() else {
            return invalid("pair list needs a pair-cloud plan");
        };
        let d = self.domain.diam();
        let mut rng = ChaCha8Rng::seed_from_u64(*seed);
        let mut out = Vec::with_capacity(*count);
        while out.len() < *count {
            let x = Point::new(
                rng.gen_range(self.domain.min.x..=self.domain.max.x),
                rng.gen_range(self.domain.min.y..=self.domain.max.y),
            );
            let r = d * 10f64.powf(rng.gen_range(-6.0..0.0));
            let y = x + Point::new(1.0, 0.0).rotate(rng.gen_range(0.0..std::f64::consts::TAU)) * r;
            if self.domain.contains(y) {
                out.push((x, y));
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_and_pairs_are_deterministic() {
        let dom = Rect::square(0.0, 1.0).unwrap();
        assert_eq!(SamplingPlan::grid(dom, 10).points().unwrap().len(), 100);
        let p = SamplingPlan::pairs(dom, 500, 7);
        let a = p.pair_list().unwrap();
        assert_eq!(a, p.pair_list().unwrap());
        assert!(a.iter().all(|(x, y)| dom.contains(*x) && dom.contains(*y)));
        assert_ne!(a, SamplingPlan::pairs(dom, 500, 8).pair_list().unwrap());
    }

    #[test]
    fn refined_keeps_base() {
        let dom = Rect::square(0.0, 1.0).unwrap();
        let p = SamplingPlan::grid(dom, 4).refined(2);
        assert_eq!(p.rounds(), 2);
        assert_eq!(p.base(), &PlanKind::Grid { resolution: 4 });
        assert!(SamplingPlan::grid(dom, 1).points().is_err());
    }
}
