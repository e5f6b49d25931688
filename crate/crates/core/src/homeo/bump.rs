use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Quintic bump: 1 on [0, r1], 0 on [r2, ∞), obtained by integrating
/// (s − r1)²(r2 − s)² over [r1, r2] and normalising.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub r1: f64,
    pub r2: f64,
}

/// Slope constant of the quintic profile: max |b'| = SLOPE / (r2 − r1).
pub const SLOPE: f64 = 15.0 / 8.0;

impl BumpProfile {
    pub fn new(r1: f64, r2: f64) -> Result<Self> {
        if !(r1 > 0.0 && r2 > r1 && r2.is_finite()) {
            return invalid(format!("bump profile needs 0 < r1 < r2, got r1={r1}, r2={r2}"));
        }
        Ok(BumpProfile { r1, r2 })
    }

    pub fn value(&self, t: f64) -> f64 {
        if t <= self.r1 {
            return 1.0;
        }
        if t >= self.r2 {
            return 0.0;
        }
        let z = (t - self.r1) / (self.r2 - self.r1);
        1.0 - z * z * z * (10.0 - 15.0 * z + 6.0 * z * z)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if t <= self.r1 || t >= self.r2 {
            return 0.0;
        }
        let w = self.r2 - self.r1;
        let z = (t - self.r1) / w;
        -30.0 * z * z * (1.0 - z) * (1.0 - z) / w
    }

    pub fn slope_bound(&self) -> f64 {
        SLOPE / (self.r2 - self.r1)
    }
}

pub fn bump(profile: &BumpProfile, t: f64) -> f64 {
    profile.value(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_tail() {
        let b = BumpProfile::new(0.2, 0.5).unwrap();
        assert_eq!(b.value(0.1), 1.0);
        assert_eq!(b.value(1.0), 0.0);
        assert!((b.value(0.35) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(BumpProfile::new(0.5, 0.5).is_err());
        assert!(BumpProfile::new(0.0, 0.5).is_err());
    }

    #[test]
    fn measured_slope_matches_bound() {
        let b = BumpProfile::new(0.3, 0.7).unwrap();
        let n = 100_000;
        let h = (b.r2 - b.r1) / n as f64;
        let mut worst = 0.0f64;
        for k in 0..n {
            let t = b.r1 + k as f64 * h;
            worst = worst.max((b.value(t + h) - b.value(t)).abs() / h);
        }
        let bound = b.slope_bound();
        assert!(worst <= bound * 1.01 && worst >= bound * 0.99, "{worst} vs {bound}");
    }

    #[test]
    fn derivative_matches_difference_quotient() {
        let b = BumpProfile::new(1.0, 2.0).unwrap();
        for k in 1..20 {
            let t = 1.0 + k as f64 / 20.0;
            let fd = (b.value(t + 1e-6) - b.value(t - 1e-6)) / 2e-6;
            assert!((fd - b.derivative(t)).abs() < 1e-6);
        }
    }

    #[test]
    fn monotone_non_increasing() {
        let b = BumpProfile::new(0.1, 0.9).unwrap();
        let mut prev = 1.0;
        for k in 0..=1000 {
            let v = b.value(k as f64 / 1000.0);
            assert!(v <= prev);
            prev = v;
        }
    }
}
