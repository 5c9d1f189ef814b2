use super::corpus::smooth_step;
use crate::error::{Error, Result};

/// Inner radius of every annulus: `ĥ = 1` on `|ξ| <= 3/4`.
pub const INNER: f64 = 0.75;
/// `ĥ` vanishes for `|ξ| >= 4/3`, hence `ω̂` lives on `[3/4, 8/3]`.
pub const OUTER: f64 = 4.0 / 3.0;

/// Smooth even low-pass profile: 1 on `|ξ| <= 3/4`, 0 on `|ξ| >= 4/3`.
pub fn h_hat(xi: f64) -> f64 {
    smooth_step((OUTER - xi.abs()) / (OUTER - INNER))
}

/// `ω̂(ξ) = ĥ(ξ/2) − ĥ(ξ)`, supported on `3/4 <= |ξ| <= 8/3`.
pub fn omega_hat(xi: f64) -> f64 {
    h_hat(0.5 * xi) - h_hat(xi)
}

/// Inhomogeneous dyadic partition `{ĥ, ω̂(2^{-k}·) : 0 <= k <= K}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicPartition {
    pub k_max: usize,
}

pub fn build_dyadic_partition(k_max: usize) -> Result<DyadicPartition> {
    if k_max < 1 {
        return Err(Error::InvalidParameter("partition needs K >= 1".into()));
    }
    Ok(DyadicPartition { k_max })
}

impl DyadicPartition {
    /// Multiplier of band `k` (`k = -1` is the low-pass piece).
    pub fn multiplier(&self, k: i32, xi: f64) -> f64 {
        if k < 0 {
            h_hat(xi)
        } else {
            omega_hat(xi / f64::from(1u32 << k))
        }
    }

    /// Frequencies where the partition sums to one.
    pub fn resolved_radius(&self) -> f64 {
        INNER * 2f64.powi(self.k_max as i32 + 1)
    }

    pub fn sum(&self, xi: f64) -> f64 {
        (-1..=self.k_max as i32).map(|k| self.multiplier(k, xi)).sum()
    }

    pub fn sum_of_squares(&self, xi: f64) -> f64 {
        (-1..=self.k_max as i32)
            .map(|k| self.multiplier(k, xi).powi(2))
            .sum()
    }

    /// Frequency support `[lo, hi]` of band `k` in `|ξ|`.
    pub fn annulus(k: i32) -> (f64, f64) {
        if k < 0 {
            (0.0, OUTER)
        } else {
            let s = 2f64.powi(k);
            (INNER * s, 2.0 * OUTER * s)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn partition_of_unity_at_random_frequencies() {
        let p = build_dyadic_partition(10).unwrap();
        let r = p.resolved_radius();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let xi = rng.random_range(-r..r);
            assert!((p.sum(xi) - 1.0).abs() < 1e-10, "xi={xi}");
            let sq = p.sum_of_squares(xi);
            assert!((0.0..=1.0 + 1e-15).contains(&sq));
        }
    }

    #[test]
    fn omega_support() {
        for i in 0..=740 {
            let xi = i as f64 * 1e-3;
            assert_eq!(omega_hat(xi), 0.0);
            assert_eq!(omega_hat(-xi), 0.0);
        }
        for i in 0..1000 {
            let xi = 2.67 + i as f64 * 0.01;
            assert_eq!(omega_hat(xi), 0.0);
        }
        assert!(omega_hat(1.5) > 0.0);
        assert!(build_dyadic_partition(0).is_err());
    }
}
