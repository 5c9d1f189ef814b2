use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Periodic sampling grid on `[-L, L)` with `N = 2^m` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub half_width: f64,
    pub n: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            half_width: 8.0,
            n: 1 << 14,
        }
    }
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !n.is_power_of_two() || n < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid size must be a power of two >= 16, got {n}"
            )));
        }
        if !(half_width >= 8.0) {
            return Err(Error::InvalidParameter(format!(
                "grid half-width must be >= 8, got {half_width}"
            )));
        }
        Ok(Grid { half_width, n })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|j| self.node(j))
    }

    /// Angular frequency of DFT bin `m` (FFT ordering).
    pub fn frequency(&self, m: usize) -> f64 {
        let signed = if m <= self.n / 2 {
            m as f64
        } else {
            m as f64 - self.n as f64
        };
        PI * signed / self.half_width
    }

    pub fn nyquist(&self) -> f64 {
        PI * (self.n / 2) as f64 / self.half_width
    }
}

/// Samples of a function on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub label: String,
}

impl GridFunction {
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, label: &str, f: F) -> Self {
        GridFunction {
            grid,
            values: grid.nodes().map(f).collect(),
            label: label.to_string(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            label: format!("{}-{}", self.label, other.label),
        }
    }

    /// Applies a real even Fourier multiplier `m(ξ)`.
    pub fn apply_multiplier<M: Fn(f64) -> f64>(&self, label: &str, m: M) -> GridFunction {
        let fft = Fourier::new(self.grid.n);
        let mut spec = fft.forward(&self.values);
        for (k, c) in spec.iter_mut().enumerate() {
            *c *= m(self.grid.frequency(k));
        }
        GridFunction {
            grid: self.grid,
            values: fft.inverse_real(spec),
            label: label.to_string(),
        }
    }

    /// DFT coefficients in FFT ordering.
    pub fn spectrum(&self) -> Vec<Complex64> {
        Fourier::new(self.grid.n).forward(&self.values)
    }
}

/// Forward/inverse FFT pair of a fixed length.
pub struct Fourier {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    n: usize,
}

impl Fourier {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fourier {
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            n,
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    pub fn inverse_real(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut spec);
        let s = 1.0 / self.n as f64;
        spec.into_iter().map(|c| c.re * s).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_geometry() {
        let g = Grid::default();
        assert_eq!(g.node(0), -8.0);
        assert!((g.node(g.n / 2)).abs() < 1e-15);
        assert!((g.frequency(1) - PI / 8.0).abs() < 1e-15);
        assert!((g.frequency(g.n - 1) + PI / 8.0).abs() < 1e-15);
        assert!(Grid::new(4.0, 1024).is_err());
        assert!(Grid::new(8.0, 1000).is_err());
    }

    #[test]
    fn identity_multiplier_round_trips() {
        let g = Grid::new(8.0, 256).unwrap();
        let f = GridFunction::from_fn(g, "f", |x| (-x * x).exp() + 0.1 * x.sin());
        let h = f.apply_multiplier("id", |_| 1.0);
        let err = f.sub(&h).sup_norm();
        assert!(err < 1e-14);
    }
}
