use std::io::Write;

use super::grid::{Fourier, Grid, GridFunction};
use super::partition::{h_hat, DyadicPartition};
use crate::error::{Error, Result};

/// Littlewood–Paley pieces `φ_k`, `k = -1..=K`, and their lifts `g_k` with
/// `ĝ_k = e^{2^{-k}|ξ|} φ̂_k`.
#[derive(Debug, Clone)]
pub struct BandDecomposition {
    pub label: String,
    pub k_max: usize,
    pub components: Vec<GridFunction>,
    pub lifted: Vec<GridFunction>,
    /// `2^{-k}` per band.
    pub scales: Vec<f64>,
}

impl BandDecomposition {
    pub fn bands(&self) -> impl Iterator<Item = i32> {
        -1..=self.k_max as i32
    }

    pub fn component(&self, k: i32) -> &GridFunction {
        &self.components[(k + 1) as usize]
    }

    pub fn lift(&self, k: i32) -> &GridFunction {
        &self.lifted[(k + 1) as usize]
    }

    pub fn grid(&self) -> Grid {
        self.components[0].grid
    }

    pub fn reconstruct(&self) -> GridFunction {
        let mut values = vec![0.0; self.grid().n];
        for c in &self.components {
            for (v, x) in values.iter_mut().zip(&c.values) {
                *v += x;
            }
        }
        GridFunction {
            grid: self.grid(),
            values,
            label: self.label.clone(),
        }
    }

    /// Share of the Fourier energy of `φ_k` lying outside its annulus.
    pub fn out_of_band_fraction(&self, k: i32) -> f64 {
        let c = self.component(k);
        let (lo, hi) = DyadicPartition::annulus(k);
        let spec = c.spectrum();
        let (mut total, mut outside) = (0.0, 0.0);
        for (m, z) in spec.iter().enumerate() {
            let e = z.norm_sqr();
            let xi = c.grid.frequency(m).abs();
            total += e;
            if xi < lo * (1.0 - 1e-12) || xi > hi * (1.0 + 1e-12) {
                outside += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            outside / total
        }
    }
}

/// Smallest `K` for which the partition covers every grid frequency.
pub fn full_band_count(grid: &Grid) -> usize {
    let mut k = 1;
    while 0.75 * 2f64.powi(k as i32 + 1) < grid.nyquist() {
        k += 1;
    }
    k
}

pub fn decompose(phi: &GridFunction, k_max: usize) -> Result<BandDecomposition> {
    let partition = super::partition::build_dyadic_partition(k_max)?;
    let grid = phi.grid;
    let lowest_top = 0.75 * 2f64.powi(k_max as i32);
    if lowest_top > grid.nyquist() {
        return Err(Error::BeyondNyquist {
            k: k_max as i32,
            nyquist: grid.nyquist(),
        });
    }
    let fft = Fourier::new(grid.n);
    let spec = fft.forward(&phi.values);
    let mut components = Vec::with_capacity(k_max + 2);
    let mut lifted = Vec::with_capacity(k_max + 2);
    let mut scales = Vec::with_capacity(k_max + 2);
    for k in -1..=k_max as i32 {
        let scale = 2f64.powi(-k);
        let mut band = spec.clone();
        let mut lift = spec.clone();
        for (m, (b, l)) in band.iter_mut().zip(lift.iter_mut()).enumerate() {
            let xi = grid.frequency(m);
            let w = partition.multiplier(k, xi);
            *b *= w;
            // restricting first keeps the lift bounded by e^{8/3}
            *l *= if w == 0.0 { 0.0 } else { w * (scale * xi.abs()).exp() };
        }
        components.push(GridFunction {
            grid,
            values: fft.inverse_real(band),
            label: format!("{}[{k}]", phi.label),
        });
        lifted.push(GridFunction {
            grid,
            values: fft.inverse_real(lift),
            label: format!("{}[g{k}]", phi.label),
        });
        scales.push(scale);
    }
    Ok(BandDecomposition {
        label: phi.label.clone(),
        k_max,
        components,
        lifted,
        scales,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesovFlavor {
    /// `(Σ 2^{2ks} ‖φ_k‖²_{L²})^{1/2}`
    B22,
    /// `sup_k 2^{sk} ‖φ_k‖_∞`
    BInfInf,
}

/// Band norms weighted by `2^{sk}`; the low-pass piece carries weight 1,
/// matching `(1+|ξ|)^s ≈ 1` on its support.
pub fn besov_norm(d: &BandDecomposition, s: f64, flavor: BesovFlavor) -> f64 {
    let weight = |k: i32| 2f64.powf(s * k.max(0) as f64);
    match flavor {
        BesovFlavor::B22 => d
            .bands()
            .map(|k| (weight(k) * d.component(k).l2_norm()).powi(2))
            .sum::<f64>()
            .sqrt(),
        BesovFlavor::BInfInf => d
            .bands()
            .map(|k| weight(k) * d.component(k).sup_norm())
            .fold(0.0, f64::max),
    }
}

/// Poisson smoothing `P_η * φ`, i.e. the multiplier `e^{-η|ξ|}`.
pub fn poisson_smooth(phi: &GridFunction, eta: f64) -> Result<GridFunction> {
    if !(eta > 0.0) {
        return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
    }
    Ok(phi.apply_multiplier(&format!("P[{eta}]{}", phi.label), |xi| {
        (-eta * xi.abs()).exp()
    }))
}

/// Low-frequency cut-off `S_M φ = Σ_{k <= M-1} φ_k`. The telescoping sum of
/// the partition collapses to the single multiplier `ĥ(2^{-M}ξ)`.
pub fn high_freq_cutoff(phi: &GridFunction, m: usize) -> GridFunction {
    let s = 2f64.powi(-(m as i32));
    phi.apply_multiplier(&format!("S{m}[{}]", phi.label), |xi| h_hat(s * xi))
}

/// Columns `x, phi, phi_{-1}, ..., phi_K`.
pub fn write_decomposition_csv<W: Write>(
    w: W,
    phi: &GridFunction,
    d: &BandDecomposition,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["x".to_string(), "phi".to_string()];
    header.extend(d.bands().map(|k| format!("phi_{k}")));
    out.write_record(&header)?;
    for j in 0..phi.grid.n {
        let mut row = vec![format!("{:.17e}", phi.grid.node(j)), format!("{:.17e}", phi.values[j])];
        row.extend(d.components.iter().map(|c| format!("{:.17e}", c.values[j])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// One row per (function, band): scale and norms of `φ_k` and `g_k`.
pub fn write_band_norms_csv<W: Write>(w: W, decomps: &[BandDecomposition]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["label", "k", "scale", "l2", "linf", "lift_l2", "lift_linf"])?;
    for d in decomps {
        for k in d.bands() {
            let c = d.component(k);
            let g = d.lift(k);
            out.write_record([
                d.label.clone(),
                k.to_string(),
                format!("{:.17e}", d.scales[(k + 1) as usize]),
                format!("{:.17e}", c.l2_norm()),
                format!("{:.17e}", c.sup_norm()),
                format!("{:.17e}", g.l2_norm()),
                format!("{:.17e}", g.sup_norm()),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Columns `x` followed by one column per function (grid samples).
pub fn write_corpus_csv<W: Write>(w: W, fns: &[GridFunction]) -> Result<()> {
    let Some(first) = fns.first() else {
        return Ok(());
    };
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["x".to_string()];
    header.extend(fns.iter().map(|f| f.label.clone()));
    out.write_record(&header)?;
    for j in 0..first.grid.n {
        let mut row = vec![format!("{:.17e}", first.grid.node(j))];
        row.extend(fns.iter().map(|f| format!("{:.17e}", f.values[j])));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}
