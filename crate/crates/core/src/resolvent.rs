//! Stieltjes-transform probes on the canonical `[-2, 2]` scale: the
//! semicircle transform, empirical `m(z)`, local-law deviations and Monte
//! Carlo variance of `Tr G(z)` down the η hierarchy.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::ensembles::{sample, EnsembleSpec};
use crate::error::{Error, Result};

/// `z = E + iη` with `η > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub e: f64,
    pub eta: f64,
}

impl SpectralPoint {
    pub fn new(e: f64, eta: f64) -> Result<Self> {
        if !(eta > 0.0) || !e.is_finite() || !eta.is_finite() {
            return Err(Error::InvalidParameter(format!("need η > 0, got z = {e} + i{eta}")));
        }
        Ok(SpectralPoint { e, eta })
    }

    pub fn z(&self) -> Complex64 {
        Complex64::new(self.e, self.eta)
    }

    /// Inside the bulk window `|E| ≤ 5, 0 < η ≤ 10`.
    pub fn in_window(&self) -> bool {
        self.e.abs() <= 5.0 && self.eta <= 10.0
    }
}

/// Semicircle Stieltjes transform `∫ρ_sc(x)/(x − z) dx` for `Im z > 0`.
pub fn msc(p: SpectralPoint) -> Complex64 {
    msc_at(p.z())
}

/// Same, for any `z` off `[-2, 2]`. The product of principal roots puts the
/// branch cut exactly on the support, so `m → −1/z` at infinity.
pub fn msc_at(z: Complex64) -> Complex64 {
    let r = (z - 2.0).sqrt() * (z + 2.0).sqrt();
    (r - z) * 0.5
}

/// `Tr G(z) = Σ 1/(λ_j − z)`.
pub fn trace_resolvent(eigenvalues: &[f64], p: SpectralPoint) -> Complex64 {
    let z = p.z();
    eigenvalues.iter().map(|&l| 1.0 / (l - z)).sum()
}

/// Empirical `m(z) = Tr G(z)/n`.
pub fn stieltjes(eigenvalues: &[f64], p: SpectralPoint) -> Complex64 {
    trace_resolvent(eigenvalues, p) / eigenvalues.len() as f64
}

fn canonical_spectra(spec: &EnsembleSpec, trials: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| sample(spec, seed, t).map(|s| s.rescale_to_canonical().eigenvalues))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalLawRow {
    pub n: usize,
    pub e: f64,
    pub eta: f64,
    /// Empirical 95th percentile of `|m(z) − m_sc(z)|`.
    pub p95: f64,
    /// `p95 · nη`.
    pub ratio: f64,
}

pub fn local_law_deviation(
    spec: &EnsembleSpec,
    grid: &[SpectralPoint],
    trials: usize,
    seed: u64,
) -> Result<Vec<LocalLawRow>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let spectra = canonical_spectra(spec, trials, seed)?;
    let n = spec.n;
    Ok(grid
        .iter()
        .map(|&p| {
            let m = msc(p);
            let mut dev: Vec<f64> = spectra.iter().map(|s| (stieltjes(s, p) - m).norm()).collect();
            dev.sort_by(f64::total_cmp);
            let idx = ((0.95 * trials as f64).ceil() as usize).clamp(1, trials) - 1;
            let p95 = dev[idx];
            LocalLawRow { n, e: p.e, eta: p.eta, p95, ratio: p95 * n as f64 * p.eta }
        })
        .collect())
}

/// Sample variance `mean |X − X̄|²` (divisor `T − 1`) and its jackknife
/// standard error.
pub fn variance_with_jackknife(xs: &[Complex64]) -> (f64, f64) {
    let t = xs.len() as f64;
    let sum: Complex64 = xs.iter().sum();
    let sq: f64 = xs.iter().map(|x| x.norm_sqr()).sum();
    let var_of = |s: Complex64, q: f64, m: f64| (q - s.norm_sqr() / m) / (m - 1.0);
    let var = var_of(sum, sq, t);
    if xs.len() < 3 {
        return (var, f64::NAN);
    }
    let loo: Vec<f64> = xs.iter().map(|x| var_of(sum - x, sq - x.norm_sqr(), t - 1.0)).collect();
    let mean = loo.iter().sum::<f64>() / t;
    let se = ((t - 1.0) / t * loo.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt();
    (var, se)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarTraceRow {
    pub n: usize,
    pub e: f64,
    pub eta: f64,
    pub var: f64,
    pub se: f64,
    /// `η^{2.2} · Var`.
    pub scaled: f64,
}

/// Monte Carlo `Var(Tr G(E + iη))` for each η, one spectrum per trial shared
/// across the η list.
pub fn var_trace_sweep(
    spec: &EnsembleSpec,
    e: f64,
    etas: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<VarTraceRow>> {
    if trials < 2 {
        return Err(Error::InvalidParameter("variance needs at least two trials".into()));
    }
    let points = etas.iter().map(|&eta| SpectralPoint::new(e, eta)).collect::<Result<Vec<_>>>()?;
    let spectra = canonical_spectra(spec, trials, seed)?;
    Ok(points
        .iter()
        .map(|&p| {
            let xs: Vec<Complex64> = spectra.iter().map(|s| trace_resolvent(s, p)).collect();
            let (var, se) = variance_with_jackknife(&xs);
            VarTraceRow { n: spec.n, e, eta: p.eta, var, se, scaled: p.eta.powf(2.2) * var }
        })
        .collect())
}

fn trapezoid_nodes(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// `∫ e^{−η} η^{2s−1} ∫ Var(Tr G(E + iη)) dE dη` on the given nodes (trapezoid
/// in both variables, Monte Carlo variance inside). This is the bound on
/// `Var(N_n[φ])` per unit `‖φ‖²_{H^s}`.
pub fn shcherbina_integrand(
    spec: &EnsembleSpec,
    s: f64,
    eta_nodes: &[f64],
    e_nodes: &[f64],
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(1.0..=2.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("s must lie in [1, 2], got {s}")));
    }
    if e_nodes.iter().any(|e| e.abs() > 6.0) {
        return Err(Error::InvalidParameter("energy window must lie in [-6, 6]".into()));
    }
    let vars = variance_table(spec, eta_nodes, e_nodes, trials, seed)?;
    Ok(shcherbina_from_table(s, eta_nodes, e_nodes, &vars))
}

/// `Var(Tr G)` on the tensor grid, rows indexed by η.
pub fn variance_table(
    spec: &EnsembleSpec,
    eta_nodes: &[f64],
    e_nodes: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if trials < 2 {
        return Err(Error::InvalidParameter("variance needs at least two trials".into()));
    }
    for &eta in eta_nodes {
        SpectralPoint::new(0.0, eta)?;
    }
    let spectra = canonical_spectra(spec, trials, seed)?;
    Ok(eta_nodes
        .par_iter()
        .map(|&eta| {
            e_nodes
                .iter()
                .map(|&e| {
                    let p = SpectralPoint { e, eta };
                    let xs: Vec<Complex64> = spectra.iter().map(|s| trace_resolvent(s, p)).collect();
                    variance_with_jackknife(&xs).0
                })
                .collect()
        })
        .collect())
}

/// Outer quadrature of [`shcherbina_integrand`] for a precomputed table, so
/// several `s` can share one Monte Carlo run.
pub fn shcherbina_from_table(s: f64, eta_nodes: &[f64], e_nodes: &[f64], vars: &[Vec<f64>]) -> f64 {
    let inner: Vec<f64> = vars.iter().map(|row| trapezoid_nodes(e_nodes, row)).collect();
    let weighted: Vec<f64> = eta_nodes
        .iter()
        .zip(&inner)
        .map(|(&eta, &v)| (-eta).exp() * eta.powf(2.0 * s - 1.0) * v)
        .collect();
    trapezoid_nodes(eta_nodes, &weighted)
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[VarTraceRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "E", "eta", "var", "se", "eta^2.2*var"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.e.to_string(),
            r.eta.to_string(),
            r.var.to_string(),
            r.se.to_string(),
            r.scaled.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_local_law_csv<W: Write>(out: W, rows: &[LocalLawRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "E", "eta", "p95", "p95*n*eta"])?;
    for r in rows {
        w.write_record([
            r.n.to_string(),
            r.e.to_string(),
            r.eta.to_string(),
            r.p95.to_string(),
            r.ratio.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semicircle_transform_closed_forms() {
        let m = msc(SpectralPoint::new(0.0, 1.0).unwrap());
        assert!((m - Complex64::new(0.0, (5f64.sqrt() - 1.0) / 2.0)).norm() < 1e-14);
        let z = Complex64::new(0.0, 3e3);
        assert!((msc_at(z) + 1.0 / z).norm() <= 1e-6);
        // just below the real axis the other sheet must not leak in
        let below = msc_at(Complex64::new(0.5, -1e-3));
        assert!(below.im < 0.0);
    }

    #[test]
    fn single_eigenvalue() {
        let t = trace_resolvent(&[0.0], SpectralPoint::new(0.0, 1.0).unwrap());
        assert!((t - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn jackknife_matches_textbook_for_real_data() {
        let xs: Vec<Complex64> = [1.0, 2.0, 4.0, 7.0].iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let (v, se) = variance_with_jackknife(&xs);
        assert!((v - 7.0).abs() < 1e-12);
        assert!(se > 0.0);
    }
}
