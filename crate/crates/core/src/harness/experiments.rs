use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use super::config::{ExperimentConfig, MIN_TRIALS};
use super::stats::{ks_normal, ks_normal_lattice, linear_fit, mean, variance, variance_se, LinearFit};
use crate::cdkernel::{counting_variance, exact_variance};
use crate::ensembles::{beta_hermite_tridiagonal, sample, Backend, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::funclab::{decompose, lookup, TestFunction};
use crate::limitvar::{limit_variance_chebyshev, Family};
use crate::resolvent::{trace_resolvent, SpectralPoint};

/// Desk-scale tolerance bands; the theory gives no rate, so these are
/// engineering choices.
pub const RATIO_BAND: (f64, f64) = (0.85, 1.15);
pub const KS_THRESHOLD: f64 = 0.05;
pub const SE_MULTIPLE: f64 = 3.0;

/// `N_n[φ] = Σ φ(λ_j)` from the analytic rule.
pub fn linear_statistic(eigenvalues: &[f64], phi: &TestFunction) -> f64 {
    eigenvalues.iter().map(|&l| phi.eval(l)).sum()
}

/// Limiting-variance family of an ensemble on the canonical scale.
///
/// The samplers put variance 1 on the diagonal, which is the `w2 = 2` case of
/// the general evaluator, and its fourth-cumulant term is calibrated so that
/// `kappa4 = 2·spec.kappa4` reproduces `Var(Tr H²) → 2 + 2κ₄` for complex
/// Hermitian entries with `E|w|⁴ = 2 + κ₄`.
pub fn family_for(spec: &EnsembleSpec) -> Family {
    match spec.kind {
        EnsembleKind::Gue => Family::Gue,
        EnsembleKind::Goe => Family::Goe,
        EnsembleKind::WignerGeneral | EnsembleKind::JohanssonDeformed => {
            Family::WignerGeneral { kappa4: 2.0 * spec.kappa4, w2: 2.0 }
        }
    }
}

/// Worker count: `RMT_FLUCT_THREADS` if set to a positive integer, otherwise
/// rayon's default.
pub fn worker_count() -> usize {
    std::env::var("RMT_FLUCT_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// Runs `f` inside a pool of [`worker_count`] threads. Trials are keyed by
/// `(seed, trial)` and collected in order, so results do not depend on the
/// pool size.
pub fn pooled<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count())
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// `[trial][function]` table of linear statistics on canonical spectra.
pub fn statistic_table(
    spec: &EnsembleSpec,
    phis: &[TestFunction],
    trials: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = sample(spec, seed, t)?.rescale_to_canonical();
            Ok(phis.iter().map(|p| linear_statistic(&s.eigenvalues, p)).collect())
        })
        .collect()
}

fn column(table: &[Vec<f64>], j: usize) -> Vec<f64> {
    table.iter().map(|r| r[j]).collect()
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

fn flag(v: Option<bool>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRow {
    pub function: String,
    pub n: usize,
    pub trials: usize,
    pub mean: f64,
    pub variance: f64,
    pub se: f64,
    /// Limiting variance; `None` below the `H^{1/2}` threshold.
    pub limit: Option<f64>,
    /// Finite-n kernel value (GUE only).
    pub exact: Option<f64>,
    /// KS distance of the centred statistic to `N(0, limit)`, or to the
    /// empirical variance when no limit exists.
    pub ks: f64,
    pub ks_against_limit: bool,
    /// Mean of the empirically centred statistic (zero up to rounding).
    pub centred_mean: f64,
    pub ratio: Option<f64>,
    pub ratio_in_band: Option<bool>,
    pub ks_ok: bool,
    /// `|variance − reference| ≤ 3 SE`, reference exact if known else limit.
    pub within_3se: Option<bool>,
    /// Centred samples, kept for figures.
    pub centred: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport {
    pub experiment: String,
    pub ensemble: String,
    pub rows: Vec<VarianceRow>,
}

/// Monte Carlo variance, limit and KS distance for every `(φ, n)`.
pub fn clt_experiment(config: &ExperimentConfig) -> Result<VarianceReport> {
    config.require_trials()?;
    let phis = config.functions.iter().map(|l| lookup(l)).collect::<Result<Vec<_>>>()?;
    let family = family_for(&config.ensemble);
    let limits: Vec<Option<f64>> = phis
        .iter()
        .map(|p| {
            let r = limit_variance_chebyshev(p, family)?;
            Ok((!r.low_regularity).then_some(r.value))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &n in &config.n_list {
        let spec = config.ensemble_at(n)?;
        let table = pooled(|| statistic_table(&spec, &phis, config.trials, config.seed))??;
        for (j, phi) in phis.iter().enumerate() {
            let xs = column(&table, j);
            let exact = if config.exact && spec.kind == EnsembleKind::Gue && n <= config.exact_max_n {
                Some(exact_variance(n, phi)?)
            } else {
                None
            };
            rows.push(variance_row(phi, n, &xs, limits[j], exact));
        }
    }
    Ok(VarianceReport {
        experiment: config.experiment.clone(),
        ensemble: config.ensemble.kind.to_string(),
        rows,
    })
}

/// Summary statistics and verdicts for one sample of `N_n[φ]`.
pub fn variance_row(
    phi: &TestFunction,
    n: usize,
    xs: &[f64],
    limit: Option<f64>,
    exact: Option<f64>,
) -> VarianceRow {
    let m = mean(xs);
    let centred: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let var = variance(xs);
    let se = variance_se(xs);
    let sd = limit.filter(|v| *v > 0.0).unwrap_or(var).sqrt();
    let ks = ks_normal(&centred, 0.0, sd);
    let ratio = limit.filter(|v| *v > 0.0).map(|v| var / v);
    let reference = exact.or(limit);
    VarianceRow {
        function: phi.label.clone(),
        n,
        trials: xs.len(),
        mean: m,
        variance: var,
        se,
        limit,
        exact,
        ks,
        ks_against_limit: limit.is_some(),
        centred_mean: mean(&centred),
        ratio,
        ratio_in_band: ratio.map(|r| (RATIO_BAND.0..=RATIO_BAND.1).contains(&r)),
        ks_ok: ks <= KS_THRESHOLD,
        within_3se: reference.map(|r| (var - r).abs() <= SE_MULTIPLE * se),
        centred,
    }
}

pub fn write_variance_csv<W: Write>(out: W, report: &VarianceReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "function",
        "n",
        "trials",
        "mean",
        "variance",
        "se",
        "limit",
        "exact",
        "ratio",
        "ks",
        "ks_reference",
        "centred_mean",
        "ratio_in_band",
        "ks_ok",
        "within_3se",
    ])?;
    for r in &report.rows {
        w.write_record([
            r.function.clone(),
            r.n.to_string(),
            r.trials.to_string(),
            r.mean.to_string(),
            r.variance.to_string(),
            r.se.to_string(),
            opt(r.limit),
            opt(r.exact),
            opt(r.ratio),
            r.ks.to_string(),
            if r.ks_against_limit { "limit" } else { "empirical" }.to_string(),
            r.centred_mean.to_string(),
            flag(r.ratio_in_band),
            r.ks_ok.to_string(),
            flag(r.within_3se),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountingRow {
    pub n: usize,
    pub log_n: f64,
    pub mean: f64,
    pub variance: f64,
    pub se: f64,
    /// Kernel value for GUE.
    pub exact: Option<f64>,
    /// Plain KS of the standardised count to `N(0, 1)`.
    pub ks_raw: f64,
    /// Same, compared at half-integers.
    pub ks_lattice: f64,
    pub control_variance: Option<f64>,
    pub control_se: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountingTable {
    pub y0: f64,
    pub control: Option<String>,
    pub rows: Vec<CountingRow>,
    /// Variance against `log n`.
    pub monte_carlo_fit: LinearFit,
    pub exact_fit: Option<LinearFit>,
    pub control_fit: Option<LinearFit>,
}

impl CountingTable {
    /// Leading coefficient of the GUE counting variance in `log n`.
    pub const GUE_SLOPE: f64 = 1.0 / (2.0 * PI * PI);
}

/// Number of eigenvalues `>= y0` per trial; Sturm counts on the tridiagonal
/// model when the ensemble has one.
pub fn counts(spec: &EnsembleSpec, y0: f64, trials: usize, seed: u64) -> Result<Vec<f64>> {
    let beta = match (spec.kind, spec.backend) {
        (EnsembleKind::Gue, Backend::Tridiagonal) => Some(2),
        (EnsembleKind::Goe, Backend::Tridiagonal) => Some(1),
        _ => None,
    };
    (0..trials as u64)
        .into_par_iter()
        .map(|t| match beta {
            Some(b) => Ok(beta_hermite_tridiagonal(spec.n, b, seed, t).count_at_or_above(y0) as f64),
            None => {
                let s = sample(spec, seed, t)?.rescale_to_canonical();
                Ok(s.eigenvalues.iter().filter(|&&l| l >= y0).count() as f64)
            }
        })
        .collect()
}

/// Counting variance against `log n`, with an exact kernel column for GUE and
/// a smooth control statistic whose variance stays bounded.
pub fn indicator_divergence_experiment(config: &ExperimentConfig) -> Result<CountingTable> {
    config.require_trials()?;
    if config.n_list.len() < 2 {
        return Err(Error::Config("counting needs at least two sizes in n_list".into()));
    }
    let control = config.control.as_deref().map(lookup).transpose()?;
    if control.is_some() && config.control_trials < MIN_TRIALS {
        return Err(Error::Config(format!(
            "insufficient control trials: {} < {MIN_TRIALS}",
            config.control_trials
        )));
    }
    let gue = config.ensemble.kind == EnsembleKind::Gue;
    let mut rows = Vec::new();
    for &n in &config.n_list {
        let spec = config.ensemble_at(n)?;
        let xs = pooled(|| counts(&spec, config.y0, config.trials, config.seed))??;
        let m = mean(&xs);
        let var = variance(&xs);
        let sd = var.sqrt();
        let std: Vec<f64> = xs.iter().map(|x| (x - m) / sd).collect();
        let exact = if gue && config.exact { Some(counting_variance(n, config.y0)?) } else { None };
        let (control_variance, control_se) = match &control {
            Some(phi) => {
                let phis = std::slice::from_ref(phi);
                let table = pooled(|| statistic_table(&spec, phis, config.control_trials, config.seed))??;
                let c = column(&table, 0);
                (Some(variance(&c)), Some(variance_se(&c)))
            }
            None => (None, None),
        };
        rows.push(CountingRow {
            n,
            log_n: (n as f64).ln(),
            mean: m,
            variance: var,
            se: variance_se(&xs),
            exact,
            ks_raw: ks_normal(&std, 0.0, 1.0),
            ks_lattice: ks_normal_lattice(&xs, m, sd),
            control_variance,
            control_se,
        });
    }
    let logs: Vec<f64> = rows.iter().map(|r| r.log_n).collect();
    let fit = |ys: Option<Vec<f64>>| ys.map(|y| linear_fit(&logs, &y));
    Ok(CountingTable {
        y0: config.y0,
        control: config.control.clone(),
        monte_carlo_fit: linear_fit(&logs, &rows.iter().map(|r| r.variance).collect::<Vec<_>>()),
        exact_fit: fit(rows.iter().map(|r| r.exact).collect()),
        control_fit: fit(rows.iter().map(|r| r.control_variance).collect()),
        rows,
    })
}

pub fn write_counting_csv<W: Write>(out: W, table: &CountingTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n",
        "log_n",
        "mean",
        "variance",
        "se",
        "exact",
        "ks_raw",
        "ks_lattice",
        "control_variance",
        "control_se",
    ])?;
    for r in &table.rows {
        w.write_record([
            r.n.to_string(),
            r.log_n.to_string(),
            r.mean.to_string(),
            r.variance.to_string(),
            r.se.to_string(),
            opt(r.exact),
            r.ks_raw.to_string(),
            r.ks_lattice.to_string(),
            opt(r.control_variance),
            opt(r.control_se),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per fitted series: `series, slope, intercept, slope_se`.
pub fn write_counting_fit_csv<W: Write>(out: W, table: &CountingTable) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["series", "slope", "intercept", "slope_se"])?;
    let series = [
        ("monte_carlo", Some(table.monte_carlo_fit)),
        ("exact", table.exact_fit),
        ("control", table.control_fit),
    ];
    for (name, f) in series {
        if let Some(f) = f {
            w.write_record([
                name.to_string(),
                f.slope.to_string(),
                f.intercept.to_string(),
                f.slope_se.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Largest band index accepted by the covariance experiment.
pub const MAX_BANDS: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct BandCovariance {
    pub function: String,
    pub n: usize,
    pub trials: usize,
    pub bands: Vec<i32>,
    /// `B_kl = ∬ g_k(t) g_l(s) Cov(N[P_k(·−t)], N[P_l(·−s)]) dt ds`.
    pub matrix: Vec<Vec<f64>>,
    pub direct_variance: f64,
    pub direct_se: f64,
    /// `Σ_kl B_kl`.
    pub reconstructed: f64,
    pub relative_gap: f64,
    /// `Σ_{k≠l} |B_kl| / Σ_kl B_kl`.
    pub off_diagonal_fraction: f64,
    /// Largest `|N[P_η(·−t)] − Im Tr G(t+iη)/π|` over the spot checks.
    pub poisson_identity_error: f64,
}

/// `N_n[P_η(· − t)]` with `P_η(x) = η/(π(x² + η²))`.
pub fn poisson_statistic(eigenvalues: &[f64], eta: f64, t: f64) -> f64 {
    eigenvalues
        .iter()
        .map(|&l| {
            let d = l - t;
            eta / (d * d + eta * eta)
        })
        .sum::<f64>()
        / PI
}

/// Quadrature nodes `(t_i, h·g_k(t_i))` of one band, spaced `η/4` on the
/// sampling grid and trimmed where the lift is negligible.
fn band_nodes(lift: &crate::funclab::GridFunction, eta: f64) -> Vec<(f64, f64)> {
    let grid = lift.grid;
    let dx = grid.spacing();
    let stride = ((0.25 * eta / dx).round() as usize).max(1);
    let h = stride as f64 * dx;
    let top = lift.sup_norm();
    (0..grid.n)
        .step_by(stride)
        .filter(|&j| lift.values[j].abs() > 1e-13 * top)
        .map(|j| (grid.node(j), h * lift.values[j]))
        .collect()
}

/// Splits `Var(N_n[φ])` over Littlewood–Paley bands. With
/// `φ_k = P_{2^{-k}} ∗ g_k`, `N[φ_k] = ∫ g_k(t) N[P_{2^{-k}}(·−t)] dt`, so by
/// bilinearity the band double integral equals `Cov(Y_k, Y_l)` for the
/// per-trial quadratures `Y_k`; all bands share the same spectra.
pub fn band_covariance(
    spec: &EnsembleSpec,
    phi: &TestFunction,
    k_max: usize,
    trials: usize,
    seed: u64,
) -> Result<BandCovariance> {
    if k_max > MAX_BANDS {
        return Err(Error::InvalidParameter(format!("at most {MAX_BANDS} bands, got {k_max}")));
    }
    if trials < 2 {
        return Err(Error::InvalidParameter("covariances need at least two trials".into()));
    }
    let d = decompose(&phi.grid, k_max)?;
    let bands: Vec<i32> = d.bands().collect();
    let nodes: Vec<(f64, Vec<(f64, f64)>)> = bands
        .iter()
        .map(|&k| {
            let eta = 2f64.powi(-k);
            (eta, band_nodes(d.lift(k), eta))
        })
        .collect();
    let per_trial: Vec<(f64, Vec<f64>)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let s = sample(spec, seed, t)?.rescale_to_canonical();
            let ev = &s.eigenvalues;
            let ys = nodes
                .iter()
                .map(|(eta, band)| band.iter().map(|&(x, w)| w * poisson_statistic(ev, *eta, x)).sum())
                .collect();
            Ok((linear_statistic(ev, phi), ys))
        })
        .collect::<Result<_>>()?;

    let direct: Vec<f64> = per_trial.iter().map(|p| p.0).collect();
    let b = bands.len();
    let means: Vec<f64> = (0..b).map(|k| per_trial.iter().map(|p| p.1[k]).sum::<f64>() / trials as f64).collect();
    let mut matrix = vec![vec![0.0; b]; b];
    for k in 0..b {
        for l in k..b {
            let c = per_trial
                .iter()
                .map(|p| (p.1[k] - means[k]) * (p.1[l] - means[l]))
                .sum::<f64>()
                / (trials as f64 - 1.0);
            matrix[k][l] = c;
            matrix[l][k] = c;
        }
    }
    let reconstructed: f64 = matrix.iter().flatten().sum();
    let off: f64 = (0..b)
        .flat_map(|k| (0..b).filter(move |&l| l != k).map(move |l| (k, l)))
        .map(|(k, l)| matrix[k][l].abs())
        .sum();
    let direct_variance = variance(&direct);

    let mut poisson_identity_error = 0.0f64;
    for t in 0..trials.min(10) as u64 {
        let s = sample(spec, seed, t)?.rescale_to_canonical();
        for &k in &bands {
            let eta = 2f64.powi(-k);
            for x in [-1.3, 0.0, 0.7] {
                let tr = trace_resolvent(&s.eigenvalues, SpectralPoint::new(x, eta)?);
                let err = (poisson_statistic(&s.eigenvalues, eta, x) - tr.im / PI).abs();
                poisson_identity_error = poisson_identity_error.max(err);
            }
        }
    }

    Ok(BandCovariance {
        function: phi.label.clone(),
        n: spec.n,
        trials,
        bands,
        matrix,
        direct_variance,
        direct_se: variance_se(&direct),
        reconstructed,
        relative_gap: (reconstructed - direct_variance).abs() / direct_variance,
        off_diagonal_fraction: off / reconstructed,
        poisson_identity_error,
    })
}

/// Band covariance for each function and the first size in `n_list`.
pub fn band_covariance_experiment(config: &ExperimentConfig) -> Result<Vec<BandCovariance>> {
    config.require_trials()?;
    let spec = config.ensemble_at(config.n_list[0])?;
    config
        .functions
        .iter()
        .map(|label| {
            let phi = lookup(label)?;
            if !phi.is_smooth() {
                return Err(Error::Config(format!("band covariance needs a smooth function, got {label}")));
            }
            pooled(|| band_covariance(&spec, &phi, config.bands, config.trials, config.seed))?
        })
        .collect()
}

/// Long format: `function, n, k, l, covariance`.
pub fn write_band_matrix_csv<W: Write>(out: W, results: &[BandCovariance]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["function", "n", "k", "l", "covariance"])?;
    for r in results {
        for (i, &k) in r.bands.iter().enumerate() {
            for (j, &l) in r.bands.iter().enumerate() {
                w.write_record([
                    r.function.clone(),
                    r.n.to_string(),
                    k.to_string(),
                    l.to_string(),
                    r.matrix[i][j].to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_band_summary_csv<W: Write>(out: W, results: &[BandCovariance]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "function",
        "n",
        "trials",
        "k_max",
        "direct_variance",
        "direct_se",
        "reconstructed",
        "relative_gap",
        "off_diagonal_fraction",
        "poisson_identity_error",
    ])?;
    for r in results {
        w.write_record([
            r.function.clone(),
            r.n.to_string(),
            r.trials.to_string(),
            r.bands.last().copied().unwrap_or(-1).to_string(),
            r.direct_variance.to_string(),
            r.direct_se.to_string(),
            r.reconstructed.to_string(),
            r.relative_gap.to_string(),
            r.off_diagonal_fraction.to_string(),
            r.poisson_identity_error.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
