use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use super::config::ExperimentConfig;
use super::experiments::*;
use super::svg::histogram_vs_normal;
use crate::cdkernel::{bulk_asymptotics_check, exact_variance, write_diagnostics_csv as write_kernel_csv};
use crate::deformed::{bulk_sweep, write_diagnostics_csv as write_deformed_csv, ContourOptions, DeformationData};
use crate::ensembles::{sample, write_spectra_csv};
use crate::error::{Error, Result};
use crate::funclab::lookup;
use crate::limitvar::{limit_variance, write_table_csv, Family, LimitVarianceRequest, Method};
use crate::resolvent::{
    local_law_deviation, var_trace_sweep, write_local_law_csv, write_sweep_csv, SpectralPoint,
};

#[derive(Parser, Debug)]
#[command(name = "rmt-fluct", version, about = "Fluctuations of linear eigenvalue statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write sampled spectra (canonical scale) for each n.
    Sample(Common),
    /// Print limiting variances.
    LimitVar(LimitArgs),
    /// Monte Carlo variance and normality of linear statistics.
    Clt(Common),
    /// Counting-statistic variance against log n.
    Counting(Common),
    /// Band-by-band covariance decomposition of the variance.
    Bands(Common),
    /// Finite-n GUE kernel variances and bulk diagnostics.
    Kernel(Common),
    /// Contour-integral kernel of the Gaussian-deformed ensemble.
    Deformed(Common),
    /// Variance of Tr G down the η hierarchy and local-law deviations.
    Resolvent(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LimitArgs {
    /// Corpus label; repeatable.
    #[arg(long = "fn")]
    functions: Vec<String>,
    /// gue | goe | johansson | wigner:kappa4,w2
    #[arg(long)]
    family: Option<String>,
    #[arg(long, default_value = "chebyshev")]
    method: String,
    #[command(flatten)]
    common: Common,
}

/// Exit code for an error: 3 for numerical non-convergence, 2 for bad input
/// or configuration, 1 for I/O.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numerical() {
        3
    } else if matches!(e, Error::Io(_) | Error::Csv(_)) {
        1
    } else {
        2
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load(c: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &c.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(o) = &c.out {
        cfg.out = o.clone();
    }
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    println!("wrote {}", path.display());
    Ok(BufWriter::new(File::create(path)?))
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Sample(c) => run_sample(&load(&c)?),
        Command::LimitVar(a) => run_limit_var(&a),
        Command::Clt(c) => run_clt(&load(&c)?),
        Command::Counting(c) => run_counting(&load(&c)?),
        Command::Bands(c) => run_bands(&load(&c)?),
        Command::Kernel(c) => run_kernel(&load(&c)?),
        Command::Deformed(c) => run_deformed(&load(&c)?),
        Command::Resolvent(c) => run_resolvent(&load(&c)?),
    }
}

fn run_sample(cfg: &ExperimentConfig) -> Result<()> {
    for &n in &cfg.n_list {
        let spec = cfg.ensemble_at(n)?;
        let samples = pooled(|| {
            use rayon::prelude::*;
            (0..cfg.trials as u64)
                .into_par_iter()
                .map(|t| sample(&spec, cfg.seed, t).map(|s| s.rescale_to_canonical()))
                .collect::<Result<Vec<_>>>()
        })??;
        write_spectra_csv(create(&cfg.out, &format!("spectra_n{n}.csv"))?, &samples)?;
    }
    Ok(())
}

/// Rounds away quadrature noise below 1e-12 so exact values print exactly.
fn tidy(v: f64) -> f64 {
    (v * 1e12).round() / 1e12
}

fn run_limit_var(a: &LimitArgs) -> Result<()> {
    let cfg = match &a.common.config {
        Some(_) => Some(load(&a.common)?),
        None => None,
    };
    let labels = if !a.functions.is_empty() {
        a.functions.clone()
    } else {
        cfg.as_ref().map_or_else(|| vec!["x".to_string()], |c| c.functions.clone())
    };
    let family: Family = match (&a.family, &cfg) {
        (Some(f), _) => f.parse()?,
        (None, Some(c)) => family_for(&c.ensemble),
        (None, None) => Family::Gue,
    };
    let method = match a.method.as_str() {
        "chebyshev" => Method::Chebyshev,
        "quadrature" => Method::Quadrature,
        m => return Err(Error::Config(format!("unknown method `{m}`"))),
    };
    let mut rows = Vec::new();
    for label in &labels {
        let phi = lookup(label).map_err(|e| Error::Config(e.to_string()))?;
        let r = limit_variance(&LimitVarianceRequest { phi, family, method })?;
        if labels.len() == 1 {
            println!("{:?}", tidy(r.value));
        } else {
            println!("{label}\t{:?}", tidy(r.value));
        }
        rows.push(r);
    }
    if let Some(out) = a.common.out.as_ref().or(cfg.as_ref().map(|c| &c.out)) {
        write_table_csv(create(out, "limit_var.csv")?, &rows)?;
    }
    Ok(())
}

fn run_clt(cfg: &ExperimentConfig) -> Result<()> {
    let report = clt_experiment(cfg)?;
    write_variance_csv(create(&cfg.out, "clt.csv")?, &report)?;
    for r in &report.rows {
        println!(
            "{} n={} var={:.4} se={:.4} limit={} exact={} ks={:.4}",
            r.function,
            r.n,
            r.variance,
            r.se,
            r.limit.map_or("-".into(), |v| format!("{v:.4}")),
            r.exact.map_or("-".into(), |v| format!("{v:.4}")),
            r.ks
        );
        if cfg.svg {
            let sd = r.limit.unwrap_or(r.variance).sqrt();
            let title = format!("{} {} n={} ({} trials)", report.experiment, r.function, r.n, r.trials);
            let svg = histogram_vs_normal(&r.centred, sd, 32, &title);
            let name = format!("clt_{}_n{}.svg", r.function.replace(['/', '@'], "_"), r.n);
            fs::create_dir_all(&cfg.out)?;
            fs::write(cfg.out.join(&name), svg)?;
            println!("wrote {}", cfg.out.join(name).display());
        }
    }
    println!("tolerance bands (ratio {RATIO_BAND:?}, KS <= {KS_THRESHOLD}) are desk-scale choices");
    Ok(())
}

fn run_counting(cfg: &ExperimentConfig) -> Result<()> {
    let t = indicator_divergence_experiment(cfg)?;
    write_counting_csv(create(&cfg.out, "counting.csv")?, &t)?;
    write_counting_fit_csv(create(&cfg.out, "counting_fit.csv")?, &t)?;
    println!(
        "slope {:.4} ± {:.4} (GUE target {:.4})",
        t.monte_carlo_fit.slope,
        t.monte_carlo_fit.slope_se,
        CountingTable::GUE_SLOPE
    );
    Ok(())
}

fn run_bands(cfg: &ExperimentConfig) -> Result<()> {
    let res = band_covariance_experiment(cfg)?;
    write_band_matrix_csv(create(&cfg.out, "bands.csv")?, &res)?;
    write_band_summary_csv(create(&cfg.out, "bands_summary.csv")?, &res)?;
    for r in &res {
        println!(
            "{} n={} direct {:.4} reconstructed {:.4} gap {:.2e}",
            r.function, r.n, r.direct_variance, r.reconstructed, r.relative_gap
        );
    }
    Ok(())
}

fn run_kernel(cfg: &ExperimentConfig) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(&cfg.out, "kernel_variance.csv")?);
    w.write_record(["n", "function", "exact_variance"])?;
    let mut diags = Vec::new();
    for &n in &cfg.n_list {
        for label in &cfg.functions {
            let v = exact_variance(n, &lookup(label)?)?;
            w.write_record([n.to_string(), label.clone(), v.to_string()])?;
        }
        for i in -6..=6 {
            diags.push(bulk_asymptotics_check(n, 0.3 * i as f64)?);
        }
    }
    w.flush()?;
    write_kernel_csv(create(&cfg.out, "kernel_diagnostics.csv")?, &diags)
}

fn run_deformed(cfg: &ExperimentConfig) -> Result<()> {
    let xs: Vec<f64> = (-4..=4).map(|i| 0.25 * i as f64).collect();
    for &n in &cfg.n_list {
        let data = DeformationData::semicircle_quantiles(n)?;
        let rows = bulk_sweep(&data, &xs, &ContourOptions::default())?;
        write_deformed_csv(create(&cfg.out, &format!("deformed_n{n}.csv"))?, &rows)?;
    }
    Ok(())
}

fn run_resolvent(cfg: &ExperimentConfig) -> Result<()> {
    let mut sweep = Vec::new();
    let mut law = Vec::new();
    let grid = cfg
        .etas
        .iter()
        .map(|&eta| SpectralPoint::new(cfg.energy, eta))
        .collect::<Result<Vec<_>>>()?;
    for &n in &cfg.n_list {
        let spec = cfg.ensemble_at(n)?;
        sweep.extend(pooled(|| var_trace_sweep(&spec, cfg.energy, &cfg.etas, cfg.trials, cfg.seed))??);
        law.extend(pooled(|| local_law_deviation(&spec, &grid, cfg.trials, cfg.seed))??);
    }
    write_sweep_csv(create(&cfg.out, "resolvent_var.csv")?, &sweep)?;
    write_local_law_csv(create(&cfg.out, "local_law.csv")?, &law)
}
