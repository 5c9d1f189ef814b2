use std::path::{Path, PathBuf};

use crate::ensembles::{Backend, EnsembleKind, EnsembleSpec, EntryLaw};
use crate::error::{Error, Result};
use crate::funclab::lookup;

/// Fewest trials for which a statistical verdict is reported.
pub const MIN_TRIALS: usize = 100;

/// Experiment settings read from a `key = value` file.
///
/// ```text
/// # comments start with '#'
/// experiment = clt                 # free-form name used in output file names
/// ensemble = gue                   # gue | goe | wigner:<law> | johansson:<law>
/// backend = tridiagonal            # tridiagonal | dense (GUE/GOE only)
/// functions = x, bump              # corpus labels
/// n_list = 100, 400
/// trials = 2000
/// seed = 42
/// out = results                    # output directory
/// svg = true                       # histogram-vs-density figures (clt)
/// exact = true                     # finite-n GUE kernel column
/// exact_max_n = 400
/// y0 = 0.0                         # counting threshold
/// control = bump                   # bounded-variance control (counting)
/// control_trials = 400
/// bands = 5                        # top Littlewood–Paley band (bands, <= 6)
/// energy = 0.0                     # resolvent real part
/// etas = 0.5, 0.25, 0.125
/// ```
///
/// `<law>` is `gaussian`, `rademacher`, `uniform` or
/// `custom:mean,second,fourth`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// Ensemble at the first entry of `n_list`.
    pub ensemble: EnsembleSpec,
    pub functions: Vec<String>,
    pub n_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub svg: bool,
    pub exact: bool,
    pub exact_max_n: usize,
    pub y0: f64,
    pub control: Option<String>,
    pub control_trials: usize,
    pub bands: usize,
    pub energy: f64,
    pub etas: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: "experiment".into(),
            ensemble: EnsembleSpec::gue(100).expect("valid default"),
            functions: vec!["x".into()],
            n_list: vec![100],
            trials: 1000,
            seed: 1,
            out: PathBuf::from("results"),
            svg: false,
            exact: true,
            exact_max_n: 400,
            y0: 0.0,
            control: Some("bump".into()),
            control_trials: 400,
            bands: 5,
            energy: 0.0,
            etas: (1..=6).map(|k| 2f64.powi(-k)).collect(),
        }
    }
}

fn bad(key: &str, value: &str, why: impl std::fmt::Display) -> Error {
    Error::Config(format!("bad value `{value}` for `{key}`: {why}"))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let v = value
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| bad(key, value, e)))
        .collect::<Result<Vec<T>>>()?;
    if v.is_empty() {
        return Err(bad(key, value, "empty list"));
    }
    Ok(v)
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| bad(key, value, e))
}

/// `gue`, `goe`, `wigner:<law>` or `johansson:<law>` at dimension `n`.
pub fn parse_ensemble(value: &str, n: usize) -> Result<EnsembleSpec> {
    let (kind, law) = match value.split_once(':') {
        Some((k, l)) => (k, l.parse::<EntryLaw>()?),
        None => (value, EntryLaw::Gaussian),
    };
    EnsembleSpec::new(kind.parse::<EnsembleKind>()?, n, law)
        .map_err(|e| Error::Config(format!("ensemble `{value}`: {e}")))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = ExperimentConfig::default();
        let mut ensemble = "gue".to_string();
        let mut backend: Option<Backend> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "experiment" => c.experiment = value.to_string(),
                "ensemble" => ensemble = value.to_string(),
                "backend" => {
                    backend = Some(match value {
                        "tridiagonal" => Backend::Tridiagonal,
                        "dense" => Backend::Dense,
                        _ => return Err(bad(key, value, "expected tridiagonal or dense")),
                    })
                }
                "functions" => c.functions = list(key, value)?,
                "n_list" => c.n_list = list(key, value)?,
                "trials" => c.trials = scalar(key, value)?,
                "seed" => c.seed = scalar(key, value)?,
                "out" => c.out = PathBuf::from(value),
                "svg" => c.svg = scalar(key, value)?,
                "exact" => c.exact = scalar(key, value)?,
                "exact_max_n" => c.exact_max_n = scalar(key, value)?,
                "y0" => c.y0 = scalar(key, value)?,
                "control" => c.control = (!value.is_empty() && value != "none").then(|| value.to_string()),
                "control_trials" => c.control_trials = scalar(key, value)?,
                "bands" => c.bands = scalar(key, value)?,
                "energy" => c.energy = scalar(key, value)?,
                "etas" => c.etas = list(key, value)?,
                _ => return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1))),
            }
        }
        if c.n_list.contains(&0) {
            return Err(Error::Config("n_list entries must be >= 1".into()));
        }
        c.ensemble = parse_ensemble(&ensemble, c.n_list[0])?;
        if let Some(b) = backend {
            if !matches!(c.ensemble.kind, EnsembleKind::Gue | EnsembleKind::Goe) {
                return Err(Error::Config("backend applies to gue and goe only".into()));
            }
            c.ensemble = c.ensemble.with_backend(b);
        }
        for label in c.functions.iter().chain(c.control.iter()) {
            lookup(label).map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Ensemble at dimension `n`.
    pub fn ensemble_at(&self, n: usize) -> Result<EnsembleSpec> {
        self.ensemble.with_n(n)
    }

    /// Statistical experiments refuse to run on too few trials.
    pub fn require_trials(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!(
                "insufficient trials: {} < {MIN_TRIALS}",
                self.trials
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_keys() {
        let c = ExperimentConfig::parse(
            "experiment = demo\n# comment\nensemble = wigner:rademacher\nfunctions = x, bump # trailing\n\
             n_list = 50,100\ntrials = 300\nseed = 9\nsvg = true\ncontrol = none\netas = 0.5, 0.1\n",
        )
        .unwrap();
        assert_eq!(c.experiment, "demo");
        assert_eq!(c.ensemble.kind, EnsembleKind::WignerGeneral);
        assert_eq!(c.ensemble.n, 50);
        assert_eq!(c.functions, ["x", "bump"]);
        assert_eq!(c.n_list, [50, 100]);
        assert_eq!((c.trials, c.seed, c.svg), (300, 9, true));
        assert_eq!(c.control, None);
        assert_eq!(c.etas, [0.5, 0.1]);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "colour = red",
            "n_list = 10, x",
            "functions = nope",
            "ensemble = cue",
            "trials = -4",
            "just a line",
            "ensemble = wigner:rademacher\nbackend = dense",
            "n_list = 0",
        ] {
            assert!(matches!(ExperimentConfig::parse(text), Err(Error::Config(_))), "{text}");
        }
        let c = ExperimentConfig::parse("trials = 50").unwrap();
        assert!(c.require_trials().is_err());
    }
}
