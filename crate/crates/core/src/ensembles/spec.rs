use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    Gue,
    Goe,
    WignerGeneral,
    JohanssonDeformed,
}

impl fmt::Display for EnsembleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleKind::Gue => "gue",
            EnsembleKind::Goe => "goe",
            EnsembleKind::WignerGeneral => "wigner",
            EnsembleKind::JohanssonDeformed => "johansson",
        })
    }
}

impl FromStr for EnsembleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gue" => Ok(EnsembleKind::Gue),
            "goe" => Ok(EnsembleKind::Goe),
            "wigner" | "wignergeneral" | "wigner-general" => Ok(EnsembleKind::WignerGeneral),
            "johansson" | "johanssondeformed" | "johansson-deformed" => {
                Ok(EnsembleKind::JohanssonDeformed)
            }
            other => Err(Error::Config(format!("unknown ensemble kind `{other}`"))),
        }
    }
}

/// Law of a standardized real variate `X` (mean 0, variance 1). Complex
/// off-diagonal entries are built as `sqrt(w2/2) (X + iY)` from two
/// independent copies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntryLaw {
    Gaussian,
    /// `±1` with equal probability.
    Rademacher,
    /// Uniform on `[-√3, √3]`.
    Uniform,
    /// Declared moments of the real variate. Realised as the symmetric
    /// three-point law on `{-a, 0, a}` with the given second and fourth
    /// moments; the declared mean must be zero.
    CustomMoments { mean: f64, second: f64, fourth: f64 },
}

impl EntryLaw {
    pub fn validate(&self) -> Result<()> {
        if let EntryLaw::CustomMoments {
            mean,
            second,
            fourth,
        } = *self
        {
            if !mean.is_finite() || mean != 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "entry law must be centred, got mean {mean}"
                )));
            }
            if !second.is_finite() || second <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "entry law needs a declared positive second moment, got {second}"
                )));
            }
            if !fourth.is_finite() || fourth < second * second {
                return Err(Error::InvalidParameter(format!(
                    "fourth moment {fourth} is below second moment squared {}",
                    second * second
                )));
            }
        }
        Ok(())
    }

    /// Draws a variate with mean 0 and variance 1.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            EntryLaw::Gaussian => rng.sample(StandardNormal),
            EntryLaw::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryLaw::Uniform => 3f64.sqrt() * rng.random_range(-1.0..1.0),
            EntryLaw::CustomMoments { second, fourth, .. } => {
                // standardized kurtosis of the declared law
                let kurt = fourth / (second * second);
                let a = kurt.sqrt();
                let p = 1.0 / kurt;
                let u: f64 = rng.random();
                if u < 0.5 * p {
                    -a
                } else if u < p {
                    a
                } else {
                    0.0
                }
            }
        }
    }

    /// `E X^4` of the standardized variate.
    pub fn standardized_fourth_moment(&self) -> f64 {
        match *self {
            EntryLaw::Gaussian => 3.0,
            EntryLaw::Rademacher => 1.0,
            EntryLaw::Uniform => 9.0 / 5.0,
            EntryLaw::CustomMoments { second, fourth, .. } => fourth / (second * second),
        }
    }

    /// True when the law matches the standard Gaussian through five moments
    /// (symmetric laws match the odd ones automatically).
    pub fn matches_gaussian_five_moments(&self) -> bool {
        (self.standardized_fourth_moment() - 3.0).abs() < 1e-12
    }
}

impl FromStr for EntryLaw {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "gaussian" | "normal" => return Ok(EntryLaw::Gaussian),
            "rademacher" => return Ok(EntryLaw::Rademacher),
            "uniform" => return Ok(EntryLaw::Uniform),
            _ => {}
        }
        // custom:mean,second,fourth
        if let Some(rest) = s.strip_prefix("custom:") {
            let parts: Vec<f64> = rest
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Config(format!("bad custom law `{s}`: {e}")))?;
            if parts.len() != 3 {
                return Err(Error::Config(format!(
                    "custom law needs mean,second,fourth; got `{s}`"
                )));
            }
            let law = EntryLaw::CustomMoments {
                mean: parts[0],
                second: parts[1],
                fourth: parts[2],
            };
            law.validate()?;
            return Ok(law);
        }
        Err(Error::Config(format!("unknown entry law `{s}`")))
    }
}

/// Spectral scale of reported eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeConvention {
    /// Semicircle on `[-2, 2]` (canonical).
    Edge2,
    /// Semicircle on `[-√2, √2]`.
    EdgeSqrt2,
}

impl EdgeConvention {
    /// Factor mapping this convention onto the canonical `[-2, 2]` scale.
    pub fn to_canonical_factor(self) -> f64 {
        match self {
            EdgeConvention::Edge2 => 1.0,
            EdgeConvention::EdgeSqrt2 => std::f64::consts::SQRT_2,
        }
    }

    pub fn to_canonical(self, x: f64) -> f64 {
        x * self.to_canonical_factor()
    }

    pub fn from_canonical(self, x: f64) -> f64 {
        x / self.to_canonical_factor()
    }

    pub fn edge(self) -> f64 {
        2.0 / self.to_canonical_factor()
    }
}

/// How GUE/GOE spectra are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Dense,
    Tridiagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub n: usize,
    pub entry_law: EntryLaw,
    pub edge_convention: EdgeConvention,
    /// Fourth-cumulant parameter of the limiting-variance evaluator.
    pub kappa4: f64,
    /// Second absolute moment of off-diagonal entries.
    pub w2: f64,
    pub backend: Backend,
}

impl EnsembleSpec {
    pub fn gue(n: usize) -> Result<Self> {
        Self::new(EnsembleKind::Gue, n, EntryLaw::Gaussian)
    }

    pub fn goe(n: usize) -> Result<Self> {
        Self::new(EnsembleKind::Goe, n, EntryLaw::Gaussian)
    }

    pub fn wigner(n: usize, law: EntryLaw) -> Result<Self> {
        Self::new(EnsembleKind::WignerGeneral, n, law)
    }

    pub fn johansson(n: usize, base: EntryLaw) -> Result<Self> {
        Self::new(EnsembleKind::JohanssonDeformed, n, base)
    }

    /// Builds a validated spec. GUE/GOE force the Gaussian law; `kappa4`
    /// is the complex fourth cumulant `E|w|^4 - 2` of the unit-variance
    /// off-diagonal entry (zero for GUE).
    pub fn new(kind: EnsembleKind, n: usize, law: EntryLaw) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix dimension n must be >= 1".into()));
        }
        law.validate()?;
        let (law, backend, edge) = match kind {
            EnsembleKind::Gue | EnsembleKind::Goe => {
                (EntryLaw::Gaussian, Backend::Tridiagonal, EdgeConvention::Edge2)
            }
            EnsembleKind::WignerGeneral => (law, Backend::Dense, EdgeConvention::Edge2),
            EnsembleKind::JohanssonDeformed => {
                if !law.matches_gaussian_five_moments() {
                    return Err(Error::InvalidParameter(
                        "Johansson base law must match the Gaussian through five moments".into(),
                    ));
                }
                (law, Backend::Dense, EdgeConvention::EdgeSqrt2)
            }
        };
        let kappa4 = match kind {
            EnsembleKind::Gue | EnsembleKind::Goe => 0.0,
            // w = (X + iY)/√2: E|w|^4 = (E X^4 + 1)/2
            _ => 0.5 * (law.standardized_fourth_moment() + 1.0) - 2.0,
        };
        Ok(EnsembleSpec {
            kind,
            n,
            entry_law: law,
            edge_convention: edge,
            kappa4,
            w2: 1.0,
            backend,
        })
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn with_moments(mut self, kappa4: f64, w2: f64) -> Result<Self> {
        if !(w2 > 0.0) {
            return Err(Error::InvalidParameter(format!("w2 must be positive, got {w2}")));
        }
        if self.kind == EnsembleKind::Gue && kappa4 != 0.0 {
            return Err(Error::InvalidParameter("GUE has kappa4 = 0 by convention".into()));
        }
        self.kappa4 = kappa4;
        self.w2 = w2;
        Ok(self)
    }

    pub fn with_n(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix dimension n must be >= 1".into()));
        }
        let mut s = self.clone();
        s.n = n;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gue_has_zero_kappa4() {
        let s = EnsembleSpec::gue(10).unwrap();
        assert_eq!(s.kappa4, 0.0);
        assert!(s.clone().with_moments(1.0, 1.0).is_err());
        assert!(EnsembleSpec::gue(0).is_err());
    }

    #[test]
    fn rescaling_round_trip() {
        for conv in [EdgeConvention::Edge2, EdgeConvention::EdgeSqrt2] {
            for x in [-1.3, 0.0, 0.77] {
                assert!((conv.from_canonical(conv.to_canonical(x)) - x).abs() < 1e-15);
            }
        }
        assert!((EdgeConvention::EdgeSqrt2.edge() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn custom_law_validation() {
        assert!("custom:0.1,1,3".parse::<EntryLaw>().is_err());
        assert!("custom:0,0,3".parse::<EntryLaw>().is_err());
        assert!("custom:0,1,0.5".parse::<EntryLaw>().is_err());
        let law: EntryLaw = "custom:0,1,3".parse().unwrap();
        assert!(law.matches_gaussian_five_moments());
        assert!(EnsembleSpec::johansson(4, EntryLaw::Rademacher).is_err());
        assert!(EnsembleSpec::johansson(4, law).is_ok());
    }

    #[test]
    fn custom_law_has_declared_moments() {
        use rand::SeedableRng;
        let law = EntryLaw::CustomMoments {
            mean: 0.0,
            second: 1.0,
            fourth: 3.0,
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let m = 200_000;
        let (mut s2, mut s4) = (0.0, 0.0);
        for _ in 0..m {
            let x = law.sample(&mut rng);
            s2 += x * x;
            s4 += x.powi(4);
        }
        assert!((s2 / m as f64 - 1.0).abs() < 0.02);
        assert!((s4 / m as f64 - 3.0).abs() < 0.1);
    }
}
