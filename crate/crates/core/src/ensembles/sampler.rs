use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::eigen::{eig_hermitian, eig_symmetric_tridiagonal, HermitianMatrix};
use super::spec::{Backend, EdgeConvention, EnsembleKind, EnsembleSpec, EntryLaw};
use crate::error::Result;
use crate::rng::{trial_rng, Stream};

/// One matrix draw: sorted eigenvalues plus provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSample {
    pub eigenvalues: Vec<f64>,
    pub seed: u64,
    pub trial: u64,
    pub ensemble: EnsembleSpec,
}

impl SpectrumSample {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Same draw mapped onto the canonical `[-2, 2]` scale.
    pub fn rescale_to_canonical(&self) -> SpectrumSample {
        let f = self.ensemble.edge_convention.to_canonical_factor();
        let mut ensemble = self.ensemble.clone();
        ensemble.edge_convention = EdgeConvention::Edge2;
        SpectrumSample {
            eigenvalues: self.eigenvalues.iter().map(|x| x * f).collect(),
            seed: self.seed,
            trial: self.trial,
            ensemble,
        }
    }

    /// `(1/n) Σ λ^p`.
    pub fn moment(&self, p: i32) -> f64 {
        self.eigenvalues.iter().map(|x| x.powi(p)).sum::<f64>() / self.n() as f64
    }
}

/// Symmetric tridiagonal matrix `(diag, off)` in the canonical scale.
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        eig_symmetric_tridiagonal(&self.diag, &self.off)
    }

    /// Number of eigenvalues `>= y`.
    pub fn count_at_or_above(&self, y: f64) -> usize {
        self.diag.len() - super::eigen::sturm_count_below(&self.diag, &self.off, y)
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// GUE matrix `W` (unnormalized): standard normal diagonal, complex
/// off-diagonal entries with `E|w|^2 = 1`.
fn gue_matrix(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let mut m = HermitianMatrix::zeros(n);
    for i in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        m.set(i, i, Complex64::new(d, 0.0));
        for j in (i + 1)..n {
            m.set_hermitian(i, j, complex_normal(rng));
        }
    }
    m
}

fn scaled_spectrum(m: &HermitianMatrix, scale: f64) -> Result<Vec<f64>> {
    Ok(eig_hermitian(m)?.into_iter().map(|x| x * scale).collect())
}

/// Spectrum of `H = W/√n` for a dense GUE draw.
pub fn sample_gue_dense(n: usize, seed: u64, trial: u64) -> Result<SpectrumSample> {
    let spec = EnsembleSpec::gue(n)?.with_backend(Backend::Dense);
    let mut rng = trial_rng(seed, trial, Stream::Gue);
    let m = gue_matrix(n, &mut rng);
    Ok(SpectrumSample {
        eigenvalues: scaled_spectrum(&m, 1.0 / (n as f64).sqrt())?,
        seed,
        trial,
        ensemble: spec,
    })
}

/// Tridiagonal β-Hermite model, scaled so that the spectrum sits on
/// `[-2, 2]`. β = 2 gives GUE, β = 1 gives GOE.
pub fn beta_hermite_tridiagonal(n: usize, beta: u32, seed: u64, trial: u64) -> Tridiagonal {
    let stream = if beta == 2 { Stream::GueTridiagonal } else { Stream::Goe };
    let mut rng = trial_rng(seed, trial, stream);
    let s = 1.0 / (n as f64).sqrt();
    // diagonal variance 2/β in the E|w_ij|^2 = 1 normalization
    let dscale = (2.0 / beta as f64).sqrt() * s;
    let diag: Vec<f64> = (0..n)
        .map(|_| dscale * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let off: Vec<f64> = (1..n)
        .map(|i| {
            let dof = (beta as usize * (n - i)) as f64;
            let chi2 = ChiSquared::new(dof).expect("positive degrees of freedom");
            let c: f64 = chi2.sample(&mut rng);
            (c / beta as f64).sqrt() * s
        })
        .collect();
    Tridiagonal { diag, off }
}

pub fn sample_gue_tridiagonal(n: usize, seed: u64, trial: u64) -> Result<SpectrumSample> {
    let spec = EnsembleSpec::gue(n)?;
    Ok(SpectrumSample {
        eigenvalues: beta_hermite_tridiagonal(n, 2, seed, trial).eigenvalues()?,
        seed,
        trial,
        ensemble: spec,
    })
}

/// GOE with `E w_ij^2 = 1` off the diagonal and diagonal variance 2.
pub fn sample_goe(n: usize, backend: Backend, seed: u64, trial: u64) -> Result<SpectrumSample> {
    let spec = EnsembleSpec::goe(n)?.with_backend(backend);
    let eigenvalues = match backend {
        Backend::Tridiagonal => beta_hermite_tridiagonal(n, 1, seed, trial).eigenvalues()?,
        Backend::Dense => {
            let mut rng = trial_rng(seed, trial, Stream::Goe);
            let mut m = HermitianMatrix::zeros(n);
            for i in 0..n {
                let d: f64 = rng.sample(StandardNormal);
                m.set(i, i, Complex64::new(d * 2f64.sqrt(), 0.0));
                for j in (i + 1)..n {
                    let v: f64 = rng.sample(StandardNormal);
                    m.set_hermitian(i, j, Complex64::new(v, 0.0));
                }
            }
            scaled_spectrum(&m, 1.0 / (n as f64).sqrt())?
        }
    };
    Ok(SpectrumSample {
        eigenvalues,
        seed,
        trial,
        ensemble: spec,
    })
}

fn wigner_matrix(n: usize, law: EntryLaw, w2: f64, rng: &mut ChaCha8Rng) -> HermitianMatrix {
    let off_scale = (0.5 * w2).sqrt();
    let mut m = HermitianMatrix::zeros(n);
    for i in 0..n {
        m.set(i, i, Complex64::new(law.sample(rng), 0.0));
        for j in (i + 1)..n {
            let re = law.sample(rng);
            let im = law.sample(rng);
            m.set_hermitian(i, j, Complex64::new(re, im) * off_scale);
        }
    }
    m
}

/// Spectrum of `W/√n` for a Hermitian Wigner matrix with the declared law:
/// unit-variance real diagonal, complex off-diagonal with `E|w|^2 = w2`.
pub fn sample_wigner(spec: &EnsembleSpec, seed: u64, trial: u64) -> Result<SpectrumSample> {
    spec.entry_law.validate()?;
    let mut rng = trial_rng(seed, trial, Stream::Wigner);
    let m = wigner_matrix(spec.n, spec.entry_law, spec.w2, &mut rng);
    Ok(SpectrumSample {
        eigenvalues: scaled_spectrum(&m, 1.0 / (spec.n as f64).sqrt())?,
        seed,
        trial,
        ensemble: spec.clone(),
    })
}

/// Spectrum of `M = (W + V)/(2√n)` with `V` an independent GUE; reported on
/// the `[-√2, √2]` scale.
pub fn sample_johansson(n: usize, base: EntryLaw, seed: u64, trial: u64) -> Result<SpectrumSample> {
    let spec = EnsembleSpec::johansson(n, base)?;
    let mut rng = trial_rng(seed, trial, Stream::Johansson);
    let w = wigner_matrix(n, base, 1.0, &mut rng);
    let v = gue_matrix(n, &mut rng);
    let m = HermitianMatrix::from_fn(n, |i, j| w.get(i, j) + v.get(i, j));
    Ok(SpectrumSample {
        eigenvalues: scaled_spectrum(&m, 0.5 / (n as f64).sqrt())?,
        seed,
        trial,
        ensemble: spec,
    })
}

/// Dispatches on `spec.kind`.
pub fn sample(spec: &EnsembleSpec, seed: u64, trial: u64) -> Result<SpectrumSample> {
    let mut s = match spec.kind {
        EnsembleKind::Gue => match spec.backend {
            Backend::Dense => sample_gue_dense(spec.n, seed, trial)?,
            Backend::Tridiagonal => sample_gue_tridiagonal(spec.n, seed, trial)?,
        },
        EnsembleKind::Goe => sample_goe(spec.n, spec.backend, seed, trial)?,
        EnsembleKind::WignerGeneral => sample_wigner(spec, seed, trial)?,
        EnsembleKind::JohanssonDeformed => sample_johansson(spec.n, spec.entry_law, seed, trial)?,
    };
    s.ensemble = spec.clone();
    Ok(s)
}
