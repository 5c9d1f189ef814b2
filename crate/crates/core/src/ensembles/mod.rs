//! Random matrix samplers and the Hermitian eigensolver backing them.

pub mod eigen;
mod sampler;
mod spec;

use std::io::{Read, Write};

pub use eigen::{eig_hermitian, eig_hermitian_full, eig_symmetric_tridiagonal, Eigen, HermitianMatrix};
pub use sampler::{
    beta_hermite_tridiagonal, sample, sample_goe, sample_gue_dense, sample_gue_tridiagonal,
    sample_johansson, sample_wigner, SpectrumSample, Tridiagonal,
};
pub use spec::{Backend, EdgeConvention, EnsembleKind, EnsembleSpec, EntryLaw};

use crate::error::{Error, Result};

/// Writes spectra as CSV, one row per trial: `seed, trial, λ_1..λ_n`.
pub fn write_spectra_csv<W: Write>(out: W, samples: &[SpectrumSample]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
    let n = samples.first().map_or(0, |s| s.n());
    let mut header = vec!["seed".to_string(), "trial".to_string()];
    header.extend((1..=n).map(|j| format!("lambda_{j}")));
    w.write_record(&header)?;
    for s in samples {
        let mut row = vec![s.seed.to_string(), s.trial.to_string()];
        row.extend(s.eigenvalues.iter().map(|x| format!("{x:.17e}")));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_spectra_csv`] back as `(seed, trial, eigenvalues)`.
pub fn read_spectra_csv<R: Read>(input: R) -> Result<Vec<(u64, u64, Vec<f64>)>> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(input);
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse_u = |s: &str| {
            s.parse::<u64>()
                .map_err(|e| Error::Config(format!("bad integer `{s}` in spectra CSV: {e}")))
        };
        let seed = parse_u(rec.get(0).unwrap_or(""))?;
        let trial = parse_u(rec.get(1).unwrap_or(""))?;
        let vals = rec
            .iter()
            .skip(2)
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad float `{s}` in spectra CSV: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((seed, trial, vals));
    }
    Ok(rows)
}
