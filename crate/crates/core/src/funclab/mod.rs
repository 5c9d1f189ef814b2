//! Test functions, dyadic frequency bands, Besov-type norms and Poisson
//! smoothing on a periodic grid.

mod bands;
mod corpus;
mod grid;
mod partition;

pub use bands::{
    besov_norm, decompose, full_band_count, high_freq_cutoff, poisson_smooth,
    write_band_norms_csv, write_corpus_csv, write_decomposition_csv, BandDecomposition,
    BesovFlavor,
};
pub use corpus::{
    abs_power, bump, corpus, indicator, labels, lookup, smooth_step, window, RegularityClass,
    Rule, TestFunction, BUMP_RADIUS, CUSP_CENTRE, CUSP_EXPONENT, CUSP_HALF_WIDTH,
    POISSON_INDICATOR_ETA,
};
pub use grid::{Fourier, Grid, GridFunction};
pub use partition::{build_dyadic_partition, h_hat, omega_hat, DyadicPartition};
