//! Numerical laboratory for fluctuations of linear eigenvalue statistics of
//! Wigner-type random matrices.
//!
//! The crate is organised around the objects that appear in the theory:
//!
//! * [`ensembles`]: matrix samplers and a self-contained Hermitian eigensolver.
//! * [`funclab`]: test functions, Poisson smoothing and Littlewood–Paley bands.
//! * [`limitvar`]: limiting variance functionals, by two independent routes.
//! * [`cdkernel`]: the finite-n GUE Christoffel–Darboux kernel.
//! * [`deformed`]: the Gaussian-convolution (Brézin–Hikami) kernel via contour quadrature.
//! * [`resolvent`]: Stieltjes-transform probes.
//! * [`harness`]: Monte Carlo experiments, reports, CSV/SVG output and the CLI.
//!
//! The canonical spectral scale is the semicircle on `[-2, 2]`.

pub mod cdkernel;
pub mod deformed;
pub mod ensembles;
pub mod error;
pub mod funclab;
pub mod harness;
pub mod limitvar;
pub mod quad;
pub mod resolvent;
pub mod rng;

pub use error::{Error, Result};
pub use num_complex::Complex64;
