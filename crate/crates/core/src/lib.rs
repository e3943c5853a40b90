//! Deep hybrid classical-quantum reservoir computing.
//!
//! A Gaussian multimode optical reservoir (two random χ(2) crystals in a
//! feedback loop closed by a beam splitter) processes a time series of
//! zero-mean Gaussian input states. Homodyne measurement of the output
//! modes over a finite ensemble yields an estimate of the x-quadrature
//! covariance, whose elements are the quantum computational nodes. A
//! trained linear readout of those nodes drives a classical echo state
//! network, and a final readout combines both layers.
//!
//! Modules, bottom-up:
//!
//! - [`gaussian`]: covariance-matrix algebra (constructors, symplectic
//!   spectrum, fidelity, logarithmic negativity).
//! - [`qreservoir`]: crystal sampling, symplectic propagators, the
//!   reservoir recurrence and Wishart measurement noise.
//! - [`esn`]: the echo state network layer.
//! - [`tasks`]: input distributions and benchmark targets.
//! - [`pipeline`]: readout training, two-step hybrid training, baselines
//!   and metrics.
//! - [`experiment`]: seeded multi-realization runs and figure sweeps.

pub mod error;
pub mod esn;
pub mod experiment;
pub mod gaussian;
pub mod linalg;
pub mod pipeline;
pub mod qreservoir;
pub mod tasks;

pub use error::{Error, Result};
pub use gaussian::{CovarianceMatrix, SymplecticForm};
