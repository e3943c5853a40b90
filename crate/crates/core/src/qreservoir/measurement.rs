//! Finite-ensemble homodyne estimation of the x-quadrature covariance.
//!
//! The maximum-likelihood estimate from `M` zero-mean samples is
//! `W(σ_x, M)/M` with `W` Wishart-distributed. Draws use Bartlett's
//! construction: with `L` the Cholesky factor of `σ_x` and `A` lower
//! triangular with `A_ii = √χ²(M − i)` (0-based `i`) and standard normal
//! entries below the diagonal, `L A Aᵀ Lᵀ ~ W(σ_x, M)`.

use std::fmt;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Number of identical reservoir copies measured per step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleSize {
    Finite(u64),
    Infinite,
}

impl EnsembleSize {
    pub fn is_infinite(self) -> bool {
        matches!(self, EnsembleSize::Infinite)
    }
}

impl fmt::Display for EnsembleSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnsembleSize::Finite(m) => write!(f, "{m}"),
            EnsembleSize::Infinite => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for EnsembleSize {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") {
            return Ok(EnsembleSize::Infinite);
        }
        // Accept 1e5-style literals as long as they are exact integers.
        let v: f64 = t
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad ensemble size '{s}'")))?;
        if v < 1.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
            return Err(Error::InvalidConfig(format!("bad ensemble size '{s}'")));
        }
        Ok(EnsembleSize::Finite(v as u64))
    }
}

/// Checks that an ensemble of this size can be sampled for `n` output modes.
pub fn validate_ensemble(ensemble: EnsembleSize, n: usize) -> Result<()> {
    match ensemble {
        EnsembleSize::Finite(m) if (m as usize) < n => Err(Error::InvalidConfig(format!(
            "ensemble size {m} is smaller than the {n} measured modes"
        ))),
        _ => Ok(()),
    }
}

/// Draws the ensemble estimate `σ̃_x` of `sigma_x`.
pub fn sample_measured_covariance<R: Rng + ?Sized>(
    sigma_x: &DMatrix<f64>,
    ensemble: EnsembleSize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let n = sigma_x.nrows();
    if !sigma_x.is_square() {
        return Err(Error::InvalidInput("x-covariance must be square".into()));
    }
    let m = match ensemble {
        EnsembleSize::Infinite => return Ok(sigma_x.clone()),
        EnsembleSize::Finite(m) => m,
    };
    validate_ensemble(ensemble, n)?;
    let chol = sigma_x
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Domain("x-covariance is not positive definite".into()))?;
    let l = chol.l();

    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let dof = (m - i as u64) as f64;
        let chi2 = ChiSquared::new(dof).map_err(|e| Error::Domain(e.to_string()))?;
        a[(i, i)] = chi2.sample(rng).sqrt();
        for j in 0..i {
            a[(i, j)] = StandardNormal.sample(rng);
        }
    }
    let la = l * a;
    let mut w = &la * la.transpose();
    w /= m as f64;
    Ok(w)
}
