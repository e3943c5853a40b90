//! Covariance-matrix description of zero-mean Gaussian states.
//!
//! Quadratures are interleaved per mode, `{x₁, p₁, x₂, p₂, …}`, with
//! `x = a + a†` and `p = (a − a†)/i`. The vacuum covariance is the
//! identity and the symplectic form has per-mode blocks `[[0, 2], [−2, 0]]`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg;

/// Relative tolerance used when pairing the `±` symplectic eigenvalues.
const PAIRING_RTOL: f64 = 1e-8;

/// Real symmetric `2n × 2n` covariance matrix of an `n`-mode Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n_modes: usize,
    data: DMatrix<f64>,
}

impl CovarianceMatrix {
    /// Wraps a matrix, symmetrizing it. Fails on odd or non-square shapes.
    pub fn from_matrix(mut data: DMatrix<f64>) -> Result<Self> {
        let (r, c) = data.shape();
        if r != c || r == 0 || r % 2 != 0 {
            return Err(Error::InvalidInput(format!(
                "covariance matrix must be 2n x 2n, got {r}x{c}"
            )));
        }
        linalg::symmetrize(&mut data);
        Ok(Self {
            n_modes: r / 2,
            data,
        })
    }

    pub(crate) fn from_symmetric_unchecked(data: DMatrix<f64>) -> Self {
        debug_assert!(data.is_square() && data.nrows().is_multiple_of(2));
        Self {
            n_modes: data.nrows() / 2,
            data,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    /// `n × n` covariance of the x-quadratures only.
    pub fn x_block(&self) -> DMatrix<f64> {
        let n = self.n_modes;
        DMatrix::from_fn(n, n, |i, j| self.data[(2 * i, 2 * j)])
    }

    /// Covariance of the modes `first..first + count`.
    pub fn modes(&self, first: usize, count: usize) -> CovarianceMatrix {
        assert!(first + count <= self.n_modes);
        let sub = self
            .data
            .view((2 * first, 2 * first), (2 * count, 2 * count))
            .clone_owned();
        CovarianceMatrix::from_symmetric_unchecked(sub)
    }

    /// Independent upper-triangle elements, row-major.
    pub fn unique_elements(&self) -> Vec<f64> {
        linalg::upper_triangle(&self.data)
    }

    /// Rebuilds a covariance matrix from [`unique_elements`](Self::unique_elements).
    pub fn from_unique_elements(n_modes: usize, elements: &[f64]) -> Result<Self> {
        let dim = 2 * n_modes;
        if n_modes == 0 || elements.len() != dim * (dim + 1) / 2 {
            return Err(Error::InvalidInput(format!(
                "{} elements do not describe a {n_modes}-mode covariance",
                elements.len()
            )));
        }
        Ok(Self::from_symmetric_unchecked(linalg::from_upper_triangle(
            dim, elements,
        )))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_symmetric_unchecked(&self.data * factor)
    }

    /// Elementwise `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.n_modes != other.n_modes {
            return Err(Error::UnsupportedDimension {
                expected: format!("{} modes", self.n_modes),
                got: other.n_modes,
            });
        }
        Ok(Self::from_symmetric_unchecked(
            &self.data * a + &other.data * b,
        ))
    }
}

/// The symplectic form `Ω` with `Ω_jl = −i[x_j, x_l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticForm {
    n_modes: usize,
    data: DMatrix<f64>,
}

impl SymplecticForm {
    pub fn new(n_modes: usize) -> Self {
        let mut data = DMatrix::zeros(2 * n_modes, 2 * n_modes);
        for k in 0..n_modes {
            data[(2 * k, 2 * k + 1)] = 2.0;
            data[(2 * k + 1, 2 * k)] = -2.0;
        }
        Self { n_modes, data }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    /// `‖S Ω Sᵀ − Ω‖_max`, zero for exactly symplectic `S`.
    pub fn symplectic_defect(&self, s: &DMatrix<f64>) -> f64 {
        assert_eq!(s.shape(), self.data.shape());
        linalg::max_abs_diff(&(s * &self.data * s.transpose()), &self.data)
    }
}

pub fn vacuum_covariance(n_modes: usize) -> CovarianceMatrix {
    assert!(n_modes >= 1, "n_modes must be positive");
    CovarianceMatrix::from_symmetric_unchecked(DMatrix::identity(2 * n_modes, 2 * n_modes))
}

/// Single-mode squeezed thermal state with `n_th` thermal photons,
/// squeezing `r` and squeezing phase `phi`.
pub fn squeezed_thermal_covariance(n_th: f64, r: f64, phi: f64) -> CovarianceMatrix {
    let thermal = 1.0 + 2.0 * n_th;
    let y_cosh = (2.0 * r).cosh();
    let sinh = (2.0 * r).sinh();
    let z_cos = phi.cos() * sinh;
    let z_sin = phi.sin() * sinh;
    let data = DMatrix::from_row_slice(
        2,
        2,
        &[
            thermal * (y_cosh + z_cos),
            thermal * z_sin,
            thermal * z_sin,
            thermal * (y_cosh - z_cos),
        ],
    );
    CovarianceMatrix::from_symmetric_unchecked(data)
}

/// Two-mode squeezed thermal state with squeezing `s`.
pub fn two_mode_squeezed_thermal_covariance(n_th: f64, s: f64) -> CovarianceMatrix {
    let t = 1.0 + 2.0 * n_th;
    let c = t * (2.0 * s).cosh();
    let sh = t * (2.0 * s).sinh();
    #[rustfmt::skip]
    let data = DMatrix::from_row_slice(4, 4, &[
        c,   0.0, sh,  0.0,
        0.0, c,   0.0, -sh,
        sh,  0.0, c,   0.0,
        0.0, -sh, 0.0, c,
    ]);
    CovarianceMatrix::from_symmetric_unchecked(data)
}

pub fn direct_sum(a: &CovarianceMatrix, b: &CovarianceMatrix) -> CovarianceMatrix {
    CovarianceMatrix::from_symmetric_unchecked(linalg::block_diag(&a.data, &b.data))
}

/// Symplectic eigenvalues in ascending order, one per mode.
///
/// Computed as the magnitudes of the eigenvalues of `iΩσ` halved; the
/// spectrum comes in `±` pairs which are merged.
pub fn symplectic_eigenvalues(sigma: &CovarianceMatrix) -> Result<Vec<f64>> {
    if sigma.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite covariance entry".into()));
    }
    let omega = SymplecticForm::new(sigma.n_modes);
    let product = omega.as_matrix() * &sigma.data;
    let mut magnitudes: Vec<f64> = linalg::eigenvalues(&product)?
        .iter()
        .map(|z| 0.5 * z.norm())
        .collect();
    magnitudes.sort_by(f64::total_cmp);

    // Magnitudes arrive as near-equal pairs; each pair is one mode.
    let out = magnitudes
        .chunks_exact(2)
        .map(|pair| {
            let (lo, hi) = (pair[0], pair[1]);
            if hi - lo <= PAIRING_RTOL * hi.max(1.0) {
                0.5 * (lo + hi)
            } else {
                lo
            }
        })
        .collect();
    Ok(out)
}

/// True iff the smallest symplectic eigenvalue is at least `1 − tol`.
pub fn is_physical(sigma: &CovarianceMatrix, tol: f64) -> bool {
    // A physical covariance is positive definite; cheap rejection first.
    if sigma.data.iter().any(|v| !v.is_finite()) || sigma.data.clone().cholesky().is_none() {
        return false;
    }
    match symplectic_eigenvalues(sigma) {
        Ok(nu) => nu.first().is_some_and(|&m| m >= 1.0 - tol),
        Err(_) => false,
    }
}

/// Fidelity between two single-mode zero-mean Gaussian states,
/// `F = 2 / (√(Δ + δ) − √δ)` with `Δ = det(σ₁ + σ₂)` and
/// `δ = (det σ₁ − 1)(det σ₂ − 1)`.
pub fn fidelity(sigma1: &CovarianceMatrix, sigma2: &CovarianceMatrix) -> Result<f64> {
    for s in [sigma1, sigma2] {
        if s.n_modes != 1 {
            return Err(Error::UnsupportedDimension {
                expected: "1 mode".into(),
                got: s.n_modes,
            });
        }
    }
    let d1 = single_mode_physical_det(sigma1)?;
    let d2 = single_mode_physical_det(sigma2)?;
    Ok(single_mode_fidelity_unchecked(
        sigma1.as_matrix(),
        d1,
        sigma2.as_matrix(),
        d2,
    ))
}

const SINGLE_MODE_TOL: f64 = 1e-9;

fn single_mode_physical_det(s: &CovarianceMatrix) -> Result<f64> {
    let m = &s.data;
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("non-finite covariance".into()));
    }
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    // Single mode: ν = √det, and positivity of the diagonal.
    if m[(0, 0)] <= 0.0 || det < 1.0 - SINGLE_MODE_TOL {
        return Err(Error::Domain(format!(
            "unphysical single-mode covariance (det = {det})"
        )));
    }
    Ok(det)
}

fn single_mode_fidelity_unchecked(a: &DMatrix<f64>, det_a: f64, b: &DMatrix<f64>, det_b: f64) -> f64 {
    let s00 = a[(0, 0)] + b[(0, 0)];
    let s11 = a[(1, 1)] + b[(1, 1)];
    let s01 = a[(0, 1)] + b[(0, 1)];
    let big_delta = s00 * s11 - s01 * s01;
    let small_delta = ((det_a - 1.0) * (det_b - 1.0)).max(0.0);
    2.0 / ((big_delta + small_delta).sqrt() - small_delta.sqrt())
}

/// Partial transpose on the second mode of a two-mode state (`p₂ → −p₂`).
pub fn partial_transpose(sigma: &CovarianceMatrix) -> Result<CovarianceMatrix> {
    require_two_modes(sigma)?;
    let mut m = sigma.data.clone();
    for k in 0..4 {
        if k != 3 {
            m[(3, k)] = -m[(3, k)];
            m[(k, 3)] = -m[(k, 3)];
        }
    }
    Ok(CovarianceMatrix::from_symmetric_unchecked(m))
}

fn require_two_modes(sigma: &CovarianceMatrix) -> Result<()> {
    if sigma.n_modes != 2 {
        return Err(Error::UnsupportedDimension {
            expected: "2 modes".into(),
            got: sigma.n_modes,
        });
    }
    Ok(())
}

/// `−log₂ d̃₋` where `d̃₋` is the smaller symplectic eigenvalue of the
/// partially transposed state. Positive values signal entanglement.
pub fn log_negativity_raw(sigma: &CovarianceMatrix) -> Result<f64> {
    let pt = partial_transpose(sigma)?;
    let nu = symplectic_eigenvalues(&pt)?;
    Ok(-nu[0].log2())
}

/// Logarithmic negativity `max{0, −log₂ d̃₋}` of a two-mode state.
pub fn log_negativity(sigma: &CovarianceMatrix) -> Result<f64> {
    Ok(log_negativity_raw(sigma)?.max(0.0))
}

/// `Tr σ`, equal to four times the mean energy for zero-mean states.
pub fn trace_energy(sigma: &CovarianceMatrix) -> f64 {
    sigma.data.trace()
}

pub fn determinant(sigma: &CovarianceMatrix) -> f64 {
    if sigma.n_modes == 1 {
        let m = &sigma.data;
        return m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    }
    sigma.data.determinant()
}

/// Purity `μ = 1/√det σ` of a single-mode state.
pub fn purity(sigma: &CovarianceMatrix) -> Result<f64> {
    if sigma.n_modes != 1 {
        return Err(Error::UnsupportedDimension {
            expected: "1 mode".into(),
            got: sigma.n_modes,
        });
    }
    Ok(1.0 / determinant(sigma).sqrt())
}
