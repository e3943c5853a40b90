//! Random χ(2) crystals.
//!
//! A crystal couples `N` modes through beam-splitter terms `g_jl a_j† a_l`
//! and squeezing terms `i h_jl a_j† a_l†` (plus hermitian conjugates) on
//! top of the free rotation `ω_j (a_j† a_j + ½)`. With `a = (x + ip)/2`
//! the Hamiltonian is `½ xᵀ M x` where, per mode and per pair `j < l`,
//!
//! ```text
//! M[x_j, x_j] = M[p_j, p_j] = ω_j / 2
//! M[x_j, x_l] = M[p_j, p_l] = g_jl / 2
//! M[x_j, p_l] = M[p_j, x_l] = h_jl / 2
//! ```
//!
//! and the Heisenberg evolution of the quadratures is `ẋ = Ω M x`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::SymplecticForm;
use crate::linalg;

pub const BEAM_SPLITTER_COUPLING: (f64, f64) = (0.1, 0.3);
pub const SQUEEZING_COUPLING: (f64, f64) = (0.2, 0.4);

/// Tolerance on `|Re λ(ΩM)|` for a crystal to count as stable.
pub const STABILITY_TOL: f64 = 1e-9;

/// Consecutive unstable draws after which sampling gives up.
pub const MAX_STABILITY_RETRIES: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct CrystalHamiltonian {
    omega: DVector<f64>,
    g: DMatrix<f64>,
    h: DMatrix<f64>,
    m_form: DMatrix<f64>,
}

impl CrystalHamiltonian {
    /// Builds a crystal from frequencies and symmetric zero-diagonal
    /// coupling matrices.
    pub fn new(omega: DVector<f64>, g: DMatrix<f64>, h: DMatrix<f64>) -> Result<Self> {
        let n = omega.len();
        if n == 0 {
            return Err(Error::InvalidInput("crystal needs at least one mode".into()));
        }
        for (name, c) in [("g", &g), ("h", &h)] {
            if c.shape() != (n, n) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be {n}x{n}, got {:?}",
                    c.shape()
                )));
            }
            for j in 0..n {
                if c[(j, j)] != 0.0 {
                    return Err(Error::InvalidInput(format!("{name} has nonzero diagonal")));
                }
                for l in (j + 1)..n {
                    if c[(j, l)] != c[(l, j)] {
                        return Err(Error::InvalidInput(format!("{name} is not symmetric")));
                    }
                }
            }
        }
        let m_form = quadratic_form(&omega, &g, &h);
        Ok(Self {
            omega,
            g,
            h,
            m_form,
        })
    }

    /// Uncoupled modes with unit frequency.
    pub fn free(n_modes: usize) -> Self {
        Self::new(
            DVector::from_element(n_modes, 1.0),
            DMatrix::zeros(n_modes, n_modes),
            DMatrix::zeros(n_modes, n_modes),
        )
        .expect("free crystal is valid")
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    pub fn omega(&self) -> &DVector<f64> {
        &self.omega
    }

    pub fn g(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn h(&self) -> &DMatrix<f64> {
        &self.h
    }

    /// `M` in `H = ½ xᵀ M x`.
    pub fn m_form(&self) -> &DMatrix<f64> {
        &self.m_form
    }

    /// Generator `ΩM` of the quadrature dynamics.
    pub fn generator(&self) -> DMatrix<f64> {
        SymplecticForm::new(self.n_modes()).as_matrix() * &self.m_form
    }

    /// True iff every eigenvalue of `ΩM` has `|Re λ| ≤ tol`.
    pub fn is_stable(&self, tol: f64) -> Result<bool> {
        Ok(linalg::eigenvalues(&self.generator())?
            .iter()
            .all(|z| z.re.abs() <= tol))
    }

    /// `S(Δt) = exp(ΩMΔt)`.
    pub fn propagator(&self, dt: f64) -> DMatrix<f64> {
        (self.generator() * dt).exp()
    }
}

fn quadratic_form(omega: &DVector<f64>, g: &DMatrix<f64>, h: &DMatrix<f64>) -> DMatrix<f64> {
    let n = omega.len();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for j in 0..n {
        m[(2 * j, 2 * j)] = 0.5 * omega[j];
        m[(2 * j + 1, 2 * j + 1)] = 0.5 * omega[j];
        for l in 0..n {
            if l == j {
                continue;
            }
            let (gj, hj) = (0.5 * g[(j, l)], 0.5 * h[(j, l)]);
            m[(2 * j, 2 * l)] = gj;
            m[(2 * j + 1, 2 * l + 1)] = gj;
            m[(2 * j, 2 * l + 1)] = hj;
            m[(2 * j + 1, 2 * l)] = hj;
        }
    }
    m
}

/// Draws one set of couplings, each kept with probability `sparsity`,
/// without any stability check.
pub fn sample_couplings<R: Rng + ?Sized>(
    n_modes: usize,
    sparsity: f64,
    rng: &mut R,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut g = DMatrix::zeros(n_modes, n_modes);
    let mut h = DMatrix::zeros(n_modes, n_modes);
    for j in 0..n_modes {
        for l in (j + 1)..n_modes {
            g[(j, l)] = rng.random_range(BEAM_SPLITTER_COUPLING.0..=BEAM_SPLITTER_COUPLING.1);
            h[(j, l)] = rng.random_range(SQUEEZING_COUPLING.0..=SQUEEZING_COUPLING.1);
        }
    }
    for c in [&mut g, &mut h] {
        for j in 0..n_modes {
            for l in (j + 1)..n_modes {
                if !rng.random_bool(sparsity) {
                    c[(j, l)] = 0.0;
                }
                c[(l, j)] = c[(j, l)];
            }
        }
    }
    (g, h)
}

/// Samples a stable random crystal, redrawing the whole crystal on
/// instability.
pub fn sample_crystal<R: Rng + ?Sized>(
    n_modes: usize,
    sparsity: f64,
    rng: &mut R,
) -> Result<CrystalHamiltonian> {
    if !(0.0..=1.0).contains(&sparsity) {
        return Err(Error::InvalidConfig(format!(
            "sparsity must lie in [0, 1], got {sparsity}"
        )));
    }
    if n_modes == 0 {
        return Err(Error::InvalidConfig("crystal needs at least one mode".into()));
    }
    for _ in 0..MAX_STABILITY_RETRIES {
        let (g, h) = sample_couplings(n_modes, sparsity, rng);
        let crystal = CrystalHamiltonian::new(DVector::from_element(n_modes, 1.0), g, h)?;
        if crystal.is_stable(STABILITY_TOL)? {
            return Ok(crystal);
        }
    }
    Err(Error::GenerationFailure {
        attempts: MAX_STABILITY_RETRIES,
        reason: format!("no stable crystal with N = {n_modes}, p = {sparsity}"),
    })
}
