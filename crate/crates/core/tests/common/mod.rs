//! Helpers shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Fock-space constructions of single-mode Gaussian states, independent of
/// the covariance-matrix code under test.
pub mod fock {
    use super::*;

    /// Intermediate Fock dimension used to build operators before truncation.
    pub const WORK_DIM: usize = 300;

    /// `exp(r (a² − a†²) / 2)` on the first `dim` Fock states. The generator
    /// only couples states of equal parity, so each parity block is
    /// exponentiated on its own.
    pub fn real_squeeze(r: f64, dim: usize) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(dim, dim);
        for parity in 0..2 {
            let idx: Vec<usize> = (parity..dim).step_by(2).collect();
            let k = idx.len();
            let mut g = DMatrix::zeros(k, k);
            for b in 1..k {
                let n = idx[b];
                let c = 0.5 * r * ((n * (n - 1)) as f64).sqrt();
                g[(b - 1, b)] = c;
                g[(b, b - 1)] = -c;
            }
            let e = g.exp();
            for (i, &m) in idx.iter().enumerate() {
                for (j, &n) in idx.iter().enumerate() {
                    out[(m, n)] = e[(i, j)];
                }
            }
        }
        out
    }

    /// Squeeze operator `exp((z* a² − z a†²)/2)` with `z = r e^{iθ}`, built
    /// as a phase rotation of the real squeezer.
    pub fn squeeze(r: f64, theta: f64, dim: usize) -> DMatrix<Complex64> {
        let s = real_squeeze(r, dim);
        DMatrix::from_fn(dim, dim, |m, n| {
            Complex64::from_polar(s[(m, n)], 0.5 * theta * (m as f64 - n as f64))
        })
    }

    /// Thermal populations `n^k / (n+1)^{k+1}`.
    pub fn thermal_populations(n_th: f64, dim: usize) -> DVector<f64> {
        let q = n_th / (n_th + 1.0);
        DVector::from_fn(dim, |k, _| q.powi(k as i32) / (n_th + 1.0))
    }

    /// Squeezing angle whose state has covariance
    /// `squeezed_thermal_covariance(n, r, φ)` in the x = a + a† convention.
    pub fn theta_for_phi(phi: f64) -> f64 {
        phi + std::f64::consts::PI
    }

    /// Density matrix of a squeezed thermal state, truncated to
    /// `cutoff + 1` Fock states.
    pub fn squeezed_thermal_state(n_th: f64, r: f64, phi: f64, cutoff: usize) -> DMatrix<Complex64> {
        let s = squeeze(r, theta_for_phi(phi), WORK_DIM);
        let p = thermal_populations(n_th, WORK_DIM);
        let top = s.rows(0, cutoff + 1);
        let scaled = DMatrix::from_fn(cutoff + 1, WORK_DIM, |m, k| top[(m, k)] * p[k]);
        &scaled * top.adjoint()
    }

    /// Quadrature moments `[[⟨x²⟩, ⟨{x,p}⟩/2], [·, ⟨p²⟩]]` of a truncated
    /// density matrix. The matrix must have negligible weight near its edge.
    pub fn covariance_of(rho: &DMatrix<Complex64>) -> [[f64; 2]; 2] {
        let d = rho.nrows();
        let mut a = DMatrix::<Complex64>::zeros(d, d);
        for n in 1..d {
            a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
        }
        let ad = a.adjoint();
        let i = Complex64::new(0.0, 1.0);
        let x = &a + &ad;
        let p = (&a - &ad) / i;
        let ev = |o: &DMatrix<Complex64>| (rho * o).trace().re;
        let xp = (&x * &p + &p * &x) * Complex64::new(0.5, 0.0);
        [[ev(&(&x * &x)), ev(&xp)], [ev(&xp), ev(&(&p * &p))]]
    }

    fn hermitian_eigenvalues(m: &DMatrix<Complex64>) -> Vec<f64> {
        let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
    }

    /// Uhlmann fidelity `(Tr √(√ρ₁ ρ₂ √ρ₁))²` of two squeezed thermal
    /// states, with both density matrices truncated at `cutoff` photons.
    ///
    /// Fidelity is invariant under a common unitary, so both states are
    /// first conjugated by the inverse squeezer of the colder one. That
    /// state becomes thermal (diagonal, with the shortest possible tail),
    /// which keeps the truncation error small.
    pub fn fidelity(a: (f64, f64, f64), b: (f64, f64, f64), cutoff: usize) -> f64 {
        let (cold, hot) = if a.0 <= b.0 { (a, b) } else { (b, a) };
        let dim = cutoff + 1;
        let s_cold = squeeze(cold.1, theta_for_phi(cold.2), WORK_DIM);
        let s_hot = squeeze(hot.1, theta_for_phi(hot.2), WORK_DIM);
        // Rows 0..=cutoff of S_cold† S_hot.
        let u = s_cold.columns(0, dim).adjoint() * &s_hot;
        let p_hot = thermal_populations(hot.0, WORK_DIM);
        let scaled = DMatrix::from_fn(dim, WORK_DIM, |m, k| u[(m, k)] * p_hot[k]);
        let rho_hot = &scaled * u.adjoint();
        let w = thermal_populations(cold.0, dim).map(f64::sqrt);
        let inner = DMatrix::from_fn(dim, dim, |m, n| rho_hot[(m, n)] * (w[m] * w[n]));
        let tr: f64 = hermitian_eigenvalues(&inner).iter().map(|l| l.max(0.0).sqrt()).sum();
        tr * tr
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, v| acc.max(v.abs()))
}
