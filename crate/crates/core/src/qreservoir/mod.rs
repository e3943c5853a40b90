//! The real-time quantum reservoir.
//!
//! `N` reservoir modes circulate in a loop through crystal `H₁`; at each
//! step `N` fresh ancillary modes carrying the input meet them on a beam
//! splitter of reflectivity `R`, and the ancillary output passes crystal
//! `H₂` before x-quadrature homodyne detection. The joint `4N × 4N`
//! propagator is
//!
//! ```text
//! S(Δt) = ⎡ √R S₁    −√(1−R) S₁ ⎤
//!         ⎣ √(1−R) S₂   √R S₂   ⎦
//! ```
//!
//! with the first block column acting on the reservoir and the second on
//! the ancillae. Measurement back-action is not modelled: the reservoir
//! covariance is propagated unconditionally and the reservoir–ancilla
//! correlations are discarded after each step.

pub mod crystal;
pub mod measurement;

use nalgebra::DMatrix;
use rand::Rng;

pub use crystal::{sample_crystal, CrystalHamiltonian};
pub use measurement::{sample_measured_covariance, EnsembleSize};

use crate::error::{Error, Result};
use crate::gaussian::{vacuum_covariance, CovarianceMatrix};
use crate::linalg;

/// Hyperparameters of a reservoir, before any random draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReservoirParams {
    pub n_modes: usize,
    pub reflectivity: f64,
    pub sparsity: f64,
    pub ensemble: EnsembleSize,
    pub dt: f64,
}

impl Default for ReservoirParams {
    fn default() -> Self {
        Self {
            n_modes: 9,
            reflectivity: 0.4,
            sparsity: 7.0 / 9.0,
            ensemble: EnsembleSize::Finite(100_000),
            dt: 1.0,
        }
    }
}

impl ReservoirParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_modes == 0 {
            return Err(Error::InvalidConfig("reservoir needs at least one mode".into()));
        }
        if !(0.0..=1.0).contains(&self.reflectivity) {
            return Err(Error::InvalidConfig(format!(
                "reflectivity must lie in [0, 1], got {}",
                self.reflectivity
            )));
        }
        if !(0.0..=1.0).contains(&self.sparsity) {
            return Err(Error::InvalidConfig(format!(
                "sparsity must lie in [0, 1], got {}",
                self.sparsity
            )));
        }
        if !(self.dt.is_finite() && self.dt >= 0.0) {
            return Err(Error::InvalidConfig(format!("bad time step {}", self.dt)));
        }
        measurement::validate_ensemble(self.ensemble, self.n_modes)
    }

    /// Number of quantum computational nodes, `N(N+1)/2`.
    pub fn n_features(&self) -> usize {
        self.n_modes * (self.n_modes + 1) / 2
    }
}

/// A sampled reservoir: two crystals and the propagators they induce.
#[derive(Debug, Clone)]
pub struct ReservoirConfig {
    params: ReservoirParams,
    crystals: [CrystalHamiltonian; 2],
    s1: DMatrix<f64>,
    s2: DMatrix<f64>,
}

impl ReservoirConfig {
    /// Samples two independent stable crystals.
    pub fn sample<R: Rng + ?Sized>(params: ReservoirParams, rng: &mut R) -> Result<Self> {
        params.validate()?;
        let c1 = sample_crystal(params.n_modes, params.sparsity, rng)?;
        let c2 = sample_crystal(params.n_modes, params.sparsity, rng)?;
        Self::from_crystals(params, c1, c2)
    }

    pub fn from_crystals(
        params: ReservoirParams,
        crystal1: CrystalHamiltonian,
        crystal2: CrystalHamiltonian,
    ) -> Result<Self> {
        params.validate()?;
        for c in [&crystal1, &crystal2] {
            if c.n_modes() != params.n_modes {
                return Err(Error::InvalidConfig(format!(
                    "crystal has {} modes, reservoir {}",
                    c.n_modes(),
                    params.n_modes
                )));
            }
        }
        let s1 = crystal1.propagator(params.dt);
        let s2 = crystal2.propagator(params.dt);
        Ok(Self {
            params,
            crystals: [crystal1, crystal2],
            s1,
            s2,
        })
    }

    pub fn params(&self) -> &ReservoirParams {
        &self.params
    }

    pub fn n_modes(&self) -> usize {
        self.params.n_modes
    }

    pub fn crystals(&self) -> &[CrystalHamiltonian; 2] {
        &self.crystals
    }

    /// Loop-crystal propagator `S₁`.
    pub fn s1(&self) -> &DMatrix<f64> {
        &self.s1
    }

    /// Readout-crystal propagator `S₂`.
    pub fn s2(&self) -> &DMatrix<f64> {
        &self.s2
    }

    /// The full `4N × 4N` single-step matrix.
    pub fn step_matrix(&self) -> DMatrix<f64> {
        build_step_matrix(&self.s1, &self.s2, self.params.reflectivity)
    }

    /// Same reservoir with a different ensemble size.
    pub fn with_ensemble(&self, ensemble: EnsembleSize) -> Result<Self> {
        let mut out = self.clone();
        out.params.ensemble = ensemble;
        out.params.validate()?;
        Ok(out)
    }
}

pub fn build_step_matrix(s1: &DMatrix<f64>, s2: &DMatrix<f64>, reflectivity: f64) -> DMatrix<f64> {
    assert_eq!(s1.shape(), s2.shape());
    assert!(s1.is_square());
    let d = s1.nrows();
    let a = reflectivity.sqrt();
    let b = (1.0 - reflectivity).sqrt();
    let mut s = DMatrix::zeros(2 * d, 2 * d);
    s.view_mut((0, 0), (d, d)).copy_from(&(s1 * a));
    s.view_mut((0, d), (d, d)).copy_from(&(s1 * -b));
    s.view_mut((d, 0), (d, d)).copy_from(&(s2 * b));
    s.view_mut((d, d), (d, d)).copy_from(&(s2 * a));
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    sigma: CovarianceMatrix,
}

impl ReservoirState {
    pub fn vacuum(n_modes: usize) -> Self {
        Self {
            sigma: vacuum_covariance(n_modes),
        }
    }

    pub fn new(sigma: CovarianceMatrix) -> Self {
        Self { sigma }
    }

    pub fn sigma(&self) -> &CovarianceMatrix {
        &self.sigma
    }
}

/// One application of the reservoir map.
///
/// Returns the new reservoir state and the exact `N × N` x-quadrature
/// covariance of the output modes. Because the joint state entering the
/// beam splitter is a direct sum, the two diagonal blocks of
/// `S (σ_R ⊕ σ_in) Sᵀ` reduce to
/// `S₁ (R σ_R + (1−R) σ_in) S₁ᵀ` and `S₂ ((1−R) σ_R + R σ_in) S₂ᵀ`.
pub fn reservoir_step(
    state: &ReservoirState,
    input_sigma: &CovarianceMatrix,
    config: &ReservoirConfig,
) -> Result<(ReservoirState, DMatrix<f64>)> {
    let n = config.n_modes();
    if input_sigma.n_modes() != n || state.sigma.n_modes() != n {
        return Err(Error::UnsupportedDimension {
            expected: format!("{n} modes"),
            got: input_sigma.n_modes(),
        });
    }
    let r = config.params.reflectivity;
    let sr = state.sigma.as_matrix();
    let si = input_sigma.as_matrix();

    let mut loop_sigma = conjugate(&config.s1, &(sr * r + si * (1.0 - r)));
    let mut out_sigma = conjugate(&config.s2, &(sr * (1.0 - r) + si * r));
    linalg::symmetrize(&mut loop_sigma);
    linalg::symmetrize(&mut out_sigma);

    if loop_sigma.iter().any(|v| !v.is_finite()) || loop_sigma.clone().cholesky().is_none() {
        return Err(Error::NumericalFailure(
            "reservoir covariance lost positive definiteness".into(),
        ));
    }
    let out = CovarianceMatrix::from_symmetric_unchecked(out_sigma);
    Ok((
        ReservoirState::new(CovarianceMatrix::from_symmetric_unchecked(loop_sigma)),
        out.x_block(),
    ))
}

fn conjugate(s: &DMatrix<f64>, sigma: &DMatrix<f64>) -> DMatrix<f64> {
    s * sigma * s.transpose()
}

/// Drives the reservoir from vacuum and records one feature row per step:
/// the upper triangle of `σ̃_x`, row-major.
pub fn run_reservoir<R: Rng + ?Sized>(
    inputs: &[CovarianceMatrix],
    config: &ReservoirConfig,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    run_reservoir_from(ReservoirState::vacuum(config.n_modes()), inputs, config, rng)
}

pub fn run_reservoir_from<R: Rng + ?Sized>(
    initial: ReservoirState,
    inputs: &[CovarianceMatrix],
    config: &ReservoirConfig,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    let n = config.n_modes();
    let k = config.params.n_features();
    let mut features = DMatrix::zeros(inputs.len(), k);
    let mut state = initial;
    for (t, input) in inputs.iter().enumerate() {
        let (next, sigma_x) = reservoir_step(&state, input, config)?;
        let estimate = sample_measured_covariance(&sigma_x, config.params.ensemble, rng)?;
        let mut c = 0;
        for i in 0..n {
            for j in i..n {
                features[(t, c)] = estimate[(i, j)];
                c += 1;
            }
        }
        state = next;
    }
    Ok(features)
}
