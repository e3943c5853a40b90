//! Echo state network with softplus neurons:
//! `x_{k+1} = f(ρ W x_k + ι C s_{k+1})`, `f(x) = ln(1 + eˣ)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// Above this argument softplus is evaluated as `x + ln(1 + e^{−x})`.
const SOFTPLUS_BRANCH: f64 = 30.0;

const MIN_RAW_RADIUS: f64 = 1e-12;
const MAX_WEIGHT_DRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct EsnConfig {
    feedback_gain: f64,
    input_gain: f64,
    weights: DMatrix<f64>,
    coercion: DMatrix<f64>,
}

impl EsnConfig {
    /// Samples `W` (unit spectral radius) and `C` (entries in `[−1, 1]`).
    pub fn sample<R: Rng + ?Sized>(
        n_neurons: usize,
        input_dim: usize,
        feedback_gain: f64,
        input_gain: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let weights = sample_weight_matrix(n_neurons, rng)?;
        let coercion = sample_coercion_matrix(n_neurons, input_dim, rng);
        Self::from_parts(weights, coercion, feedback_gain, input_gain)
    }

    pub fn from_parts(
        weights: DMatrix<f64>,
        coercion: DMatrix<f64>,
        feedback_gain: f64,
        input_gain: f64,
    ) -> Result<Self> {
        if !weights.is_square() || weights.nrows() == 0 {
            return Err(Error::InvalidInput("ESN weights must be square and non-empty".into()));
        }
        if coercion.nrows() != weights.nrows() {
            return Err(Error::InvalidInput(format!(
                "coercion has {} rows, expected {}",
                coercion.nrows(),
                weights.nrows()
            )));
        }
        if !(feedback_gain.is_finite() && input_gain.is_finite()) {
            return Err(Error::InvalidConfig("ESN gains must be finite".into()));
        }
        Ok(Self {
            feedback_gain,
            input_gain,
            weights,
            coercion,
        })
    }

    pub fn n_neurons(&self) -> usize {
        self.weights.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.coercion.ncols()
    }

    pub fn feedback_gain(&self) -> f64 {
        self.feedback_gain
    }

    pub fn input_gain(&self) -> f64 {
        self.input_gain
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn coercion(&self) -> &DMatrix<f64> {
        &self.coercion
    }

    /// Same network with different gains.
    pub fn with_gains(&self, feedback_gain: f64, input_gain: f64) -> Self {
        Self {
            feedback_gain,
            input_gain,
            ..self.clone()
        }
    }
}

/// `n × n` matrix with entries from `U(−1, 1)`, rescaled to unit spectral radius.
pub fn sample_weight_matrix<R: Rng + ?Sized>(n_neurons: usize, rng: &mut R) -> Result<DMatrix<f64>> {
    if n_neurons == 0 {
        return Err(Error::InvalidConfig("ESN needs at least one neuron".into()));
    }
    for _ in 0..MAX_WEIGHT_DRAWS {
        let w = DMatrix::from_fn(n_neurons, n_neurons, |_, _| rng.random_range(-1.0..=1.0));
        let radius = linalg::spectral_radius(&w)?;
        if radius > MIN_RAW_RADIUS {
            return Ok(w / radius);
        }
    }
    Err(Error::GenerationFailure {
        attempts: MAX_WEIGHT_DRAWS,
        reason: "ESN weight matrix kept a vanishing spectral radius".into(),
    })
}

pub fn sample_coercion_matrix<R: Rng + ?Sized>(n_neurons: usize, input_dim: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(n_neurons, input_dim, |_, _| rng.random_range(-1.0..=1.0))
}

pub fn softplus(x: f64) -> f64 {
    if x > SOFTPLUS_BRANCH {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsnState {
    x: DVector<f64>,
}

impl EsnState {
    pub fn zeros(n_neurons: usize) -> Self {
        Self {
            x: DVector::zeros(n_neurons),
        }
    }

    pub fn new(x: DVector<f64>) -> Self {
        Self { x }
    }

    pub fn as_vector(&self) -> &DVector<f64> {
        &self.x
    }
}

pub fn esn_step(state: &EsnState, input: &[f64], config: &EsnConfig) -> Result<EsnState> {
    if input.len() != config.input_dim() || state.x.len() != config.n_neurons() {
        return Err(Error::InvalidInput(format!(
            "ESN expects {} inputs and {} neurons, got {} and {}",
            config.input_dim(),
            config.n_neurons(),
            input.len(),
            state.x.len()
        )));
    }
    let s = DVector::from_column_slice(input);
    let pre = &config.weights * &state.x * config.feedback_gain
        + &config.coercion * s * config.input_gain;
    Ok(EsnState { x: pre.map(softplus) })
}

/// Runs the network from the zero state; row `t` of the result is the
/// state after consuming input row `t`.
pub fn run_esn(inputs: &DMatrix<f64>, config: &EsnConfig) -> Result<DMatrix<f64>> {
    run_esn_from(EsnState::zeros(config.n_neurons()), inputs, config)
}

pub fn run_esn_from(initial: EsnState, inputs: &DMatrix<f64>, config: &EsnConfig) -> Result<DMatrix<f64>> {
    if inputs.ncols() != config.input_dim() {
        return Err(Error::InvalidInput(format!(
            "ESN expects {} input columns, got {}",
            config.input_dim(),
            inputs.ncols()
        )));
    }
    if initial.x.len() != config.n_neurons() {
        return Err(Error::InvalidInput("initial ESN state has the wrong size".into()));
    }
    let t_len = inputs.nrows();
    let n = config.n_neurons();
    // Input drive for all steps at once: rows are ι C s_t.
    let drive = inputs * config.coercion.transpose() * config.input_gain;
    let w_scaled = &config.weights * config.feedback_gain;
    let mut out = DMatrix::zeros(t_len, n);
    let mut x = initial.x;
    let mut pre = DVector::zeros(n);
    for t in 0..t_len {
        w_scaled.mul_to(&x, &mut pre);
        for i in 0..n {
            let v = softplus(pre[i] + drive[(t, i)]);
            x[i] = v;
            out[(t, i)] = v;
        }
    }
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("ESN state diverged".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn softplus_values() {
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((softplus(100.0) - 100.0).abs() < 1e-12);
        let tiny = softplus(-100.0);
        assert!(tiny > 0.0);
        assert!((tiny / (-100f64).exp() - 1.0).abs() < 1e-12);
        // Continuity across the branch point.
        let below = softplus(SOFTPLUS_BRANCH - 1e-9);
        let above = softplus(SOFTPLUS_BRANCH + 1e-9);
        assert!((above - below).abs() < 1e-8);
        assert!(softplus(1e6).is_finite());
    }

    #[test]
    fn weight_matrix_has_unit_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w1 = sample_weight_matrix(1, &mut rng).unwrap();
        assert_eq!(w1[(0, 0)].abs(), 1.0);
        let w = sample_weight_matrix(45, &mut rng).unwrap();
        assert!((linalg::spectral_radius(&w).unwrap() - 1.0).abs() < 1e-8);
        let other = sample_weight_matrix(45, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        assert_ne!(w, other);
    }

    fn scalar_esn(rho: f64, iota: f64) -> EsnConfig {
        EsnConfig::from_parts(
            DMatrix::from_element(1, 1, 1.0),
            DMatrix::from_element(1, 1, 1.0),
            rho,
            iota,
        )
        .unwrap()
    }

    #[test]
    fn step_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let cfg = EsnConfig::sample(10, 3, 0.0, 0.0, &mut rng).unwrap();
        let st = esn_step(&EsnState::zeros(10), &[1.0, 2.0, 3.0], &cfg).unwrap();
        assert!(st.as_vector().iter().all(|v| (*v - std::f64::consts::LN_2).abs() < 1e-15));

        let st = esn_step(&EsnState::zeros(1), &[1.0], &scalar_esn(0.5, 1.0)).unwrap();
        assert!((st.as_vector()[0] - 1.3132616875182228).abs() < 1e-14);
    }

    #[test]
    fn zero_feedback_is_memoryless() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let cfg = EsnConfig::sample(8, 2, 0.0, 0.5, &mut rng).unwrap();
        let a = esn_step(&EsnState::new(DVector::from_element(8, 3.0)), &[0.2, -0.1], &cfg).unwrap();
        let b = esn_step(&EsnState::zeros(8), &[0.2, -0.1], &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch() {
        let cfg = scalar_esn(0.5, 1.0);
        assert!(matches!(
            esn_step(&EsnState::zeros(1), &[1.0, 2.0], &cfg),
            Err(Error::InvalidInput(_))
        ));
        assert!(run_esn(&DMatrix::zeros(4, 2), &cfg).is_err());
    }

    #[test]
    fn run_matches_stepping() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cfg = EsnConfig::sample(6, 2, 0.7, 0.3, &mut rng).unwrap();
        let inputs = DMatrix::from_fn(12, 2, |t, j| ((t * 3 + j) as f64).sin());
        let run = run_esn(&inputs, &cfg).unwrap();
        let mut st = EsnState::zeros(6);
        for t in 0..12 {
            let row: Vec<f64> = inputs.row(t).iter().copied().collect();
            st = esn_step(&st, &row, &cfg).unwrap();
            for i in 0..6 {
                assert!((run[(t, i)] - st.as_vector()[i]).abs() < 1e-14);
            }
        }
        assert_eq!(run_esn(&DMatrix::zeros(0, 2), &cfg).unwrap().shape(), (0, 6));
        assert_eq!(run, run_esn(&inputs, &cfg).unwrap());
    }

    #[test]
    fn constant_input_reaches_fixed_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let cfg = EsnConfig::sample(20, 1, 0.1, 1.0, &mut rng).unwrap();
        let inputs = DMatrix::from_element(200, 1, 0.8);
        let run = run_esn(&inputs, &cfg).unwrap();
        let last = run.row(199) - run.row(198);
        assert!(last.amax() < 1e-14);
    }

    #[test]
    fn states_are_positive() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = EsnConfig::sample(30, 3, 0.7, 10f64.powf(-4.0 / 3.0), &mut rng).unwrap();
        let inputs = DMatrix::from_fn(300, 3, |t, j| 20.0 * ((t + 7 * j) as f64).cos());
        assert!(run_esn(&inputs, &cfg).unwrap().iter().all(|v| *v > 0.0));
    }
}
