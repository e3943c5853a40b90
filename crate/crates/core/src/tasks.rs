//! Input distributions and benchmark targets.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::{
    determinant, direct_sum, log_negativity_raw, squeezed_thermal_covariance, trace_energy,
    two_mode_squeezed_thermal_covariance, vacuum_covariance, CovarianceMatrix,
};

pub const SINGLE_MODE_THERMAL: (f64, f64) = (0.0, 5.0);
pub const SINGLE_MODE_SQUEEZING: (f64, f64) = (0.0, 0.75);
pub const TWO_MODE_THERMAL: (f64, f64) = (0.0, 1.25);
pub const TWO_MODE_SQUEEZING: (f64, f64) = (0.0, 0.75);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InputKind {
    SingleMode,
    TwoMode,
}

impl InputKind {
    pub fn modes_per_state(self) -> usize {
        match self {
            InputKind::SingleMode => 1,
            InputKind::TwoMode => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateParams {
    SqueezedThermal { n_th: f64, r: f64, phi: f64 },
    TwoModeSqueezedThermal { n_th: f64, s: f64 },
}

impl StateParams {
    pub fn covariance(&self) -> CovarianceMatrix {
        match *self {
            StateParams::SqueezedThermal { n_th, r, phi } => squeezed_thermal_covariance(n_th, r, phi),
            StateParams::TwoModeSqueezedThermal { n_th, s } => {
                two_mode_squeezed_thermal_covariance(n_th, s)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InputSequence {
    kind: InputKind,
    params: Vec<StateParams>,
    sigmas: Vec<CovarianceMatrix>,
}

impl InputSequence {
    pub fn from_params(kind: InputKind, params: Vec<StateParams>) -> Result<Self> {
        for p in &params {
            let ok = matches!(
                (kind, p),
                (InputKind::SingleMode, StateParams::SqueezedThermal { .. })
                    | (InputKind::TwoMode, StateParams::TwoModeSqueezedThermal { .. })
            );
            if !ok {
                return Err(Error::InvalidInput("state parameters do not match input kind".into()));
            }
        }
        let sigmas = params.iter().map(StateParams::covariance).collect();
        Ok(Self { kind, params, sigmas })
    }

    pub fn kind(&self) -> InputKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    pub fn params(&self) -> &[StateParams] {
        &self.params
    }

    pub fn sigmas(&self) -> &[CovarianceMatrix] {
        &self.sigmas
    }

    /// Injected `N`-mode product states, one per step.
    pub fn injections(&self, n_modes: usize) -> Result<Vec<CovarianceMatrix>> {
        self.sigmas
            .iter()
            .map(|s| assemble_injection(s, n_modes))
            .collect()
    }
}

/// Draws `len` i.i.d. input states. Parameters are consumed from the
/// generator in the order `(n_th, r, φ)` or `(n_th, s)` per step.
pub fn sample_inputs<R: Rng + ?Sized>(kind: InputKind, len: usize, rng: &mut R) -> Result<InputSequence> {
    if len == 0 {
        return Err(Error::InvalidInput("input sequence must be non-empty".into()));
    }
    let params = (0..len)
        .map(|_| match kind {
            InputKind::SingleMode => StateParams::SqueezedThermal {
                n_th: rng.random_range(SINGLE_MODE_THERMAL.0..=SINGLE_MODE_THERMAL.1),
                r: rng.random_range(SINGLE_MODE_SQUEEZING.0..=SINGLE_MODE_SQUEEZING.1),
                phi: rng.random_range(0.0..=std::f64::consts::TAU),
            },
            InputKind::TwoMode => StateParams::TwoModeSqueezedThermal {
                n_th: rng.random_range(TWO_MODE_THERMAL.0..=TWO_MODE_THERMAL.1),
                s: rng.random_range(TWO_MODE_SQUEEZING.0..=TWO_MODE_SQUEEZING.1),
            },
        })
        .collect();
    InputSequence::from_params(kind, params)
}

/// Fills `n_modes` reservoir inputs with copies of `input`; a leftover
/// mode (two-mode inputs, odd `N`) is vacuum.
pub fn assemble_injection(input: &CovarianceMatrix, n_modes: usize) -> Result<CovarianceMatrix> {
    let k = input.n_modes();
    if n_modes < k {
        return Err(Error::TaskUndefined(format!(
            "cannot inject a {k}-mode state into {n_modes} mode(s)"
        )));
    }
    let copies = n_modes / k;
    let mut acc = input.clone();
    for _ in 1..copies {
        acc = direct_sum(&acc, input);
    }
    let rest = n_modes - copies * k;
    if rest > 0 {
        acc = direct_sum(&acc, &vacuum_covariance(rest));
    }
    Ok(acc)
}

/// Benchmark task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TaskKind {
    /// Recall the full past single-mode covariance; scored by fidelity.
    Memory,
    /// Recall `Tr σ`.
    Trace,
    /// Recall `Det σ`.
    Determinant,
    /// Recall the logarithmic negativity of a past two-mode state.
    Entanglement,
    /// Recall the off-diagonal element `σ_xp` (hyperparameter study).
    OffDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Fidelity,
    Nmse,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Fidelity => "fidelity",
            Metric::Nmse => "nmse",
        })
    }
}

impl TaskKind {
    pub const ALL: [TaskKind; 5] = [
        TaskKind::Memory,
        TaskKind::Trace,
        TaskKind::Determinant,
        TaskKind::Entanglement,
        TaskKind::OffDiagonal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskKind::Memory => "memory",
            TaskKind::Trace => "trace",
            TaskKind::Determinant => "determinant",
            TaskKind::Entanglement => "entanglement",
            TaskKind::OffDiagonal => "offdiag",
        }
    }

    pub fn input_kind(self) -> InputKind {
        match self {
            TaskKind::Entanglement => InputKind::TwoMode,
            _ => InputKind::SingleMode,
        }
    }

    /// Linear tasks use the linear-task ESN gains.
    pub fn is_linear(self) -> bool {
        matches!(self, TaskKind::Memory | TaskKind::Trace | TaskKind::OffDiagonal)
    }

    pub fn metric(self) -> Metric {
        match self {
            TaskKind::Memory => Metric::Fidelity,
            _ => Metric::Nmse,
        }
    }

    /// Target of the intermediate QRC readout for one input state.
    pub fn qrc_target(self, sigma: &CovarianceMatrix) -> Vec<f64> {
        match self {
            TaskKind::Trace => vec![trace_energy(sigma)],
            TaskKind::OffDiagonal => vec![sigma.as_matrix()[(0, 1)]],
            TaskKind::Memory | TaskKind::Determinant | TaskKind::Entanglement => {
                sigma.unique_elements()
            }
        }
    }

    /// Final target for one input state. For entanglement this is the raw
    /// `−log₂ d̃₋`, clamped only at evaluation.
    pub fn final_target(self, sigma: &CovarianceMatrix) -> Result<Vec<f64>> {
        Ok(match self {
            TaskKind::Memory => sigma.unique_elements(),
            TaskKind::Trace => vec![trace_energy(sigma)],
            TaskKind::Determinant => vec![determinant(sigma)],
            TaskKind::Entanglement => vec![log_negativity_raw(sigma)?],
            TaskKind::OffDiagonal => vec![sigma.as_matrix()[(0, 1)]],
        })
    }

    pub fn qrc_target_dim(self) -> usize {
        let m = 2 * self.input_kind().modes_per_state();
        match self {
            TaskKind::Trace | TaskKind::OffDiagonal => 1,
            _ => m * (m + 1) / 2,
        }
    }

    pub fn final_target_dim(self) -> usize {
        match self {
            TaskKind::Memory => 3,
            _ => 1,
        }
    }

    /// Checks that the task can run on a reservoir of `n_modes` modes.
    pub fn check_modes(self, n_modes: usize) -> Result<()> {
        if n_modes < self.input_kind().modes_per_state() {
            return Err(Error::TaskUndefined(format!(
                "{} task needs at least {} modes, got {n_modes}",
                self.name(),
                self.input_kind().modes_per_state()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TaskKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        TaskKind::ALL
            .into_iter()
            .find(|k| k.name() == t)
            .or(match t.as_str() {
                "state-estimation" | "stm" => Some(TaskKind::Memory),
                "off-diagonal" => Some(TaskKind::OffDiagonal),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidConfig(format!("unknown task '{s}'")))
    }
}

/// A task together with its delays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub tau: usize,
    pub tau_prime: usize,
}

impl TaskSpec {
    /// `τ′ = ⌈τ/2⌉`.
    pub fn with_default_split(kind: TaskKind, tau: usize) -> Self {
        Self {
            kind,
            tau,
            tau_prime: tau.div_ceil(2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau_prime > self.tau {
            return Err(Error::InvalidConfig(format!(
                "QRC delay {} exceeds total delay {}",
                self.tau_prime, self.tau
            )));
        }
        Ok(())
    }
}

/// Undelayed per-step target rows, `T × d`.
pub fn raw_targets(
    seq: &InputSequence,
    dim: usize,
    f: impl Fn(&CovarianceMatrix) -> Result<Vec<f64>>,
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(seq.len(), dim);
    for (t, s) in seq.sigmas().iter().enumerate() {
        let row = f(s)?;
        debug_assert_eq!(row.len(), dim);
        for (j, v) in row.into_iter().enumerate() {
            out[(t, j)] = v;
        }
    }
    Ok(out)
}

/// Row `t` of the result holds row `t − delay` of `raw`; the first
/// `delay` rows are NaN.
pub fn shift_rows(raw: &DMatrix<f64>, delay: usize) -> DMatrix<f64> {
    let (t_len, d) = raw.shape();
    DMatrix::from_fn(t_len, d, |t, j| {
        if t >= delay {
            raw[(t - delay, j)]
        } else {
            f64::NAN
        }
    })
}

/// QRC targets at delay `τ′` and final targets at delay `τ`.
pub fn build_targets(seq: &InputSequence, task: &TaskSpec) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    task.validate()?;
    if seq.kind() != task.kind.input_kind() {
        return Err(Error::InvalidInput(format!(
            "{} task needs {:?} inputs",
            task.kind,
            task.kind.input_kind()
        )));
    }
    let kind = task.kind;
    let qrc = raw_targets(seq, kind.qrc_target_dim(), |s| Ok(kind.qrc_target(s)))?;
    let fin = raw_targets(seq, kind.final_target_dim(), |s| kind.final_target(s))?;
    Ok((shift_rows(&qrc, task.tau_prime), shift_rows(&fin, task.tau)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::is_physical;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_mode_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let seq = sample_inputs(InputKind::SingleMode, 100_000, &mut rng).unwrap();
        let mut sum_n = 0.0;
        let mut max_r: f64 = 0.0;
        for p in seq.params() {
            if let StateParams::SqueezedThermal { n_th, r, .. } = *p {
                sum_n += n_th;
                max_r = max_r.max(r);
            }
        }
        let mean = sum_n / 1e5;
        assert!((mean - 2.5).abs() < 0.02, "mean n_th {mean}");
        assert!(max_r <= 0.75);
    }

    #[test]
    fn draws_are_physical_and_obey_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let seq = sample_inputs(InputKind::SingleMode, 2000, &mut rng).unwrap();
        for (p, s) in seq.params().iter().zip(seq.sigmas()) {
            assert!(is_physical(s, 1e-9));
            if let StateParams::SqueezedThermal { n_th, r, .. } = *p {
                let t = 1.0 + 2.0 * n_th;
                assert!((determinant(s) - t * t).abs() < 1e-10 * t * t);
                assert!((trace_energy(s) - 2.0 * t * (2.0 * r).cosh()).abs() < 1e-10 * t);
            }
        }
        let seq = sample_inputs(InputKind::TwoMode, 500, &mut rng).unwrap();
        assert!(seq.sigmas().iter().all(|s| is_physical(s, 1e-9)));
    }

    #[test]
    fn injection_layouts() {
        let one = squeezed_thermal_covariance(1.0, 0.2, 0.1);
        let inj = assemble_injection(&one, 9).unwrap();
        assert_eq!(inj.n_modes(), 9);
        assert_eq!(inj.dim(), 18);
        assert_eq!(inj.modes(8, 1), one);

        let two = two_mode_squeezed_thermal_covariance(0.5, 0.3);
        let inj = assemble_injection(&two, 9).unwrap();
        assert_eq!(inj.modes(6, 2), two);
        assert_eq!(inj.modes(8, 1), vacuum_covariance(1));
        // No correlations between copies.
        assert_eq!(inj.as_matrix()[(0, 4)], 0.0);

        let inj = assemble_injection(&two, 4).unwrap();
        assert_eq!(inj.modes(2, 2), two);

        assert!(matches!(
            assemble_injection(&two, 1),
            Err(Error::TaskUndefined(_))
        ));
    }

    #[test]
    fn vacuum_targets() {
        let seq = InputSequence::from_params(
            InputKind::SingleMode,
            vec![StateParams::SqueezedThermal { n_th: 0.0, r: 0.0, phi: 0.0 }],
        )
        .unwrap();
        let s = &seq.sigmas()[0];
        assert_eq!(TaskKind::Trace.final_target(s).unwrap(), vec![2.0]);
        assert_eq!(TaskKind::Determinant.final_target(s).unwrap(), vec![1.0]);
        assert_eq!(TaskKind::Memory.final_target(s).unwrap(), vec![1.0, 0.0, 1.0]);

        let s = squeezed_thermal_covariance(0.5, 0.0, 0.0);
        assert!((TaskKind::Trace.final_target(&s).unwrap()[0] - 4.0).abs() < 1e-15);
        assert!((TaskKind::Determinant.final_target(&s).unwrap()[0] - 4.0).abs() < 1e-15);

        let s = two_mode_squeezed_thermal_covariance(0.0, 0.5);
        let e = TaskKind::Entanglement.final_target(&s).unwrap()[0];
        assert!((e - std::f64::consts::LOG2_E).abs() < 1e-12);
    }

    #[test]
    fn target_dimensions() {
        assert_eq!(TaskKind::Memory.qrc_target_dim(), 3);
        assert_eq!(TaskKind::Determinant.qrc_target_dim(), 3);
        assert_eq!(TaskKind::Entanglement.qrc_target_dim(), 10);
        assert_eq!(TaskKind::Trace.qrc_target_dim(), 1);
        assert!(TaskKind::Entanglement.check_modes(1).is_err());
        assert!(TaskKind::Entanglement.check_modes(2).is_ok());
    }

    #[test]
    fn delayed_targets_are_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let seq = sample_inputs(InputKind::SingleMode, 50, &mut rng).unwrap();
        let task0 = TaskSpec { kind: TaskKind::Determinant, tau: 0, tau_prime: 0 };
        let task = TaskSpec { kind: TaskKind::Determinant, tau: 4, tau_prime: 2 };
        let (q0, f0) = build_targets(&seq, &task0).unwrap();
        let (q, f) = build_targets(&seq, &task).unwrap();
        for t in 0..50 {
            if t >= 4 {
                assert_eq!(f[(t, 0)], f0[(t - 4, 0)]);
            } else {
                assert!(f[(t, 0)].is_nan());
            }
            if t >= 2 {
                assert_eq!(q.row(t), q0.row(t - 2));
            }
        }
    }

    #[test]
    fn split_and_parsing() {
        assert_eq!(TaskSpec::with_default_split(TaskKind::Trace, 5).tau_prime, 3);
        assert_eq!(TaskSpec::with_default_split(TaskKind::Trace, 2).tau_prime, 1);
        assert!(TaskSpec { kind: TaskKind::Trace, tau: 1, tau_prime: 2 }.validate().is_err());
        assert_eq!("Entanglement".parse::<TaskKind>().unwrap(), TaskKind::Entanglement);
        assert!("narma".parse::<TaskKind>().is_err());
    }

    #[test]
    fn entanglement_target_clamps_to_zero_when_separable() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let seq = sample_inputs(InputKind::TwoMode, 500, &mut rng).unwrap();
        for (p, s) in seq.params().iter().zip(seq.sigmas()) {
            if let StateParams::TwoModeSqueezedThermal { n_th, s: sq } = *p {
                let e = TaskKind::Entanglement.final_target(s).unwrap()[0].max(0.0);
                assert!(e >= 0.0);
                if (1.0 + 2.0 * n_th) * (-2.0 * sq).exp() >= 1.0 {
                    assert_eq!(e, 0.0);
                }
            }
        }
    }
}
