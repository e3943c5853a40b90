//! Readout training, the two-step hybrid protocol, baselines and metrics.
//!
//! Every series is split into wash-out, training and test phases. Readout
//! weights are fitted on the training rows only; metrics use the test
//! rows only.

use std::ops::Range;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::esn::{run_esn, EsnConfig};
use crate::gaussian::{fidelity, CovarianceMatrix};
use crate::qreservoir::{sample_measured_covariance, EnsembleSize};
use crate::tasks::{build_targets, InputSequence, Metric, TaskKind, TaskSpec};

/// Relative singular-value cutoff of the pseudoinverse.
pub const PINV_RCOND: f64 = 1e-12;

/// Fidelities above `1 + FIDELITY_SLACK` count as unphysical outcomes.
const FIDELITY_SLACK: f64 = 1e-9;

/// Lengths of the wash-out, training and test phases.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhasePlan {
    pub washout: usize,
    pub train: usize,
    pub test: usize,
}

impl Default for PhasePlan {
    fn default() -> Self {
        Self {
            washout: 500,
            train: 3000,
            test: 1000,
        }
    }
}

impl PhasePlan {
    pub fn total(&self) -> usize {
        self.washout + self.train + self.test
    }

    pub fn train_rows(&self) -> Range<usize> {
        self.washout..self.washout + self.train
    }

    pub fn test_rows(&self) -> Range<usize> {
        self.washout + self.train..self.total()
    }

    pub fn validate(&self) -> Result<()> {
        if self.washout == 0 || self.train == 0 || self.test == 0 {
            return Err(Error::InvalidConfig(format!(
                "all phases must be non-empty: {self:?}"
            )));
        }
        Ok(())
    }

    /// Delays must stay inside the wash-out so that training rows never
    /// look before the start of the series.
    pub fn check_delay(&self, delay: usize) -> Result<()> {
        if delay >= self.washout {
            return Err(Error::InvalidConfig(format!(
                "delay {delay} must be shorter than the wash-out ({})",
                self.washout
            )));
        }
        Ok(())
    }
}

/// Appends a unit bias column.
pub fn with_bias(features: &DMatrix<f64>) -> DMatrix<f64> {
    let (t, k) = features.shape();
    let mut out = features.clone().resize_horizontally(k + 1, 1.0);
    debug_assert_eq!(out.shape(), (t, k + 1));
    out.column_mut(k).fill(1.0);
    out
}

/// Horizontal concatenation.
pub fn hstack(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let rows = parts.first().map_or(0, |p| p.nrows());
    let cols = parts.iter().map(|p| p.ncols()).sum();
    let mut out = DMatrix::zeros(rows, cols);
    let mut c = 0;
    for p in parts {
        assert_eq!(p.nrows(), rows, "row counts differ");
        out.view_mut((0, c), (rows, p.ncols())).copy_from(*p);
        c += p.ncols();
    }
    out
}

fn select_rows(m: &DMatrix<f64>, rows: Range<usize>) -> DMatrix<f64> {
    m.rows(rows.start, rows.len()).clone_owned()
}

/// Least-squares readout `W` (`d × K`) minimizing `‖X Wᵀ − Y‖²`.
///
/// With `ridge = 0` this is `(X⁺ Y)ᵀ` through an SVD with singular values
/// below `PINV_RCOND · s_max` dropped; otherwise `(XᵀX + λI)⁻¹ XᵀY`.
pub fn train_readout(features: &DMatrix<f64>, targets: &DMatrix<f64>, ridge: f64) -> Result<DMatrix<f64>> {
    if features.nrows() != targets.nrows() {
        return Err(Error::InvalidInput(format!(
            "{} feature rows vs {} target rows",
            features.nrows(),
            targets.nrows()
        )));
    }
    if features.iter().chain(targets.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("non-finite training data".into()));
    }
    if features.iter().all(|v| *v == 0.0) {
        return Err(Error::DegenerateTraining("all-zero feature matrix".into()));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(Error::InvalidConfig(format!("ridge must be >= 0, got {ridge}")));
    }

    let w = if ridge == 0.0 {
        let svd = features.clone().svd(true, true);
        let s_max = svd.singular_values.max();
        svd.solve(targets, PINV_RCOND * s_max)
            .map_err(|e| Error::NumericalFailure(e.to_string()))?
    } else {
        let k = features.ncols();
        let gram = features.transpose() * features + DMatrix::<f64>::identity(k, k) * ridge;
        let rhs = features.transpose() * targets;
        gram.cholesky()
            .ok_or_else(|| Error::NumericalFailure("ridge system not positive definite".into()))?
            .solve(&rhs)
    };
    Ok(w.transpose())
}

/// Readout output `X Wᵀ`, one row per time step.
pub fn apply_readout(features: &DMatrix<f64>, weights: &DMatrix<f64>) -> DMatrix<f64> {
    features * weights.transpose()
}

/// `Σ(o − ō)² / Σ ō²`.
pub fn nmse(output: &[f64], target: &[f64]) -> Result<f64> {
    if output.len() != target.len() {
        return Err(Error::InvalidInput(format!(
            "output has {} entries, target {}",
            output.len(),
            target.len()
        )));
    }
    let den: f64 = target.iter().map(|v| v * v).sum();
    if den == 0.0 || !den.is_finite() {
        return Err(Error::UndefinedMetric("target has zero energy".into()));
    }
    let num: f64 = output
        .iter()
        .zip(target)
        .map(|(o, t)| (o - t) * (o - t))
        .sum();
    Ok(num / den)
}

/// Aligns targets with the outputs that should reproduce them: row `t`
/// holds raw row `t − delay`. Rows before `delay` are NaN and lie inside
/// the wash-out.
pub fn make_delayed_targets(raw: &DMatrix<f64>, delay: usize, washout: usize) -> Result<DMatrix<f64>> {
    if delay >= washout {
        return Err(Error::InvalidConfig(format!(
            "delay {delay} must be shorter than the wash-out ({washout})"
        )));
    }
    Ok(crate::tasks::shift_rows(raw, delay))
}

/// Fidelity between a predicted single-mode covariance, given by its
/// unique elements `(σ_xx, σ_xp, σ_pp)`, and the true state. `None` when
/// the prediction is unphysical or the fidelity falls outside `[0, 1]`.
pub fn state_estimation_metric(predicted: &[f64], truth: &CovarianceMatrix) -> Option<f64> {
    let sigma = CovarianceMatrix::from_unique_elements(1, predicted).ok()?;
    let f = fidelity(&sigma, truth).ok()?;
    if !f.is_finite() || !(0.0..=1.0 + FIDELITY_SLACK).contains(&f) {
        return None;
    }
    Some(f.min(1.0))
}

/// Test-phase score of one trained model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub metric: Metric,
    pub value: f64,
    /// Test steps dropped as unphysical (fidelity tasks only).
    pub excluded: usize,
}

/// Scores test-phase predictions of the final target.
///
/// NMSE targets are shifted by their training-phase mean. For the
/// entanglement task both the outputs and the targets are clamped at zero
/// before shifting. Fidelity is averaged over the non-excluded steps.
pub fn evaluate(
    seq: &InputSequence,
    task: &TaskSpec,
    final_targets: &DMatrix<f64>,
    predictions_test: &DMatrix<f64>,
    plan: &PhasePlan,
) -> Result<Evaluation> {
    let test = plan.test_rows();
    match task.kind.metric() {
        Metric::Fidelity => {
            let mut sum = 0.0;
            let mut kept = 0usize;
            for (i, t) in test.clone().enumerate() {
                let row: Vec<f64> = predictions_test.row(i).iter().copied().collect();
                let truth = &seq.sigmas()[t - task.tau];
                if let Some(f) = state_estimation_metric(&row, truth) {
                    sum += f;
                    kept += 1;
                }
            }
            if kept == 0 {
                return Err(Error::UndefinedMetric("every test prediction was unphysical".into()));
            }
            Ok(Evaluation {
                metric: Metric::Fidelity,
                value: sum / kept as f64,
                excluded: test.len() - kept,
            })
        }
        Metric::Nmse => {
            let clamp = |v: f64| {
                if task.kind == TaskKind::Entanglement {
                    v.max(0.0)
                } else {
                    v
                }
            };
            let train = plan.train_rows();
            let mean = train.clone().map(|t| clamp(final_targets[(t, 0)])).sum::<f64>()
                / train.len() as f64;
            let target: Vec<f64> = test.clone().map(|t| clamp(final_targets[(t, 0)]) - mean).collect();
            let output: Vec<f64> = (0..test.len())
                .map(|i| clamp(predictions_test[(i, 0)]) - mean)
                .collect();
            Ok(Evaluation {
                metric: Metric::Nmse,
                value: nmse(&output, &target)?,
                excluded: 0,
            })
        }
    }
}

/// Trained weights of the hybrid model.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedHybrid {
    /// QRC readout `W⁽²⁾`, `d × (N(N+1)/2 + 1)`.
    pub w2: DMatrix<f64>,
    /// Final readout, `targets × (N(N+1)/2 + N_ESN + 1)`.
    pub w_out: DMatrix<f64>,
    pub qrc_delay: usize,
    pub final_delay: usize,
}

fn check_lengths(seq: &InputSequence, features: &DMatrix<f64>, plan: &PhasePlan, task: &TaskSpec) -> Result<()> {
    plan.validate()?;
    task.validate()?;
    plan.check_delay(task.tau)?;
    if seq.len() != plan.total() || features.nrows() != plan.total() {
        return Err(Error::InvalidInput(format!(
            "series length {} / {} does not match the phase plan ({})",
            seq.len(),
            features.nrows(),
            plan.total()
        )));
    }
    Ok(())
}

/// Two-step hybrid training on precomputed reservoir features (`T × K`).
///
/// 1. Fit `W⁽²⁾` from `[σ̃_x ‖ 1]` to the QRC target at delay `τ′`.
/// 2. Drive the ESN with the QRC output over the whole series.
/// 3. Fit `W_out` from `[σ̃_x ‖ x_ESN ‖ 1]` to the final target at delay `τ`.
pub fn train_hybrid_on_features(
    qrc_features: &DMatrix<f64>,
    seq: &InputSequence,
    task: &TaskSpec,
    esn: &EsnConfig,
    plan: &PhasePlan,
    ridge: f64,
) -> Result<(TrainedHybrid, Evaluation)> {
    check_lengths(seq, qrc_features, plan, task)?;
    if esn.input_dim() != task.kind.qrc_target_dim() {
        return Err(Error::InvalidConfig(format!(
            "ESN takes {} inputs but the QRC emits {}",
            esn.input_dim(),
            task.kind.qrc_target_dim()
        )));
    }
    let (qrc_targets, final_targets) = build_targets(seq, task)?;
    let train = plan.train_rows();

    let x = with_bias(qrc_features);
    let w2 = train_readout(&select_rows(&x, train.clone()), &select_rows(&qrc_targets, train.clone()), ridge)?;
    let qrc_out = apply_readout(&x, &w2);

    let esn_features = run_esn(&qrc_out, esn)?;
    let z = with_bias(&hstack(&[qrc_features, &esn_features]));
    let w_out = train_readout(
        &select_rows(&z, train.clone()),
        &select_rows(&final_targets, train),
        ridge,
    )?;
    let pred = apply_readout(&select_rows(&z, plan.test_rows()), &w_out);
    let eval = evaluate(seq, task, &final_targets, &pred, plan)?;
    Ok((
        TrainedHybrid {
            w2,
            w_out,
            qrc_delay: task.tau_prime,
            final_delay: task.tau,
        },
        eval,
    ))
}

/// Single readout over the concatenated features of one or more
/// reservoirs, trained directly on the final target at delay `τ`.
pub fn train_qrc_on_features(
    reservoirs: &[&DMatrix<f64>],
    seq: &InputSequence,
    task: &TaskSpec,
    plan: &PhasePlan,
    ridge: f64,
) -> Result<(DMatrix<f64>, Evaluation)> {
    if reservoirs.is_empty() {
        return Err(Error::InvalidInput("no reservoir features".into()));
    }
    let features = hstack(reservoirs);
    check_lengths(seq, &features, plan, task)?;
    fit_and_score(&features, seq, task, plan, ridge)
}

/// ESN fed with directly measured inputs (`T × d`), trained on the final
/// target at delay `τ`.
pub fn train_esn_on_measurements(
    measurements: &DMatrix<f64>,
    seq: &InputSequence,
    task: &TaskSpec,
    esn: &EsnConfig,
    plan: &PhasePlan,
    ridge: f64,
) -> Result<(DMatrix<f64>, Evaluation)> {
    let esn_features = run_esn(measurements, esn)?;
    check_lengths(seq, &esn_features, plan, task)?;
    fit_and_score(&esn_features, seq, task, plan, ridge)
}

fn fit_and_score(
    features: &DMatrix<f64>,
    seq: &InputSequence,
    task: &TaskSpec,
    plan: &PhasePlan,
    ridge: f64,
) -> Result<(DMatrix<f64>, Evaluation)> {
    let (_, final_targets) = build_targets(seq, task)?;
    let x = with_bias(features);
    let train = plan.train_rows();
    let w = train_readout(&select_rows(&x, train.clone()), &select_rows(&final_targets, train), ridge)?;
    let pred = apply_readout(&select_rows(&x, plan.test_rows()), &w);
    let eval = evaluate(seq, task, &final_targets, &pred, plan)?;
    Ok((w, eval))
}

/// Ensemble estimates of the x-quadrature covariance of the raw input
/// states, as seen by homodyne detection without any reservoir.
///
/// `copies` input copies are available per ensemble member (the number of
/// injected copies), so each estimate pools `copies · M` samples. Rows hold
/// the upper triangle of the estimate: one element for single-mode inputs,
/// three for two-mode inputs.
pub fn measure_inputs_directly<R: Rng + ?Sized>(
    seq: &InputSequence,
    copies: usize,
    ensemble: EnsembleSize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if copies == 0 {
        return Err(Error::InvalidConfig("at least one input copy is needed".into()));
    }
    let m = seq.kind().modes_per_state();
    let pooled = match ensemble {
        EnsembleSize::Infinite => EnsembleSize::Infinite,
        EnsembleSize::Finite(e) => EnsembleSize::Finite(e.saturating_mul(copies as u64)),
    };
    let d = m * (m + 1) / 2;
    let mut out = DMatrix::zeros(seq.len(), d);
    for (t, s) in seq.sigmas().iter().enumerate() {
        let est = sample_measured_covariance(&s.x_block(), pooled, rng)?;
        for (j, v) in crate::linalg::upper_triangle(&est).into_iter().enumerate() {
            out[(t, j)] = v;
        }
    }
    Ok(out)
}
