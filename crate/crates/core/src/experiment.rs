//! Seeded multi-realization experiments and figure sweeps.
//!
//! # Seeds
//!
//! Realization `i` of an experiment with master seed `m` uses
//! `seed_i = hash64(m, i)`, where
//!
//! ```text
//! splitmix64(z) = let z = z + 0x9E3779B97F4A7C15;
//!                 let z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
//!                 let z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
//!                 z ^ (z >> 31)                       (wrapping arithmetic)
//! hash64(m, i)  = splitmix64(splitmix64(m) ^ i)
//! ```
//!
//! Each random component of a realization draws from its own ChaCha8
//! stream seeded with `seed_i` (inputs, the two crystals of each
//! reservoir, the ESN, and measurement noise). Cells of a sweep that share
//! a master seed therefore share inputs and reservoirs, which pairs the
//! comparisons across sweep axes.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::esn::EsnConfig;
use crate::pipeline::{
    measure_inputs_directly, train_esn_on_measurements, train_hybrid_on_features,
    train_qrc_on_features, Evaluation, PhasePlan,
};
use crate::qreservoir::{run_reservoir, EnsembleSize, ReservoirConfig, ReservoirParams};
use crate::tasks::{sample_inputs, InputKind, InputSequence, Metric, TaskKind, TaskSpec};

pub const LINEAR_FEEDBACK_GAIN: f64 = 0.7;
pub const NONLINEAR_FEEDBACK_GAIN: f64 = 0.1;
pub const NONLINEAR_INPUT_GAIN: f64 = 0.01;

/// `ι = 10^{−4/3}` for linear tasks.
pub fn linear_input_gain() -> f64 {
    10f64.powf(-4.0 / 3.0)
}

pub fn splitmix64(z: u64) -> u64 {
    let z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn hash64(master: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master) ^ index)
}

pub fn realization_seed(master_seed: u64, realization: usize) -> u64 {
    hash64(master_seed, realization as u64)
}

/// Independent random streams of one realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stream {
    Inputs,
    Crystals(u8),
    Esn,
    Noise(u8),
    DirectNoise,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Inputs => 1,
            Stream::Esn => 2,
            Stream::DirectNoise => 3,
            Stream::Crystals(k) => 16 + k as u64,
            Stream::Noise(k) => 32 + k as u64,
        }
    }
}

pub fn stream_rng(seed: u64, stream: Stream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    /// QRC cascaded with the ESN.
    Hybrid,
    /// Two independent reservoirs read out together.
    QrcOnly,
    /// ESN fed with direct homodyne estimates of the inputs.
    EsnOnly,
    /// A single reservoir with a linear readout.
    Qrc,
}

impl Baseline {
    pub fn name(self) -> &'static str {
        match self {
            Baseline::Hybrid => "hybrid",
            Baseline::QrcOnly => "qrc-only",
            Baseline::EsnOnly => "esn-only",
            Baseline::Qrc => "qrc",
        }
    }
}

impl fmt::Display for Baseline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Baseline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hybrid" => Ok(Baseline::Hybrid),
            "qrc-only" | "qrc_only" => Ok(Baseline::QrcOnly),
            "esn-only" | "esn_only" => Ok(Baseline::EsnOnly),
            "qrc" | "qrc-single" => Ok(Baseline::Qrc),
            _ => Err(Error::InvalidConfig(format!("unknown baseline '{s}'"))),
        }
    }
}

/// How the QRC delay `τ′` follows from `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DelaySplit {
    /// `⌈τ/2⌉`.
    Auto,
    /// `⌊τ/2⌋`.
    Floor,
    Fixed(usize),
}

impl DelaySplit {
    pub fn resolve(self, tau: usize) -> usize {
        match self {
            DelaySplit::Auto => tau.div_ceil(2),
            DelaySplit::Floor => tau / 2,
            DelaySplit::Fixed(t) => t,
        }
    }
}

impl fmt::Display for DelaySplit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DelaySplit::Auto => f.write_str("auto"),
            DelaySplit::Floor => f.write_str("floor"),
            DelaySplit::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl FromStr for DelaySplit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "auto" | "ceil" => Ok(DelaySplit::Auto),
            "floor" => Ok(DelaySplit::Floor),
            t => t
                .parse()
                .map(DelaySplit::Fixed)
                .map_err(|_| Error::InvalidConfig(format!("bad tau_prime '{s}'"))),
        }
    }
}

/// Keys accepted by [`ExperimentConfig::set`], in documentation order.
pub const CONFIG_KEYS: &[&str] = &[
    "task",
    "tau",
    "tau_prime",
    "n_modes",
    "reflectivity",
    "sparsity",
    "ensemble_size",
    "n_esn",
    "rho",
    "iota",
    "washout",
    "train",
    "test",
    "ridge",
    "realizations",
    "master_seed",
    "baseline",
];

/// One experiment cell. Defaults follow the standard hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub tau: usize,
    pub tau_prime: DelaySplit,
    pub n_modes: usize,
    pub reflectivity: f64,
    pub sparsity: f64,
    pub ensemble: EnsembleSize,
    pub n_esn: usize,
    /// Feedback gain; `None` picks the task-class default.
    pub rho: Option<f64>,
    /// Input gain; `None` picks the task-class default.
    pub iota: Option<f64>,
    pub plan: PhasePlan,
    pub ridge: f64,
    pub realizations: usize,
    pub master_seed: u64,
    pub baseline: Baseline,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_task(TaskKind::Memory)
    }
}

impl ExperimentConfig {
    pub fn for_task(task: TaskKind) -> Self {
        Self {
            task,
            tau: 0,
            tau_prime: DelaySplit::Auto,
            n_modes: 9,
            reflectivity: 0.4,
            sparsity: 7.0 / 9.0,
            ensemble: EnsembleSize::Finite(100_000),
            n_esn: 45,
            rho: None,
            iota: None,
            plan: PhasePlan::default(),
            ridge: 0.0,
            realizations: 100,
            master_seed: 0,
            baseline: Baseline::Hybrid,
        }
    }

    pub fn tau_prime_value(&self) -> usize {
        self.tau_prime.resolve(self.tau)
    }

    pub fn feedback_gain(&self) -> f64 {
        self.rho.unwrap_or(if self.task.is_linear() {
            LINEAR_FEEDBACK_GAIN
        } else {
            NONLINEAR_FEEDBACK_GAIN
        })
    }

    pub fn input_gain(&self) -> f64 {
        self.iota.unwrap_or(if self.task.is_linear() {
            linear_input_gain()
        } else {
            NONLINEAR_INPUT_GAIN
        })
    }

    pub fn task_spec(&self) -> TaskSpec {
        TaskSpec {
            kind: self.task,
            tau: self.tau,
            tau_prime: self.tau_prime_value(),
        }
    }

    pub fn reservoir_params(&self) -> ReservoirParams {
        ReservoirParams {
            n_modes: self.n_modes,
            reflectivity: self.reflectivity,
            sparsity: self.sparsity,
            ensemble: self.ensemble,
            dt: 1.0,
        }
    }

    /// Neurons of the network actually built: the ESN-only baseline gets
    /// as many neurons as the hybrid has final-readout nodes.
    pub fn effective_n_esn(&self) -> usize {
        match self.baseline {
            Baseline::EsnOnly => self.n_esn + self.reservoir_params().n_features(),
            _ => self.n_esn,
        }
    }

    /// Rejects configurations that cannot run, before any computation.
    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        self.reservoir_params().validate()?;
        self.task.check_modes(self.n_modes)?;
        self.task_spec().validate()?;
        self.plan.check_delay(self.tau)?;
        if self.realizations == 0 {
            return Err(Error::InvalidConfig("realizations must be positive".into()));
        }
        if matches!(self.baseline, Baseline::Hybrid | Baseline::EsnOnly) && self.effective_n_esn() == 0 {
            return Err(Error::InvalidConfig("n_esn must be positive".into()));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(Error::InvalidConfig(format!("bad ridge {}", self.ridge)));
        }
        for g in [self.feedback_gain(), self.input_gain()] {
            if !g.is_finite() {
                return Err(Error::InvalidConfig("ESN gains must be finite".into()));
            }
        }
        Ok(())
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "task" => self.task = v.parse()?,
            "tau" => self.tau = parse_int(key, v)?,
            "tau_prime" => self.tau_prime = v.parse()?,
            "n_modes" => self.n_modes = parse_int(key, v)?,
            "reflectivity" => self.reflectivity = parse_real(key, v)?,
            "sparsity" => self.sparsity = parse_real(key, v)?,
            "ensemble_size" => self.ensemble = v.parse()?,
            "n_esn" => self.n_esn = parse_int(key, v)?,
            "rho" => self.rho = parse_gain(key, v)?,
            "iota" => self.iota = parse_gain(key, v)?,
            "washout" => self.plan.washout = parse_int(key, v)?,
            "train" => self.plan.train = parse_int(key, v)?,
            "test" => self.plan.test = parse_int(key, v)?,
            "ridge" => self.ridge = parse_real(key, v)?,
            "realizations" => self.realizations = parse_int(key, v)?,
            "master_seed" => {
                self.master_seed = v
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad master_seed '{v}'")))?
            }
            "baseline" => self.baseline = v.parse()?,
            _ => return Err(Error::InvalidConfig(format!("unknown key '{key}'"))),
        }
        Ok(())
    }
}

fn parse_int(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: expected a non-negative integer, got '{v}'")))
}

/// Reals, also accepting `a/b` fractions such as `7/9`.
pub fn parse_real(key: &str, v: &str) -> Result<f64> {
    let bad = || Error::InvalidConfig(format!("{key}: expected a number, got '{v}'"));
    let x = match v.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => v.parse().map_err(|_| bad())?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

fn parse_gain(key: &str, v: &str) -> Result<Option<f64>> {
    if v == "auto" {
        Ok(None)
    } else {
        parse_real(key, v).map(Some)
    }
}

/// One row of the per-realization result table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRecord {
    pub cell: usize,
    pub task: TaskKind,
    pub tau: usize,
    pub tau_prime: usize,
    pub n_modes: usize,
    pub reflectivity: f64,
    pub sparsity: f64,
    pub ensemble: EnsembleSize,
    pub n_esn: usize,
    pub rho: f64,
    pub iota: f64,
    pub baseline: Baseline,
    pub realization: usize,
    pub seed: u64,
    pub metric: Metric,
    pub value: f64,
    pub excluded_count: usize,
}

impl ResultRecord {
    fn new(cell: usize, cfg: &ExperimentConfig, realization: usize, seed: u64, eval: Evaluation) -> Self {
        Self {
            cell,
            task: cfg.task,
            tau: cfg.tau,
            tau_prime: cfg.tau_prime_value(),
            n_modes: cfg.n_modes,
            reflectivity: cfg.reflectivity,
            sparsity: cfg.sparsity,
            ensemble: cfg.ensemble,
            n_esn: cfg.effective_n_esn(),
            rho: cfg.feedback_gain(),
            iota: cfg.input_gain(),
            baseline: cfg.baseline,
            realization,
            seed,
            metric: eval.metric,
            value: eval.value,
            excluded_count: eval.excluded,
        }
    }
}

/// Mean and standard error of one cell over its realizations.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub first: ResultRecord,
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

pub fn summarize(records: &[ResultRecord]) -> Vec<Summary> {
    let mut by_cell: Vec<(usize, Vec<&ResultRecord>)> = Vec::new();
    for r in records {
        match by_cell.iter_mut().find(|(c, _)| *c == r.cell) {
            Some((_, v)) => v.push(r),
            None => by_cell.push((r.cell, vec![r])),
        }
    }
    by_cell.sort_by_key(|(c, _)| *c);
    by_cell
        .into_iter()
        .map(|(_, rs)| {
            let n = rs.len();
            let mean = rs.iter().map(|r| r.value).sum::<f64>() / n as f64;
            let stderr = if n > 1 {
                let var = rs.iter().map(|r| (r.value - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                0.0
            };
            Summary {
                first: rs[0].clone(),
                mean,
                stderr,
                n,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ReservoirKey {
    master_seed: u64,
    kind: InputKind,
    n_modes: usize,
    reflectivity: u64,
    sparsity: u64,
    ensemble: EnsembleSize,
    len: usize,
    instance: u8,
}

/// Per-realization memo of inputs and reservoir features shared by cells.
#[derive(Default)]
struct RealizationCache {
    inputs: HashMap<(u64, InputKind, usize), InputSequence>,
    features: HashMap<ReservoirKey, DMatrix<f64>>,
}

impl RealizationCache {
    fn inputs(&mut self, cfg: &ExperimentConfig, seed: u64) -> Result<InputSequence> {
        let key = (cfg.master_seed, cfg.task.input_kind(), cfg.plan.total());
        if let Some(s) = self.inputs.get(&key) {
            return Ok(s.clone());
        }
        let mut rng = stream_rng(seed, Stream::Inputs);
        let seq = sample_inputs(key.1, key.2, &mut rng)?;
        self.inputs.insert(key, seq.clone());
        Ok(seq)
    }

    fn features(&mut self, cfg: &ExperimentConfig, seed: u64, seq: &InputSequence, instance: u8) -> Result<DMatrix<f64>> {
        let key = ReservoirKey {
            master_seed: cfg.master_seed,
            kind: seq.kind(),
            n_modes: cfg.n_modes,
            reflectivity: cfg.reflectivity.to_bits(),
            sparsity: cfg.sparsity.to_bits(),
            ensemble: cfg.ensemble,
            len: seq.len(),
            instance,
        };
        if let Some(f) = self.features.get(&key) {
            return Ok(f.clone());
        }
        let f = reservoir_features(cfg, seed, seq, instance)?;
        self.features.insert(key, f.clone());
        Ok(f)
    }
}

/// Samples reservoir `instance` of a realization and records its features.
pub fn sample_reservoir(cfg: &ExperimentConfig, seed: u64, instance: u8) -> Result<ReservoirConfig> {
    let mut rng = stream_rng(seed, Stream::Crystals(instance));
    ReservoirConfig::sample(cfg.reservoir_params(), &mut rng)
}

pub fn reservoir_features(cfg: &ExperimentConfig, seed: u64, seq: &InputSequence, instance: u8) -> Result<DMatrix<f64>> {
    let reservoir = sample_reservoir(cfg, seed, instance)?;
    let injections = seq.injections(cfg.n_modes)?;
    let mut noise = stream_rng(seed, Stream::Noise(instance));
    run_reservoir(&injections, &reservoir, &mut noise)
}

/// The input series of realization `i`.
pub fn realization_inputs(cfg: &ExperimentConfig, realization: usize) -> Result<InputSequence> {
    let seed = realization_seed(cfg.master_seed, realization);
    let mut rng = stream_rng(seed, Stream::Inputs);
    sample_inputs(cfg.task.input_kind(), cfg.plan.total(), &mut rng)
}

fn run_cell(cell: usize, cfg: &ExperimentConfig, realization: usize, cache: &mut RealizationCache) -> Result<ResultRecord> {
    let seed = realization_seed(cfg.master_seed, realization);
    let seq = cache.inputs(cfg, seed)?;
    let task = cfg.task_spec();
    let eval = match cfg.baseline {
        Baseline::Hybrid => {
            let features = cache.features(cfg, seed, &seq, 0)?;
            let mut rng = stream_rng(seed, Stream::Esn);
            let esn = EsnConfig::sample(
                cfg.n_esn,
                cfg.task.qrc_target_dim(),
                cfg.feedback_gain(),
                cfg.input_gain(),
                &mut rng,
            )?;
            train_hybrid_on_features(&features, &seq, &task, &esn, &cfg.plan, cfg.ridge)?.1
        }
        Baseline::Qrc => {
            let f = cache.features(cfg, seed, &seq, 0)?;
            train_qrc_on_features(&[&f], &seq, &task, &cfg.plan, cfg.ridge)?.1
        }
        Baseline::QrcOnly => {
            let a = cache.features(cfg, seed, &seq, 0)?;
            let b = cache.features(cfg, seed, &seq, 1)?;
            train_qrc_on_features(&[&a, &b], &seq, &task, &cfg.plan, cfg.ridge)?.1
        }
        Baseline::EsnOnly => {
            let copies = cfg.n_modes / seq.kind().modes_per_state();
            let mut noise = stream_rng(seed, Stream::DirectNoise);
            let meas = measure_inputs_directly(&seq, copies, cfg.ensemble, &mut noise)?;
            let mut rng = stream_rng(seed, Stream::Esn);
            let esn = EsnConfig::sample(
                cfg.effective_n_esn(),
                meas.ncols(),
                cfg.feedback_gain(),
                cfg.input_gain(),
                &mut rng,
            )?;
            train_esn_on_measurements(&meas, &seq, &task, &esn, &cfg.plan, cfg.ridge)?.1
        }
    };
    Ok(ResultRecord::new(cell, cfg, realization, seed, eval))
}

/// Runs every cell for its configured number of realizations.
///
/// Realizations run in parallel on `threads` workers (all cores when
/// `None`); records come back sorted by cell, then realization.
pub fn run_cells(cells: &[ExperimentConfig], threads: Option<usize>) -> Result<Vec<ResultRecord>> {
    for c in cells {
        c.validate()?;
    }
    let max_real = cells.iter().map(|c| c.realizations).max().unwrap_or(0);
    let work = || -> Result<Vec<ResultRecord>> {
        let per_real: Vec<Result<Vec<ResultRecord>>> = (0..max_real)
            .into_par_iter()
            .map(|i| {
                let mut cache = RealizationCache::default();
                cells
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.realizations > i)
                    .map(|(k, c)| run_cell(k, c, i, &mut cache))
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        for r in per_real {
            out.extend(r?);
        }
        out.sort_by_key(|r| (r.cell, r.realization));
        Ok(out)
    };
    match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

pub fn run_experiment(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<Vec<ResultRecord>> {
    run_cells(std::slice::from_ref(cfg), threads)
}

/// Figure sweeps.
pub mod presets {
    use super::*;

    pub const IDS: &[&str] = &["fig2-top", "fig2-bottom", "fig3", "fig4", "fig5", "fig6"];

    pub const FIG2_ENSEMBLES: [EnsembleSize; 5] = [
        EnsembleSize::Finite(1_000),
        EnsembleSize::Finite(10_000),
        EnsembleSize::Finite(100_000),
        EnsembleSize::Finite(1_000_000),
        EnsembleSize::Infinite,
    ];
    pub const FIG2_DELAYS: std::ops::RangeInclusive<usize> = 0..=8;
    pub const FIG3_MODES: [usize; 5] = [1, 3, 5, 7, 9];
    pub const FIG3_NEURONS: [usize; 5] = [5, 15, 25, 35, 45];
    pub const FIG4_TASKS: [TaskKind; 4] = [
        TaskKind::Trace,
        TaskKind::Memory,
        TaskKind::Determinant,
        TaskKind::Entanglement,
    ];
    pub const FIG4_DELAYS: std::ops::RangeInclusive<usize> = 0..=5;
    pub const FIG5_DELAYS: std::ops::RangeInclusive<usize> = 0..=3;
    pub const FIG6_DELAYS: std::ops::RangeInclusive<usize> = 0..=5;

    pub fn fig5_reflectivities() -> Vec<f64> {
        (1..=9).map(|k| k as f64 / 10.0).collect()
    }

    pub fn fig5_sparsities() -> Vec<f64> {
        (1..=9).map(|k| k as f64 / 9.0).collect()
    }

    /// The large-ESN variant of the ensemble-size study.
    pub fn big_esn(mut cfg: ExperimentConfig) -> ExperimentConfig {
        cfg.n_esn = 295;
        cfg.rho = Some(1.8);
        cfg.tau_prime = DelaySplit::Fixed(0);
        cfg
    }

    /// Cells of a preset, each derived from `base` (which supplies phase
    /// lengths, realizations and the master seed).
    pub fn preset(id: &str, base: &ExperimentConfig) -> Result<Vec<ExperimentConfig>> {
        let with = |task: TaskKind| ExperimentConfig {
            task,
            ..base.clone()
        };
        let mut cells = Vec::new();
        match id {
            "fig2-top" => {
                for m in FIG2_ENSEMBLES {
                    for tau in FIG2_DELAYS {
                        cells.push(ExperimentConfig {
                            ensemble: m,
                            tau,
                            ..with(TaskKind::Memory)
                        });
                    }
                }
            }
            "fig2-bottom" => {
                for big in [false, true] {
                    for m in &FIG2_ENSEMBLES[..4] {
                        let c = ExperimentConfig {
                            ensemble: *m,
                            tau: 5,
                            ..with(TaskKind::Memory)
                        };
                        cells.push(if big { big_esn(c) } else { c });
                    }
                }
            }
            "fig3" => {
                for task in FIG4_TASKS {
                    for n in FIG3_MODES {
                        if task.check_modes(n).is_err() {
                            continue;
                        }
                        for n_esn in FIG3_NEURONS {
                            cells.push(ExperimentConfig {
                                n_modes: n,
                                n_esn,
                                tau: 2,
                                tau_prime: DelaySplit::Auto,
                                ..with(task)
                            });
                        }
                    }
                }
            }
            "fig4" => {
                for task in FIG4_TASKS {
                    for baseline in [Baseline::Hybrid, Baseline::QrcOnly, Baseline::EsnOnly] {
                        for tau in FIG4_DELAYS {
                            let split = if task == TaskKind::Trace {
                                DelaySplit::Fixed(0)
                            } else {
                                DelaySplit::Auto
                            };
                            cells.push(ExperimentConfig {
                                tau,
                                tau_prime: split,
                                baseline,
                                ..with(task)
                            });
                        }
                    }
                }
            }
            "fig5" => {
                for r in fig5_reflectivities() {
                    for p in fig5_sparsities() {
                        for tau in FIG5_DELAYS {
                            cells.push(ExperimentConfig {
                                reflectivity: r,
                                sparsity: p,
                                tau,
                                baseline: Baseline::Qrc,
                                ..with(TaskKind::OffDiagonal)
                            });
                        }
                    }
                }
            }
            "fig6" => {
                for task in [TaskKind::Trace, TaskKind::Determinant] {
                    for tau in FIG6_DELAYS {
                        for tp in 0..=tau {
                            cells.push(ExperimentConfig {
                                tau,
                                tau_prime: DelaySplit::Fixed(tp),
                                ..with(task)
                            });
                        }
                    }
                }
            }
            other => {
                return Err(Error::InvalidConfig(format!(
                    "unknown preset '{other}' (expected one of {})",
                    IDS.join(", ")
                )))
            }
        }
        Ok(cells)
    }

    /// Cartesian grid over `key=v1,v2,…` axes separated by `;`, applied on
    /// top of `base`.
    pub fn grid(spec: &str, base: &ExperimentConfig) -> Result<Vec<ExperimentConfig>> {
        let mut cells = vec![base.clone()];
        for axis in spec.split(';').map(str::trim).filter(|a| !a.is_empty()) {
            let (key, values) = axis
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("grid axis '{axis}' lacks '='")))?;
            let values: Vec<&str> = values.split(',').map(str::trim).filter(|v| !v.is_empty()).collect();
            if values.is_empty() {
                return Err(Error::InvalidConfig(format!("grid axis '{key}' has no values")));
            }
            let mut next = Vec::with_capacity(cells.len() * values.len());
            for c in &cells {
                for v in &values {
                    let mut c = c.clone();
                    c.set(key.trim(), v)?;
                    next.push(c);
                }
            }
            cells = next;
        }
        Ok(cells)
    }
}
