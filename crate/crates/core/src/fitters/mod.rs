//! The three fitting methods and the checkpointed training loop they share.
//!
//! Each method turns a sampled signal into a set of independent scalar
//! regression problems ("parts"), trains one network per part, and maps the
//! network outputs back to a time-domain reconstruction. The loop advances
//! every network by the same number of updates between checkpoints, so an
//! update count `N` means `N` Adam steps on each constituent network.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::invalid;
use crate::nn::{self, AdamState, DenseNetwork, Trainer, TrainingSet};
use crate::signals::{sample_signal, sample_signal_shifted, SignalSpec};
use crate::spectral::{SegmentPlan, DEFAULT_ENERGY_THRESHOLD};
use crate::{seed, Error, Result};

mod pff;
mod phase;
mod vanilla;

pub use pff::{fit_pffdnn, pff_exact_reconstruction, PffModel, SegmentModel};
pub use phase::{decompose_bands, fit_phasednn, phase_exact_reconstruction, BandModel, BandSignal, PhaseModel};
pub use vanilla::{fit_vanilla, VanillaModel};

pub const DEFAULT_NET_SHAPE: [usize; 5] = [1, 40, 40, 40, 1];
pub const DEFAULT_EVAL_EVERY: usize = 100;
pub const DEFAULT_DELTA_OMEGA: usize = 11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Vanilla,
    PhaseDnn,
    PffDnn,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Vanilla, Method::PhaseDnn, Method::PffDnn];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Vanilla => "vanilla",
            Method::PhaseDnn => "phasednn",
            Method::PffDnn => "pffdnn",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown method `{s}`")))
    }
}

/// Real or imaginary half of a complex target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Part {
    Re,
    Im,
}

impl Part {
    fn index(self) -> u8 {
        match self {
            Part::Re => 0,
            Part::Im => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitOptions {
    pub net_shape: Vec<usize>,
    pub updates: usize,
    pub eval_every: usize,
    pub seed: u64,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Ignored by the vanilla fitter.
    pub delta_omega: usize,
    /// Ignored by the vanilla fitter.
    pub energy_threshold: f64,
    /// Stop at the first checkpoint whose relative RMSE is at or below this.
    pub stop_below: Option<f64>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            net_shape: DEFAULT_NET_SHAPE.to_vec(),
            updates: 10_000,
            eval_every: DEFAULT_EVAL_EVERY,
            seed: 0,
            learning_rate: nn::DEFAULT_LEARNING_RATE,
            batch_size: nn::DEFAULT_BATCH_SIZE,
            delta_omega: DEFAULT_DELTA_OMEGA,
            energy_threshold: DEFAULT_ENERGY_THRESHOLD,
            stop_below: None,
        }
    }
}

impl FitOptions {
    pub fn validate(&self) -> Result<()> {
        if self.net_shape.len() < 2 || self.net_shape[0] != 1 || *self.net_shape.last().unwrap() != 1 {
            return Err(invalid("net shape must start and end with 1"));
        }
        if self.net_shape.contains(&0) {
            return Err(invalid("net shape entries must be positive"));
        }
        if self.eval_every == 0 {
            return Err(invalid("eval_every must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(invalid("batch size must be at least 1"));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(invalid("learning rate must be positive"));
        }
        if self.delta_omega == 0 {
            return Err(invalid("delta_omega must be at least 1"));
        }
        if !(self.energy_threshold > 0.0 && self.energy_threshold <= 1.0) {
            return Err(invalid("energy threshold must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Wall-clock source and training backend. The core crate only ships the
/// clockless [`Sequential`] executor; the CLI crate adds a threaded one.
pub trait Executor {
    /// Advances every trainer by `steps` updates. Trainers are independent,
    /// so any schedule gives the same result.
    fn advance(&self, trainers: &mut [Trainer], steps: usize) -> Result<()>;

    /// Monotonic time in seconds, if available.
    fn now(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn advance(&self, trainers: &mut [Trainer], steps: usize) -> Result<()> {
        trainers.iter_mut().try_for_each(|t| t.advance(steps))
    }
}

/// `sqrt(mean((a_j - b_j)^2))`.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(invalid(format!("rmse of sequences of length {} and {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(invalid("rmse of empty sequences"));
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(libm::sqrt(sum / a.len() as f64))
}

/// Root mean square of `a`.
pub fn rms(a: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    libm::sqrt(a.iter().map(|v| v * v).sum::<f64>() / a.len() as f64)
}

/// A sampled signal plus, when available, its values on the midpoint grid
/// `x_j + dx / 2` used as held-out test points.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub spec: SignalSpec,
    pub samples: Vec<f64>,
    pub midpoints: Option<Vec<f64>>,
}

impl SampledSignal {
    pub fn generate(spec: &SignalSpec) -> Result<Self> {
        Ok(Self {
            spec: *spec,
            samples: sample_signal(spec)?,
            midpoints: Some(sample_signal_shifted(spec, 0.5)?),
        })
    }

    pub fn from_samples(spec: &SignalSpec, samples: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if samples.len() != spec.samples {
            return Err(invalid("sample count does not match the signal spec"));
        }
        Ok(Self { spec: *spec, samples, midpoints: None })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Maps `x` in the domain to `[-1, 1)`.
    pub(crate) fn normalize_x(&self, x: f64) -> f64 {
        2.0 * (x - self.spec.x_start) / (self.spec.x_end - self.spec.x_start) - 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub updates: u64,
    pub rmse: f64,
    pub relative_rmse: f64,
    /// RMSE on the midpoint grid, when the signal provides midpoint values.
    pub test_rmse: Option<f64>,
    /// Mean over trained networks of their latest batch loss (normalized units).
    pub train_mse: Option<f64>,
    /// Seconds since the fit started, when the executor has a clock.
    pub wall_seconds: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FitModel {
    Vanilla(VanillaModel),
    Phase(PhaseModel),
    Pff(PffModel),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub method: Method,
    pub delta_omega: Option<usize>,
    pub plan: Option<SegmentPlan>,
    /// Networks actually trained (degenerate all-zero parts excluded).
    pub networks: usize,
    pub reconstruction: Vec<f64>,
    pub checkpoints: Vec<Checkpoint>,
    pub model: FitModel,
}

impl FitResult {
    pub fn final_checkpoint(&self) -> &Checkpoint {
        self.checkpoints.last().expect("a fit always logs checkpoint 0")
    }

    pub fn wall_seconds(&self) -> Option<f64> {
        self.final_checkpoint().wall_seconds
    }

    /// First checkpoint update count at which the relative RMSE is `<= level`.
    pub fn updates_to_reach(&self, level: f64) -> Option<u64> {
        self.checkpoints.iter().find(|c| c.relative_rmse <= level).map(|c| c.updates)
    }
}

/// One scalar regression problem. `data` is `None` for an all-zero target,
/// which is reproduced exactly as zeros without training.
#[derive(Debug, Clone)]
pub(crate) struct PartProblem {
    pub index: usize,
    pub part: Part,
    pub data: Option<TrainingSet>,
    pub scale: f64,
    /// Normalized inputs at which the reconstruction needs this part.
    pub eval_inputs: Vec<f64>,
    /// Normalized inputs on the test grid, if the method evaluates parts there.
    pub test_inputs: Option<Vec<f64>>,
}

impl PartProblem {
    /// Normalizes `targets` by their max magnitude.
    pub fn new(index: usize, part: Part, inputs: Vec<f64>, targets: &[f64], test_inputs: Option<Vec<f64>>) -> Result<Self> {
        let scale = targets.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if !scale.is_finite() {
            return Err(Error::NonFinite("fit targets"));
        }
        let data = if scale > 0.0 {
            Some(TrainingSet::new(inputs.clone(), targets.iter().map(|t| t / scale).collect())?)
        } else {
            None
        };
        Ok(Self { index, part, data, scale, eval_inputs: inputs, test_inputs })
    }

    /// Denormalized exact targets at the evaluation inputs.
    pub fn exact(&self) -> Vec<f64> {
        match &self.data {
            Some(d) => d.targets().iter().map(|t| t * self.scale).collect(),
            None => vec![0.0; self.eval_inputs.len()],
        }
    }
}

/// Per-part denormalized outputs handed to a reconstruction.
pub(crate) struct PartOutputs {
    pub grid: Vec<f64>,
    pub test: Option<Vec<f64>>,
}

pub(crate) trait Decomposition {
    fn method(&self) -> Method;
    fn parts(&self) -> &[PartProblem];
    /// Time-domain values on the sampling grid, and on the midpoint grid when
    /// the method can produce them.
    fn reconstruct(&self, outputs: &[PartOutputs]) -> Result<(Vec<f64>, Option<Vec<f64>>)>;
}

/// Trained networks, one slot per part (`None` for degenerate parts).
pub(crate) struct Trained {
    pub checkpoints: Vec<Checkpoint>,
    pub reconstruction: Vec<f64>,
    pub networks: Vec<Option<DenseNetwork>>,
}

fn evaluate(problem: &impl Decomposition, nets: &[Option<&DenseNetwork>]) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let outputs = problem
        .parts()
        .iter()
        .zip(nets)
        .map(|(p, net)| -> Result<PartOutputs> {
            Ok(match net {
                Some(net) => {
                    let denorm = |v: Vec<f64>| v.into_iter().map(|y| y * p.scale).collect::<Vec<_>>();
                    PartOutputs {
                        grid: denorm(net.predict(&p.eval_inputs)?),
                        test: p.test_inputs.as_ref().map(|t| net.predict(t)).transpose()?.map(denorm),
                    }
                }
                None => PartOutputs {
                    grid: vec![0.0; p.eval_inputs.len()],
                    test: p.test_inputs.as_ref().map(|t| vec![0.0; t.len()]),
                },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    problem.reconstruct(&outputs)
}

/// Reconstruction with every network replaced by its exact targets.
pub(crate) fn exact_reconstruction(problem: &impl Decomposition) -> Result<Vec<f64>> {
    let outputs: Vec<PartOutputs> = problem
        .parts()
        .iter()
        .map(|p| PartOutputs { grid: p.exact(), test: None })
        .collect();
    Ok(problem.reconstruct(&outputs)?.0)
}

pub(crate) fn train_checkpointed(
    problem: &impl Decomposition,
    signal: &SampledSignal,
    opts: &FitOptions,
    exec: &dyn Executor,
) -> Result<Trained> {
    opts.validate()?;
    let method = problem.method();
    let parts = problem.parts();
    let mut slots: Vec<Option<usize>> = Vec::with_capacity(parts.len());
    let mut trainers = Vec::new();
    for p in parts {
        match &p.data {
            Some(data) => {
                let (init_seed, batch_seed) = seed::split(seed::derive_seed(opts.seed, method.as_str(), p.index, p.part.index()));
                let net = nn::init_network(&opts.net_shape, init_seed)?;
                let adam = AdamState::for_network(&net).with_learning_rate(opts.learning_rate);
                slots.push(Some(trainers.len()));
                trainers.push(Trainer::new(net, adam, data.clone(), opts.batch_size, batch_seed)?);
            }
            None => slots.push(None),
        }
    }

    let signal_rms = rms(&signal.samples);
    let started = exec.now();
    let mut checkpoints = Vec::new();
    let mut done = 0usize;
    let reconstruction = loop {
        let nets: Vec<Option<&DenseNetwork>> = slots.iter().map(|s| s.map(|i| trainers[i].network())).collect();
        let (grid, test) = evaluate(problem, &nets)?;
        let err = rmse(&grid, &signal.samples)?;
        let test_rmse = match (&test, &signal.midpoints) {
            (Some(t), Some(m)) => Some(rmse(t, m)?),
            _ => None,
        };
        let losses: Vec<f64> = trainers.iter().filter_map(Trainer::last_loss).collect();
        let train_mse = (!losses.is_empty()).then(|| losses.iter().sum::<f64>() / losses.len() as f64);
        let relative_rmse = if signal_rms > 0.0 { err / signal_rms } else { err };
        checkpoints.push(Checkpoint {
            updates: done as u64,
            rmse: err,
            relative_rmse,
            test_rmse,
            train_mse,
            wall_seconds: match (started, exec.now()) {
                (Some(a), Some(b)) => Some(b - a),
                _ => None,
            },
        });
        let reached = opts.stop_below.is_some_and(|level| relative_rmse <= level);
        if done >= opts.updates || reached {
            break grid;
        }
        let steps = opts.eval_every.min(opts.updates - done);
        exec.advance(&mut trainers, steps)?;
        done += steps;
    };

    let mut nets: Vec<Option<DenseNetwork>> = Vec::with_capacity(slots.len());
    let mut owned: Vec<Option<DenseNetwork>> = trainers.into_iter().map(|t| Some(t.into_parts().0)).collect();
    for s in &slots {
        nets.push(s.and_then(|i| owned[i].take()));
    }
    Ok(Trained { checkpoints, reconstruction, networks: nets })
}
