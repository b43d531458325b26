//! Experiment configuration.
//!
//! The file format is line-oriented `key = value` text. Blank lines and lines
//! starting with `#` are ignored, lists are comma separated, and keys starting
//! with `meta.` are skipped so a `run.meta` file can be fed back in as a
//! config. Command-line flags are applied through the same [`ExperimentConfig::set`]
//! after the file, so they override it.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pffdnn_core::fitters::{FitOptions, Method, DEFAULT_EVAL_EVERY, DEFAULT_NET_SHAPE};
use pffdnn_core::nn::{DEFAULT_BATCH_SIZE, DEFAULT_LEARNING_RATE};
use pffdnn_core::signals::{SignalKind, SignalSpec, DEFAULT_SAMPLES};
use pffdnn_core::spectral::DEFAULT_ENERGY_THRESHOLD;

use crate::error::{HarnessError, Result};

pub const DEFAULT_DELTA_OMEGAS: [usize; 5] = [11, 21, 31, 41, 51];
pub const DEFAULT_SWEEP_METHODS: [Method; 2] = [Method::PhaseDnn, Method::PffDnn];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub signal: SignalKind,
    pub x_start: Option<f64>,
    pub x_end: Option<f64>,
    pub samples: usize,
    pub chirp_linear: bool,
    /// `None` means the subcommand's default (pffdnn for `fit`, both
    /// spectral methods for `sweep`).
    pub methods: Option<Vec<Method>>,
    /// `None` means the subcommand's default (11 for `fit`, the full list for `sweep`).
    pub delta_omegas: Option<Vec<usize>>,
    pub updates: usize,
    pub eval_every: usize,
    pub seed: u64,
    pub net_shape: Vec<usize>,
    pub energy_threshold: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Worker threads; 0 lets the pool pick.
    pub jobs: usize,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            signal: SignalKind::SineOnPolynomial,
            x_start: None,
            x_end: None,
            samples: DEFAULT_SAMPLES,
            chirp_linear: false,
            methods: None,
            delta_omegas: None,
            updates: 10_000,
            eval_every: DEFAULT_EVAL_EVERY,
            seed: 0,
            net_shape: DEFAULT_NET_SHAPE.to_vec(),
            energy_threshold: DEFAULT_ENERGY_THRESHOLD,
            learning_rate: DEFAULT_LEARNING_RATE,
            batch_size: DEFAULT_BATCH_SIZE,
            jobs: 0,
            out: PathBuf::from("out"),
        }
    }
}

fn parse_scalar<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::usage(format!("invalid value `{value}` for `{key}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let value = value.trim();
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_scalar(key, v)).collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "signal" => {
                self.signal = v.parse().map_err(|e: pffdnn_core::Error| HarnessError::usage(e.to_string()))?
            }
            "x_start" => self.x_start = Some(parse_scalar(key, v)?),
            "x_end" => self.x_end = Some(parse_scalar(key, v)?),
            "samples" => self.samples = parse_scalar(key, v)?,
            "chirp_linear" => self.chirp_linear = parse_scalar(key, v)?,
            "method" => {
                let methods = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| s.trim().parse::<Method>().map_err(|e| HarnessError::usage(e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                self.methods = Some(methods);
            }
            "delta_omega" => self.delta_omegas = Some(parse_list(key, v)?),
            "updates" => self.updates = parse_scalar(key, v)?,
            "eval_every" => self.eval_every = parse_scalar(key, v)?,
            "seed" => self.seed = parse_scalar(key, v)?,
            "net_shape" => self.net_shape = parse_list(key, v)?,
            "energy_threshold" => self.energy_threshold = parse_scalar(key, v)?,
            "learning_rate" => self.learning_rate = parse_scalar(key, v)?,
            "batch_size" => self.batch_size = parse_scalar(key, v)?,
            "jobs" => self.jobs = parse_scalar(key, v)?,
            "out" => self.out = PathBuf::from(v),
            _ => return Err(HarnessError::usage(format!("unknown config key `{key}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of `text` in order.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| HarnessError::usage(format!("config line {}: expected `key = value`", i + 1)))?;
            let key = key.trim();
            if key.starts_with("meta.") {
                continue;
            }
            self.set(key, value).map_err(|e| match e {
                HarnessError::Usage(m) => HarnessError::usage(format!("config line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    pub fn signal_spec(&self) -> SignalSpec {
        let mut spec = SignalSpec::new(self.signal).with_samples(self.samples);
        let (a, b) = self.signal.default_domain();
        spec = spec.with_domain(self.x_start.unwrap_or(a), self.x_end.unwrap_or(b));
        spec.chirp.linear = self.chirp_linear;
        spec
    }

    pub fn fit_options(&self, delta_omega: usize) -> FitOptions {
        FitOptions {
            net_shape: self.net_shape.clone(),
            updates: self.updates,
            eval_every: self.eval_every,
            seed: self.seed,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            delta_omega,
            energy_threshold: self.energy_threshold,
            stop_below: None,
        }
    }

    pub fn resolved_methods(&self, default: &[Method]) -> Vec<Method> {
        self.methods.clone().unwrap_or_else(|| default.to_vec())
    }

    pub fn resolved_delta_omegas(&self, default: &[usize]) -> Vec<usize> {
        self.delta_omegas.clone().unwrap_or_else(|| default.to_vec())
    }

    /// Checks every field without running anything.
    pub fn validate(&self) -> Result<()> {
        self.signal_spec().validate().map_err(|e| HarnessError::usage(e.to_string()))?;
        if let Some(m) = &self.methods {
            if m.is_empty() {
                return Err(HarnessError::usage("method list is empty"));
            }
        }
        if let Some(d) = &self.delta_omegas {
            if d.is_empty() {
                return Err(HarnessError::usage("delta_omega list is empty"));
            }
            if d.contains(&0) {
                return Err(HarnessError::usage("delta_omega entries must be at least 1"));
            }
        }
        self.fit_options(1).validate().map_err(|e| HarnessError::usage(e.to_string()))
    }

    /// The resolved configuration in the file format, one key per line.
    pub fn to_text(&self, methods: &[Method], delta_omegas: &[usize]) -> String {
        let spec = self.signal_spec();
        let mut s = String::new();
        let _ = writeln!(s, "signal = {}", self.signal);
        let _ = writeln!(s, "x_start = {:?}", spec.x_start);
        let _ = writeln!(s, "x_end = {:?}", spec.x_end);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(s, "chirp_linear = {}", self.chirp_linear);
        let _ = writeln!(s, "method = {}", join(methods));
        if !delta_omegas.is_empty() {
            let _ = writeln!(s, "delta_omega = {}", join(delta_omegas));
        }
        let _ = writeln!(s, "updates = {}", self.updates);
        let _ = writeln!(s, "eval_every = {}", self.eval_every);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "net_shape = {}", join(&self.net_shape));
        let _ = writeln!(s, "energy_threshold = {:?}", self.energy_threshold);
        let _ = writeln!(s, "learning_rate = {:?}", self.learning_rate);
        let _ = writeln!(s, "batch_size = {}", self.batch_size);
        let _ = writeln!(s, "jobs = {}", self.jobs);
        let _ = writeln!(s, "out = {}", self.out.display());
        s
    }
}
