//! Experiment orchestration: single fits, sweeps and signal dumps.
//!
//! Every run writes into its own directory, so concurrent cells never share
//! a file. Nothing time-dependent goes into the CSVs that must be
//! reproducible; wall-clock figures live in `timing.csv` and `run.meta`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use pffdnn_core::fitters::{
    fit_phasednn, fit_pffdnn, fit_vanilla, Executor, FitResult, Method, SampledSignal,
};
use pffdnn_core::nn::Trainer;
use pffdnn_core::seed::derive_seed;
use pffdnn_core::signals::SignalSpec;
use pffdnn_core::spectral::SpectralTransform;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, DEFAULT_DELTA_OMEGAS, DEFAULT_SWEEP_METHODS};
use crate::error::{HarnessError, Result};
use crate::plot::{self, PlotSpec};
use crate::records::{self, ConvergenceRecord, ReconstructionRow, SampleRow, SpectrumRow, TimingRecord};

pub const CONVERGENCE_CSV: &str = "convergence.csv";
pub const TIMING_CSV: &str = "timing.csv";
pub const RECONSTRUCTION_CSV: &str = "reconstruction.csv";
pub const RUN_META: &str = "run.meta";
pub const SWEEP_CSV: &str = "sweep.csv";
pub const SAMPLES_CSV: &str = "samples.csv";
pub const SPECTRUM_CSV: &str = "spectrum.csv";

/// Trains the networks of a fit on the current rayon pool and reads a
/// monotonic clock.
#[derive(Debug, Clone, Copy)]
pub struct Threaded {
    start: Instant,
}

impl Threaded {
    pub fn new() -> Self {
        Self { start: Instant::now() }
    }
}

impl Default for Threaded {
    fn default() -> Self {
        Self::new()
    }
}

impl Executor for Threaded {
    fn advance(&self, trainers: &mut [Trainer], steps: usize) -> pffdnn_core::Result<()> {
        trainers.par_iter_mut().try_for_each(|t| t.advance(steps))
    }

    fn now(&self) -> Option<f64> {
        Some(self.start.elapsed().as_secs_f64())
    }
}

/// A finished fit and where its artifacts went.
#[derive(Debug, Clone)]
pub struct FitRun {
    pub dir: PathBuf,
    pub result: FitResult,
    pub records: Vec<ConvergenceRecord>,
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub dir: PathBuf,
    pub cells: Vec<FitRun>,
    /// All cells' records sorted by `(method, delta_omega, update_count)`.
    pub records: Vec<ConvergenceRecord>,
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| HarnessError::usage(format!("cannot start {jobs} worker threads: {e}")))
}

pub fn convergence_records(result: &FitResult, spec: &SignalSpec, seed: u64) -> Vec<ConvergenceRecord> {
    result
        .checkpoints
        .iter()
        .map(|c| ConvergenceRecord {
            method: result.method,
            signal: spec.kind,
            delta_omega: result.delta_omega,
            seed,
            update_count: c.updates,
            rmse: c.rmse,
            relative_rmse: c.relative_rmse,
            test_rmse: c.test_rmse,
            train_mse: c.train_mse,
        })
        .collect()
}

fn run_meta(config: &ExperimentConfig, result: &FitResult) -> String {
    let dws: Vec<usize> = result.delta_omega.into_iter().collect();
    let mut s = config.to_text(&[result.method], &dws);
    let _ = writeln!(s, "meta.version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(s, "meta.core_version = {}", pffdnn_core::VERSION);
    let _ = writeln!(s, "meta.seed_rule = splitmix64 chain over (seed, method, index, part)");
    let _ = writeln!(s, "meta.networks = {}", result.networks);
    let indices = match &result.plan {
        Some(plan) => {
            let _ = writeln!(s, "meta.retained_segments = {}", plan.retained());
            let _ = writeln!(s, "meta.retained_bins = {}", plan.retained_bins());
            plan.retained()
        }
        None => 1,
    };
    let parts: &[(u8, &str)] = if result.method == Method::Vanilla { &[(0, "re")] } else { &[(0, "re"), (1, "im")] };
    for i in 0..indices {
        for &(p, name) in parts {
            let _ = writeln!(s, "meta.seed.{i}.{name} = {}", derive_seed(config.seed, result.method.as_str(), i, p));
        }
    }
    let last = result.final_checkpoint();
    let _ = writeln!(s, "meta.final_updates = {}", last.updates);
    let _ = writeln!(s, "meta.final_relative_rmse = {}", records::fmt_f64(last.relative_rmse));
    if let Some(w) = last.wall_seconds {
        let _ = writeln!(s, "meta.wall_seconds = {w:.3}");
    }
    s
}

/// Runs one `(method, delta_omega)` cell into `dir`.
fn fit_cell(
    config: &ExperimentConfig,
    signal: &SampledSignal,
    method: Method,
    delta_omega: usize,
    dir: &Path,
) -> Result<FitRun> {
    create_dir(dir)?;
    let opts = config.fit_options(delta_omega);
    let exec = Threaded::new();
    let result = match method {
        Method::Vanilla => fit_vanilla(signal, &opts, &exec),
        Method::PhaseDnn => fit_phasednn(signal, &opts, &exec),
        Method::PffDnn => fit_pffdnn(signal, &opts, &exec),
    }?;

    let records = convergence_records(&result, &signal.spec, config.seed);
    records::write_csv(&dir.join(CONVERGENCE_CSV), &records)?;
    let timing: Vec<TimingRecord> = result
        .checkpoints
        .iter()
        .map(|c| TimingRecord { update_count: c.updates, wall_seconds: c.wall_seconds.unwrap_or(0.0) })
        .collect();
    records::write_csv(&dir.join(TIMING_CSV), &timing)?;
    let rows: Vec<ReconstructionRow> = signal
        .spec
        .grid()
        .into_iter()
        .zip(signal.samples.iter().zip(&result.reconstruction))
        .map(|(x, (&f_true, &f_fit))| ReconstructionRow { x, f_true, f_fit })
        .collect();
    records::write_csv(&dir.join(RECONSTRUCTION_CSV), &rows)?;
    let meta = dir.join(RUN_META);
    std::fs::write(&meta, run_meta(config, &result)).map_err(|e| HarnessError::io(&meta, e))?;

    let title = match result.delta_omega {
        Some(dw) => format!("{} {} Δω={dw}", method, signal.spec.kind),
        None => format!("{} {}", method, signal.spec.kind),
    };
    let spec = PlotSpec { title: Some(title.clone()), ..Default::default() };
    plot::write_plot(&[dir.join(CONVERGENCE_CSV)], &spec, &dir.join("convergence.svg"))?;
    let spec = PlotSpec { title: Some(title), ..Default::default() };
    plot::write_plot(&[dir.join(RECONSTRUCTION_CSV)], &spec, &dir.join("reconstruction.svg"))?;

    Ok(FitRun { dir: dir.to_path_buf(), result, records })
}

fn generate(config: &ExperimentConfig) -> Result<SampledSignal> {
    SampledSignal::generate(&config.signal_spec())
        .map_err(|e| HarnessError::from(e).context(format!("generating {}", config.signal)))
}

/// Fits one method at one Δω and writes `convergence.csv`, `timing.csv`,
/// `reconstruction.csv`, `run.meta` and two SVG plots into `config.out`.
pub fn run_fit(config: &ExperimentConfig) -> Result<FitRun> {
    config.validate()?;
    let methods = config.resolved_methods(&[Method::PffDnn]);
    let dws = config.resolved_delta_omegas(&[DEFAULT_DELTA_OMEGAS[0]]);
    let [method] = methods[..] else {
        return Err(HarnessError::usage("fit takes exactly one method; use sweep for several"));
    };
    let [dw] = dws[..] else {
        return Err(HarnessError::usage("fit takes exactly one delta_omega; use sweep for several"));
    };
    let signal = generate(config)?;
    pool(config.jobs)?.install(|| fit_cell(config, &signal, method, dw, &config.out)).map_err(|e| {
        e.context(format!("fitting {} with {method} at delta_omega {dw}", config.signal))
    })
}

fn cell_dir(out: &Path, method: Method, delta_omega: Option<usize>) -> PathBuf {
    match delta_omega {
        Some(dw) => out.join(format!("{method}_dw{dw}")),
        None => out.join(method.as_str()),
    }
}

/// Runs every `(method, delta_omega)` cell, each into its own subdirectory,
/// then writes the combined `sweep.csv` and `sweep.svg`. Vanilla ignores Δω
/// and runs once. Cells run concurrently on `config.jobs` threads; the
/// output does not depend on the schedule.
pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepRun> {
    config.validate()?;
    let methods = config.resolved_methods(&DEFAULT_SWEEP_METHODS);
    let dws = config.resolved_delta_omegas(&DEFAULT_DELTA_OMEGAS);
    let mut cells: Vec<(Method, Option<usize>)> = Vec::new();
    for &m in &methods {
        if m == Method::Vanilla {
            if !cells.contains(&(m, None)) {
                cells.push((m, None));
            }
        } else {
            for &dw in &dws {
                if !cells.contains(&(m, Some(dw))) {
                    cells.push((m, Some(dw)));
                }
            }
        }
    }

    let signal = generate(config)?;
    create_dir(&config.out)?;
    let outcomes: Vec<Result<FitRun>> = pool(config.jobs)?.install(|| {
        cells
            .par_iter()
            .map(|&(m, dw)| {
                let dir = cell_dir(&config.out, m, dw);
                fit_cell(config, &signal, m, dw.unwrap_or(DEFAULT_DELTA_OMEGAS[0]), &dir).map_err(|e| {
                    let at = dw.map(|d| format!(" at delta_omega {d}")).unwrap_or_default();
                    e.context(format!("sweep cell {m}{at}"))
                })
            })
            .collect()
    });
    let mut runs = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        runs.push(o?);
    }

    let mut all: Vec<ConvergenceRecord> = runs.iter().flat_map(|r| r.records.iter().cloned()).collect();
    records::sort_records(&mut all);
    let combined = config.out.join(SWEEP_CSV);
    records::write_csv(&combined, &all)?;
    let spec = PlotSpec { title: Some(format!("{} sweep", config.signal)), ..Default::default() };
    plot::write_plot(&[combined], &spec, &config.out.join("sweep.svg"))?;
    Ok(SweepRun { dir: config.out.clone(), cells: runs, records: all })
}

/// Writes `samples.csv` (x, f) and `spectrum.csv` (half spectrum) for `spec` into `dir`.
pub fn dump_signal(spec: &SignalSpec, dir: &Path) -> Result<(Vec<SampleRow>, Vec<SpectrumRow>)> {
    let signal = SampledSignal::generate(spec)?;
    dump_samples(spec, &signal.samples, dir)
}

/// Like [`dump_signal`] for samples that are already on `spec`'s grid.
pub fn dump_samples(spec: &SignalSpec, samples: &[f64], dir: &Path) -> Result<(Vec<SampleRow>, Vec<SpectrumRow>)> {
    if samples.len() != spec.samples {
        return Err(HarnessError::usage("sample count does not match the signal spec"));
    }
    create_dir(dir)?;
    let rows: Vec<SampleRow> = spec.grid().into_iter().zip(samples).map(|(x, &f)| SampleRow { x, f }).collect();
    let spectrum = SpectralTransform::new(spec.samples)?.forward(samples, spec.spacing())?;
    let bins: Vec<SpectrumRow> = spectrum
        .half()
        .iter()
        .enumerate()
        .map(|(k, v)| SpectrumRow {
            k,
            frequency: spectrum.angular_frequency(k as f64),
            magnitude: v.norm(),
            re: v.re,
            im: v.im,
        })
        .collect();
    records::write_csv(&dir.join(SAMPLES_CSV), &rows)?;
    records::write_csv(&dir.join(SPECTRUM_CSV), &bins)?;
    Ok((rows, bins))
}
