//! Parallel frequency-function fitting: one network pair per spectrum segment.
//!
//! The half-spectrum is computed once, cut into `delta_omega`-bin segments,
//! and each retained segment's real and imaginary parts are regressed
//! against the bin index (mapped to `[-1, 1]` across the segment). The
//! prediction is read back at the integer bins, concatenated, mirrored, and
//! inverted.

use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;

use super::{
    exact_reconstruction, train_checkpointed, Decomposition, Executor, FitModel, FitOptions, FitResult, Method,
    Part, PartOutputs, PartProblem, SampledSignal,
};
use crate::nn::DenseNetwork;
use crate::spectral::{concatenate, interpolate_shifted, plan_segments, SegmentPlan, SpectralTransform};
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentModel {
    pub bins: Range<usize>,
    pub re: Option<DenseNetwork>,
    pub im: Option<DenseNetwork>,
    /// Max-abs target scales; 0 marks an all-zero part.
    pub re_scale: f64,
    pub im_scale: f64,
}

impl SegmentModel {
    /// Predicted spectrum values at the segment's bins.
    pub fn predict(&self) -> Result<Vec<Complex64>> {
        let inputs = bin_inputs(&self.bins);
        let part = |net: &Option<DenseNetwork>, scale: f64| -> Result<Vec<f64>> {
            match net {
                Some(n) => Ok(n.predict(&inputs)?.into_iter().map(|v| v * scale).collect()),
                None => Ok(alloc::vec![0.0; inputs.len()]),
            }
        };
        let re = part(&self.re, self.re_scale)?;
        let im = part(&self.im, self.im_scale)?;
        Ok(re.into_iter().zip(im).map(|(r, i)| Complex64::new(r, i)).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PffModel {
    pub plan: SegmentPlan,
    pub samples: usize,
    pub sample_spacing: f64,
    pub segments: Vec<SegmentModel>,
}

impl PffModel {
    pub fn reconstruct(&self) -> Result<Vec<f64>> {
        let values = self.segments.iter().map(SegmentModel::predict).collect::<Result<Vec<_>>>()?;
        let spectrum = concatenate(&values, &self.plan, self.samples, self.sample_spacing)?;
        SpectralTransform::new(self.samples)?.inverse(&spectrum)
    }
}

/// Segment bins mapped linearly onto `[-1, 1]`; a single bin maps to 0.
fn bin_inputs(bins: &Range<usize>) -> Vec<f64> {
    let len = bins.len();
    if len == 1 {
        return alloc::vec![0.0];
    }
    (0..len).map(|t| 2.0 * t as f64 / (len - 1) as f64 - 1.0).collect()
}

struct PffProblem {
    plan: SegmentPlan,
    transform: SpectralTransform,
    sample_spacing: f64,
    parts: Vec<PartProblem>,
}

impl PffProblem {
    fn new(signal: &SampledSignal, delta_omega: usize, energy_threshold: f64) -> Result<Self> {
        let n = signal.len();
        let dx = signal.spec.spacing();
        let transform = SpectralTransform::new(n)?;
        let spectrum = transform.forward(&signal.samples, dx)?;
        let plan = plan_segments(&spectrum, delta_omega, energy_threshold)?;
        let half = spectrum.half();
        let mut parts = Vec::with_capacity(2 * plan.retained());
        for (i, bins) in plan.retained_ranges().enumerate() {
            let inputs = bin_inputs(&bins);
            let re: Vec<f64> = half[bins.clone()].iter().map(|v| v.re).collect();
            let im: Vec<f64> = half[bins.clone()].iter().map(|v| v.im).collect();
            parts.push(PartProblem::new(i, Part::Re, inputs.clone(), &re, None)?);
            parts.push(PartProblem::new(i, Part::Im, inputs, &im, None)?);
        }
        Ok(Self { plan, transform, sample_spacing: dx, parts })
    }
}

impl Decomposition for PffProblem {
    fn method(&self) -> Method {
        Method::PffDnn
    }

    fn parts(&self) -> &[PartProblem] {
        &self.parts
    }

    fn reconstruct(&self, outputs: &[PartOutputs]) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let segments: Vec<Vec<Complex64>> = outputs
            .chunks_exact(2)
            .map(|pair| {
                pair[0]
                    .grid
                    .iter()
                    .zip(&pair[1].grid)
                    .map(|(&re, &im)| Complex64::new(re, im))
                    .collect()
            })
            .collect();
        let n = self.transform.len();
        let spectrum = concatenate(&segments, &self.plan, n, self.sample_spacing)?;
        let grid = self.transform.inverse(&spectrum)?;
        let mid = interpolate_shifted(&self.transform, spectrum.half(), self.sample_spacing, 0.5)?;
        Ok((grid, Some(mid)))
    }
}

/// Fits the signal segment by segment in the frequency domain.
pub fn fit_pffdnn(signal: &SampledSignal, opts: &FitOptions, exec: &dyn Executor) -> Result<FitResult> {
    opts.validate()?;
    let problem = PffProblem::new(signal, opts.delta_omega, opts.energy_threshold)?;
    let trained = train_checkpointed(&problem, signal, opts, exec)?;
    let mut nets = trained.networks.into_iter();
    let mut segments = Vec::with_capacity(problem.plan.retained());
    for (pair, bins) in problem.parts.chunks_exact(2).zip(problem.plan.retained_ranges()) {
        segments.push(SegmentModel {
            bins,
            re: nets.next().flatten(),
            im: nets.next().flatten(),
            re_scale: pair[0].scale,
            im_scale: pair[1].scale,
        });
    }
    let networks = segments.iter().map(|s| s.re.is_some() as usize + s.im.is_some() as usize).sum();
    Ok(FitResult {
        method: Method::PffDnn,
        delta_omega: Some(opts.delta_omega),
        plan: Some(problem.plan),
        networks,
        reconstruction: trained.reconstruction,
        checkpoints: trained.checkpoints,
        model: FitModel::Pff(PffModel {
            plan: problem.plan,
            samples: signal.len(),
            sample_spacing: problem.sample_spacing,
            segments,
        }),
    })
}

/// The PFF reconstruction with every network replaced by an exact lookup of
/// its segment values.
pub fn pff_exact_reconstruction(signal: &SampledSignal, delta_omega: usize, energy_threshold: f64) -> Result<Vec<f64>> {
    exact_reconstruction(&PffProblem::new(signal, delta_omega, energy_threshold)?)
}
