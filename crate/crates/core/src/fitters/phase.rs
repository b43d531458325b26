//! PhaseDNN baseline: band extraction, shift to baseband, one network pair
//! per band over the time grid, inverse shift and sum.
//!
//! Bands use the same `delta_omega` grid over the half-spectrum as the PFF
//! segments. A band is selected by masking its positive-frequency bins (no
//! conjugate mirror), which yields a complex analytic band signal `a_j`. The
//! DC bin enters band 0 with weight 1/2, so every band reassembles with the
//! same factor: `f(x) = sum_j 2 Re[g_j(x) e^{i w_j x}]`, where
//! `g_j = a_j e^{-i w_j x}` is the baseband signal the networks fit.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use num_complex::Complex64;

use super::{
    exact_reconstruction, train_checkpointed, Decomposition, Executor, FitModel, FitOptions, FitResult, Method,
    Part, PartOutputs, PartProblem, SampledSignal,
};
use crate::error::invalid;
use crate::nn::DenseNetwork;
use crate::spectral::{angular_frequency, plan_segments, ComplexSpectrum, SegmentPlan, SpectralTransform};
use crate::Result;

#[inline]
fn cis(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

/// One extracted band, shifted to baseband and sampled on the time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSignal {
    pub index: usize,
    pub bins: Range<usize>,
    /// Angular frequency of the band's middle bin (radians per signal unit).
    pub center_frequency: f64,
    pub values: Vec<Complex64>,
}

/// Baseband signals `g_j` of the retained bands of a real signal's spectrum.
/// `x_start` anchors the time grid `x_t = x_start + t * dx` used for the shift.
pub fn decompose_bands(spectrum: &ComplexSpectrum, plan: &SegmentPlan, x_start: f64) -> Result<Vec<BandSignal>> {
    let n = spectrum.len();
    if spectrum.half_length() != plan.half_length() {
        return Err(invalid("plan does not match the spectrum length"));
    }
    let transform = SpectralTransform::new(n)?;
    let dx = spectrum.sample_spacing();
    let half = spectrum.half();
    let mut bands = Vec::with_capacity(plan.retained());
    let mut masked = vec![Complex64::new(0.0, 0.0); n];
    for (index, bins) in plan.retained_ranges().enumerate() {
        masked.fill(Complex64::new(0.0, 0.0));
        masked[bins.clone()].copy_from_slice(&half[bins.clone()]);
        if bins.start == 0 {
            masked[0] *= 0.5;
        }
        let analytic = transform.inverse_complex(&masked)?;
        let middle = (bins.start + bins.end - 1) as f64 / 2.0;
        let center_frequency = angular_frequency(middle, n, dx);
        let values = analytic
            .iter()
            .enumerate()
            .map(|(t, &a)| a * cis(-center_frequency * (x_start + t as f64 * dx)))
            .collect();
        bands.push(BandSignal { index, bins, center_frequency, values });
    }
    Ok(bands)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandModel {
    pub bins: Range<usize>,
    pub center_frequency: f64,
    pub re: Option<DenseNetwork>,
    pub im: Option<DenseNetwork>,
    pub re_scale: f64,
    pub im_scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseModel {
    pub plan: SegmentPlan,
    pub x_start: f64,
    pub x_end: f64,
    pub bands: Vec<BandModel>,
}

impl PhaseModel {
    /// The fitted signal at any `x` in the domain.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let u = 2.0 * (x - self.x_start) / (self.x_end - self.x_start) - 1.0;
        let mut total = 0.0;
        for band in &self.bands {
            let part = |net: &Option<DenseNetwork>, scale: f64| -> Result<f64> {
                net.as_ref().map_or(Ok(0.0), |n| Ok(n.forward(u)? * scale))
            };
            let g = Complex64::new(part(&band.re, band.re_scale)?, part(&band.im, band.im_scale)?);
            total += 2.0 * (g * cis(band.center_frequency * x)).re;
        }
        Ok(total)
    }
}

struct PhaseProblem {
    plan: SegmentPlan,
    centers: Vec<f64>,
    grid: Vec<f64>,
    test_grid: Vec<f64>,
    parts: Vec<PartProblem>,
}

impl PhaseProblem {
    fn new(signal: &SampledSignal, delta_omega: usize, energy_threshold: f64) -> Result<Self> {
        let spec = &signal.spec;
        let transform = SpectralTransform::new(signal.len())?;
        let spectrum = transform.forward(&signal.samples, spec.spacing())?;
        let plan = plan_segments(&spectrum, delta_omega, energy_threshold)?;
        let bands = decompose_bands(&spectrum, &plan, spec.x_start)?;
        let grid = spec.grid();
        let test_grid = spec.grid_shifted(0.5);
        let inputs: Vec<f64> = grid.iter().map(|&x| signal.normalize_x(x)).collect();
        let test_inputs: Vec<f64> = test_grid.iter().map(|&x| signal.normalize_x(x)).collect();
        let mut parts = Vec::with_capacity(2 * bands.len());
        for band in &bands {
            let re: Vec<f64> = band.values.iter().map(|v| v.re).collect();
            let im: Vec<f64> = band.values.iter().map(|v| v.im).collect();
            parts.push(PartProblem::new(band.index, Part::Re, inputs.clone(), &re, Some(test_inputs.clone()))?);
            parts.push(PartProblem::new(band.index, Part::Im, inputs.clone(), &im, Some(test_inputs.clone()))?);
        }
        Ok(Self {
            plan,
            centers: bands.iter().map(|b| b.center_frequency).collect(),
            grid,
            test_grid,
            parts,
        })
    }

    fn reassemble(&self, xs: &[f64], band_parts: &[(&[f64], &[f64])]) -> Vec<f64> {
        let mut out = vec![0.0; xs.len()];
        for (&w, (re, im)) in self.centers.iter().zip(band_parts) {
            for (t, o) in out.iter_mut().enumerate() {
                *o += 2.0 * (Complex64::new(re[t], im[t]) * cis(w * xs[t])).re;
            }
        }
        out
    }
}

impl Decomposition for PhaseProblem {
    fn method(&self) -> Method {
        Method::PhaseDnn
    }

    fn parts(&self) -> &[PartProblem] {
        &self.parts
    }

    fn reconstruct(&self, outputs: &[PartOutputs]) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        let grid_parts: Vec<(&[f64], &[f64])> = outputs
            .chunks_exact(2)
            .map(|p| (p[0].grid.as_slice(), p[1].grid.as_slice()))
            .collect();
        let grid = self.reassemble(&self.grid, &grid_parts);
        let test_parts: Option<Vec<(&[f64], &[f64])>> = outputs
            .chunks_exact(2)
            .map(|p| Some((p[0].test.as_deref()?, p[1].test.as_deref()?)))
            .collect();
        let test = test_parts.map(|tp| self.reassemble(&self.test_grid, &tp));
        Ok((grid, test))
    }
}

/// Fits each frequency band in the time domain after shifting it to baseband.
pub fn fit_phasednn(signal: &SampledSignal, opts: &FitOptions, exec: &dyn Executor) -> Result<FitResult> {
    opts.validate()?;
    let problem = PhaseProblem::new(signal, opts.delta_omega, opts.energy_threshold)?;
    let trained = train_checkpointed(&problem, signal, opts, exec)?;
    let mut nets = trained.networks.into_iter();
    let mut bands = Vec::with_capacity(problem.centers.len());
    for ((pair, bins), &center) in problem.parts.chunks_exact(2).zip(problem.plan.retained_ranges()).zip(&problem.centers) {
        bands.push(BandModel {
            bins,
            center_frequency: center,
            re: nets.next().flatten(),
            im: nets.next().flatten(),
            re_scale: pair[0].scale,
            im_scale: pair[1].scale,
        });
    }
    let networks = bands.iter().map(|b| b.re.is_some() as usize + b.im.is_some() as usize).sum();
    Ok(FitResult {
        method: Method::PhaseDnn,
        delta_omega: Some(opts.delta_omega),
        plan: Some(problem.plan),
        networks,
        reconstruction: trained.reconstruction,
        checkpoints: trained.checkpoints,
        model: FitModel::Phase(PhaseModel {
            plan: problem.plan,
            x_start: signal.spec.x_start,
            x_end: signal.spec.x_end,
            bands,
        }),
    })
}

/// The PhaseDNN reconstruction with every network replaced by an exact
/// lookup of its baseband target.
pub fn phase_exact_reconstruction(signal: &SampledSignal, delta_omega: usize, energy_threshold: f64) -> Result<Vec<f64>> {
    exact_reconstruction(&PhaseProblem::new(signal, delta_omega, energy_threshold)?)
}
