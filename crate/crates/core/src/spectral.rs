//! Discrete spectra of real signals and their segmentation.
//!
//! Conventions: `F_k = sum_j f_j e^{-2 pi i k j / n}` and
//! `f_j = (1/n) sum_k F_k e^{2 pi i j k / n}`. Only the half-spectrum
//! `k = 0..half_length` with `half_length = (n - 1) / 2 + 1` is ever fitted;
//! the rest follows from `F_{n-k} = conj(F_k)`. Grids with even `n` are
//! rejected wherever the mirror is rebuilt, since they carry an unpaired
//! Nyquist bin.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::Range;

use num_complex::Complex64;

use crate::error::invalid;
use crate::fft::Fft;
use crate::{Error, Result};

/// Relative tolerance on the imaginary residue of an inverse transform.
pub const SYMMETRY_TOLERANCE: f64 = 1e-8;

/// Default fraction of half-spectrum energy the retained segments must carry.
pub const DEFAULT_ENERGY_THRESHOLD: f64 = 0.999;

pub const fn half_length(n: usize) -> usize {
    (n - 1) / 2 + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrum {
    values: Vec<Complex64>,
    sample_spacing: f64,
}

impl ComplexSpectrum {
    pub fn new(values: Vec<Complex64>, sample_spacing: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("spectrum needs at least one bin"));
        }
        if !(sample_spacing > 0.0 && sample_spacing.is_finite()) {
            return Err(invalid("sample spacing must be positive"));
        }
        Ok(Self { values, sample_spacing })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn sample_spacing(&self) -> f64 {
        self.sample_spacing
    }

    pub fn half_length(&self) -> usize {
        half_length(self.len())
    }

    pub fn half(&self) -> &[Complex64] {
        &self.values[..self.half_length()]
    }

    /// Angular frequency of bin `k` in radians per signal unit.
    pub fn angular_frequency(&self, k: f64) -> f64 {
        angular_frequency(k, self.len(), self.sample_spacing)
    }
}

/// Angular frequency of (possibly fractional) bin `k` on an `n`-point grid.
pub fn angular_frequency(k: f64, n: usize, sample_spacing: f64) -> f64 {
    2.0 * PI * k / (n as f64 * sample_spacing)
}

/// Forward and inverse transforms for one grid size, sharing a plan.
#[derive(Debug, Clone)]
pub struct SpectralTransform {
    plan: Fft,
}

impl SpectralTransform {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("transform length must be positive"));
        }
        Ok(Self { plan: Fft::new(n) })
    }

    pub fn len(&self) -> usize {
        self.plan.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Spectrum of a real signal. The upper half is written as the exact
    /// conjugate mirror of the lower half and `F_0` is made exactly real.
    pub fn forward(&self, samples: &[f64], sample_spacing: f64) -> Result<ComplexSpectrum> {
        let n = self.len();
        if samples.len() != n {
            return Err(invalid(format!("expected {n} samples, got {}", samples.len())));
        }
        let mut buf: Vec<Complex64> = samples.iter().map(|&f| Complex64::new(f, 0.0)).collect();
        self.plan.forward(&mut buf);
        buf[0].im = 0.0;
        for k in 1..half_length(n) {
            buf[n - k] = buf[k].conj();
        }
        if n.is_multiple_of(2) {
            buf[n / 2].im = 0.0;
        }
        ComplexSpectrum::new(buf, sample_spacing)
    }

    /// Real inverse transform. Fails if the imaginary residue exceeds
    /// [`SYMMETRY_TOLERANCE`] relative to the largest output magnitude.
    pub fn inverse(&self, spectrum: &ComplexSpectrum) -> Result<Vec<f64>> {
        let n = self.len();
        if spectrum.len() != n {
            return Err(invalid(format!("expected {n} bins, got {}", spectrum.len())));
        }
        let mut buf = spectrum.values.clone();
        self.plan.inverse_unscaled(&mut buf);
        let scale = 1.0 / n as f64;
        let mut peak = 0.0f64;
        let mut residual = 0.0f64;
        for v in &buf {
            peak = peak.max(v.norm() * scale);
            residual = residual.max(v.im.abs() * scale);
        }
        if !peak.is_finite() {
            return Err(Error::NonFinite("inverse transform"));
        }
        let tolerance = SYMMETRY_TOLERANCE * peak;
        if residual > tolerance {
            return Err(Error::Asymmetric { residual, tolerance });
        }
        Ok(buf.iter().map(|v| v.re * scale).collect())
    }

    /// Complex inverse `(1/n) sum_k X_k e^{2 pi i j k / n}` with no symmetry requirement.
    pub fn inverse_complex(&self, values: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.len();
        if values.len() != n {
            return Err(invalid(format!("expected {n} bins, got {}", values.len())));
        }
        let mut buf = values.to_vec();
        self.plan.inverse_unscaled(&mut buf);
        let scale = 1.0 / n as f64;
        for v in &mut buf {
            *v *= scale;
        }
        Ok(buf)
    }
}

pub fn dft_forward(samples: &[f64], sample_spacing: f64) -> Result<ComplexSpectrum> {
    SpectralTransform::new(samples.len())?.forward(samples, sample_spacing)
}

pub fn dft_inverse(spectrum: &ComplexSpectrum) -> Result<Vec<f64>> {
    SpectralTransform::new(spectrum.len())?.inverse(spectrum)
}

fn require_odd(n: usize) -> Result<()> {
    if n.is_multiple_of(2) {
        return Err(Error::UnsupportedGrid(format!(
            "n = {n} is even; conjugate extension needs an odd sample count"
        )));
    }
    Ok(())
}

/// Rebuilds a full length-`n` spectrum from bins `0..=(n-1)/2` using
/// `F_{n-k} = conj(F_k)`.
pub fn conjugate_extend(half: &[Complex64], n: usize, sample_spacing: f64) -> Result<ComplexSpectrum> {
    require_odd(n)?;
    let h = half_length(n);
    if half.len() != h {
        return Err(invalid(format!("half-spectrum of n = {n} has {h} bins, got {}", half.len())));
    }
    let mut full = vec![Complex64::new(0.0, 0.0); n];
    full[..h].copy_from_slice(half);
    for k in 1..h {
        full[n - k] = half[k].conj();
    }
    ComplexSpectrum::new(full, sample_spacing)
}

/// Partition of the half-spectrum into width-`delta_omega` segments, of
/// which the leading `retained` ones are fitted and the rest are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentPlan {
    delta_omega: usize,
    half_length: usize,
    segment_count: usize,
    retained: usize,
}

impl SegmentPlan {
    /// A plan with an explicit number of retained leading segments.
    pub fn with_retained(half_length: usize, delta_omega: usize, retained: usize) -> Result<Self> {
        if delta_omega == 0 {
            return Err(invalid("delta_omega must be at least 1"));
        }
        if half_length == 0 {
            return Err(invalid("half-spectrum is empty"));
        }
        let segment_count = half_length.div_ceil(delta_omega);
        if retained > segment_count {
            return Err(invalid(format!(
                "cannot retain {retained} of {segment_count} segments"
            )));
        }
        Ok(Self { delta_omega, half_length, segment_count, retained })
    }

    pub fn delta_omega(&self) -> usize {
        self.delta_omega
    }

    pub fn half_length(&self) -> usize {
        self.half_length
    }

    /// Number of segments tiling the half-spectrum (`m` over the half).
    pub fn segment_count(&self) -> usize {
        self.segment_count
    }

    /// Number of leading segments that carry data; `0` for a zero spectrum.
    pub fn retained(&self) -> usize {
        self.retained
    }

    /// Index of the last retained segment (the bandwidth index `b`).
    pub fn last_retained(&self) -> Option<usize> {
        self.retained.checked_sub(1)
    }

    pub fn segment_range(&self, i: usize) -> Range<usize> {
        let start = i * self.delta_omega;
        start..(start + self.delta_omega).min(self.half_length)
    }

    pub fn segment_ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.segment_count).map(|i| self.segment_range(i))
    }

    pub fn retained_ranges(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        (0..self.retained).map(|i| self.segment_range(i))
    }

    /// One past the last retained bin.
    pub fn retained_bins(&self) -> usize {
        self.last_retained().map_or(0, |b| self.segment_range(b).end)
    }
}

/// Tiles the half-spectrum and keeps the fewest leading segments whose
/// cumulative `|F_k|^2` reaches `energy_threshold` of the half-spectrum total.
pub fn plan_segments(spectrum: &ComplexSpectrum, delta_omega: usize, energy_threshold: f64) -> Result<SegmentPlan> {
    if !(energy_threshold > 0.0 && energy_threshold <= 1.0) {
        return Err(invalid("energy threshold must lie in (0, 1]"));
    }
    let half = spectrum.half();
    let probe = SegmentPlan::with_retained(half.len(), delta_omega, 0)?;
    let total: f64 = half.iter().map(|v| v.norm_sqr()).sum();
    if total == 0.0 {
        return Ok(probe);
    }
    // Tail bins below one ulp of the running sum add nothing to it, so a
    // threshold of exactly 1 would otherwise stop early and drop them.
    if energy_threshold == 1.0 {
        return SegmentPlan::with_retained(half.len(), delta_omega, probe.segment_count);
    }
    let target = energy_threshold * total;
    let mut cumulative = 0.0;
    let mut retained = probe.segment_count;
    // Same summation order as `total`, so the last segment always qualifies.
    'outer: for (i, range) in probe.segment_ranges().enumerate() {
        for v in &half[range] {
            cumulative += v.norm_sqr();
        }
        if cumulative >= target {
            retained = i + 1;
            break 'outer;
        }
    }
    SegmentPlan::with_retained(half.len(), delta_omega, retained)
}

/// One contiguous slice of the half-spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSegment {
    pub index: usize,
    pub bins: Range<usize>,
    pub values: Vec<Complex64>,
}

/// The retained segments of `spectrum` under `plan`.
pub fn extract_segments(spectrum: &ComplexSpectrum, plan: &SegmentPlan) -> Result<Vec<SpectrumSegment>> {
    if spectrum.half_length() != plan.half_length() {
        return Err(invalid("plan does not match the spectrum length"));
    }
    let half = spectrum.half();
    Ok(plan
        .retained_ranges()
        .enumerate()
        .map(|(index, bins)| SpectrumSegment { index, values: half[bins.clone()].to_vec(), bins })
        .collect())
}

/// Assembles the approximate half-spectrum from per-segment values (zero
/// beyond the retained segments) and mirrors it to length `n`.
///
/// `segments[i]` holds the values for bins `plan.segment_range(i)`. The DC
/// bin of a real signal is real, so any imaginary part predicted there is
/// dropped before mirroring.
pub fn concatenate(segments: &[Vec<Complex64>], plan: &SegmentPlan, n: usize, sample_spacing: f64) -> Result<ComplexSpectrum> {
    require_odd(n)?;
    if half_length(n) != plan.half_length() {
        return Err(invalid("plan does not match the grid size"));
    }
    if segments.len() != plan.retained() {
        return Err(invalid(format!(
            "plan retains {} segments, got {}",
            plan.retained(),
            segments.len()
        )));
    }
    let mut half = vec![Complex64::new(0.0, 0.0); plan.half_length()];
    for (i, values) in segments.iter().enumerate() {
        let range = plan.segment_range(i);
        if values.len() != range.len() {
            return Err(invalid(format!(
                "segment {i} covers {} bins, got {} values",
                range.len(),
                values.len()
            )));
        }
        for (slot, v) in half[range].iter_mut().zip(values) {
            *slot += *v;
        }
    }
    half[0].im = 0.0;
    conjugate_extend(&half, n, sample_spacing)
}

/// Trigonometric interpolant of a half-spectrum evaluated at the shifted
/// grid `x_j + fraction * dx`. `fraction = 0.5` gives the midpoints.
pub fn interpolate_shifted(transform: &SpectralTransform, half: &[Complex64], sample_spacing: f64, fraction: f64) -> Result<Vec<f64>> {
    let n = transform.len();
    require_odd(n)?;
    let shifted: Vec<Complex64> = half
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let phase = 2.0 * PI * k as f64 * fraction / n as f64;
            v * Complex64::new(libm::cos(phase), libm::sin(phase))
        })
        .collect();
    let mut shifted = shifted;
    shifted[0].im = 0.0;
    transform.inverse(&conjugate_extend(&shifted, n, sample_spacing)?)
}
