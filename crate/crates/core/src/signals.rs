//! The benchmark signals, sampled on half-open uniform grids
//! `x_j = x_start + j * (x_end - x_start) / n`, `j = 0..n`.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::error::invalid;
use crate::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 5001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SignalKind {
    /// `0.1x^3 - 0.1x^2 - 0.5x + 0.3 + sin(50x)`
    SineOnPolynomial,
    /// Six-term trigonometric ENSO surrogate.
    Enso,
    /// `cos[pi (f0 + (fT - f0)/T x^3) x^3]`
    Chirp,
    /// Low tones on `x < 0`, high tones on `x >= 0`.
    Piecewise,
    /// `sin x` plus three signum square waves.
    SquareWave,
    /// Mackey-Glass delay differential equation.
    MackeyGlass,
    /// `sin 5x + sin 7x + sin 11x`
    F1,
    /// `sin 17x + sin 19x + sin 23x`
    F2,
    /// `sin 67x + sin 71x + sin 73x`
    F3,
}

impl SignalKind {
    pub const ALL: [SignalKind; 9] = [
        SignalKind::SineOnPolynomial,
        SignalKind::Enso,
        SignalKind::Chirp,
        SignalKind::Piecewise,
        SignalKind::SquareWave,
        SignalKind::MackeyGlass,
        SignalKind::F1,
        SignalKind::F2,
        SignalKind::F3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SignalKind::SineOnPolynomial => "sine_on_polynomial",
            SignalKind::Enso => "enso",
            SignalKind::Chirp => "chirp",
            SignalKind::Piecewise => "piecewise",
            SignalKind::SquareWave => "square_wave",
            SignalKind::MackeyGlass => "mackey_glass",
            SignalKind::F1 => "f1",
            SignalKind::F2 => "f2",
            SignalKind::F3 => "f3",
        }
    }

    pub fn is_closed_form(self) -> bool {
        self != SignalKind::MackeyGlass
    }

    /// Default sampling domain `[x_start, x_end)`.
    pub fn default_domain(self) -> (f64, f64) {
        match self {
            SignalKind::SineOnPolynomial | SignalKind::Piecewise | SignalKind::SquareWave => (-PI, PI),
            SignalKind::Enso => (0.0, 24.0),
            SignalKind::Chirp => (0.0, 1.0),
            SignalKind::MackeyGlass => {
                let c = MackeyGlassConfig::default();
                (c.transient_skip, 600.0)
            }
            SignalKind::F1 | SignalKind::F2 | SignalKind::F3 => (0.0, 2.0 * PI),
        }
    }
}

impl fmt::Display for SignalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SignalKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| invalid(format!("unknown signal `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpParams {
    pub period: f64,
    pub f0: f64,
    pub f_end: f64,
    /// Use the conventional `cos[pi (f0 + (fT - f0)/T x) x]` instead of the cubic form.
    pub linear: bool,
}

impl Default for ChirpParams {
    fn default() -> Self {
        Self { period: 1.0, f0: 0.01, f_end: 50.0, linear: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MackeyGlassConfig {
    pub delay: f64,
    pub production: f64,
    pub decay: f64,
    pub exponent: f64,
    /// Constant solution value for arguments `<= 0`.
    pub history: f64,
    pub step: f64,
    pub transient_skip: f64,
}

impl Default for MackeyGlassConfig {
    fn default() -> Self {
        Self {
            delay: 30.0,
            production: 0.2,
            decay: 0.1,
            exponent: 10.0,
            history: 1.2,
            step: 0.01,
            transient_skip: 100.0,
        }
    }
}

impl MackeyGlassConfig {
    fn delay_steps(&self) -> Result<usize> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid("Mackey-Glass step must be positive"));
        }
        if !(self.delay > 0.0 && self.delay.is_finite()) {
            return Err(invalid("Mackey-Glass delay must be positive"));
        }
        let ratio = self.delay / self.step;
        let steps = libm::round(ratio);
        if (ratio - steps).abs() > 1e-9 * ratio {
            return Err(invalid("Mackey-Glass delay must be an integer multiple of the step"));
        }
        Ok(steps as usize)
    }

    #[inline]
    fn rate(&self, y: f64, delayed: f64) -> f64 {
        self.production * delayed / (1.0 + libm::pow(delayed, self.exponent)) - self.decay * y
    }
}

/// Solution of the delay equation on the grid `x_i = i * step`.
#[derive(Debug, Clone, PartialEq)]
pub struct MackeyGlassSolution {
    step: f64,
    history: f64,
    values: Vec<f64>,
}

/// Four-point Lagrange weights at fractional offset `s` from the second node
/// of the stencil `{-1, 0, 1, 2}`.
#[inline]
fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

impl MackeyGlassSolution {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x_end(&self) -> f64 {
        (self.values.len() - 1) as f64 * self.step
    }

    /// Grid value with index `i`; the history for negative indices.
    fn node(&self, i: isize) -> f64 {
        if i < 0 {
            self.history
        } else {
            self.values[(i as usize).min(self.values.len() - 1)]
        }
    }

    /// Cubic interpolation of the stored solution, using only nodes with
    /// index `<= limit`. Arguments `<= 0` return the history value.
    fn interpolate(&self, x: f64, limit: usize) -> f64 {
        if x <= 0.0 {
            return self.history;
        }
        let t = x / self.step;
        let mut base = libm::floor(t) as isize;
        // Shift the stencil left if its right end is not yet integrated.
        base = base.min(limit as isize - 2);
        let s = t - base as f64;
        let w = cubic_weights(s);
        (0..4).map(|k| w[k] * self.node(base - 1 + k as isize)).sum()
    }

    /// The dense solution at `x`.
    pub fn eval(&self, x: f64) -> f64 {
        self.interpolate(x, self.values.len() - 1)
    }
}

/// Fixed-step RK4 for `y' = a y(x - tau) / (1 + y(x - tau)^p) - c y(x)` on
/// `[0, x_end]`. Delayed values at half steps come from cubic interpolation
/// of the stored solution.
pub fn integrate_mackey_glass(config: &MackeyGlassConfig, x_end: f64) -> Result<MackeyGlassSolution> {
    if !(x_end > 0.0 && x_end.is_finite()) {
        return Err(invalid("x_end must be positive"));
    }
    let delay = config.delay_steps()?;
    let h = config.step;
    let steps = libm::ceil(x_end / h - 1e-9) as usize;
    let mut sol = MackeyGlassSolution {
        step: h,
        history: config.history,
        values: Vec::with_capacity(steps + 1),
    };
    sol.values.push(config.history);
    for i in 0..steps {
        let y = sol.values[i];
        let lag = i as isize - delay as isize;
        let d0 = sol.node(lag);
        let d1 = sol.node(lag + 1);
        let dm = if lag < 0 {
            config.history
        } else {
            sol.interpolate((lag as f64 + 0.5) * h, i)
        };
        let k1 = config.rate(y, d0);
        let k2 = config.rate(y + 0.5 * h * k1, dm);
        let k3 = config.rate(y + 0.5 * h * k2, dm);
        let k4 = config.rate(y + h * k3, d1);
        let next = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !next.is_finite() {
            return Err(Error::Integration { x: (i + 1) as f64 * h, reason: "non-finite state" });
        }
        sol.values.push(next);
    }
    Ok(sol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalSpec {
    pub kind: SignalKind,
    pub x_start: f64,
    pub x_end: f64,
    pub samples: usize,
    pub chirp: ChirpParams,
    pub mackey_glass: MackeyGlassConfig,
}

impl SignalSpec {
    /// Default domain, `n = 5001`, default kind parameters.
    pub fn new(kind: SignalKind) -> Self {
        let (x_start, x_end) = kind.default_domain();
        Self {
            kind,
            x_start,
            x_end,
            samples: DEFAULT_SAMPLES,
            chirp: ChirpParams::default(),
            mackey_glass: MackeyGlassConfig::default(),
        }
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_domain(mut self, x_start: f64, x_end: f64) -> Self {
        self.x_start = x_start;
        self.x_end = x_end;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_start.is_finite() && self.x_end.is_finite() && self.x_start < self.x_end) {
            return Err(invalid("signal domain must satisfy x_start < x_end"));
        }
        if self.samples < 2 {
            return Err(invalid("a signal needs at least 2 samples"));
        }
        if self.kind == SignalKind::MackeyGlass && self.x_start < 0.0 {
            return Err(invalid("Mackey-Glass samples must lie in x >= 0"));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.x_end - self.x_start) / self.samples as f64
    }

    /// `x_start + (j + offset) * dx` for `j = 0..n`.
    pub fn grid_shifted(&self, offset: f64) -> Vec<f64> {
        let dx = self.spacing();
        (0..self.samples).map(|j| self.x_start + (j as f64 + offset) * dx).collect()
    }

    pub fn grid(&self) -> Vec<f64> {
        self.grid_shifted(0.0)
    }
}

#[inline]
fn signum(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Evaluates a closed-form signal at `x`.
pub fn eval_closed_form(spec: &SignalSpec, x: f64) -> Result<f64> {
    use libm::{cos, sin};
    let v = match spec.kind {
        SignalKind::SineOnPolynomial => 0.1 * x * x * x - 0.1 * x * x - 0.5 * x + 0.3 + sin(50.0 * x),
        SignalKind::Enso => {
            let p = 2.0 * PI * x;
            4.7 * cos(p / 12.0) + 1.1 * sin(p / 12.0) + 0.2 * cos(p / 1.7) + 2.7 * sin(p / 1.7)
                + 2.1 * cos(p / 0.7)
                + 2.1 * sin(p / 0.7)
                - 0.5
        }
        SignalKind::Chirp => {
            let c = &spec.chirp;
            let u = if c.linear { x } else { x * x * x };
            cos(PI * (c.f0 + (c.f_end - c.f0) / c.period * u) * u)
        }
        SignalKind::Piecewise => {
            if x < 0.0 {
                10.0 * (sin(x) + sin(3.0 * x))
            } else {
                10.0 * (sin(23.0 * x) + sin(137.0 * x) + sin(203.0 * x))
            }
        }
        SignalKind::SquareWave => {
            sin(x) + signum(sin(13.0 * x)) + signum(sin(23.0 * x)) + signum(sin(47.0 * x))
        }
        SignalKind::F1 => sin(5.0 * x) + sin(7.0 * x) + sin(11.0 * x),
        SignalKind::F2 => sin(17.0 * x) + sin(19.0 * x) + sin(23.0 * x),
        SignalKind::F3 => sin(67.0 * x) + sin(71.0 * x) + sin(73.0 * x),
        SignalKind::MackeyGlass => {
            return Err(invalid("mackey_glass has no closed form; use sample_signal"));
        }
    };
    Ok(v)
}

/// Samples the signal on `x_j + offset * dx`. For Mackey-Glass the equation is
/// integrated from 0 and the dense solution is read off on the grid.
pub fn sample_signal_shifted(spec: &SignalSpec, offset: f64) -> Result<Vec<f64>> {
    spec.validate()?;
    let grid = spec.grid_shifted(offset);
    if spec.kind == SignalKind::MackeyGlass {
        let end = grid.last().copied().unwrap_or(spec.x_end).max(spec.x_end);
        let sol = integrate_mackey_glass(&spec.mackey_glass, end)?;
        return Ok(grid.iter().map(|&x| sol.eval(x)).collect());
    }
    grid.iter().map(|&x| eval_closed_form(spec, x)).collect()
}

pub fn sample_signal(spec: &SignalSpec) -> Result<Vec<f64>> {
    sample_signal_shifted(spec, 0.0)
}
