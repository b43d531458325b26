//! Independent reference implementations shared by the integration tests.
//! None of these call into the code they check.
#![allow(dead_code)]

use std::f64::consts::PI;

use pffdnn_core::nn::{DenseNetwork, TrainingSet};
use pffdnn_core::signals::MackeyGlassConfig;
use pffdnn_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_signal(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `F_k = sum_j f_j exp(-2 pi i k j / n)`, summed directly. The phase index
/// `k j mod n` is reduced exactly in integers before the trig call.
pub fn naive_dft(f: &[f64]) -> Vec<Complex64> {
    let n = f.len();
    (0..n)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &v) in f.iter().enumerate() {
                let phase = -2.0 * PI * ((k * j) % n) as f64 / n as f64;
                acc += Complex64::new(v * phase.cos(), v * phase.sin());
            }
            acc
        })
        .collect()
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, c| m.max(c.norm()))
}

/// `rmse(a, b) / rms(b)`, or the plain RMSE for an all-zero `b`.
pub fn relative_rmse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    let err = (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / n).sqrt();
    let rms = (b.iter().map(|y| y * y).sum::<f64>() / n).sqrt();
    if rms > 0.0 {
        err / rms
    } else {
        err
    }
}

/// Plain loop forward pass over the public weight and bias blocks.
pub fn naive_forward(net: &DenseNetwork, x: f64) -> f64 {
    let mut a = vec![x];
    let last = net.layer_count() - 1;
    for l in 0..net.layer_count() {
        let w = net.weights(l);
        let b = net.biases(l);
        let n_in = a.len();
        let z: Vec<f64> = (0..b.len())
            .map(|o| b[o] + (0..n_in).map(|i| w[o * n_in + i] * a[i]).sum::<f64>())
            .collect();
        a = if l < last {
            z.iter().map(|&v| if v > 0.0 { v } else { net.alpha() * (v.exp() - 1.0) }).collect()
        } else {
            z
        };
    }
    a[0]
}

pub fn naive_mse(net: &DenseNetwork, data: &TrainingSet) -> f64 {
    data.inputs()
        .iter()
        .zip(data.targets())
        .map(|(&x, &t)| (naive_forward(net, x) - t).powi(2))
        .sum::<f64>()
        / data.len() as f64
}

/// Central differences of [`naive_mse`] in every parameter.
pub fn fd_gradient(net: &DenseNetwork, data: &TrainingSet, h: f64) -> Vec<f64> {
    let mut probe = net.clone();
    (0..net.param_count())
        .map(|p| {
            let orig = probe.params()[p];
            probe.params_mut()[p] = orig + h;
            let up = naive_mse(&probe, data);
            probe.params_mut()[p] = orig - h;
            let down = naive_mse(&probe, data);
            probe.params_mut()[p] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Explicit Euler for the delay equation on the grid `i * h`. With `tau / h`
/// an integer the delayed value is a stored grid value, so no interpolation
/// is involved.
pub fn mackey_glass_euler(cfg: &MackeyGlassConfig, h: f64, x_end: f64) -> Vec<f64> {
    let delay = (cfg.delay / h).round() as usize;
    let steps = (x_end / h).round() as usize;
    let mut y = Vec::with_capacity(steps + 1);
    y.push(cfg.history);
    for i in 0..steps {
        let d = if i >= delay { y[i - delay] } else { cfg.history };
        let rate = cfg.production * d / (1.0 + d.powf(cfg.exponent)) - cfg.decay * y[i];
        y.push(y[i] + h * rate);
    }
    y
}
