//! Complex FFT for arbitrary lengths.
//!
//! Powers of two use an iterative radix-2 transform. Every other length goes
//! through Bluestein's chirp-z identity, which rewrites the length-`n` DFT as
//! a circular convolution of power-of-two length `m >= 2n - 1`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

#[inline]
fn cis(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    /// `e^{-2 pi i k / n}` for `k < n / 2`.
    twiddles: Vec<Complex64>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2).map(|k| cis(-2.0 * PI * k as f64 / n as f64)).collect();
        Self { n, twiddles }
    }

    fn forward(&self, data: &mut [Complex64]) {
        let n = self.n;
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                data.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            len *= 2;
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    inner: Radix2,
    /// `e^{-i pi k^2 / n}` for `k < n`.
    chirp: Vec<Complex64>,
    /// Forward transform of the conjugate chirp, wrapped to length `m`, scaled by `1/m`.
    kernel: Vec<Complex64>,
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let m = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(m);
        // k^2 mod 2n keeps the angle small so large k lose no precision.
        let two_n = 2 * n as u128;
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let r = (k as u128 * k as u128) % two_n;
                cis(-PI * r as f64 / n as f64)
            })
            .collect();
        let mut kernel = vec![Complex64::new(0.0, 0.0); m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            let c = chirp[k].conj();
            kernel[k] = c;
            kernel[m - k] = c;
        }
        inner.forward(&mut kernel);
        let scale = 1.0 / m as f64;
        for v in &mut kernel {
            *v *= scale;
        }
        Self { inner, chirp, kernel }
    }

    fn forward(&self, data: &mut [Complex64]) {
        let m = self.inner.n;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for ((b, &x), &c) in buf.iter_mut().zip(data.iter()).zip(&self.chirp) {
            *b = x * c;
        }
        self.inner.forward(&mut buf);
        for (b, &k) in buf.iter_mut().zip(&self.kernel) {
            *b = (*b * k).conj();
        }
        // Inverse transform as conj(forward(conj(.))); the 1/m is in the kernel.
        self.inner.forward(&mut buf);
        for ((x, b), &c) in data.iter_mut().zip(&buf).zip(&self.chirp) {
            *x = b.conj() * c;
        }
    }
}

#[derive(Debug, Clone)]
enum Algorithm {
    Radix2(Radix2),
    Bluestein(Bluestein),
}

/// A reusable transform plan for one length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    algorithm: Algorithm,
}

impl Fft {
    /// Plans a transform of length `len` (`len >= 1`).
    pub fn new(len: usize) -> Self {
        assert!(len >= 1, "FFT length must be positive");
        let algorithm = if len.is_power_of_two() {
            Algorithm::Radix2(Radix2::new(len))
        } else {
            Algorithm::Bluestein(Bluestein::new(len))
        };
        Self { len, algorithm }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In place `X_k = sum_j x_j e^{-2 pi i k j / n}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len, "buffer length does not match the plan");
        match &self.algorithm {
            Algorithm::Radix2(p) => p.forward(data),
            Algorithm::Bluestein(p) => p.forward(data),
        }
    }

    /// In place `x_j = sum_k X_k e^{+2 pi i k j / n}`, without the `1/n` factor.
    pub fn inverse_unscaled(&self, data: &mut [Complex64]) {
        for v in data.iter_mut() {
            *v = v.conj();
        }
        self.forward(data);
        for v in data.iter_mut() {
            *v = v.conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| v * cis(-2.0 * PI * ((k * j) % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let mut next = || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn matches_naive_for_many_lengths() {
        for n in [1usize, 2, 3, 4, 5, 7, 8, 12, 16, 17, 31, 64, 100, 101, 255, 256] {
            let x = pseudo_random(n, n as u64);
            let mut y = x.clone();
            Fft::new(n).forward(&mut y);
            let want = naive(&x);
            let scale = want.iter().map(|v| v.norm()).fold(1e-300, f64::max);
            for (a, b) in y.iter().zip(&want) {
                assert!((a - b).norm() / scale < 1e-12, "n = {n}");
            }
        }
    }

    #[test]
    fn inverse_undoes_forward() {
        for n in [6usize, 16, 1667] {
            let x = pseudo_random(n, 3);
            let mut y = x.clone();
            let plan = Fft::new(n);
            plan.forward(&mut y);
            plan.inverse_unscaled(&mut y);
            for (a, b) in y.iter().zip(&x) {
                assert!((a / n as f64 - b).norm() < 1e-12);
            }
        }
    }
}
