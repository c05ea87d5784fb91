//! Power-of-two FFT and the trigonometric transforms built on it.
//!
//! Grid sizes are powers of two throughout the crate, so a radix-2
//! Cooley-Tukey kernel covers every transform we need: the 2-D torus DFT,
//! the type-I sine transform (Dirichlet eigenbasis) and the half-sample
//! cosine transform (Neumann eigenbasis).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

/// A precomputed radix-2 transform of length `n`.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(
            n.is_power_of_two() && n >= 2,
            "fft length must be a power of two"
        );
        let twiddles = (0..n / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| i.reverse_bits() >> (32 - bits))
            .collect();
        Self {
            n,
            twiddles,
            bitrev,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In place `X[k] = sum_j x[j] exp(-2 pi i jk / n)`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, false);
    }

    /// In place `x[j] = sum_k X[k] exp(+2 pi i jk / n)` (no 1/n factor).
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, true);
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                let (lo, hi) = buf[start..start + 2 * half].split_at_mut(half);
                for (k, (u, v)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w.im = -w.im;
                    }
                    let t = *v * w;
                    *v = *u - t;
                    *u += t;
                }
            }
            half *= 2;
        }
    }
}

/// Type-I sine transform: `y[m] = sum_{k=1}^{n-1} x[k] sin(pi k m / n)`
/// for `m = 1..n-1`, stored at offset `m - 1`. Works on complex data, so two
/// real transforms can share one call.
#[derive(Debug, Clone)]
pub struct SineTransform {
    n: usize,
    fft: Fft,
}

impl SineTransform {
    /// `n` is the number of intervals; the transform acts on `n - 1` values.
    pub fn new(n: usize) -> Self {
        Self {
            n,
            fft: Fft::new(2 * n),
        }
    }

    pub fn inner_len(&self) -> usize {
        self.n - 1
    }

    pub fn apply(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.n;
        debug_assert_eq!(data.len(), n - 1);
        scratch.clear();
        scratch.resize(2 * n, Complex64::new(0.0, 0.0));
        for k in 1..n {
            scratch[k] = data[k - 1];
            scratch[2 * n - k] = -data[k - 1];
        }
        self.fft.forward(scratch);
        // Y[m] = -2i * S[m]  =>  S[m] = (i/2) Y[m]
        for m in 1..n {
            let y = scratch[m];
            data[m - 1] = Complex64::new(-0.5 * y.im, 0.5 * y.re);
        }
    }
}

/// Half-sample cosine sums on `n` points:
/// `synth`: `y[i] = sum_p a[p] cos(pi p (i + 1/2) / n)`,
/// `analyze`: `c[p] = sum_i x[i] cos(pi p (i + 1/2) / n)`.
#[derive(Debug, Clone)]
pub struct CosineTransform {
    n: usize,
    fft: Fft,
    phase: Vec<Complex64>,
}

impl CosineTransform {
    pub fn new(n: usize) -> Self {
        let phase = (0..n)
            .map(|p| {
                let t = PI * p as f64 / (2.0 * n as f64);
                Complex64::new(libm::cos(t), libm::sin(t))
            })
            .collect();
        Self {
            n,
            fft: Fft::new(2 * n),
            phase,
        }
    }

    pub fn synth(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        scratch.clear();
        scratch.resize(4 * n, zero);
        let (up, down) = scratch.split_at_mut(2 * n);
        for p in 0..n {
            up[p] = data[p] * self.phase[p];
            down[p] = data[p] * self.phase[p].conj();
        }
        self.fft.inverse(up);
        self.fft.forward(down);
        for i in 0..n {
            data[i] = (up[i] + down[i]) * 0.5;
        }
    }

    pub fn analyze(&self, data: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.n;
        let zero = Complex64::new(0.0, 0.0);
        scratch.clear();
        scratch.resize(4 * n, zero);
        let (up, down) = scratch.split_at_mut(2 * n);
        up[..n].copy_from_slice(data);
        down[..n].copy_from_slice(data);
        self.fft.inverse(up);
        self.fft.forward(down);
        for p in 0..n {
            data[p] = (self.phase[p] * up[p] + self.phase[p].conj() * down[p]) * 0.5;
        }
    }
}

/// Applies `op` to every row of a row-major `width x height` array.
pub(crate) fn for_each_row<F>(data: &mut [Complex64], width: usize, mut op: F)
where
    F: FnMut(&mut [Complex64]),
{
    for row in data.chunks_exact_mut(width) {
        op(row);
    }
}

/// Applies `op` to every column, gathering columns in blocks to stay cache
/// friendly on large grids.
pub(crate) fn for_each_col<F>(data: &mut [Complex64], width: usize, height: usize, mut op: F)
where
    F: FnMut(&mut [Complex64]),
{
    const BLOCK: usize = 8;
    let zero = Complex64::new(0.0, 0.0);
    let mut cols = vec![zero; BLOCK * height];
    let mut start = 0;
    while start < width {
        let count = BLOCK.min(width - start);
        for j in 0..height {
            let row = &data[j * width + start..j * width + start + count];
            for (c, v) in row.iter().enumerate() {
                cols[c * height + j] = *v;
            }
        }
        for c in 0..count {
            op(&mut cols[c * height..(c + 1) * height]);
        }
        for j in 0..height {
            let row = &mut data[j * width + start..j * width + start + count];
            for (c, v) in row.iter_mut().enumerate() {
                *v = cols[c * height + j];
            }
        }
        start += count;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64], sign: f64) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (j, v)| {
                        let t = sign * 2.0 * PI * (j * k) as f64 / n as f64;
                        acc + *v * Complex64::new(libm::cos(t), libm::sin(t))
                    })
            })
            .collect()
    }

    fn probe(n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| Complex64::new(libm::sin(j as f64 * 1.3) + 0.2, libm::cos(j as f64 * 0.7)))
            .collect()
    }

    #[test]
    fn fft_matches_naive_dft() {
        for &n in &[2usize, 8, 64] {
            let x = probe(n);
            let mut y = x.clone();
            Fft::new(n).forward(&mut y);
            for (a, b) in y.iter().zip(naive_dft(&x, -1.0)) {
                assert!((a - b).norm() < 1e-9);
            }
            let mut z = x.clone();
            Fft::new(n).inverse(&mut z);
            for (a, b) in z.iter().zip(naive_dft(&x, 1.0)) {
                assert!((a - b).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn sine_transform_matches_definition() {
        let n = 16;
        let x = probe(n - 1);
        let mut y = x.clone();
        let mut scratch = Vec::new();
        SineTransform::new(n).apply(&mut y, &mut scratch);
        for m in 1..n {
            let want = (1..n).fold(Complex64::new(0.0, 0.0), |acc, k| {
                acc + x[k - 1] * libm::sin(PI * (k * m) as f64 / n as f64)
            });
            assert!((y[m - 1] - want).norm() < 1e-10);
        }
    }

    #[test]
    fn cosine_transforms_match_definition() {
        let n = 16;
        let x = probe(n);
        let t = CosineTransform::new(n);
        let mut scratch = Vec::new();
        let mut s = x.clone();
        t.synth(&mut s, &mut scratch);
        let mut a = x.clone();
        t.analyze(&mut a, &mut scratch);
        for i in 0..n {
            let ws = (0..n).fold(Complex64::new(0.0, 0.0), |acc, p| {
                acc + x[p] * libm::cos(PI * p as f64 * (i as f64 + 0.5) / n as f64)
            });
            let wa = (0..n).fold(Complex64::new(0.0, 0.0), |acc, m| {
                acc + x[m] * libm::cos(PI * i as f64 * (m as f64 + 0.5) / n as f64)
            });
            assert!((s[i] - ws).norm() < 1e-10);
            assert!((a[i] - wa).norm() < 1e-10);
        }
    }

    #[test]
    fn column_pass_visits_every_column() {
        let (w, h) = (11, 4);
        let mut data: Vec<Complex64> = (0..w * h).map(|k| Complex64::new(k as f64, 0.0)).collect();
        for_each_col(&mut data, w, h, |col| {
            for (j, v) in col.iter_mut().enumerate() {
                v.im = j as f64;
            }
        });
        for (k, v) in data.iter().enumerate() {
            assert_eq!(v.im, (k / w) as f64);
            assert_eq!(v.re, k as f64);
        }
    }
}
