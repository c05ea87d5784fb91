//! Discrete Gaussian free fields.
//!
//! A field sample is a Gaussian vector whose covariance is the discrete
//! Green's function `G_d = 2 pi (-L)^{-1}` (zero mode removed on the torus
//! and on the free square). Square and torus grids are sampled spectrally
//! in the Laplacian eigenbasis, two independent fields per complex
//! transform; the embedded disc, which has no fast eigenbasis, is sampled
//! through the banded Cholesky factor of the precision matrix.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::domain::{DomainKind, DomainSpec};
use crate::error::{Error, Result};
use crate::fft::{for_each_col, for_each_row, CosineTransform, Fft, SineTransform};
use crate::green::LaplaceSolver;
use crate::rng::{Purpose, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldTag {
    Centered,
    Shifted,
    /// Projection onto the first `n` Laplacian eigenmodes.
    Lowpass(usize),
}

impl FieldTag {
    pub fn code(self) -> u8 {
        match self {
            FieldTag::Centered => 0,
            FieldTag::Shifted => 1,
            FieldTag::Lowpass(_) => 2,
        }
    }
}

/// Real values on the vertex grid of a domain, row-major (`j * nx + i`).
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    spec: DomainSpec,
    seed: u64,
    slot: u8,
    tag: FieldTag,
    values: Vec<f64>,
    /// Pre-shift values, kept so that removing the same background restores
    /// them bit for bit.
    base: Option<(Vec<f64>, Vec<f64>)>,
}

impl Field {
    pub fn from_values(
        spec: DomainSpec,
        values: Vec<f64>,
        seed: u64,
        tag: FieldTag,
    ) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch {
                expected: spec.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            spec,
            seed,
            slot: 0,
            tag,
            values,
            base: None,
        })
    }

    pub fn zeros(spec: DomainSpec) -> Self {
        Self {
            spec,
            seed: 0,
            slot: 0,
            tag: FieldTag::Centered,
            values: vec![0.0; spec.len()],
            base: None,
        }
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Which half of a sampled pair this field is (0 or 1).
    pub fn slot(&self) -> u8 {
        self.slot
    }

    pub fn tag(&self) -> FieldTag {
        self.tag
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[self.spec.index(i, j)]
    }

    pub fn mean(&self) -> f64 {
        crate::stats::pairwise_sum(&self.values) / self.values.len() as f64
    }

    /// Multiplies every value by `c` (keeps the tag).
    pub fn scaled(&self, c: f64) -> Field {
        let mut out = self.clone();
        out.base = None;
        out.values.iter_mut().for_each(|v| *v *= c);
        out
    }
}

/// `h + h0`, tagged as shifted.
pub fn add_background(field: &Field, h0: &[f64]) -> Result<Field> {
    if h0.len() != field.values.len() {
        return Err(Error::GridMismatch {
            expected: field.values.len(),
            got: h0.len(),
        });
    }
    let values = field.values.iter().zip(h0).map(|(a, b)| a + b).collect();
    Ok(Field {
        spec: field.spec,
        seed: field.seed,
        slot: field.slot,
        tag: FieldTag::Shifted,
        values,
        base: Some((field.values.clone(), h0.to_vec())),
    })
}

/// `h - h0`. When `field` was produced by [`add_background`] with the same
/// `h0`, the original values are returned exactly.
pub fn subtract_background(field: &Field, h0: &[f64]) -> Result<Field> {
    if h0.len() != field.values.len() {
        return Err(Error::GridMismatch {
            expected: field.values.len(),
            got: h0.len(),
        });
    }
    if let Some((base, bg)) = &field.base {
        if bg.as_slice() == h0 {
            return Ok(Field {
                spec: field.spec,
                seed: field.seed,
                slot: field.slot,
                tag: FieldTag::Centered,
                values: base.clone(),
                base: None,
            });
        }
    }
    let values = field.values.iter().zip(h0).map(|(a, b)| a - b).collect();
    Ok(Field {
        spec: field.spec,
        seed: field.seed,
        slot: field.slot,
        tag: FieldTag::Shifted,
        values,
        base: None,
    })
}

#[derive(Debug, Clone)]
struct SineBasis {
    /// interval counts along x and y
    nx: usize,
    ny: usize,
    tx: SineTransform,
    ty: SineTransform,
    /// eigenvalues of -L, row-major over (p, q) in [1, nx) x [1, ny)
    eig: Vec<f64>,
}

impl SineBasis {
    fn new(nx: usize, ny: usize) -> Self {
        let mut eig = Vec::with_capacity((nx - 1) * (ny - 1));
        for q in 1..ny {
            for p in 1..nx {
                eig.push(
                    4.0 - 2.0 * libm::cos(PI * p as f64 / nx as f64)
                        - 2.0 * libm::cos(PI * q as f64 / ny as f64),
                );
            }
        }
        Self {
            nx,
            ny,
            tx: SineTransform::new(nx),
            ty: SineTransform::new(ny),
            eig,
        }
    }

    fn norm(&self) -> f64 {
        2.0 / libm::sqrt((self.nx * self.ny) as f64)
    }

    /// Orthonormal sine transform on both axes (self-inverse).
    fn transform(&self, data: &mut [Complex64]) {
        let (mx, my) = (self.nx - 1, self.ny - 1);
        let mut scratch = Vec::new();
        for_each_row(data, mx, |row| self.tx.apply(row, &mut scratch));
        for_each_col(data, mx, my, |col| self.ty.apply(col, &mut scratch));
        let s = self.norm();
        data.iter_mut().for_each(|v| *v *= s);
    }

    fn mode(&self, k: usize, i: usize, j: usize) -> f64 {
        let mx = self.nx - 1;
        let (p, q) = (k % mx + 1, k / mx + 1);
        self.norm()
            * libm::sin(PI * (p * i) as f64 / self.nx as f64)
            * libm::sin(PI * (q * j) as f64 / self.ny as f64)
    }
}

#[derive(Debug, Clone)]
struct CosineBasis {
    n: usize,
    t: CosineTransform,
    eig: Vec<f64>,
}

impl CosineBasis {
    fn new(n: usize) -> Self {
        let mut eig = Vec::with_capacity(n * n);
        for q in 0..n {
            for p in 0..n {
                eig.push(
                    4.0 - 2.0 * libm::cos(PI * p as f64 / n as f64)
                        - 2.0 * libm::cos(PI * q as f64 / n as f64),
                );
            }
        }
        Self {
            n,
            t: CosineTransform::new(n),
            eig,
        }
    }

    fn weight(&self, p: usize) -> f64 {
        if p == 0 {
            libm::sqrt(1.0 / self.n as f64)
        } else {
            libm::sqrt(2.0 / self.n as f64)
        }
    }

    fn synth(&self, data: &mut [Complex64]) {
        let n = self.n;
        for q in 0..n {
            for p in 0..n {
                data[q * n + p] *= self.weight(p) * self.weight(q);
            }
        }
        let mut scratch = Vec::new();
        for_each_row(data, n, |row| self.t.synth(row, &mut scratch));
        for_each_col(data, n, n, |col| self.t.synth(col, &mut scratch));
    }

    fn analyze(&self, data: &mut [Complex64]) {
        let n = self.n;
        let mut scratch = Vec::new();
        for_each_row(data, n, |row| self.t.analyze(row, &mut scratch));
        for_each_col(data, n, n, |col| self.t.analyze(col, &mut scratch));
        for q in 0..n {
            for p in 0..n {
                data[q * n + p] *= self.weight(p) * self.weight(q);
            }
        }
    }

    fn mode(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.n;
        let (p, q) = (k % n, k / n);
        self.weight(p)
            * self.weight(q)
            * libm::cos(PI * p as f64 * (i as f64 + 0.5) / n as f64)
            * libm::cos(PI * q as f64 * (j as f64 + 0.5) / n as f64)
    }
}

#[derive(Debug, Clone)]
enum Basis {
    Torus {
        fft: Fft,
        eig: Vec<f64>,
    },
    Sine(SineBasis),
    /// Dirichlet sine basis on the rectangle doubled across the bottom edge.
    Doubled(SineBasis),
    Cosine(CosineBasis),
    Cholesky(LaplaceSolver),
}

/// Reusable sampler for one domain; holds transform plans and spectra.
#[derive(Debug, Clone)]
pub struct GffSampler {
    spec: DomainSpec,
    basis: Basis,
}

fn normal_pair<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

impl GffSampler {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        let n = spec.n();
        let basis = match spec.kind() {
            DomainKind::Torus => {
                let mut eig = Vec::with_capacity(n * n);
                for q in 0..n {
                    for p in 0..n {
                        eig.push(
                            4.0 - 2.0 * libm::cos(2.0 * PI * p as f64 / n as f64)
                                - 2.0 * libm::cos(2.0 * PI * q as f64 / n as f64),
                        );
                    }
                }
                Basis::Torus {
                    fft: Fft::new(n),
                    eig,
                }
            }
            DomainKind::DirichletSquare => Basis::Sine(SineBasis::new(n, n)),
            DomainKind::MixedSquare => Basis::Doubled(SineBasis::new(n, 2 * n)),
            DomainKind::FreeSquare => Basis::Cosine(CosineBasis::new(n)),
            DomainKind::DiscEmbedded => Basis::Cholesky(LaplaceSolver::new(spec)?),
        };
        Ok(Self { spec, basis })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    /// Two independent samples drawn from the streams of `seed`.
    pub fn sample_pair(&self, seed: u64) -> (Field, Field) {
        let key = StreamKey::new(seed, Purpose::Field, 0);
        let (a, b) = match &self.basis {
            Basis::Torus { fft, eig } => self.torus_pair(&key, fft, eig),
            Basis::Sine(basis) => {
                let data = sine_coefficients(&key, basis);
                let mut data = data;
                basis.transform(&mut data);
                (
                    self.embed_sine(&data, |c| c.re),
                    self.embed_sine(&data, |c| c.im),
                )
            }
            Basis::Doubled(basis) => {
                let mut data = sine_coefficients(&key, basis);
                basis.transform(&mut data);
                (self.fold(&data, |c| c.re), self.fold(&data, |c| c.im))
            }
            Basis::Cosine(basis) => {
                let n = basis.n;
                let mut data = vec![Complex64::new(0.0, 0.0); n * n];
                for q in 0..n {
                    let mut rng = key.block(q as u64);
                    for p in 0..n {
                        let z = normal_pair(&mut rng);
                        let lam = basis.eig[q * n + p];
                        if p + q > 0 {
                            data[q * n + p] = z * libm::sqrt(2.0 * PI / lam);
                        }
                    }
                }
                basis.synth(&mut data);
                let mut a: Vec<f64> = data.iter().map(|c| c.re).collect();
                let mut b: Vec<f64> = data.iter().map(|c| c.im).collect();
                remove_mean(&mut a);
                remove_mean(&mut b);
                (a, b)
            }
            Basis::Cholesky(solver) => {
                let chol = solver.factor();
                let grid = solver.grid();
                let draw = |block: u64| {
                    let mut rng = key.block(block);
                    let mut x: Vec<f64> = (0..chol.len())
                        .map(|_| rng.sample::<f64, _>(StandardNormal))
                        .collect();
                    chol.solve_upper(&mut x);
                    let mut out = vec![0.0; self.spec.len()];
                    let s = libm::sqrt(2.0 * PI);
                    for (k, &idx) in grid.vertices.iter().enumerate() {
                        out[idx] = s * x[k];
                    }
                    out
                };
                (draw(0), draw(1))
            }
        };
        let make = |values, slot| Field {
            spec: self.spec,
            seed,
            slot,
            tag: FieldTag::Centered,
            values,
            base: None,
        };
        (make(a, 0), make(b, 1))
    }

    /// First field of `sample_pair(seed)`.
    pub fn sample(&self, seed: u64) -> Field {
        self.sample_pair(seed).0
    }

    fn torus_pair(&self, key: &StreamKey, fft: &Fft, eig: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.spec.n();
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        let norm = 1.0 / n as f64;
        for q in 0..n {
            let mut rng = key.block(q as u64);
            for p in 0..n {
                let z = normal_pair(&mut rng);
                if p + q > 0 {
                    data[q * n + p] = z * (libm::sqrt(2.0 * PI / eig[q * n + p]) * norm);
                }
            }
        }
        for_each_row(&mut data, n, |row| fft.forward(row));
        for_each_col(&mut data, n, n, |col| fft.forward(col));
        let mut a: Vec<f64> = data.iter().map(|c| c.re).collect();
        let mut b: Vec<f64> = data.iter().map(|c| c.im).collect();
        remove_mean(&mut a);
        remove_mean(&mut b);
        (a, b)
    }

    fn embed_sine(&self, data: &[Complex64], part: impl Fn(&Complex64) -> f64) -> Vec<f64> {
        let n = self.spec.n();
        let mut out = vec![0.0; self.spec.len()];
        for j in 1..n {
            for i in 1..n {
                out[j * (n + 1) + i] = part(&data[(j - 1) * (n - 1) + (i - 1)]);
            }
        }
        out
    }

    /// Even part of a doubled-rectangle field, scaled by `sqrt(2)` so that
    /// the covariance is `G'(x, y) + G'(x, Ry)`.
    fn fold(&self, data: &[Complex64], part: impl Fn(&Complex64) -> f64) -> Vec<f64> {
        let n = self.spec.n();
        let mx = n - 1;
        // doubled interior rows are j' = 1 .. 2n-1; the real line is j' = n
        let at = |i: usize, jd: usize| part(&data[(jd - 1) * mx + (i - 1)]);
        let s = core::f64::consts::FRAC_1_SQRT_2;
        let mut out = vec![0.0; self.spec.len()];
        for j in 0..n {
            for i in 1..n {
                out[j * (n + 1) + i] = s * (at(i, n + j) + at(i, n - j));
            }
        }
        out
    }

    /// Number of eigenmodes spanning the field space.
    pub fn mode_count(&self) -> usize {
        match &self.basis {
            Basis::Torus { eig, .. } => eig.len() - 1,
            Basis::Sine(b) | Basis::Doubled(b) => b.eig.len(),
            Basis::Cosine(b) => b.eig.len() - 1,
            Basis::Cholesky(s) => s.grid().unknowns(),
        }
    }

    /// Exact `Cov(w1 . h, w2 . h)` for linear functionals given as sparse
    /// `(vertex index, weight)` lists.
    pub fn functional_covariance(&self, w1: &[(usize, f64)], w2: &[(usize, f64)]) -> f64 {
        let spec = &self.spec;
        let dense = |w: &[(usize, f64)]| {
            let mut v = vec![0.0; spec.len()];
            for &(k, x) in w {
                v[k] += x;
            }
            v
        };
        match &self.basis {
            Basis::Torus { fft, eig } => {
                let n = spec.n();
                let spectrum = |w: &[(usize, f64)]| {
                    let mut d: Vec<Complex64> = dense(w)
                        .into_iter()
                        .map(|x| Complex64::new(x, 0.0))
                        .collect();
                    for_each_row(&mut d, n, |row| fft.forward(row));
                    for_each_col(&mut d, n, n, |col| fft.forward(col));
                    d
                };
                let (a, b) = (spectrum(w1), spectrum(w2));
                let norm = 1.0 / (n * n) as f64;
                (1..n * n)
                    .map(|k| 2.0 * PI / eig[k] * (a[k] * b[k].conj()).re)
                    .sum::<f64>()
                    * norm
            }
            Basis::Sine(basis) => {
                let n = spec.n();
                let coeffs = |w: &[(usize, f64)]| {
                    let v = dense(w);
                    let mut d = vec![Complex64::new(0.0, 0.0); (n - 1) * (n - 1)];
                    for j in 1..n {
                        for i in 1..n {
                            d[(j - 1) * (n - 1) + i - 1].re = v[j * (n + 1) + i];
                        }
                    }
                    basis.transform(&mut d);
                    d
                };
                let (a, b) = (coeffs(w1), coeffs(w2));
                basis
                    .eig
                    .iter()
                    .zip(a.iter().zip(&b))
                    .map(|(l, (x, y))| 2.0 * PI / l * x.re * y.re)
                    .sum()
            }
            Basis::Doubled(basis) => {
                let n = spec.n();
                let mx = n - 1;
                let s = core::f64::consts::FRAC_1_SQRT_2;
                let coeffs = |w: &[(usize, f64)]| {
                    let v = dense(w);
                    let mut d = vec![Complex64::new(0.0, 0.0); mx * (2 * n - 1)];
                    for j in 0..n {
                        for i in 1..n {
                            let x = s * v[j * (n + 1) + i];
                            d[(n + j - 1) * mx + i - 1].re += x;
                            d[(n - j - 1) * mx + i - 1].re += x;
                        }
                    }
                    basis.transform(&mut d);
                    d
                };
                let (a, b) = (coeffs(w1), coeffs(w2));
                basis
                    .eig
                    .iter()
                    .zip(a.iter().zip(&b))
                    .map(|(l, (x, y))| 2.0 * PI / l * x.re * y.re)
                    .sum()
            }
            Basis::Cosine(basis) => {
                let coeffs = |w: &[(usize, f64)]| {
                    let mut d: Vec<Complex64> = dense(w)
                        .into_iter()
                        .map(|x| Complex64::new(x, 0.0))
                        .collect();
                    basis.analyze(&mut d);
                    d
                };
                let (a, b) = (coeffs(w1), coeffs(w2));
                (1..a.len())
                    .map(|k| 2.0 * PI / basis.eig[k] * a[k].re * b[k].re)
                    .sum()
            }
            Basis::Cholesky(solver) => {
                let f: Vec<f64> = dense(w2).into_iter().map(|x| 2.0 * PI * x).collect();
                let u = solver.poisson(&f);
                w1.iter().map(|&(k, x)| x * u[k]).sum()
            }
        }
    }

    /// `Sigma w` as a dense vertex vector, where `Sigma` is the field
    /// covariance: the response `Cov(h(y), w . h)` at every vertex `y`.
    pub fn covariance_image(&self, w: &[(usize, f64)]) -> Vec<f64> {
        let spec = &self.spec;
        let n = spec.n();
        let mut v = vec![0.0; spec.len()];
        for &(k, x) in w {
            v[k] += x;
        }
        match &self.basis {
            Basis::Torus { fft, eig } => {
                let mut d: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                for_each_row(&mut d, n, |row| fft.forward(row));
                for_each_col(&mut d, n, n, |col| fft.forward(col));
                d[0] = Complex64::new(0.0, 0.0);
                for k in 1..n * n {
                    d[k] *= 2.0 * PI / eig[k];
                }
                for_each_row(&mut d, n, |row| fft.inverse(row));
                for_each_col(&mut d, n, n, |col| fft.inverse(col));
                let norm = 1.0 / (n * n) as f64;
                let mut out: Vec<f64> = d.iter().map(|c| c.re * norm).collect();
                remove_mean(&mut out);
                out
            }
            Basis::Sine(basis) => {
                let mut d = vec![Complex64::new(0.0, 0.0); (n - 1) * (n - 1)];
                for j in 1..n {
                    for i in 1..n {
                        d[(j - 1) * (n - 1) + i - 1].re = v[j * (n + 1) + i];
                    }
                }
                basis.transform(&mut d);
                d.iter_mut()
                    .zip(&basis.eig)
                    .for_each(|(c, l)| *c *= 2.0 * PI / l);
                basis.transform(&mut d);
                self.embed_sine(&d, |c| c.re)
            }
            Basis::Doubled(basis) => {
                let mx = n - 1;
                let s = core::f64::consts::FRAC_1_SQRT_2;
                let mut d = vec![Complex64::new(0.0, 0.0); mx * (2 * n - 1)];
                for j in 0..n {
                    for i in 1..n {
                        let x = s * v[j * (n + 1) + i];
                        d[(n + j - 1) * mx + i - 1].re += x;
                        d[(n - j - 1) * mx + i - 1].re += x;
                    }
                }
                basis.transform(&mut d);
                d.iter_mut()
                    .zip(&basis.eig)
                    .for_each(|(c, l)| *c *= 2.0 * PI / l);
                basis.transform(&mut d);
                self.fold(&d, |c| c.re)
            }
            Basis::Cosine(basis) => {
                let mut d: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                basis.analyze(&mut d);
                d[0] = Complex64::new(0.0, 0.0);
                for k in 1..d.len() {
                    d[k] *= 2.0 * PI / basis.eig[k];
                }
                basis.synth(&mut d);
                d.iter().map(|c| c.re).collect()
            }
            Basis::Cholesky(solver) => {
                let f: Vec<f64> = v.iter().map(|&x| 2.0 * PI * x).collect();
                solver.poisson(&f)
            }
        }
    }
}

fn sine_coefficients(key: &StreamKey, basis: &SineBasis) -> Vec<Complex64> {
    let (mx, my) = (basis.nx - 1, basis.ny - 1);
    let mut data = vec![Complex64::new(0.0, 0.0); mx * my];
    for q in 0..my {
        let mut rng = key.block(q as u64);
        for p in 0..mx {
            let lam = basis.eig[q * mx + p];
            data[q * mx + p] = normal_pair(&mut rng) * libm::sqrt(2.0 * PI / lam);
        }
    }
    data
}

fn remove_mean(v: &mut [f64]) {
    let m = crate::stats::pairwise_sum(v) / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= m);
}

/// One field from the streams of `seed`.
pub fn sample_gff(spec: &DomainSpec, seed: u64) -> Result<Field> {
    Ok(GffSampler::new(*spec)?.sample(seed))
}

/// Eigenmodes available for low-pass projection, ordered by eigenvalue with
/// ties broken by coefficient index.
#[derive(Debug, Clone)]
pub struct ModeOrder {
    spec: DomainSpec,
    order: Vec<usize>,
    eig: Vec<f64>,
}

impl ModeOrder {
    pub fn new(spec: &DomainSpec) -> Result<Self> {
        let (eig, skip_zero) = match GffSampler::new(*spec)?.basis {
            Basis::Sine(b) => (b.eig, false),
            Basis::Cosine(b) => (b.eig, true),
            _ => return Err(Error::UnsupportedKind(spec.kind().name())),
        };
        let mut order: Vec<usize> = (usize::from(skip_zero)..eig.len()).collect();
        order.sort_by(|&a, &b| eig[a].total_cmp(&eig[b]).then(a.cmp(&b)));
        Ok(Self {
            spec: *spec,
            order,
            eig,
        })
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Coefficient index and eigenvalue of the `rank`-th mode.
    pub fn mode(&self, rank: usize) -> (usize, f64) {
        let k = self.order[rank];
        (k, self.eig[k])
    }

    fn eval(&self, k: usize, i: usize, j: usize) -> f64 {
        let n = self.spec.n();
        match self.spec.kind() {
            DomainKind::FreeSquare => {
                let b = CosineBasis {
                    n,
                    t: CosineTransform::new(2),
                    eig: Vec::new(),
                };
                b.mode(k, i, j)
            }
            _ => {
                if i == 0 || j == 0 || i >= n || j >= n {
                    return 0.0;
                }
                let b = SineBasis {
                    nx: n,
                    ny: n,
                    tx: SineTransform::new(2),
                    ty: SineTransform::new(2),
                    eig: Vec::new(),
                };
                b.mode(k, i, j)
            }
        }
    }

    /// `Var h^n(v) = sum over the first n modes of (2 pi / lambda) phi(v)^2`.
    pub fn lowpass_variance(&self, n: usize) -> Result<Vec<f64>> {
        if n > self.len() {
            return Err(Error::ModeCount {
                requested: n,
                available: self.len(),
            });
        }
        let spec = &self.spec;
        let (nx, ny) = spec.dims();
        let mut var = vec![0.0; spec.len()];
        for rank in 0..n {
            let (k, lam) = self.mode(rank);
            let w = 2.0 * PI / lam;
            for j in 0..ny {
                for i in 0..nx {
                    let phi = self.eval(k, i, j);
                    var[j * nx + i] += w * phi * phi;
                }
            }
        }
        Ok(var)
    }
}

/// Orthogonal projection onto the first `n` eigenmodes (Dirichlet or free
/// square). `n = 0` gives the zero field and `n` = all modes returns `h`.
pub fn project_lowpass(field: &Field, n: usize) -> Result<Field> {
    let spec = *field.spec();
    let order = ModeOrder::new(&spec)?;
    if n > order.len() {
        return Err(Error::ModeCount {
            requested: n,
            available: order.len(),
        });
    }
    let tag = FieldTag::Lowpass(n);
    if n == order.len() {
        let mut out = field.clone();
        out.tag = tag;
        out.base = None;
        return Ok(out);
    }
    let mut keep = vec![false; order.eig.len()];
    for rank in 0..n {
        keep[order.mode(rank).0] = true;
    }
    let values = match spec.kind() {
        DomainKind::DirichletSquare => {
            let m = spec.n();
            let basis = SineBasis::new(m, m);
            let mut d = vec![Complex64::new(0.0, 0.0); (m - 1) * (m - 1)];
            for j in 1..m {
                for i in 1..m {
                    d[(j - 1) * (m - 1) + i - 1].re = field.value(i, j);
                }
            }
            basis.transform(&mut d);
            for (c, k) in d.iter_mut().zip(&keep) {
                if !k {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
            basis.transform(&mut d);
            let mut out = vec![0.0; spec.len()];
            for j in 1..m {
                for i in 1..m {
                    out[j * (m + 1) + i] = d[(j - 1) * (m - 1) + i - 1].re;
                }
            }
            out
        }
        _ => {
            let basis = CosineBasis::new(spec.n());
            let mut d: Vec<Complex64> = field
                .values
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect();
            basis.analyze(&mut d);
            for (c, k) in d.iter_mut().zip(&keep) {
                if !k {
                    *c = Complex64::new(0.0, 0.0);
                }
            }
            basis.synth(&mut d);
            d.iter().map(|c| c.re).collect()
        }
    };
    Ok(Field {
        spec,
        seed: field.seed,
        slot: field.slot,
        tag,
        values,
        base: None,
    })
}
