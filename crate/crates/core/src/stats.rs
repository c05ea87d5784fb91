//! Small numerical helpers: summation, moments, regression, KS, quadrature.

use alloc::vec::Vec;

/// Pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 64 {
        let mut s = 0.0;
        for x in v {
            s += x;
        }
        return s;
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

pub fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Unbiased sample variance.
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    let sq: Vec<f64> = v.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (v.len() as f64 - 1.0)
}

/// Standard error of the mean.
pub fn std_error(v: &[f64]) -> f64 {
    libm::sqrt(variance(v) / v.len() as f64)
}

/// Running mean and variance (Welford).
#[derive(Debug, Clone, Copy, Default)]
pub struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Welford) {
        if other.n == 0 {
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64) / n as f64;
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.m2 / (self.n as f64 - 1.0)
    }

    pub fn std_error(&self) -> f64 {
        libm::sqrt(self.variance() / self.n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residuals.
    pub slope_se: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = intercept + slope * x`.
pub fn ols(x: &[f64], y: &[f64]) -> LinearFit {
    let n = x.len() as f64;
    let mx = mean(x);
    let my = mean(y);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let slope_se = if n > 2.0 {
        libm::sqrt(rss / (n - 2.0) / sxx)
    } else {
        f64::NAN
    };
    let r2 = if syy > 0.0 { 1.0 - rss / syy } else { 1.0 };
    LinearFit {
        slope,
        intercept,
        slope_se,
        r2,
    }
}

/// Jackknife standard error from leave-one-out estimates.
pub fn jackknife_se(loo: &[f64]) -> f64 {
    let n = loo.len() as f64;
    let m = mean(loo);
    let ss: f64 = loo.iter().map(|t| (t - m) * (t - m)).sum();
    libm::sqrt((n - 1.0) / n * ss)
}

/// One-sample Kolmogorov-Smirnov statistic against `cdf`; sorts `sample`.
pub fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.total_cmp(b));
    let n = sample.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in sample.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - k as f64 / n).max((k + 1) as f64 / n - f);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic `sup |F_a - F_b|`; sorts both
/// samples in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max(libm::fabs(i as f64 / na - j as f64 / nb));
    }
    d
}

/// Asymptotic p-value of a KS statistic `d` for sample size `n`.
pub fn ks_pvalue(d: f64, n: usize) -> f64 {
    let sn = libm::sqrt(n as f64);
    let lam = (sn + 0.12 + 0.11 / sn) * d;
    if lam < 0.2 {
        return 1.0;
    }
    let mut p = 0.0;
    for k in 1..200 {
        let kf = k as f64;
        let term = libm::exp(-2.0 * kf * kf * lam * lam);
        p += if k % 2 == 1 { 2.0 * term } else { -2.0 * term };
        if term < 1e-17 {
            break;
        }
    }
    p.clamp(0.0, 1.0)
}

const GK_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const GK_WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK_WK[7] * fc;
    let mut g = GK_WG[3] * fc;
    for i in 0..7 {
        let s = f(c - h * GK_X[i]) + f(c + h * GK_X[i]);
        k += GK_WK[i] * s;
        if i % 2 == 1 {
            g += GK_WG[i / 2] * s;
        }
    }
    (k * h, libm::fabs((k - g) * h))
}

/// Adaptive Gauss-Kronrod (7/15) integral of `f` over `[a, b]`.
/// Returns the estimate and the summed error estimate.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    fn rec(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> (f64, f64) {
        let (v, e) = gk15(f, a, b);
        if e <= tol || depth == 0 {
            return (v, e);
        }
        let m = 0.5 * (a + b);
        let (v1, e1) = rec(f, a, m, 0.5 * tol, depth - 1);
        let (v2, e2) = rec(f, m, b, 0.5 * tol, depth - 1);
        (v1 + v2, e1 + e2)
    }
    rec(&f, a, b, tol, 40)
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / core::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn ols_recovers_line() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 0.5 * v).collect();
        let fit = ols(&x, &y);
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-12);
        assert!(fit.slope_se < 1e-10);
    }

    #[test]
    fn welford_matches_batch() {
        let v = vec![1.0, 4.0, 2.5, -3.0, 7.0, 0.5];
        let mut a = Welford::default();
        let mut b = Welford::default();
        v[..3].iter().for_each(|&x| a.push(x));
        v[3..].iter().for_each(|&x| b.push(x));
        a.merge(&b);
        assert!((a.mean() - mean(&v)).abs() < 1e-12);
        assert!((a.variance() - variance(&v)).abs() < 1e-12);
    }

    #[test]
    fn quadrature_of_gaussian() {
        let (v, _) = integrate(|x| libm::exp(-x * x), -8.0, 8.0, 1e-13);
        assert!((v - libm::sqrt(core::f64::consts::PI)).abs() < 1e-12);
        let (v, _) = integrate(libm::sqrt, 0.0, 1.0, 1e-12);
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn ks_of_uniform_grid() {
        let mut s: Vec<f64> = (0..1000).map(|k| (k as f64 + 0.5) / 1000.0).collect();
        let d = ks_statistic(&mut s, |x| x);
        assert!((d - 0.0005).abs() < 1e-12);
        assert!(ks_pvalue(d, 1000) > 0.99);
        assert!(ks_pvalue(0.1, 1000) < 1e-6);
        // Kolmogorov distribution at lambda = 1.36 is about 0.05
        assert!((ks_pvalue(1.36 / libm::sqrt(1e8), 100_000_000) - 0.049).abs() < 0.002);
    }

    #[test]
    fn two_sample_ks_known_values() {
        let mut a = [1.0, 2.0, 3.0, 4.0];
        let mut b = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(ks_two_sample(&mut a, &mut b), 0.0);
        let mut a = [1.0, 2.0];
        let mut b = [3.0, 4.0, 5.0];
        assert_eq!(ks_two_sample(&mut a, &mut b), 1.0);
        let mut a = [1.0, 3.0, 5.0, 7.0];
        let mut b = [2.0, 4.0];
        assert!((ks_two_sample(&mut a, &mut b) - 0.5).abs() < 1e-15);
    }
}
