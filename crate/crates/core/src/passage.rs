//! First passage of drifted Brownian motion: `T_A = inf{t : B_t + a t = A}`.

use rand::Rng;
use rand_distr::{Distribution, InverseGaussian, StandardNormal};

use crate::error::{Error, Result};
use crate::stats::{integrate, normal_cdf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassageProblem {
    /// Drift `a > 0`.
    pub a: f64,
    /// Level `A > 0`.
    pub level: f64,
    /// Exponent weight `x >= 0`.
    pub x: f64,
}

impl PassageProblem {
    pub fn new(a: f64, level: f64, x: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Parameter {
                name: "a",
                value: a,
            });
        }
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::Parameter {
                name: "A",
                value: level,
            });
        }
        if !(x >= 0.0) {
            return Err(Error::Parameter {
                name: "x",
                value: x,
            });
        }
        Ok(Self { a, level, x })
    }

    /// Problem derived from a quantum threshold: `A = -log(delta)/gamma`,
    /// `a = Q - gamma`.
    pub fn from_threshold(gamma: f64, delta: f64, x: f64) -> Result<Self> {
        let p = crate::kpz::KpzParams::new(gamma)?;
        if !(gamma > 0.0) {
            return Err(Error::Gamma(gamma));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Threshold(delta));
        }
        Self::new(p.a, -libm::log(delta) / gamma, x)
    }

    /// `E T_A = A / a`.
    pub fn mean(&self) -> f64 {
        self.level / self.a
    }

    /// `beta = sqrt(a^2 + 4x) - a`.
    pub fn beta(&self) -> f64 {
        4.0 * self.x / (libm::sqrt(self.a * self.a + 4.0 * self.x) + self.a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Inverse-Gaussian law with mean `A/a` and shape `A^2`.
    Exact,
    /// Time-stepped walk with Brownian-bridge crossing checks.
    Euler { dt: f64 },
}

impl Method {
    pub const EULER: Method = Method::Euler { dt: 1e-4 };
}

/// One exact draw.
#[derive(Debug, Clone, Copy)]
pub struct ExactSampler {
    law: InverseGaussian<f64>,
}

impl ExactSampler {
    pub fn new(p: &PassageProblem) -> Self {
        let law = InverseGaussian::new(p.mean(), p.level * p.level).expect("validated parameters");
        Self { law }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        loop {
            let t = self.law.sample(rng);
            if t > 0.0 && t.is_finite() {
                return t;
            }
        }
    }
}

/// Walks `X += a dt + sqrt(dt) N(0,1)` until `X >= A`, also stopping
/// inside a step when the conditioned bridge crosses the level.
pub fn euler_passage<R: Rng>(p: &PassageProblem, dt: f64, rng: &mut R) -> f64 {
    let sd = libm::sqrt(dt);
    let drift = p.a * dt;
    let mut x = 0.0f64;
    let mut steps = 0u64;
    loop {
        let z: f64 = rng.sample(StandardNormal);
        let next = x + drift + sd * z;
        steps += 1;
        if next >= p.level {
            return steps as f64 * dt;
        }
        let (g0, g1) = (p.level - x, p.level - next);
        if g0 * g1 < 4.0 * dt {
            let cross = libm::exp(-2.0 * g0 * g1 / dt);
            if rng.gen::<f64>() < cross {
                return steps as f64 * dt;
            }
        }
        x = next;
    }
}

pub fn sample_first_passage<R: Rng>(
    p: &PassageProblem,
    method: Method,
    rng: &mut R,
) -> Result<f64> {
    match method {
        Method::Exact => Ok(ExactSampler::new(p).sample(rng)),
        Method::Euler { dt } => {
            if !(dt > 0.0) {
                return Err(Error::Parameter {
                    name: "dt",
                    value: dt,
                });
            }
            Ok(euler_passage(p, dt, rng))
        }
    }
}

/// `P_A(t) = (2 pi)^{-1/2} A t^{-3/2} exp(-(A t^{-1/2} - a t^{1/2})^2 / 2)`.
pub fn first_passage_density(t: f64, p: &PassageProblem) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Parameter {
            name: "t",
            value: t,
        });
    }
    Ok(density(t, p))
}

fn density(t: f64, p: &PassageProblem) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let s = libm::sqrt(t);
    let e = p.level / s - p.a * s;
    p.level / (libm::sqrt(2.0 * core::f64::consts::PI) * t * s) * libm::exp(-0.5 * e * e)
}

/// `P[T_A <= t]`.
pub fn first_passage_cdf(t: f64, p: &PassageProblem) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let s = libm::sqrt(t);
    let (u, v) = (p.a * s - p.level / s, -(p.a * s + p.level / s));
    // the second term is e^{2aA} Phi(v), formed in log space
    let second = if v < -38.0 {
        0.0
    } else {
        libm::exp(2.0 * p.a * p.level + libm::log(normal_cdf(v)))
    };
    (normal_cdf(u) + second).min(1.0)
}

/// Quadrature of the density with an explicit tail bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub integral: f64,
    pub quadrature_error: f64,
    /// Upper bound on the mass beyond the cut-off.
    pub tail_bound: f64,
    pub cutoff: f64,
}

/// Integrates `P_A` over `[0, T]` with `T >= 2A/a` chosen so that the
/// bound `(8/a^2) c T^{-3/2} e^{-a^2 T/8}` on the remaining mass is below
/// `tol`; beyond `2A/a` the exponent is at least `a^2 t / 8`.
pub fn normalization(p: &PassageProblem, tol: f64) -> Normalization {
    let c = p.level / libm::sqrt(2.0 * core::f64::consts::PI);
    let a2 = p.a * p.a;
    let bound = |t: f64| 8.0 / a2 * c * libm::pow(t, -1.5) * libm::exp(-a2 * t / 8.0);
    let mut cutoff = 2.0 * p.level / p.a;
    while bound(cutoff) > 0.01 * tol {
        cutoff *= 1.5;
    }
    let (integral, err) = integrate(|t| density(t, p), 0.0, cutoff, 0.1 * tol);
    Normalization {
        integral,
        quadrature_error: err,
        tail_bound: bound(cutoff),
        cutoff,
    }
}

/// `E exp(-2x T_A) = exp(-beta A)`.
pub fn laplace_expected(p: &PassageProblem) -> f64 {
    libm::exp(-p.beta() * p.level)
}

/// `I(eta) = (eta/2)(1/eta - a)^2`.
pub fn rate_function(eta: f64, a: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::Parameter {
            name: "eta",
            value: eta,
        });
    }
    let d = 1.0 / eta - a;
    Ok(0.5 * eta * d * d)
}

/// Minimizer `eta_0 = (a^2 + 4x)^{-1/2}` of `I(eta) + 2 x eta` and the
/// minimum `beta`.
pub fn ldp_optimum(x: f64, a: f64) -> Result<(f64, f64)> {
    if !(x >= 0.0) {
        return Err(Error::Parameter {
            name: "x",
            value: x,
        });
    }
    if !(a > 0.0) {
        return Err(Error::Parameter {
            name: "a",
            value: a,
        });
    }
    let eta0 = 1.0 / libm::sqrt(a * a + 4.0 * x);
    let beta = rate_function(eta0, a)? + 2.0 * x * eta0;
    Ok((eta0, beta))
}

/// `alpha = gamma (1 - Delta)`.
pub fn thick_alpha(gamma: f64, delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::Parameter {
            name: "Delta",
            value: delta,
        });
    }
    Ok(gamma * (1.0 - delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    fn p() -> PassageProblem {
        PassageProblem::new(1.5, 3.0, 0.5).unwrap()
    }

    #[test]
    fn validation() {
        assert!(PassageProblem::new(0.0, 1.0, 0.0).is_err());
        assert!(PassageProblem::new(1.0, -1.0, 0.0).is_err());
        assert!(first_passage_density(0.0, &p()).is_err());
        assert!(rate_function(0.0, 1.0).is_err());
    }

    #[test]
    fn density_normalizes() {
        let n = normalization(&p(), 1e-10);
        assert!((n.integral - 1.0).abs() < 1e-8, "{n:?}");
        assert!(n.tail_bound < 1e-11);
        assert!(density(1e-6, &p()) < 1e-300);
        assert!(density(1e4, &p()) < 1e-300);
    }

    #[test]
    fn cdf_agrees_with_quadrature() {
        let q = p();
        for t in [0.5, 1.0, 2.0, 4.0] {
            let (v, _) = integrate(|s| density(s, &q), 0.0, t, 1e-12);
            assert!((first_passage_cdf(t, &q) - v).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_of_density_is_a_over_a() {
        let q = p();
        let (m, _) = integrate(|t| t * density(t, &q), 0.0, 60.0, 1e-12);
        assert!((m - 2.0).abs() < 1e-8);
    }

    #[test]
    fn laplace_closed_form() {
        assert!((laplace_expected(&p()) - libm::exp(-1.684_658_438_426_491_8)).abs() < 1e-12);
        assert!((laplace_expected(&p()) - 0.18554).abs() < 1e-4);
        assert_eq!(
            laplace_expected(&PassageProblem::new(1.5, 3.0, 0.0).unwrap()),
            1.0
        );
        // against quadrature of the density
        let q = p();
        let (v, _) = integrate(
            |t| libm::exp(-2.0 * q.x * t) * density(t, &q),
            0.0,
            60.0,
            1e-13,
        );
        assert!((v - laplace_expected(&q)).abs() < 1e-10);
    }

    #[test]
    fn ldp_examples() {
        assert_eq!(rate_function(1.0 / 1.5, 1.5).unwrap(), 0.0);
        let (e0, b0) = ldp_optimum(0.0, 1.5).unwrap();
        assert!((e0 - 1.0 / 1.5).abs() < 1e-15 && b0.abs() < 1e-15);
        let (e, b) = ldp_optimum(0.5, 1.5).unwrap();
        assert!((e - 0.485_071_3).abs() < 1e-7);
        assert!((b - 0.561_552_8).abs() < 1e-7);
        // numeric minimization by golden section
        let f = |eta: f64| rate_function(eta, 1.5).unwrap() + eta;
        let (mut lo, mut hi) = (0.01, 5.0);
        let r = 0.5 * (libm::sqrt(5.0) - 1.0);
        for _ in 0..200 {
            let (m1, m2) = (hi - r * (hi - lo), lo + r * (hi - lo));
            if f(m1) < f(m2) {
                hi = m2
            } else {
                lo = m1
            }
        }
        assert!((0.5 * (lo + hi) - e).abs() < 1e-7);
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(thick_alpha(1.3, 0.0).unwrap(), 1.3);
        assert_eq!(thick_alpha(1.3, 1.0).unwrap(), 0.0);
        assert!((thick_alpha(1.0, 0.5616).unwrap() - 0.4384).abs() < 1e-12);
    }

    #[test]
    fn samplers_are_positive() {
        let q = p();
        let mut rng = stream(1, Purpose::Passage, 0);
        for _ in 0..1000 {
            let t = sample_first_passage(&q, Method::Exact, &mut rng).unwrap();
            assert!(t > 0.0 && t.is_finite());
        }
        let t = sample_first_passage(&q, Method::Euler { dt: 1e-3 }, &mut rng).unwrap();
        assert!(t > 0.0 && t.is_finite());
    }
}
