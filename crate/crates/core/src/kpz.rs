//! The KPZ relation `x = (gamma^2/4) Delta^2 + (1 - gamma^2/4) Delta` and
//! scaling-exponent estimation.

use alloc::vec::Vec;

use rand::Rng;

use crate::boxes::{euclid_neighborhood_area, BoxTiling, FractalSet, SetKind};
use crate::domain::{DomainSpec, Point};
use crate::error::{Error, Result};
use crate::field::GffSampler;
use crate::measure::{build_measure_discrete, check_gamma};
use crate::rng::{Purpose, StreamKey};
use crate::stats::{jackknife_se, mean, ols};

/// `gamma`, `Q = 2/gamma + gamma/2` and `a = Q - gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KpzParams {
    pub gamma: f64,
    pub q: f64,
    pub a: f64,
}

impl KpzParams {
    pub fn new(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        let q = if gamma > 0.0 {
            2.0 / gamma + 0.5 * gamma
        } else {
            f64::INFINITY
        };
        Ok(Self {
            gamma,
            q,
            a: q - gamma,
        })
    }

    /// `beta = gamma Delta`.
    pub fn beta(&self, delta: f64) -> f64 {
        self.gamma * delta
    }
}

pub fn kpz_forward(delta: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(delta >= 0.0) {
        return Err(Error::Parameter {
            name: "Delta",
            value: delta,
        });
    }
    let g = 0.25 * gamma * gamma;
    Ok(g * delta * delta + (1.0 - g) * delta)
}

/// Nonnegative root of the KPZ quadratic, `(sqrt(a^2 + 4x) - a) / gamma`.
pub fn kpz_inverse(x: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(x >= 0.0) {
        return Err(Error::Parameter {
            name: "x",
            value: x,
        });
    }
    if gamma == 0.0 {
        return Ok(x);
    }
    let a = KpzParams::new(gamma)?.a;
    // rationalized to avoid cancellation when a is large
    Ok(4.0 * x / (gamma * (libm::sqrt(a * a + 4.0 * x) + a)))
}

/// Brownian intersection exponents: `x_L = (4L^2 - 1)/24`, `Delta_L = (L - 1/2)/2`.
pub fn brownian_table(ls: &[u32]) -> Vec<(u32, f64, f64)> {
    ls.iter()
        .map(|&l| {
            let lf = l as f64;
            (l, (4.0 * lf * lf - 1.0) / 24.0, 0.5 * (lf - 0.5))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    /// Abscissa `log eps^2`.
    Euclidean,
    /// Abscissa `log delta`.
    Quantum,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    /// Smallest and largest scale used.
    pub window: (f64, f64),
    pub scales: usize,
    /// Scales dropped for nonpositive mass.
    pub dropped: usize,
}

/// Least-squares slope of `log mass` against `log eps^2` or `log delta`.
pub fn estimate_exponent(points: &[(f64, f64)], mode: ScaleMode) -> Result<ExponentEstimate> {
    let kept: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(s, m)| s > 0.0 && m > 0.0)
        .collect();
    if kept.len() < 4 {
        return Err(Error::TooFewScales {
            needed: 4,
            got: kept.len(),
        });
    }
    let xs: Vec<f64> = kept
        .iter()
        .map(|&(s, _)| match mode {
            ScaleMode::Euclidean => 2.0 * libm::log(s),
            ScaleMode::Quantum => libm::log(s),
        })
        .collect();
    let ys: Vec<f64> = kept.iter().map(|&(_, m)| libm::log(m)).collect();
    let fit = ols(&xs, &ys);
    let lo = kept.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = kept.iter().map(|p| p.0).fold(0.0, f64::max);
    Ok(ExponentEstimate {
        slope: fit.slope,
        intercept: fit.intercept,
        stderr: if fit.slope_se.is_finite() {
            fit.slope_se
        } else {
            0.0
        },
        window: (lo, hi),
        scales: kept.len(),
        dropped: points.len() - kept.len(),
    })
}

/// Per-sample box statistics of one measure against a family of test sets,
/// on a ladder of relative thresholds `delta_j = 2^{-e_j} * total`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBoxes {
    /// Mean over test sets of `mu(S^delta(X)) / total`, per threshold.
    pub mass: Vec<f64>,
    /// Mean over test sets of `N(mu, delta, X)`.
    pub count: Vec<f64>,
    /// Forced leaves among hit boxes, summed over sets and thresholds.
    pub forced_hits: usize,
    /// Largest forced-leaf mass fraction over the thresholds.
    pub forced_fraction: f64,
}

/// Relative thresholds `2^{-e}` for the exponents `e`.
pub fn threshold_ladder(exps: &[u32]) -> Vec<f64> {
    exps.iter().map(|&e| libm::pow(2.0, -(e as f64))).collect()
}

/// Tiles `cells` at each relative threshold and records the hits of every
/// set.
pub fn sample_boxes(
    cells: &[f64],
    n: usize,
    side: f64,
    rel_deltas: &[f64],
    sets: &[FractalSet],
) -> Result<SampleBoxes> {
    let pyramid = crate::boxes::MassPyramid::new(cells, n)?;
    let total = pyramid.total();
    let mut out = SampleBoxes {
        mass: Vec::with_capacity(rel_deltas.len()),
        count: Vec::with_capacity(rel_deltas.len()),
        forced_hits: 0,
        forced_fraction: 0.0,
    };
    for &rd in rel_deltas {
        let tiling = BoxTiling::from_pyramid(pyramid.clone(), side, rd * total)?;
        out.forced_fraction = out.forced_fraction.max(tiling.forced_mass() / total);
        let (mut m, mut c) = (0.0, 0.0);
        for x in sets {
            let h = tiling.hits(x)?;
            m += h.mass / total;
            c += h.boxes as f64;
            out.forced_hits += h.forced;
        }
        out.mass.push(m / sets.len() as f64);
        out.count.push(c / sets.len() as f64);
    }
    Ok(out)
}

/// Exponent fits from an ensemble of [`SampleBoxes`].
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumFit {
    pub rel_deltas: Vec<f64>,
    /// Ensemble means per threshold.
    pub mean_mass: Vec<f64>,
    pub mean_count: Vec<f64>,
    /// Mass-based estimate of `Delta`.
    pub delta_mass: ExponentEstimate,
    /// Count-based slope, an estimate of `Delta - 1`.
    pub delta_count: ExponentEstimate,
    /// Jackknife standard errors over samples.
    pub jackknife_mass: f64,
    pub jackknife_count: f64,
    pub samples: usize,
}

fn ensemble_means(samples: &[&SampleBoxes], k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut mm = Vec::with_capacity(k);
    let mut mc = Vec::with_capacity(k);
    for j in 0..k {
        let m: Vec<f64> = samples.iter().map(|s| s.mass[j]).collect();
        let c: Vec<f64> = samples.iter().map(|s| s.count[j]).collect();
        mm.push(mean(&m));
        mc.push(mean(&c));
    }
    (mm, mc)
}

/// Averages masses and counts over the ensemble before taking logs.
pub fn fit_quantum(rel_deltas: &[f64], samples: &[SampleBoxes]) -> Result<QuantumFit> {
    if samples.is_empty() {
        return Err(Error::Parameter {
            name: "samples",
            value: 0.0,
        });
    }
    let k = rel_deltas.len();
    let all: Vec<&SampleBoxes> = samples.iter().collect();
    let (mean_mass, mean_count) = ensemble_means(&all, k);
    let pts = |v: &[f64]| {
        rel_deltas
            .iter()
            .copied()
            .zip(v.iter().copied())
            .collect::<Vec<_>>()
    };
    let delta_mass = estimate_exponent(&pts(&mean_mass), ScaleMode::Quantum)?;
    let delta_count = estimate_exponent(&pts(&mean_count), ScaleMode::Quantum)?;
    let (mut jm, mut jc) = (f64::NAN, f64::NAN);
    if samples.len() > 2 {
        let mut loo_m = Vec::with_capacity(samples.len());
        let mut loo_c = Vec::with_capacity(samples.len());
        for skip in 0..samples.len() {
            let rest: Vec<&SampleBoxes> = samples
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != skip)
                .map(|(_, s)| s)
                .collect();
            let (m, c) = ensemble_means(&rest, k);
            loo_m.push(estimate_exponent(&pts(&m), ScaleMode::Quantum)?.slope);
            loo_c.push(estimate_exponent(&pts(&c), ScaleMode::Quantum)?.slope);
        }
        jm = jackknife_se(&loo_m);
        jc = jackknife_se(&loo_c);
    }
    Ok(QuantumFit {
        rel_deltas: rel_deltas.to_vec(),
        mean_mass,
        mean_count,
        delta_mass,
        delta_count,
        jackknife_mass: jm,
        jackknife_count: jc,
        samples: samples.len(),
    })
}

/// Euclidean exponent of a family of sets from dyadic box areas at the
/// given levels (`eps = side / 2^level`), averaged over the family.
pub fn fit_euclidean(
    sets: &[FractalSet],
    levels: &[usize],
) -> Result<(Vec<(f64, f64)>, ExponentEstimate)> {
    let first = sets.first().ok_or(Error::EmptySet)?;
    let mut pts = Vec::with_capacity(levels.len());
    for &l in levels {
        let areas: Vec<f64> = sets
            .iter()
            .map(|x| euclid_neighborhood_area(x, l))
            .collect::<Result<_>>()?;
        pts.push((first.side() / (1u64 << l) as f64, mean(&areas)));
    }
    let est = estimate_exponent(&pts, ScaleMode::Euclidean)?;
    Ok((pts, est))
}

/// One interior KPZ trial: a field, its discrete measure `e^{gamma h}` and a
/// batch of independent test sets away from the edges.
#[derive(Debug, Clone, PartialEq)]
pub struct InteriorExperiment {
    pub spec: DomainSpec,
    pub gamma: f64,
    pub set: SetKind,
    pub sets_per_field: usize,
    pub rel_deltas: Vec<f64>,
}

impl InteriorExperiment {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        if self.sets_per_field == 0 {
            return Err(Error::Parameter {
                name: "sets_per_field",
                value: 0.0,
            });
        }
        if self.set == SetKind::Custom {
            return Err(Error::Parameter {
                name: "set",
                value: f64::NAN,
            });
        }
        if self.rel_deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return Err(Error::Threshold(
                self.rel_deltas.iter().copied().fold(f64::NAN, f64::min),
            ));
        }
        Ok(())
    }

    /// Euclidean exponent of the set family.
    pub fn x(&self) -> f64 {
        match self.set {
            SetKind::PointSet => 1.0,
            _ => 0.5,
        }
    }

    pub fn target(&self) -> Result<f64> {
        kpz_inverse(self.x(), self.gamma)
    }

    /// Test sets drawn from the test-set stream of `seed`. Segments have
    /// length `L/2` with `y` in `[L/8, 7L/8]` and `x0` in `[L/8, 3L/8]`;
    /// points are uniform in the middle square; Cantor dusts have width
    /// `L/4` and a lattice-aligned corner in `[L/4, L/2]^2`.
    pub fn sets(&self, seed: u64) -> Result<Vec<FractalSet>> {
        let mut rng = StreamKey::new(seed, Purpose::TestSet, 0).rng();
        let (n, l) = (self.spec.n(), self.spec.side());
        let a = l / n as f64;
        (0..self.sets_per_field)
            .map(|_| match self.set {
                SetKind::PointSet => {
                    let p = Point::new(
                        rng.gen_range(0.25 * l..0.75 * l),
                        rng.gen_range(0.25 * l..0.75 * l),
                    );
                    FractalSet::points(n, l, &[p])
                }
                SetKind::CantorDust => {
                    let slots = libm::round(0.25 * l / a) as usize;
                    let o = Point::new(
                        0.25 * l + rng.gen_range(0..=slots) as f64 * a,
                        0.25 * l + rng.gen_range(0..=slots) as f64 * a,
                    );
                    FractalSet::random_cantor_dust(n, l, o, 0.25 * l, &mut rng)
                }
                _ => {
                    let y = rng.gen_range(0.125 * l..0.875 * l);
                    let x0 = rng.gen_range(0.125 * l..0.375 * l);
                    FractalSet::segment(n, l, y, x0, x0 + 0.5 * l)
                }
            })
            .collect()
    }

    pub fn trial_with(&self, sampler: &GffSampler, seed: u64) -> Result<SampleBoxes> {
        let field = sampler.sample(seed);
        let mu = build_measure_discrete(&field, self.gamma)?;
        sample_boxes(
            &mu.cell_masses(),
            self.spec.n(),
            self.spec.side(),
            &self.rel_deltas,
            &self.sets(seed)?,
        )
    }

    pub fn trial(&self, seed: u64) -> Result<SampleBoxes> {
        self.trial_with(&GffSampler::new(self.spec)?, seed)
    }
}
