//! Sampling from the rooted measure: a root `z` with density proportional
//! to `C(z; D)^{gamma^2/2}`, and a field equal to a fresh GFF plus
//! `gamma xi^z`, the singularity clamped at two lattice spacings.

use alloc::vec::Vec;

use rand::distributions::{Distribution, WeightedIndex};

use crate::circle::{CircleKernel, ConformalRadiusMap, XiPotential, DEFAULT_SOLVER_N};
use crate::domain::{DomainSpec, Point};
use crate::error::{Error, Result};
use crate::field::{add_background, Field, GffSampler};
use crate::green::LaplaceSolver;
use crate::measure::{check_gamma, vertex_weights, Shape};
use crate::rng::{stream, Purpose};
use crate::stats::{mean, std_error};

#[derive(Debug, Clone)]
pub struct RootedSample {
    pub root: (usize, usize),
    pub point: Point,
    /// GFF plus `gamma xi^z_{2a}`.
    pub field: Field,
    /// Unnormalized root weight `w(v) C(v)^{gamma^2/2}`.
    pub weight: f64,
}

#[derive(Debug, Clone)]
pub struct RootedSampler {
    spec: DomainSpec,
    gamma: f64,
    gff: GffSampler,
    crm: ConformalRadiusMap,
    support: Vec<usize>,
    weights: Vec<f64>,
    index: WeightedIndex<f64>,
    solver: LaplaceSolver,
}

impl RootedSampler {
    /// Roots range over all interior vertices.
    pub fn new(spec: &DomainSpec, gamma: f64) -> Result<Self> {
        Self::with_support(spec, gamma, None)
    }

    /// Roots restricted to the vertices inside `support`.
    pub fn with_support(spec: &DomainSpec, gamma: f64, support: Option<Shape>) -> Result<Self> {
        check_gamma(gamma)?;
        if gamma == 0.0 {
            return Err(Error::Gamma(gamma));
        }
        let crm = ConformalRadiusMap::new(spec)?;
        let w = vertex_weights(spec);
        let half = 0.5 * gamma * gamma;
        let (nx, _) = spec.dims();
        let mut idx = Vec::new();
        let mut weights = Vec::new();
        for k in 0..spec.len() {
            if w[k] <= 0.0 {
                continue;
            }
            let p = spec.position(k % nx, k / nx);
            if let Some(s) = support {
                if !s.contains(p) {
                    continue;
                }
            }
            idx.push(k);
            weights.push(w[k] * libm::exp(half * crm.log_values()[k]));
        }
        let index = WeightedIndex::new(&weights).map_err(|_| Error::EmptySet)?;
        let solver = LaplaceSolver::new(spec.with_n(spec.n().min(DEFAULT_SOLVER_N))?)?;
        Ok(Self {
            spec: *spec,
            gamma,
            gff: GffSampler::new(*spec)?,
            crm,
            support: idx,
            weights,
            index,
            solver,
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn conformal_radius(&self) -> &ConformalRadiusMap {
        &self.crm
    }

    /// Candidate root vertices and their unnormalized weights.
    pub fn root_law(&self) -> (&[usize], &[f64]) {
        (&self.support, &self.weights)
    }

    /// Root index drawn from the root stream of `seed`.
    pub fn sample_root(&self, seed: u64) -> usize {
        let mut rng = stream(seed, Purpose::Root, 0);
        self.index.sample(&mut rng)
    }

    /// `gamma xi^z_{2a}` on the grid.
    pub fn shift(&self, z: Point) -> Result<Vec<f64>> {
        let xi = XiPotential::with_laplace(&self.spec, z, &self.solver)?;
        let mut g = xi.grid(2.0 * self.spec.spacing())?;
        g.iter_mut().for_each(|v| *v *= self.gamma);
        Ok(g)
    }

    /// The shift integrated against vertex functionals `w`, without filling
    /// the grid: `gamma sum_v w(v) xi^z_{2a}(v)` for each functional.
    pub fn shift_functionals(&self, z: Point, ws: &[&[(usize, f64)]]) -> Result<Vec<f64>> {
        let xi = XiPotential::with_laplace(&self.spec, z, &self.solver)?;
        let eps = 2.0 * self.spec.spacing();
        let (nx, _) = self.spec.dims();
        ws.iter()
            .map(|w| {
                let mut acc = 0.0;
                for &(k, c) in w.iter() {
                    let (i, j) = (k % nx, k / nx);
                    if self.spec.is_interior(i, j) {
                        acc += c * xi.value(eps, self.spec.position(i, j))?;
                    }
                }
                Ok(self.gamma * acc)
            })
            .collect()
    }

    pub fn sample(&self, seed: u64) -> Result<RootedSample> {
        self.sample_with_field(seed, self.gff.sample(seed))
    }

    /// Both rooted samples built on the two fields of one transform.
    pub fn sample_pair(&self, seed: u64) -> Result<(RootedSample, RootedSample)> {
        let (f0, f1) = self.gff.sample_pair(seed);
        let a = self.sample_with_field(seed, f0)?;
        let b = self.sample_with_field(seed ^ 0x9e37_79b9_7f4a_7c15, f1)?;
        Ok((a, b))
    }

    fn sample_with_field(&self, root_seed: u64, field: Field) -> Result<RootedSample> {
        let k = self.sample_root(root_seed);
        let v = self.support[k];
        let (nx, _) = self.spec.dims();
        let root = (v % nx, v / nx);
        let point = self.spec.position(root.0, root.1);
        let shift = self.shift(point)?;
        Ok(RootedSample {
            root,
            point,
            field: add_background(&field, &shift)?,
            weight: self.weights[k],
        })
    }
}

pub fn sample_rooted(spec: &DomainSpec, gamma: f64, seed: u64) -> Result<RootedSample> {
    RootedSampler::new(spec, gamma)?.sample(seed)
}

/// `h_eps(z) / log(1/eps)` at `eps = eps0 e^{-t}`, for one field and centre.
pub fn thickness_ratio(field: &Field, z: Point, eps0: f64, t: f64) -> Result<f64> {
    let eps = eps0 * libm::exp(-t);
    if !(eps < 1.0) {
        return Err(Error::Parameter {
            name: "eps",
            value: eps,
        });
    }
    let k = CircleKernel::new(field.spec(), z, eps)?;
    Ok(k.apply(field) / -libm::log(eps))
}

/// Ensemble mean and standard error of [`thickness_ratio`] over rooted
/// samples, each read at its own root.
pub fn thick_point_slope(samples: &[RootedSample], eps0: f64, t: f64) -> Result<(f64, f64)> {
    let r: Vec<f64> = samples
        .iter()
        .map(|s| thickness_ratio(&s.field, s.point, eps0, t))
        .collect::<Result<_>>()?;
    if r.len() < 2 {
        return Err(Error::Parameter {
            name: "samples",
            value: r.len() as f64,
        });
    }
    Ok((mean(&r), std_error(&r)))
}
