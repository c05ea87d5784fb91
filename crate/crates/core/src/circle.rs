//! Circle averages, conformal radii and the potentials `xi^z_eps`.
//!
//! The field is extended by zero outside the domain (periodically on the
//! torus) and read between vertices by bilinear interpolation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::domain::{DomainKind, DomainSpec, Point};
use crate::error::{Error, Result};
use crate::fft::{for_each_col, for_each_row, Fft};
use crate::field::Field;
use crate::green::LaplaceSolver;

/// Default resolution of the coarse grid used for harmonic extensions.
pub const DEFAULT_SOLVER_N: usize = 128;

/// Relative slack on the `2a` resolution floor, so that `eps = 2a` computed
/// in floating point is accepted.
const FLOOR_SLACK: f64 = 1e-9;

pub(crate) fn check_resolved(spec: &DomainSpec, eps: f64) -> Result<()> {
    let floor = 2.0 * spec.spacing();
    if !(eps >= floor * (1.0 - FLOOR_SLACK)) {
        return Err(Error::UnderResolved { radius: eps, floor });
    }
    Ok(())
}

/// Fractional vertex coordinates of a physical point.
fn grid_coords(spec: &DomainSpec, p: Point) -> (f64, f64) {
    let a = spec.spacing();
    let off = if spec.kind().cell_centered() {
        0.5
    } else {
        0.0
    };
    (p.x / a - off, p.y / a - off)
}

/// Bilinear weights of the four vertices around `p`. Vertices off the grid
/// are reported as `None` (the field is zero there), except on the torus
/// where indices wrap.
pub fn bilinear_weights(spec: &DomainSpec, p: Point) -> [(Option<usize>, f64); 4] {
    let (u, v) = grid_coords(spec, p);
    let (fi, fj) = (libm::floor(u), libm::floor(v));
    let (s, t) = (u - fi, v - fj);
    let (nx, ny) = spec.dims();
    let torus = spec.kind() == DomainKind::Torus;
    let at = |di: i64, dj: i64| -> Option<usize> {
        let (mut i, mut j) = (fi as i64 + di, fj as i64 + dj);
        if torus {
            i = i.rem_euclid(nx as i64);
            j = j.rem_euclid(ny as i64);
        } else if i < 0 || j < 0 || i >= nx as i64 || j >= ny as i64 {
            return None;
        }
        Some(j as usize * nx + i as usize)
    };
    [
        (at(0, 0), (1.0 - s) * (1.0 - t)),
        (at(1, 0), s * (1.0 - t)),
        (at(0, 1), (1.0 - s) * t),
        (at(1, 1), s * t),
    ]
}

/// Bilinear interpolation of a vertex function at a physical point.
pub fn interpolate(spec: &DomainSpec, values: &[f64], p: Point) -> f64 {
    bilinear_weights(spec, p)
        .iter()
        .filter_map(|&(idx, w)| idx.map(|k| w * values[k]))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arc {
    Full,
    /// Upper half circle, used for averages centred on the lower edge.
    Upper,
}

/// Uniform probability measure on a circle (or upper semicircle),
/// discretized by equispaced points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleKernel {
    center: Point,
    radius: f64,
    points: usize,
    arc: Arc,
}

/// Minimum number of quadrature points for a full circle of radius `eps`.
pub fn min_points(spec: &DomainSpec, eps: f64) -> usize {
    let m = libm::ceil(2.0 * PI * eps / spec.spacing()) as usize;
    m.max(16)
}

impl CircleKernel {
    pub fn new(spec: &DomainSpec, center: Point, radius: f64) -> Result<Self> {
        check_resolved(spec, radius)?;
        let points = 2 * min_points(spec, radius);
        Ok(Self {
            center,
            radius,
            points,
            arc: Arc::Full,
        })
    }

    pub fn semicircle(spec: &DomainSpec, center: Point, radius: f64) -> Result<Self> {
        check_resolved(spec, radius)?;
        Ok(Self {
            center,
            radius,
            points: min_points(spec, radius),
            arc: Arc::Upper,
        })
    }

    /// Overrides the number of quadrature points.
    pub fn with_points(mut self, spec: &DomainSpec, points: usize) -> Result<Self> {
        let need = match self.arc {
            Arc::Full => min_points(spec, self.radius),
            Arc::Upper => min_points(spec, self.radius).div_ceil(2),
        };
        if points < need {
            return Err(Error::Parameter {
                name: "points",
                value: points as f64,
            });
        }
        self.points = points;
        Ok(self)
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn points(&self) -> usize {
        self.points
    }

    fn angle(&self, k: usize) -> f64 {
        match self.arc {
            Arc::Full => 2.0 * PI * k as f64 / self.points as f64,
            Arc::Upper => PI * (k as f64 + 0.5) / self.points as f64,
        }
    }

    /// The average as a sparse linear functional `(vertex, weight)`, sorted
    /// by vertex with duplicates merged.
    pub fn weights(&self, spec: &DomainSpec) -> Vec<(usize, f64)> {
        let mut raw = Vec::with_capacity(4 * self.points);
        let w = 1.0 / self.points as f64;
        for k in 0..self.points {
            let th = self.angle(k);
            let p = Point::new(
                self.center.x + self.radius * libm::cos(th),
                self.center.y + self.radius * libm::sin(th),
            );
            for (idx, b) in bilinear_weights(spec, p) {
                if let Some(idx) = idx {
                    if b != 0.0 {
                        raw.push((idx, w * b));
                    }
                }
            }
        }
        merge_weights(raw)
    }

    pub fn apply(&self, field: &Field) -> f64 {
        let spec = field.spec();
        let v = field.values();
        let w = 1.0 / self.points as f64;
        let mut acc = 0.0;
        for k in 0..self.points {
            let th = self.angle(k);
            let p = Point::new(
                self.center.x + self.radius * libm::cos(th),
                self.center.y + self.radius * libm::sin(th),
            );
            acc += interpolate(spec, v, p);
        }
        acc * w
    }
}

fn merge_weights(mut raw: Vec<(usize, f64)>) -> Vec<(usize, f64)> {
    raw.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(raw.len());
    for (idx, w) in raw {
        match out.last_mut() {
            Some(last) if last.0 == idx => last.1 += w,
            _ => out.push((idx, w)),
        }
    }
    out
}

/// Evaluates a sparse functional on a field.
pub fn apply_weights(weights: &[(usize, f64)], values: &[f64]) -> f64 {
    weights.iter().map(|&(k, w)| w * values[k]).sum()
}

/// `h_eps(z)`.
pub fn circle_average(field: &Field, z: Point, eps: f64) -> Result<f64> {
    Ok(CircleKernel::new(field.spec(), z, eps)?.apply(field))
}

/// Translation-invariant circle stencil in lattice offsets, for averaging
/// around every vertex at once.
#[derive(Debug, Clone)]
pub struct CircleStencil {
    radius: f64,
    taps: Vec<(i64, i64, f64)>,
}

impl CircleStencil {
    pub fn new(spec: &DomainSpec, eps: f64) -> Result<Self> {
        check_resolved(spec, eps)?;
        let a = spec.spacing();
        let m = 2 * min_points(spec, eps);
        let r = eps / a;
        let mut map: Vec<((i64, i64), f64)> = Vec::with_capacity(4 * m);
        let w = 1.0 / m as f64;
        for k in 0..m {
            let th = 2.0 * PI * k as f64 / m as f64;
            let (u, v) = (r * libm::cos(th), r * libm::sin(th));
            let (fi, fj) = (libm::floor(u), libm::floor(v));
            let (s, t) = (u - fi, v - fj);
            let (i0, j0) = (fi as i64, fj as i64);
            for (di, dj, b) in [
                (0, 0, (1.0 - s) * (1.0 - t)),
                (1, 0, s * (1.0 - t)),
                (0, 1, (1.0 - s) * t),
                (1, 1, s * t),
            ] {
                if b != 0.0 {
                    map.push(((i0 + di, j0 + dj), w * b));
                }
            }
        }
        map.sort_by_key(|e| e.0);
        let mut taps: Vec<(i64, i64, f64)> = Vec::new();
        for ((di, dj), b) in map {
            match taps.last_mut() {
                Some(last) if (last.0, last.1) == (di, dj) => last.2 += b,
                _ => taps.push((di, dj, b)),
            }
        }
        Ok(Self { radius: eps, taps })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn taps(&self) -> &[(i64, i64, f64)] {
        &self.taps
    }

    fn reach(&self) -> usize {
        self.taps
            .iter()
            .map(|t| t.0.unsigned_abs().max(t.1.unsigned_abs()))
            .max()
            .unwrap_or(0) as usize
    }

    /// Average at a single vertex by direct summation.
    pub fn at(&self, field: &Field, i: usize, j: usize) -> f64 {
        let spec = field.spec();
        let (nx, ny) = spec.dims();
        let torus = spec.kind() == DomainKind::Torus;
        let v = field.values();
        let mut acc = 0.0;
        for &(di, dj, w) in &self.taps {
            let (mut x, mut y) = (i as i64 + di, j as i64 + dj);
            if torus {
                x = x.rem_euclid(nx as i64);
                y = y.rem_euclid(ny as i64);
            } else if x < 0 || y < 0 || x >= nx as i64 || y >= ny as i64 {
                continue;
            }
            acc += w * v[y as usize * nx + x as usize];
        }
        acc
    }

    /// Averages around every vertex, by FFT correlation.
    pub fn apply_grid(&self, field: &Field) -> Vec<f64> {
        let spec = field.spec();
        let (nx, ny) = spec.dims();
        let torus = spec.kind() == DomainKind::Torus;
        let p = if torus {
            nx
        } else {
            (nx.max(ny) + self.reach() + 1).next_power_of_two()
        };
        let fft = Fft::new(p);
        let mut h = vec![Complex64::new(0.0, 0.0); p * p];
        for j in 0..ny {
            for i in 0..nx {
                h[j * p + i].re = field.values()[j * nx + i];
            }
        }
        let mut k = vec![Complex64::new(0.0, 0.0); p * p];
        for &(di, dj, w) in &self.taps {
            let x = di.rem_euclid(p as i64) as usize;
            let y = dj.rem_euclid(p as i64) as usize;
            k[y * p + x].re += w;
        }
        for data in [&mut h, &mut k] {
            for_each_row(data, p, |row| fft.forward(row));
            for_each_col(data, p, p, |col| fft.forward(col));
        }
        for (a, b) in h.iter_mut().zip(&k) {
            *a *= b.conj();
        }
        for_each_row(&mut h, p, |row| fft.inverse(row));
        for_each_col(&mut h, p, p, |col| fft.inverse(col));
        let norm = 1.0 / (p * p) as f64;
        let mut out = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                out[j * nx + i] = h[j * p + i].re * norm;
            }
        }
        out
    }
}

/// `h_eps` at every vertex.
pub fn circle_average_grid(field: &Field, eps: f64) -> Result<Vec<f64>> {
    Ok(CircleStencil::new(field.spec(), eps)?.apply_grid(field))
}

/// `V_t = h_{eps0 e^{-t}}(z) - h_{eps0}(z)` on the times `t_j = j dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialLadder {
    pub center: Point,
    pub eps0: f64,
    pub dt: f64,
    pub values: Vec<f64>,
}

impl RadialLadder {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |j| j as f64 * self.dt)
    }

    pub fn radius(&self, j: usize) -> f64 {
        self.eps0 * libm::exp(-(j as f64) * self.dt)
    }
}

/// Kernels of the ladder radii, for reuse across many fields.
pub fn ladder_kernels(
    spec: &DomainSpec,
    z: Point,
    eps0: f64,
    steps: usize,
    dt: f64,
) -> Result<Vec<CircleKernel>> {
    if !(dt > 0.0) {
        return Err(Error::Parameter {
            name: "dt",
            value: dt,
        });
    }
    if spec.kind() != DomainKind::Torus && spec.boundary_distance(z) < eps0 {
        return Err(Error::Parameter {
            name: "eps0",
            value: eps0,
        });
    }
    check_resolved(spec, eps0 * libm::exp(-(steps as f64) * dt))?;
    (0..=steps)
        .map(|j| CircleKernel::new(spec, z, eps0 * libm::exp(-(j as f64) * dt)))
        .collect()
}

pub fn radial_ladder(
    field: &Field,
    z: Point,
    eps0: f64,
    steps: usize,
    dt: f64,
) -> Result<RadialLadder> {
    let kernels = ladder_kernels(field.spec(), z, eps0, steps, dt)?;
    let base = kernels[0].apply(field);
    let mut values: Vec<f64> = kernels.iter().map(|k| k.apply(field) - base).collect();
    values[0] = 0.0;
    Ok(RadialLadder {
        center: z,
        eps0,
        dt,
        values,
    })
}

fn check_conformal_kind(spec: &DomainSpec) -> Result<()> {
    if spec.kind().is_dirichlet() {
        Ok(())
    } else {
        Err(Error::UnsupportedKind(spec.kind().name()))
    }
}

/// `log C(z; D)` at every vertex; `-inf` on the boundary and outside.
#[derive(Debug, Clone)]
pub struct ConformalRadiusMap {
    spec: DomainSpec,
    log_c: Vec<f64>,
}

impl ConformalRadiusMap {
    /// Solves on a grid of at most [`DEFAULT_SOLVER_N`] cells per side and
    /// interpolates.
    pub fn new(spec: &DomainSpec) -> Result<Self> {
        Self::with_solver(spec, spec.n().min(DEFAULT_SOLVER_N))
    }

    pub fn with_solver(spec: &DomainSpec, solver_n: usize) -> Result<Self> {
        check_conformal_kind(spec)?;
        let coarse = spec.with_n(solver_n)?;
        let coarse_log = solve_log_conformal(&coarse)?;
        if solver_n == spec.n() {
            return Ok(Self {
                spec: *spec,
                log_c: coarse_log,
            });
        }
        let c: Vec<f64> = coarse_log.iter().map(|&l| libm::exp(l)).collect();
        let (nx, ny) = spec.dims();
        let mut log_c = vec![f64::NEG_INFINITY; spec.len()];
        for j in 0..ny {
            for i in 0..nx {
                if !spec.is_interior(i, j) {
                    continue;
                }
                let p = spec.position(i, j);
                let v = interpolate(&coarse, &c, p);
                log_c[j * nx + i] = if v > 0.0 {
                    libm::log(v)
                } else {
                    libm::log(2.0 * spec.boundary_distance(p))
                };
            }
        }
        Ok(Self { spec: *spec, log_c })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn log_values(&self) -> &[f64] {
        &self.log_c
    }

    pub fn log_c(&self, i: usize, j: usize) -> f64 {
        self.log_c[self.spec.index(i, j)]
    }

    pub fn c(&self, i: usize, j: usize) -> f64 {
        libm::exp(self.log_c(i, j))
    }

    /// `C(p; D)` by bilinear interpolation of `C`.
    pub fn c_at(&self, p: Point) -> f64 {
        bilinear_weights(&self.spec, p)
            .iter()
            .filter_map(|&(idx, w)| idx.map(|k| w * libm::exp(self.log_c[k])))
            .sum()
    }
}

/// `log C(z) = sum over boundary b of P(z, b) log|b - z|`, with the
/// discrete harmonic measure `P` obtained one boundary vertex at a time.
fn solve_log_conformal(spec: &DomainSpec) -> Result<Vec<f64>> {
    let solver = LaplaceSolver::new(*spec)?;
    let grid = solver.grid();
    let chol = solver.factor();
    let (nx, _) = spec.dims();
    let pos: Vec<Point> = grid
        .vertices
        .iter()
        .map(|&idx| spec.position(idx % nx, idx / nx))
        .collect();
    let mut acc = vec![0.0; grid.unknowns()];
    let mut rhs = vec![0.0; grid.unknowns()];
    for b in 0..spec.len() {
        if grid.slot(b).is_some() {
            continue;
        }
        let nbrs: Vec<usize> = grid.neighbors(b).filter_map(|nb| grid.slot(nb)).collect();
        if nbrs.is_empty() {
            continue;
        }
        rhs.iter_mut().for_each(|v| *v = 0.0);
        for &k in &nbrs {
            rhs[k] = 1.0;
        }
        chol.solve(&mut rhs);
        let bp = solver.boundary_point(b % nx, b / nx);
        for (k, p) in pos.iter().enumerate() {
            acc[k] += rhs[k] * libm::log(bp.dist(*p));
        }
    }
    let mut out = vec![f64::NEG_INFINITY; spec.len()];
    for (k, &idx) in grid.vertices.iter().enumerate() {
        out[idx] = acc[k];
    }
    Ok(out)
}

pub fn conformal_radius(spec: &DomainSpec) -> Result<ConformalRadiusMap> {
    ConformalRadiusMap::new(spec)
}

/// `log C(z; D)` at one point from a single harmonic extension on a grid
/// with `solver_n` cells per side.
pub fn log_conformal_radius_at(spec: &DomainSpec, z: Point, solver_n: usize) -> Result<f64> {
    Ok(XiPotential::with_solver(spec, z, solver_n)?.log_conformal_radius())
}

/// `xi^z_eps(y) = -log max(|y - z|, eps) - G~_z(y)`, where `G~_z` is the
/// harmonic extension of `y -> -log|y - z|` from the boundary.
#[derive(Debug, Clone)]
pub struct XiPotential {
    spec: DomainSpec,
    z: Point,
    coarse: DomainSpec,
    harmonic: Vec<f64>,
}

impl XiPotential {
    pub fn new(spec: &DomainSpec, z: Point) -> Result<Self> {
        Self::with_solver(spec, z, spec.n().min(DEFAULT_SOLVER_N))
    }

    pub fn with_solver(spec: &DomainSpec, z: Point, solver_n: usize) -> Result<Self> {
        check_conformal_kind(spec)?;
        let coarse = spec.with_n(solver_n)?;
        Self::with_laplace(spec, z, &LaplaceSolver::new(coarse)?)
    }

    /// Reuses a factorized solver (same kind and side as `spec`).
    pub fn with_laplace(spec: &DomainSpec, z: Point, solver: &LaplaceSolver) -> Result<Self> {
        check_conformal_kind(spec)?;
        if !(spec.boundary_distance(z) > 0.0) {
            return Err(Error::OutsideDomain(z.x, z.y));
        }
        let coarse = *solver.spec();
        if coarse.kind() != spec.kind() || coarse.side() != spec.side() {
            return Err(Error::Parameter {
                name: "solver side",
                value: coarse.side(),
            });
        }
        let harmonic = solver.harmonic_extension(|b| -libm::log(b.dist(z)));
        Ok(Self {
            spec: *spec,
            z,
            coarse,
            harmonic,
        })
    }

    pub fn center(&self) -> Point {
        self.z
    }

    /// `G~_z(y)`.
    pub fn harmonic_at(&self, y: Point) -> f64 {
        interpolate(&self.coarse, &self.harmonic, y)
    }

    pub fn log_conformal_radius(&self) -> f64 {
        -self.harmonic_at(self.z)
    }

    pub fn value(&self, eps: f64, y: Point) -> Result<f64> {
        if !self.spec.contains(y) {
            return Err(Error::OutsideDomain(y.x, y.y));
        }
        if self.spec.boundary_distance(self.z) < eps {
            return Err(Error::Parameter {
                name: "eps",
                value: eps,
            });
        }
        Ok(-libm::log(y.dist(self.z).max(eps)) - self.harmonic_at(y))
    }

    /// Values on every vertex of the field grid; zero at non-interior
    /// vertices.
    pub fn grid(&self, eps: f64) -> Result<Vec<f64>> {
        if self.spec.boundary_distance(self.z) < eps {
            return Err(Error::Parameter {
                name: "eps",
                value: eps,
            });
        }
        let (nx, ny) = self.spec.dims();
        let mut out = vec![0.0; self.spec.len()];
        for j in 0..ny {
            for i in 0..nx {
                if self.spec.is_interior(i, j) {
                    let y = self.spec.position(i, j);
                    out[j * nx + i] = -libm::log(y.dist(self.z).max(eps)) - self.harmonic_at(y);
                }
            }
        }
        Ok(out)
    }
}

/// `xi^z_eps(y)` with a fresh harmonic solve.
pub fn xi(spec: &DomainSpec, z: Point, eps: f64, y: Point) -> Result<f64> {
    XiPotential::new(spec, z)?.value(eps, y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldTag, GffSampler};

    fn unit(kind: DomainKind, n: usize) -> DomainSpec {
        DomainSpec::unit(kind, n).unwrap()
    }

    #[test]
    fn constant_field_averages_to_constant() {
        let s = unit(DomainKind::Torus, 32);
        let f = Field::from_values(s, vec![2.5; s.len()], 0, FieldTag::Centered).unwrap();
        for (z, eps) in [(Point::new(0.1, 0.9), 0.3), (Point::new(0.5, 0.5), 0.0625)] {
            assert!((circle_average(&f, z, eps).unwrap() - 2.5).abs() < 1e-12);
        }
        let g = CircleStencil::new(&s, 0.2).unwrap().apply_grid(&f);
        assert!(g.iter().all(|v| (v - 2.5).abs() < 1e-12));
    }

    #[test]
    fn under_resolved_radius_is_rejected() {
        let s = unit(DomainKind::DirichletSquare, 64);
        assert!(matches!(
            CircleKernel::new(&s, s.center(), 1.9 / 64.0),
            Err(Error::UnderResolved { .. })
        ));
        assert!(CircleKernel::new(&s, s.center(), 2.0 / 64.0).is_ok());
    }

    #[test]
    fn grid_averages_match_pointwise_kernels() {
        for kind in [
            DomainKind::Torus,
            DomainKind::DirichletSquare,
            DomainKind::DiscEmbedded,
            DomainKind::FreeSquare,
        ] {
            let s = unit(kind, 32);
            let f = GffSampler::new(s).unwrap().sample(3);
            let st = CircleStencil::new(&s, 0.15).unwrap();
            let grid = st.apply_grid(&f);
            for (i, j) in [(0, 0), (3, 29), (16, 16), (31, 2)] {
                if i >= s.dims().0 || j >= s.dims().1 {
                    continue;
                }
                let k = CircleKernel::new(&s, s.position(i, j), 0.15).unwrap();
                let direct = k.apply(&f);
                assert!(
                    (grid[s.index(i, j)] - direct).abs() < 1e-10,
                    "{kind:?} {i} {j}"
                );
                assert!((st.at(&f, i, j) - direct).abs() < 1e-12);
                assert!((apply_weights(&k.weights(&s), f.values()) - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ladder_starts_at_zero() {
        let s = unit(DomainKind::DirichletSquare, 64);
        let f = GffSampler::new(s).unwrap().sample(1);
        let l = radial_ladder(&f, s.center(), 0.25, 0, core::f64::consts::LN_2).unwrap();
        assert_eq!(l.values, vec![0.0]);
        let l = radial_ladder(&f, s.center(), 0.25, 3, core::f64::consts::LN_2).unwrap();
        assert_eq!(l.values.len(), 4);
        assert!(matches!(
            radial_ladder(&f, s.center(), 0.25, 4, core::f64::consts::LN_2),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn disc_conformal_radius_matches_closed_form() {
        // unit disc: side 2, radius 1; C(z) = 1 - |z|^2
        let s = DomainSpec::new(DomainKind::DiscEmbedded, 64, 2.0).unwrap();
        let c = s.center();
        for (dx, expect) in [(0.0, 1.0), (0.5, 0.75)] {
            let z = Point::new(c.x + dx, c.y);
            let lc = log_conformal_radius_at(&s, z, 256).unwrap();
            assert!(
                (libm::exp(lc) - expect).abs() < 5e-3,
                "{dx}: {}",
                libm::exp(lc)
            );
        }
        let map = ConformalRadiusMap::with_solver(&s, 64).unwrap();
        assert!((map.c(32, 32) - 1.0).abs() < 2e-2);
        assert!((map.c(48, 32) - 0.75).abs() < 2e-2);
    }

    #[test]
    fn square_centre_conformal_radius() {
        // Schwarz-Christoffel: 4 sqrt(pi) / Gamma(1/4)^2 for the unit square
        let g = libm::tgamma(0.25);
        let expect = 4.0 * libm::sqrt(PI) / (g * g);
        let s = unit(DomainKind::DirichletSquare, 64);
        let lc = log_conformal_radius_at(&s, s.center(), 128).unwrap();
        assert!(
            (libm::exp(lc) - expect).abs() < 1e-4,
            "{} vs {expect}",
            libm::exp(lc)
        );
        let map = conformal_radius(&s).unwrap();
        assert!((map.c(32, 32) - expect).abs() < 1e-3);
        assert_eq!(map.log_c(0, 10), f64::NEG_INFINITY);
    }

    #[test]
    fn torus_has_no_conformal_radius() {
        assert!(matches!(
            conformal_radius(&unit(DomainKind::Torus, 16)),
            Err(Error::UnsupportedKind(_))
        ));
    }

    #[test]
    fn xi_profile() {
        let s = unit(DomainKind::DirichletSquare, 64);
        let z = Point::new(0.4, 0.55);
        let x = XiPotential::new(&s, z).unwrap();
        let eps = 0.05;
        let at_z = x.value(eps, z).unwrap();
        assert!((at_z - (-libm::log(eps) + x.log_conformal_radius())).abs() < 1e-12);
        // constant inside the eps ball up to the harmonic variation
        let inside = x.value(eps, Point::new(0.42, 0.56)).unwrap();
        assert!((inside - at_z).abs() < 0.05);
        assert!(x.value(eps, Point::new(1.0, 0.3125)).unwrap().abs() < 1e-12);
        assert!(x.value(eps, Point::new(0.999, 0.3)).unwrap().abs() < 0.02);
        let g = x.grid(eps).unwrap();
        assert_eq!(g[s.index(0, 5)], 0.0);
        assert!(matches!(
            x.value(eps, Point::new(1.2, 0.3)),
            Err(Error::OutsideDomain(..))
        ));
    }
}
