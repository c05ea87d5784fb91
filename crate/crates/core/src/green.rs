//! Discrete Green's functions and harmonic extensions by direct sparse
//! solves. Nothing here touches the spectral sampler, so these serve as an
//! independent check of its covariance.
//!
//! Normalization: `G_d(x, .)` solves `-L G_d(x, .) = 2 pi 1_x` for the
//! five-point graph Laplacian `L`, i.e. the discrete Laplacian with spacing
//! `a` applied to `G_d(x, .)` equals `-2 pi 1_x / a^2`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::domain::{DomainKind, DomainSpec, Point};
use crate::error::{Error, Result};
use crate::linalg::{cg_singular_laplacian, BandedCholesky, MaskedGrid};

/// Factorized `-L` on the interior of a Dirichlet-type grid.
#[derive(Debug, Clone)]
pub struct LaplaceSolver {
    spec: DomainSpec,
    grid: MaskedGrid,
    chol: BandedCholesky,
}

impl LaplaceSolver {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        if !spec.kind().is_dirichlet() {
            return Err(Error::UnsupportedKind(spec.kind().name()));
        }
        let (nx, ny) = spec.dims();
        let grid = MaskedGrid::new(nx, ny, |i, j| spec.is_interior(i, j));
        let chol = BandedCholesky::laplacian(&grid)?;
        Ok(Self { spec, grid, chol })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    /// Where boundary data for vertex `(i, j)` is read. Exterior vertices of
    /// the embedded disc are projected radially onto the circle.
    pub fn boundary_point(&self, i: usize, j: usize) -> Point {
        let p = self.spec.position(i, j);
        if self.spec.kind() == DomainKind::DiscEmbedded {
            let c = self.spec.center();
            let r = 0.5 * self.spec.side();
            let d = p.dist(c);
            if d > 0.0 {
                return Point::new(c.x + r * (p.x - c.x) / d, c.y + r * (p.y - c.y) / d);
            }
        }
        p
    }

    /// Discrete harmonic function on the interior with boundary values `g`.
    /// Returned over the full vertex grid (boundary entries hold `g`).
    pub fn harmonic_extension(&self, g: impl Fn(Point) -> f64) -> Vec<f64> {
        let (nx, _) = self.spec.dims();
        let mut out = vec![0.0; self.spec.len()];
        let mut rhs = vec![0.0; self.grid.unknowns()];
        for idx in 0..out.len() {
            if self.grid.slot(idx).is_none() {
                out[idx] = g(self.boundary_point(idx % nx, idx / nx));
            }
        }
        for (k, &idx) in self.grid.vertices.iter().enumerate() {
            rhs[k] = self
                .grid
                .neighbors(idx)
                .filter(|&nb| self.grid.slot(nb).is_none())
                .map(|nb| out[nb])
                .sum();
        }
        self.chol.solve(&mut rhs);
        for (k, &idx) in self.grid.vertices.iter().enumerate() {
            out[idx] = rhs[k];
        }
        out
    }

    /// Solves `-L u = f` with zero boundary values; `f` is over the full grid
    /// (boundary entries ignored).
    pub fn poisson(&self, f: &[f64]) -> Vec<f64> {
        let mut rhs: Vec<f64> = self.grid.vertices.iter().map(|&idx| f[idx]).collect();
        self.chol.solve(&mut rhs);
        let mut out = vec![0.0; self.spec.len()];
        for (k, &idx) in self.grid.vertices.iter().enumerate() {
            out[idx] = rhs[k];
        }
        out
    }

    pub(crate) fn factor(&self) -> &BandedCholesky {
        &self.chol
    }

    pub(crate) fn grid(&self) -> &MaskedGrid {
        &self.grid
    }
}

#[derive(Debug, Clone)]
enum Backend {
    Dirichlet(LaplaceSolver),
    /// Even reflection across the bottom edge: Dirichlet solve on the doubled
    /// rectangle, then `G(x, y) = G'(x, y) + G'(x, Ry)`.
    Doubled {
        grid: MaskedGrid,
        chol: BandedCholesky,
    },
    Singular,
}

/// The discrete Green's function of a domain.
#[derive(Debug, Clone)]
pub struct GreenOracle {
    spec: DomainSpec,
    backend: Backend,
}

impl GreenOracle {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        let backend = match spec.kind() {
            DomainKind::DirichletSquare | DomainKind::DiscEmbedded => {
                Backend::Dirichlet(LaplaceSolver::new(spec)?)
            }
            DomainKind::MixedSquare => {
                let n = spec.n();
                let grid = MaskedGrid::new(n + 1, 2 * n + 1, |i, j| {
                    i > 0 && i < n && j > 0 && j < 2 * n
                });
                let chol = BandedCholesky::laplacian(&grid)?;
                Backend::Doubled { grid, chol }
            }
            DomainKind::Torus | DomainKind::FreeSquare => Backend::Singular,
        };
        Ok(Self { spec, backend })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    fn check(&self, v: (usize, usize)) -> Result<()> {
        let (nx, ny) = self.spec.dims();
        if v.0 >= nx || v.1 >= ny {
            return Err(Error::VertexOutside(v.0, v.1));
        }
        Ok(())
    }

    /// `G_d(x, .)` over the full vertex grid.
    pub fn row(&self, x: (usize, usize)) -> Result<Vec<f64>> {
        self.check(x)?;
        let spec = &self.spec;
        let xi = spec.index(x.0, x.1);
        match &self.backend {
            Backend::Dirichlet(solver) => {
                let mut f = vec![0.0; spec.len()];
                if !spec.is_interior(x.0, x.1) {
                    return Ok(f);
                }
                f[xi] = 2.0 * PI;
                Ok(solver.poisson(&f))
            }
            Backend::Doubled { grid, chol } => {
                let n = spec.n();
                let mut out = vec![0.0; spec.len()];
                if !spec.is_interior(x.0, x.1) {
                    return Ok(out);
                }
                let mut rhs = vec![0.0; grid.unknowns()];
                let src = (n + x.1) * (n + 1) + x.0;
                rhs[grid.slot(src).expect("interior source")] = 2.0 * PI;
                chol.solve(&mut rhs);
                let value = |i: usize, j: usize| -> f64 {
                    grid.slot(j * (n + 1) + i).map_or(0.0, |s| rhs[s])
                };
                for j in 0..=n {
                    for i in 0..=n {
                        if spec.is_interior(i, j) {
                            out[spec.index(i, j)] = value(i, n + j) + value(i, n - j);
                        }
                    }
                }
                Ok(out)
            }
            Backend::Singular => {
                let (nx, ny) = spec.dims();
                let periodic = spec.kind() == DomainKind::Torus;
                let apply = |u: &[f64], out: &mut [f64]| {
                    for j in 0..ny {
                        for i in 0..nx {
                            let c = u[j * nx + i];
                            let mut acc = 0.0;
                            let mut push = |ii: Option<usize>, jj: Option<usize>| {
                                if let (Some(ii), Some(jj)) = (ii, jj) {
                                    acc += c - u[jj * nx + ii];
                                }
                            };
                            if periodic {
                                push(Some((i + nx - 1) % nx), Some(j));
                                push(Some((i + 1) % nx), Some(j));
                                push(Some(i), Some((j + ny - 1) % ny));
                                push(Some(i), Some((j + 1) % ny));
                            } else {
                                push(i.checked_sub(1), Some(j));
                                push((i + 1 < nx).then_some(i + 1), Some(j));
                                push(Some(i), j.checked_sub(1));
                                push(Some(i), (j + 1 < ny).then_some(j + 1));
                            }
                            out[j * nx + i] = acc;
                        }
                    }
                };
                let mut rhs = vec![0.0; spec.len()];
                rhs[xi] = 2.0 * PI;
                cg_singular_laplacian(apply, &rhs, 1e-13, 20 * (nx + ny) * 10)
            }
        }
    }

    /// `G_d(x, y)`.
    pub fn solve(&self, x: (usize, usize), y: (usize, usize)) -> Result<f64> {
        self.check(y)?;
        Ok(self.row(x)?[self.spec.index(y.0, y.1)])
    }
}

/// One-shot `G_d(x, y)`; build a [`GreenOracle`] when querying repeatedly.
pub fn green_solve(spec: &DomainSpec, x: (usize, usize), y: (usize, usize)) -> Result<f64> {
    GreenOracle::new(*spec)?.solve(x, y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirichlet_green_is_symmetric_and_nonnegative() {
        let spec = DomainSpec::unit(DomainKind::DirichletSquare, 16).unwrap();
        let g = GreenOracle::new(spec).unwrap();
        let pairs = [((3, 4), (10, 12)), ((1, 1), (15, 15)), ((8, 8), (8, 9))];
        for (x, y) in pairs {
            let a = g.solve(x, y).unwrap();
            let b = g.solve(y, x).unwrap();
            assert!((a - b).abs() < 1e-12);
            assert!(a > 0.0);
        }
        assert_eq!(g.solve((8, 8), (0, 8)).unwrap(), 0.0);
    }

    #[test]
    fn torus_green_has_zero_mean_rows() {
        let spec = DomainSpec::unit(DomainKind::Torus, 16).unwrap();
        let g = GreenOracle::new(spec).unwrap();
        let row = g.row((2, 5)).unwrap();
        let mean = row.iter().sum::<f64>() / row.len() as f64;
        assert!(mean.abs() < 1e-12);
        let a = g.solve((2, 5), (9, 1)).unwrap();
        let b = g.solve((9, 1), (2, 5)).unwrap();
        assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn harmonic_extension_reproduces_linear_functions() {
        let spec = DomainSpec::unit(DomainKind::DirichletSquare, 16).unwrap();
        let solver = LaplaceSolver::new(spec).unwrap();
        let u = solver.harmonic_extension(|p| 2.0 * p.x - 3.0 * p.y + 1.0);
        for j in 0..=16 {
            for i in 0..=16 {
                let p = spec.position(i, j);
                assert!((u[spec.index(i, j)] - (2.0 * p.x - 3.0 * p.y + 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn out_of_grid_vertex_is_an_error() {
        let spec = DomainSpec::unit(DomainKind::DirichletSquare, 16).unwrap();
        assert!(matches!(
            green_solve(&spec, (17, 0), (1, 1)),
            Err(Error::VertexOutside(17, 0))
        ));
    }
}
