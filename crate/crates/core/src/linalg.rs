//! Sparse solvers for the five-point graph Laplacian on masked grids.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

/// Interior vertices of an `nx x ny` vertex grid, numbered in row-major
/// order. Non-interior vertices act as zero Dirichlet data.
#[derive(Debug, Clone)]
pub(crate) struct MaskedGrid {
    pub nx: usize,
    pub ny: usize,
    /// grid index -> unknown number (or `NONE`)
    slot: Vec<u32>,
    /// unknown number -> grid index
    pub vertices: Vec<usize>,
}

impl MaskedGrid {
    pub fn new(nx: usize, ny: usize, interior: impl Fn(usize, usize) -> bool) -> Self {
        let mut slot = vec![NONE; nx * ny];
        let mut vertices = Vec::new();
        for j in 0..ny {
            for i in 0..nx {
                if interior(i, j) {
                    slot[j * nx + i] = vertices.len() as u32;
                    vertices.push(j * nx + i);
                }
            }
        }
        Self {
            nx,
            ny,
            slot,
            vertices,
        }
    }

    pub fn unknowns(&self) -> usize {
        self.vertices.len()
    }

    pub fn slot(&self, idx: usize) -> Option<usize> {
        match self.slot[idx] {
            NONE => None,
            s => Some(s as usize),
        }
    }

    /// The four lattice neighbours of a grid index that exist on the grid.
    pub fn neighbors(&self, idx: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = (idx % self.nx, idx / self.nx);
        let nx = self.nx;
        let ny = self.ny;
        [
            (i > 0).then(|| idx - 1),
            (i + 1 < nx).then(|| idx + 1),
            (j > 0).then(|| idx - nx),
            (j + 1 < ny).then(|| idx + nx),
        ]
        .into_iter()
        .flatten()
    }

    fn bandwidth(&self) -> usize {
        let mut bw = 0;
        for (k, &idx) in self.vertices.iter().enumerate() {
            for nb in self.neighbors(idx) {
                if let Some(s) = self.slot(nb) {
                    if s < k {
                        bw = bw.max(k - s);
                    }
                }
            }
        }
        bw
    }
}

/// Cholesky factor `L` of a symmetric positive definite banded matrix,
/// stored row by row over the band `[i - bw, i]`.
#[derive(Debug, Clone)]
pub(crate) struct BandedCholesky {
    n: usize,
    bw: usize,
    data: Vec<f64>,
}

impl BandedCholesky {
    /// Factorizes `-L` (the positive graph Laplacian with zero data outside
    /// the mask) over the unknowns of `grid`.
    pub fn laplacian(grid: &MaskedGrid) -> Result<Self> {
        let n = grid.unknowns();
        if n == 0 {
            return Err(Error::Solver("no interior vertices"));
        }
        let bw = grid.bandwidth();
        let w = bw + 1;
        let mut data = vec![0.0; n * w];
        for (k, &idx) in grid.vertices.iter().enumerate() {
            data[k * w + bw] = 4.0;
            for nb in grid.neighbors(idx) {
                if let Some(s) = grid.slot(nb) {
                    if s < k {
                        data[k * w + (s + bw - k)] = -1.0;
                    }
                }
            }
        }
        for i in 0..n {
            let lo = i.saturating_sub(bw);
            for j in lo..=i {
                let jlo = j.saturating_sub(bw).max(lo);
                let row_i = &data[i * w + (jlo + bw - i)..i * w + (j + bw - i)];
                let row_j = &data[j * w + (jlo + bw - j)..j * w + bw];
                let dot: f64 = row_i.iter().zip(row_j).map(|(a, b)| a * b).sum();
                let s = data[i * w + (j + bw - i)] - dot;
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::Solver("matrix is not positive definite"));
                    }
                    data[i * w + bw] = libm::sqrt(s);
                } else {
                    data[i * w + (j + bw - i)] = s / data[j * w + bw];
                }
            }
        }
        Ok(Self { n, bw, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// Solves `L x = b` in place.
    pub fn solve_lower(&self, x: &mut [f64]) {
        let w = self.bw + 1;
        for i in 0..self.n {
            let lo = i.saturating_sub(self.bw);
            let row = &self.data[i * w + (lo + self.bw - i)..i * w + self.bw];
            let dot: f64 = row.iter().zip(&x[lo..i]).map(|(a, b)| a * b).sum();
            x[i] = (x[i] - dot) / self.data[i * w + self.bw];
        }
    }

    /// Solves `L^T x = b` in place.
    pub fn solve_upper(&self, x: &mut [f64]) {
        let w = self.bw + 1;
        for i in (0..self.n).rev() {
            x[i] /= self.data[i * w + self.bw];
            let xi = x[i];
            let lo = i.saturating_sub(self.bw);
            let row = &self.data[i * w + (lo + self.bw - i)..i * w + self.bw];
            for (xk, l) in x[lo..i].iter_mut().zip(row) {
                *xk -= l * xi;
            }
        }
    }

    /// Solves `(L L^T) x = b` in place.
    pub fn solve(&self, x: &mut [f64]) {
        self.solve_lower(x);
        self.solve_upper(x);
    }
}

/// Conjugate gradients for the singular positive graph Laplacian of a grid
/// without Dirichlet vertices (torus or free). The right-hand side must have
/// zero sum; the returned solution has zero mean.
pub(crate) fn cg_singular_laplacian(
    apply: impl Fn(&[f64], &mut [f64]),
    rhs: &[f64],
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>> {
    let n = rhs.len();
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mean = r.iter().sum::<f64>() / n as f64;
    r.iter_mut().for_each(|v| *v -= mean);
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let b_norm = libm::sqrt(r.iter().map(|v| v * v).sum::<f64>());
    if b_norm == 0.0 {
        return Ok(x);
    }
    let mut rr: f64 = r.iter().map(|v| v * v).sum();
    for _ in 0..max_iter {
        apply(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        let alpha = rr / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new: f64 = r.iter().map(|v| v * v).sum();
        if libm::sqrt(rr_new) <= rel_tol * b_norm {
            let m = x.iter().sum::<f64>() / n as f64;
            x.iter_mut().for_each(|v| *v -= m);
            return Ok(x);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
    }
    Err(Error::Solver("conjugate gradients did not converge"))
}
