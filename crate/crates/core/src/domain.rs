//! Grid domains: geometry, vertex indexing and boundary classification.
//!
//! Square domains occupy `[0, L]^2`. Dirichlet-type grids (square, embedded
//! disc, mixed) put vertices at cell corners, `(N + 1)^2` of them; torus and
//! free grids put one vertex at each cell centre, `N^2` of them. The
//! embedded disc is the disc inscribed in the square.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainKind {
    Torus,
    DirichletSquare,
    DiscEmbedded,
    FreeSquare,
    MixedSquare,
}

impl DomainKind {
    pub const ALL: [DomainKind; 5] = [
        DomainKind::Torus,
        DomainKind::DirichletSquare,
        DomainKind::DiscEmbedded,
        DomainKind::FreeSquare,
        DomainKind::MixedSquare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Torus => "torus",
            DomainKind::DirichletSquare => "dirichlet_square",
            DomainKind::DiscEmbedded => "disc_embedded",
            DomainKind::FreeSquare => "free_square",
            DomainKind::MixedSquare => "mixed_square",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn code(self) -> u8 {
        match self {
            DomainKind::Torus => 0,
            DomainKind::DirichletSquare => 1,
            DomainKind::DiscEmbedded => 2,
            DomainKind::FreeSquare => 3,
            DomainKind::MixedSquare => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.code() == code)
    }

    /// Vertices sit at cell centres rather than cell corners.
    pub fn cell_centered(self) -> bool {
        matches!(self, DomainKind::Torus | DomainKind::FreeSquare)
    }

    /// Zero boundary values on all of the (outer) boundary.
    pub fn is_dirichlet(self) -> bool {
        matches!(self, DomainKind::DirichletSquare | DomainKind::DiscEmbedded)
    }
}

/// A point in physical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    kind: DomainKind,
    n: usize,
    side: f64,
}

impl DomainSpec {
    pub fn new(kind: DomainKind, n: usize, side: f64) -> Result<Self> {
        if !n.is_power_of_two() || n < 16 {
            return Err(Error::GridSize(n));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::Side(side));
        }
        Ok(Self { kind, n, side })
    }

    /// Unit-side domain.
    pub fn unit(kind: DomainKind, n: usize) -> Result<Self> {
        Self::new(kind, n, 1.0)
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Cells per side.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Lattice spacing `a = L / N`.
    pub fn spacing(&self) -> f64 {
        self.side / self.n as f64
    }

    /// Vertex counts along x and y.
    pub fn dims(&self) -> (usize, usize) {
        if self.kind.cell_centered() {
            (self.n, self.n)
        } else {
            (self.n + 1, self.n + 1)
        }
    }

    pub fn len(&self) -> usize {
        let (nx, ny) = self.dims();
        nx * ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.dims().0 + i
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> (usize, usize) {
        let nx = self.dims().0;
        (idx % nx, idx / nx)
    }

    pub fn position(&self, i: usize, j: usize) -> Point {
        let a = self.spacing();
        if self.kind.cell_centered() {
            Point::new((i as f64 + 0.5) * a, (j as f64 + 0.5) * a)
        } else {
            Point::new(i as f64 * a, j as f64 * a)
        }
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * self.side, 0.5 * self.side)
    }

    /// Whether vertex `(i, j)` carries a degree of freedom (is not pinned to
    /// zero by a Dirichlet condition).
    pub fn is_interior(&self, i: usize, j: usize) -> bool {
        let n = self.n;
        match self.kind {
            DomainKind::Torus | DomainKind::FreeSquare => i < n && j < n,
            DomainKind::DirichletSquare => i > 0 && j > 0 && i < n && j < n,
            DomainKind::MixedSquare => i > 0 && i < n && j < n,
            DomainKind::DiscEmbedded => {
                if i > n || j > n {
                    return false;
                }
                let r = 0.5 * self.side;
                self.position(i, j).dist(self.center()) < r * (1.0 - 1e-12)
            }
        }
    }

    /// Whether a point lies in the closed domain.
    pub fn contains(&self, p: Point) -> bool {
        let l = self.side;
        match self.kind {
            DomainKind::DiscEmbedded => p.dist(self.center()) <= 0.5 * l * (1.0 + 1e-12),
            _ => p.x >= 0.0 && p.y >= 0.0 && p.x <= l && p.y <= l,
        }
    }

    /// Euclidean distance from a point to the domain boundary (infinite on
    /// the torus).
    pub fn boundary_distance(&self, p: Point) -> f64 {
        let l = self.side;
        match self.kind {
            DomainKind::Torus => f64::INFINITY,
            DomainKind::DiscEmbedded => 0.5 * l - p.dist(self.center()),
            _ => p.x.min(p.y).min(l - p.x).min(l - p.y),
        }
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            DomainKind::DiscEmbedded => core::f64::consts::PI * 0.25 * self.side * self.side,
            _ => self.side * self.side,
        }
    }

    /// Nearest vertex to a point (clamped into the grid).
    pub fn nearest_vertex(&self, p: Point) -> (usize, usize) {
        let a = self.spacing();
        let (nx, ny) = self.dims();
        let off = if self.kind.cell_centered() { 0.5 } else { 0.0 };
        let fi = libm::round(p.x / a - off).clamp(0.0, (nx - 1) as f64);
        let fj = libm::round(p.y / a - off).clamp(0.0, (ny - 1) as f64);
        (fi as usize, fj as usize)
    }

    /// Same geometry with a different grid size.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.kind, n, self.side)
    }

    pub fn with_side(&self, side: f64) -> Result<Self> {
        Self::new(self.kind, self.n, side)
    }

    pub fn interior_count(&self) -> usize {
        let (nx, ny) = self.dims();
        (0..ny)
            .flat_map(|j| (0..nx).map(move |i| (i, j)))
            .filter(|&(i, j)| self.is_interior(i, j))
            .count()
    }
}
