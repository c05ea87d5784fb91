//! Free and mixed boundary fields, semicircle averages on the lower edge,
//! the boundary quantum measure and one-dimensional box tilings.
//!
//! The linear boundary piece is the lower edge `y = 0` of the square. Mixed
//! fields are free on it and zero on the other three sides. Semicircle
//! quadrature points that fall off the vertex grid are clamped onto it for
//! free fields (constant extension, as a Neumann condition suggests) and
//! read as zero for mixed fields.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;

use crate::boxes::HitSummary;
use crate::circle::{apply_weights, bilinear_weights, check_resolved, interpolate, min_points};
use crate::domain::{DomainKind, DomainSpec, Point};
use crate::error::{Error, Result};
use crate::field::{Field, GffSampler};
use crate::kpz::{estimate_exponent, kpz_inverse, ExponentEstimate, SampleBoxes, ScaleMode};
use crate::measure::check_gamma;
use crate::rng::{Purpose, StreamKey};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryCondition {
    Free,
    Mixed,
}

impl BoundaryCondition {
    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Free => "free",
            BoundaryCondition::Mixed => "mixed",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "free" => Ok(BoundaryCondition::Free),
            "mixed" => Ok(BoundaryCondition::Mixed),
            _ => Err(Error::UnsupportedKind("boundary condition")),
        }
    }

    pub fn kind(self) -> DomainKind {
        match self {
            BoundaryCondition::Free => DomainKind::FreeSquare,
            BoundaryCondition::Mixed => DomainKind::MixedSquare,
        }
    }

    pub fn of_kind(kind: DomainKind) -> Result<Self> {
        match kind {
            DomainKind::FreeSquare => Ok(BoundaryCondition::Free),
            DomainKind::MixedSquare => Ok(BoundaryCondition::Mixed),
            k => Err(Error::UnsupportedKind(k.name())),
        }
    }
}

/// The square of `spec` (any square kind) re-typed for the given condition.
pub fn boundary_spec(spec: &DomainSpec, bc: BoundaryCondition) -> Result<DomainSpec> {
    match spec.kind() {
        DomainKind::DiscEmbedded | DomainKind::Torus => {
            Err(Error::UnsupportedKind(spec.kind().name()))
        }
        _ => DomainSpec::new(bc.kind(), spec.n(), spec.side()),
    }
}

pub fn sample_gff_boundary(spec: &DomainSpec, bc: BoundaryCondition, seed: u64) -> Result<Field> {
    Ok(GffSampler::new(boundary_spec(spec, bc)?)?.sample(seed))
}

fn check_edge_point(spec: &DomainSpec, z: Point) -> Result<()> {
    let l = spec.side();
    if libm::fabs(z.y) > 1e-12 * l || !(0.0..=l).contains(&z.x) {
        return Err(Error::OutsideDomain(z.x, z.y));
    }
    Ok(())
}

/// Checks `2a <= eps <= eps0(z)`, where `eps0(z)` keeps the semicircle off
/// the two side walls.
fn check_semicircle(spec: &DomainSpec, z: Point, eps: f64) -> Result<()> {
    BoundaryCondition::of_kind(spec.kind())?;
    check_edge_point(spec, z)?;
    check_resolved(spec, eps)?;
    let eps0 = z.x.min(spec.side() - z.x);
    if eps > eps0 * (1.0 + 1e-12) {
        return Err(Error::Parameter {
            name: "eps",
            value: eps,
        });
    }
    Ok(())
}

/// Semicircle weights without radius checks.
fn arc_weights(spec: &DomainSpec, z: Point, eps: f64) -> Vec<(usize, f64)> {
    let m = min_points(spec, eps);
    let clamp = spec.kind().cell_centered();
    let a = spec.spacing();
    let (lo, hi) = (0.5 * a, spec.side() - 0.5 * a);
    let w = 1.0 / m as f64;
    let mut raw = Vec::with_capacity(4 * m);
    for k in 0..m {
        let th = PI * (k as f64 + 0.5) / m as f64;
        let mut p = Point::new(z.x + eps * libm::cos(th), z.y + eps * libm::sin(th));
        if clamp {
            p = Point::new(p.x.clamp(lo, hi), p.y.clamp(lo, hi));
        }
        for (idx, b) in bilinear_weights(spec, p) {
            if let Some(idx) = idx {
                if b != 0.0 {
                    raw.push((idx, w * b));
                }
            }
        }
    }
    raw.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(raw.len());
    for (idx, x) in raw {
        match out.last_mut() {
            Some(last) if last.0 == idx => last.1 += x,
            _ => out.push((idx, x)),
        }
    }
    out
}

/// The semicircle average as a sparse functional `(vertex, weight)`.
pub fn semicircle_weights(spec: &DomainSpec, z: Point, eps: f64) -> Result<Vec<(usize, f64)>> {
    check_semicircle(spec, z, eps)?;
    Ok(arc_weights(spec, z, eps))
}

/// Mean of the field over the upper semicircle of radius `eps` about `z`.
pub fn semicircle_average(field: &Field, z: Point, eps: f64) -> Result<f64> {
    Ok(apply_weights(
        &semicircle_weights(field.spec(), z, eps)?,
        field.values(),
    ))
}

/// `mu^B_eps`: one mass per lattice edge of the lower boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMeasure {
    spec: DomainSpec,
    gamma: f64,
    eps: f64,
    masses: Vec<f64>,
}

impl BoundaryMeasure {
    pub fn from_masses(spec: DomainSpec, gamma: f64, eps: f64, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != spec.n() {
            return Err(Error::GridMismatch {
                expected: spec.n(),
                got: masses.len(),
            });
        }
        if masses.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::Parameter {
                name: "mass",
                value: f64::NAN,
            });
        }
        Ok(Self {
            spec,
            gamma,
            eps,
            masses,
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        crate::stats::pairwise_sum(&self.masses)
    }

    pub fn midpoint(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.spec.spacing()
    }

    /// Mass of the edges whose midpoints lie in `[x0, x1]`.
    pub fn mass_between(&self, x0: f64, x1: f64) -> f64 {
        (0..self.masses.len())
            .filter(|&k| (x0..=x1).contains(&self.midpoint(k)))
            .map(|k| self.masses[k])
            .sum()
    }
}

/// `a eps^{gamma^2/4} e^{gamma h_eps(z)/2}` at every edge midpoint `z`.
/// Near the corners the semicircle leaves the lower edge; there the field's
/// extension rule applies.
pub fn build_boundary_measure(field: &Field, gamma: f64, eps: f64) -> Result<BoundaryMeasure> {
    check_gamma(gamma)?;
    let spec = *field.spec();
    BoundaryCondition::of_kind(spec.kind())?;
    check_resolved(&spec, eps)?;
    if eps > 0.5 * spec.side() {
        return Err(Error::Parameter {
            name: "eps",
            value: eps,
        });
    }
    let a = spec.spacing();
    let pre = a * libm::pow(eps, 0.25 * gamma * gamma);
    let v = field.values();
    let masses = (0..spec.n())
        .map(|k| {
            let z = Point::new((k as f64 + 0.5) * a, 0.0);
            let h = apply_weights(&arc_weights(&spec, z, eps), v);
            pre * libm::exp(0.5 * gamma * h)
        })
        .collect();
    BoundaryMeasure::from_masses(spec, gamma, eps, masses)
}

/// `Delta~` from `x~`: the interior quadratic.
pub fn boundary_kpz_inverse(x: f64, gamma: f64) -> Result<f64> {
    kpz_inverse(x, gamma)
}

/// The potentials of a boundary point `z` at radius `eps`: the closed form
/// `zeta^z_eps`, the grid solution `xi^z_eps` (Neumann-type and zero mean
/// for free fields, reflected Dirichlet for mixed ones) and their
/// difference, the harmonic correction `G_z`.
#[derive(Debug, Clone)]
pub struct BoundaryPotential {
    spec: DomainSpec,
    bc: BoundaryCondition,
    z: Point,
    eps: f64,
    weights: Vec<(usize, f64)>,
    xi: Vec<f64>,
}

impl BoundaryPotential {
    pub fn new(spec: &DomainSpec, z: Point, eps: f64) -> Result<Self> {
        Self::with_sampler(&GffSampler::new(*spec)?, z, eps)
    }

    pub fn with_sampler(sampler: &GffSampler, z: Point, eps: f64) -> Result<Self> {
        let spec = *sampler.spec();
        let bc = BoundaryCondition::of_kind(spec.kind())?;
        let weights = semicircle_weights(&spec, z, eps)?;
        let xi = sampler.covariance_image(&weights);
        Ok(Self {
            spec,
            bc,
            z,
            eps,
            weights,
            xi,
        })
    }

    pub fn center(&self) -> Point {
        self.z
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn area(&self) -> f64 {
        self.spec.area()
    }

    /// `zeta^z_eps(y)`.
    pub fn zeta(&self, y: Point) -> f64 {
        let r = y.dist(self.z);
        let log_part = -2.0 * libm::log(r.max(self.eps));
        match self.bc {
            BoundaryCondition::Free => {
                log_part + PI / (2.0 * self.area()) * (r * r + self.eps * self.eps)
            }
            BoundaryCondition::Mixed => log_part,
        }
    }

    /// `xi^z_eps` on the vertices.
    pub fn xi_grid(&self) -> &[f64] {
        &self.xi
    }

    pub fn xi(&self, y: Point) -> f64 {
        interpolate(&self.spec, &self.xi, y)
    }

    /// `G_z(y) = zeta(y) - xi(y)`.
    pub fn harmonic_at(&self, y: Point) -> f64 {
        self.zeta(y) - self.xi(y)
    }

    /// `G_z(z)`, read off as the semicircle mean of `zeta - xi` (the
    /// reflected correction is harmonic across the edge).
    pub fn harmonic_at_center(&self) -> f64 {
        let on_arc = self.zeta(Point::new(self.z.x + self.eps, self.z.y));
        on_arc - self.self_energy()
    }

    /// `(xi, xi)_grad`, which is `Var h_eps(z)`.
    pub fn self_energy(&self) -> f64 {
        apply_weights(&self.weights, &self.xi)
    }

    /// Closed-form `(xi_eps, xi_eps')_grad` given `G_z(z)`.
    pub fn inner_product_formula(&self, e1: f64, e2: f64, g_center: f64) -> f64 {
        let base = -2.0 * libm::log(e1.max(e2)) - g_center;
        match self.bc {
            BoundaryCondition::Free => base + PI / (2.0 * self.area()) * (e1 * e1 + e2 * e2),
            BoundaryCondition::Mixed => base,
        }
    }
}

/// Per-level masses of the dyadic sub-intervals of the lower edge.
#[derive(Debug, Clone)]
pub struct IntervalPyramid {
    levels: Vec<Vec<f64>>,
}

impl IntervalPyramid {
    pub fn new(cells: &[f64]) -> Result<Self> {
        let n = cells.len();
        if !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        let k = n.trailing_zeros() as usize;
        let mut levels = vec![Vec::new(); k + 1];
        levels[k] = cells.to_vec();
        for l in (0..k).rev() {
            let child = &levels[l + 1];
            levels[l] = (0..1usize << l)
                .map(|i| child[2 * i] + child[2 * i + 1])
                .collect();
        }
        Ok(Self { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    #[inline]
    pub fn mass(&self, level: usize, i: usize) -> f64 {
        self.levels[level][i]
    }

    pub fn total(&self) -> f64 {
        self.levels[0][0]
    }
}

/// A dyadic interval `[i, i + 1] * side / 2^level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    pub level: u8,
    pub index: u32,
}

impl Interval {
    pub const ROOT: Interval = Interval { level: 0, index: 0 };

    pub fn size(&self, side: f64) -> f64 {
        side / (1u64 << self.level) as f64
    }

    pub fn start(&self, side: f64) -> f64 {
        self.index as f64 * self.size(side)
    }

    pub fn parent(&self) -> Option<Interval> {
        (self.level > 0).then(|| Interval {
            level: self.level - 1,
            index: self.index / 2,
        })
    }

    pub fn children(&self) -> [Interval; 2] {
        let (l, i) = (self.level + 1, 2 * self.index);
        [
            Interval { level: l, index: i },
            Interval {
                level: l,
                index: i + 1,
            },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalLeaf {
    pub interval: Interval,
    pub mass: f64,
    pub forced: bool,
}

/// The one-dimensional (mu, delta) tiling of the lower edge.
#[derive(Debug, Clone)]
pub struct IntervalTiling {
    side: f64,
    delta: f64,
    pyramid: IntervalPyramid,
    leaves: Vec<IntervalLeaf>,
}

impl IntervalTiling {
    pub fn build(cells: &[f64], side: f64, delta: f64) -> Result<Self> {
        Self::from_pyramid(IntervalPyramid::new(cells)?, side, delta)
    }

    pub fn from_pyramid(pyramid: IntervalPyramid, side: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Threshold(delta));
        }
        let k = pyramid.depth();
        let mut leaves = Vec::new();
        let mut stack = vec![Interval::ROOT];
        while let Some(iv) = stack.pop() {
            let m = pyramid.mass(iv.level as usize, iv.index as usize);
            if m < delta {
                leaves.push(IntervalLeaf {
                    interval: iv,
                    mass: m,
                    forced: false,
                });
            } else if iv.level as usize == k {
                leaves.push(IntervalLeaf {
                    interval: iv,
                    mass: m,
                    forced: true,
                });
            } else {
                let ch = iv.children();
                stack.push(ch[1]);
                stack.push(ch[0]);
            }
        }
        Ok(Self {
            side,
            delta,
            pyramid,
            leaves,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn depth(&self) -> usize {
        self.pyramid.depth()
    }

    /// Leaves from left to right.
    pub fn leaves(&self) -> &[IntervalLeaf] {
        &self.leaves
    }

    pub fn mass(&self, iv: &Interval) -> f64 {
        self.pyramid.mass(iv.level as usize, iv.index as usize)
    }

    pub fn forced_count(&self) -> usize {
        self.leaves.iter().filter(|l| l.forced).count()
    }

    pub fn forced_mass(&self) -> f64 {
        self.leaves
            .iter()
            .filter(|l| l.forced)
            .map(|l| l.mass)
            .sum()
    }

    fn is_leaf(&self, iv: &Interval) -> bool {
        self.mass(iv) < self.delta || iv.level as usize == self.depth()
    }

    /// The leaf containing `x`; dyadic endpoints go to the left interval.
    pub fn box_of_point(&self, x: f64) -> Result<IntervalLeaf> {
        if !(0.0..=self.side).contains(&x) {
            return Err(Error::OutsideDomain(x, 0.0));
        }
        let mut iv = Interval::ROOT;
        loop {
            if self.is_leaf(&iv) {
                let mass = self.mass(&iv);
                return Ok(IntervalLeaf {
                    interval: iv,
                    mass,
                    forced: mass >= self.delta,
                });
            }
            let mid = iv.start(self.side) + 0.5 * iv.size(self.side);
            iv = iv.children()[usize::from(x > mid)];
        }
    }

    /// Leaves containing a cell of `x`, with masses and distinct parents.
    pub fn hits(&self, x: &BoundarySet) -> Result<HitSummary> {
        let n = 1usize << self.depth();
        if x.n() != n {
            return Err(Error::GridMismatch {
                expected: n,
                got: x.n(),
            });
        }
        let mut out = HitSummary::default();
        if self.is_leaf(&Interval::ROOT) {
            out.boxes = 1;
            out.mass = self.mass(&Interval::ROOT);
            out.forced = usize::from(out.mass >= self.delta);
            return Ok(out);
        }
        let mut stack = vec![Interval::ROOT];
        while let Some(iv) = stack.pop() {
            let mut parent_counted = false;
            for ch in iv.children() {
                if !x.hit(ch.level as usize, ch.index as usize) {
                    continue;
                }
                if self.is_leaf(&ch) {
                    let m = self.mass(&ch);
                    out.boxes += 1;
                    out.mass += m;
                    if m >= self.delta {
                        out.forced += 1;
                    }
                    if !parent_counted {
                        parent_counted = true;
                        out.parents += 1;
                        out.parent_mass += self.mass(&iv);
                    }
                } else {
                    stack.push(ch);
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundarySetKind {
    Points,
    Segment,
    Cantor,
}

impl BoundarySetKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundarySetKind::Points => "points",
            BoundarySetKind::Segment => "segment",
            BoundarySetKind::Cantor => "cantor",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            BoundarySetKind::Points,
            BoundarySetKind::Segment,
            BoundarySetKind::Cantor,
        ]
        .into_iter()
        .find(|k| k.name() == name)
    }

    /// Euclidean scaling exponent `x~` in the boundary sense.
    pub fn exponent(self) -> f64 {
        match self {
            BoundarySetKind::Points => 1.0,
            BoundarySetKind::Segment => 0.0,
            BoundarySetKind::Cantor => 0.5,
        }
    }
}

/// A subset of the lower edge rasterized on its `n` lattice edges.
#[derive(Debug, Clone)]
pub struct BoundarySet {
    side: f64,
    kind: BoundarySetKind,
    levels: Vec<Vec<bool>>,
}

fn edge_of(x: f64, a: f64, n: usize) -> usize {
    (libm::floor(x / a).max(0.0) as usize).min(n - 1)
}

impl BoundarySet {
    pub fn from_cells(side: f64, cells: Vec<bool>, kind: BoundarySetKind) -> Result<Self> {
        let n = cells.len();
        if !n.is_power_of_two() {
            return Err(Error::GridSize(n));
        }
        if !cells.iter().any(|&b| b) {
            return Err(Error::EmptySet);
        }
        let k = n.trailing_zeros() as usize;
        let mut levels = vec![Vec::new(); k + 1];
        levels[k] = cells;
        for l in (0..k).rev() {
            let child = &levels[l + 1];
            levels[l] = (0..1usize << l)
                .map(|i| child[2 * i] || child[2 * i + 1])
                .collect();
        }
        Ok(Self { side, kind, levels })
    }

    pub fn points(n: usize, side: f64, xs: &[f64]) -> Result<Self> {
        let a = side / n as f64;
        let mut cells = vec![false; n];
        for &x in xs {
            if !(0.0..=side).contains(&x) {
                return Err(Error::OutsideDomain(x, 0.0));
            }
            cells[edge_of(x, a, n)] = true;
        }
        Self::from_cells(side, cells, BoundarySetKind::Points)
    }

    pub fn segment(n: usize, side: f64, x0: f64, x1: f64) -> Result<Self> {
        if !(x0 <= x1) || x0 < 0.0 || x1 > side {
            return Err(Error::OutsideDomain(x0, 0.0));
        }
        let a = side / n as f64;
        let mut cells = vec![false; n];
        for c in &mut cells[edge_of(x0, a, n)..=edge_of(x1, a, n)] {
            *c = true;
        }
        Self::from_cells(side, cells, BoundarySetKind::Segment)
    }

    /// Cantor set in `[x0, x0 + width]`, `width` a dyadic number of edges:
    /// each interval keeps 2 of its 4 quarters, chosen by `choose`, down to
    /// the lattice scale. Dimension 1/2.
    pub fn cantor(
        n: usize,
        side: f64,
        x0: f64,
        width: f64,
        mut choose: impl FnMut() -> [usize; 2],
    ) -> Result<Self> {
        let a = side / n as f64;
        if x0 < 0.0 || x0 + width > side {
            return Err(Error::OutsideDomain(x0, 0.0));
        }
        let w = libm::round(width / a) as usize;
        if w == 0 || !w.is_power_of_two() || libm::fabs(w as f64 * a - width) > 1e-9 * a {
            return Err(Error::Parameter {
                name: "width",
                value: width,
            });
        }
        let o = edge_of(x0 + 0.5 * a, a, n);
        let mut ivs = vec![0usize];
        let mut len = w;
        while len >= 4 {
            len /= 4;
            ivs = ivs
                .iter()
                .flat_map(|&s| choose().map(|k| s + k * len))
                .collect();
        }
        let mut cells = vec![false; n];
        for s in ivs {
            for c in &mut cells[o + s..o + s + len] {
                *c = true;
            }
        }
        Self::from_cells(side, cells, BoundarySetKind::Cantor)
    }

    pub fn random_cantor<R: Rng>(
        n: usize,
        side: f64,
        x0: f64,
        width: f64,
        rng: &mut R,
    ) -> Result<Self> {
        Self::cantor(n, side, x0, width, || {
            let a = rng.gen_range(0..4usize);
            let mut b = rng.gen_range(0..3usize);
            if b >= a {
                b += 1;
            }
            if a < b {
                [a, b]
            } else {
                [b, a]
            }
        })
    }

    pub fn n(&self) -> usize {
        self.levels.last().map_or(0, Vec::len)
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn kind(&self) -> BoundarySetKind {
        self.kind
    }

    pub fn cells(&self) -> &[bool] {
        &self.levels[self.depth()]
    }

    #[inline]
    fn hit(&self, level: usize, i: usize) -> bool {
        self.levels[level][i]
    }

    pub fn count(&self, level: usize) -> usize {
        self.levels[level].iter().filter(|&&b| b).count()
    }

    /// Length of the union of level-`level` dyadic intervals hit.
    pub fn neighborhood_length(&self, level: usize) -> Result<f64> {
        if level > self.depth() {
            return Err(Error::Parameter {
                name: "level",
                value: level as f64,
            });
        }
        Ok(self.count(level) as f64 * self.side / (1u64 << level) as f64)
    }

    /// Whether every marked edge lies inside `[lo, hi]`.
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        let a = self.side / self.n() as f64;
        self.cells()
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .all(|(i, _)| i as f64 * a >= lo && (i + 1) as f64 * a <= hi)
    }
}

/// Boundary analogue of the interior per-sample box statistics.
pub fn boundary_sample_boxes(
    cells: &[f64],
    side: f64,
    rel_deltas: &[f64],
    sets: &[BoundarySet],
) -> Result<SampleBoxes> {
    if sets.is_empty() {
        return Err(Error::EmptySet);
    }
    let pyramid = IntervalPyramid::new(cells)?;
    let total = pyramid.total();
    let mut out = SampleBoxes {
        mass: Vec::with_capacity(rel_deltas.len()),
        count: Vec::with_capacity(rel_deltas.len()),
        forced_hits: 0,
        forced_fraction: 0.0,
    };
    for &rd in rel_deltas {
        let tiling = IntervalTiling::from_pyramid(pyramid.clone(), side, rd * total)?;
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

/// Euclidean exponent `x~` of a family of boundary sets from dyadic
/// neighbourhood lengths at the given levels.
pub fn fit_boundary_euclidean(
    sets: &[BoundarySet],
    levels: &[usize],
) -> Result<(Vec<(f64, f64)>, ExponentEstimate)> {
    let first = sets.first().ok_or(Error::EmptySet)?;
    let mut pts = Vec::with_capacity(levels.len());
    for &l in levels {
        let mut acc = 0.0;
        for x in sets {
            acc += x.neighborhood_length(l)?;
        }
        pts.push((first.side() / (1u64 << l) as f64, acc / sets.len() as f64));
    }
    // log length against log eps
    let est = estimate_exponent(&pts, ScaleMode::Quantum)?;
    Ok((pts, est))
}

/// One boundary KPZ trial: a field, its boundary measure and a batch of
/// independent test sets inside the middle half of the edge.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryExperiment {
    pub bc: BoundaryCondition,
    pub n: usize,
    pub side: f64,
    pub gamma: f64,
    /// Regularization radius in lattice units.
    pub eps_cells: f64,
    pub set: BoundarySetKind,
    pub sets_per_field: usize,
    pub rel_deltas: Vec<f64>,
}

impl BoundaryExperiment {
    pub fn spec(&self) -> Result<DomainSpec> {
        DomainSpec::new(self.bc.kind(), self.n, self.side)
    }

    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        let spec = self.spec()?;
        check_resolved(&spec, self.eps_cells * spec.spacing())?;
        if self.sets_per_field == 0 {
            return Err(Error::Parameter {
                name: "sets_per_field",
                value: 0.0,
            });
        }
        if self.rel_deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return Err(Error::Threshold(
                self.rel_deltas.iter().copied().fold(f64::NAN, f64::min),
            ));
        }
        Ok(())
    }

    pub fn target(&self) -> Result<f64> {
        boundary_kpz_inverse(self.set.exponent(), self.gamma)
    }

    /// Test sets drawn from the test-set streams of `seed`.
    pub fn sets(&self, seed: u64) -> Result<Vec<BoundarySet>> {
        let mut rng = StreamKey::new(seed, Purpose::TestSet, 1).rng();
        let (n, l) = (self.n, self.side);
        (0..self.sets_per_field)
            .map(|_| match self.set {
                BoundarySetKind::Points => {
                    let x = rng.gen_range(0.25 * l..0.75 * l);
                    BoundarySet::points(n, l, &[x])
                }
                BoundarySetKind::Segment => {
                    let x0 = rng.gen_range(0.25 * l..0.5 * l);
                    BoundarySet::segment(n, l, x0, x0 + 0.25 * l)
                }
                BoundarySetKind::Cantor => {
                    let w = 0.25 * l;
                    let a = l / n as f64;
                    let slots = libm::round(0.25 * l / a) as usize;
                    let x0 = 0.25 * l + rng.gen_range(0..=slots) as f64 * a;
                    BoundarySet::random_cantor(n, l, x0, w, &mut rng)
                }
            })
            .collect()
    }

    pub fn trial_with(&self, sampler: &GffSampler, seed: u64) -> Result<SampleBoxes> {
        let field = sampler.sample(seed);
        let eps = self.eps_cells * field.spec().spacing();
        let mu = build_boundary_measure(&field, self.gamma, eps)?;
        boundary_sample_boxes(mu.masses(), self.side, &self.rel_deltas, &self.sets(seed)?)
    }

    pub fn trial(&self, seed: u64) -> Result<SampleBoxes> {
        self.trial_with(&GffSampler::new(self.spec()?)?, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mixed(n: usize) -> DomainSpec {
        DomainSpec::unit(DomainKind::MixedSquare, n).unwrap()
    }

    #[test]
    fn constant_field_semicircle() {
        for kind in [DomainKind::MixedSquare, DomainKind::FreeSquare] {
            let s = DomainSpec::unit(kind, 64).unwrap();
            let f = Field::from_values(s, vec![2.5; s.len()], 0, crate::field::FieldTag::Centered)
                .unwrap();
            let v = semicircle_average(&f, Point::new(0.5, 0.0), 0.1).unwrap();
            assert!((v - 2.5).abs() < 1e-12, "{kind:?} {v}");
        }
    }

    #[test]
    fn semicircle_radius_bounds() {
        let s = mixed(64);
        let f = Field::zeros(s);
        assert!(matches!(
            semicircle_average(&f, Point::new(0.5, 0.0), 0.01),
            Err(Error::UnderResolved { .. })
        ));
        assert!(semicircle_average(&f, Point::new(0.1, 0.0), 0.2).is_err());
        assert!(semicircle_average(&f, Point::new(0.5, 0.1), 0.1).is_err());
        assert!(semicircle_average(
            &Field::zeros(DomainSpec::unit(DomainKind::DirichletSquare, 64).unwrap()),
            Point::new(0.5, 0.0),
            0.1
        )
        .is_err());
    }

    #[test]
    fn gamma_zero_measure_is_uniform() {
        let f = sample_gff_boundary(&mixed(64), BoundaryCondition::Mixed, 3).unwrap();
        let mu = build_boundary_measure(&f, 0.0, 4.0 / 64.0).unwrap();
        assert!(mu.masses().iter().all(|&m| (m - 1.0 / 64.0).abs() < 1e-15));
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn free_xi_has_zero_mean() {
        let s = DomainSpec::unit(DomainKind::FreeSquare, 64).unwrap();
        let p = BoundaryPotential::new(&s, Point::new(0.5, 0.0), 0.125).unwrap();
        let m = crate::stats::mean(p.xi_grid());
        assert!(m.abs() < 1e-12, "{m}");
    }

    #[test]
    fn boundary_inverse_examples() {
        assert_eq!(boundary_kpz_inverse(0.0, 1.0).unwrap(), 0.0);
        assert!((boundary_kpz_inverse(1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((boundary_kpz_inverse(0.5, 1.0).unwrap() - 0.561_552_8).abs() < 1e-7);
    }

    #[test]
    fn interval_tiling_rules() {
        let cells: Vec<f64> = (0..64).map(|i| 1.0 + (i % 7) as f64).collect();
        let t = IntervalTiling::build(&cells, 1.0, 20.0).unwrap();
        let mut end = 0.0;
        for leaf in t.leaves() {
            let iv = leaf.interval;
            assert!((iv.start(1.0) - end).abs() < 1e-12);
            end += iv.size(1.0);
            assert!(leaf.mass < 20.0);
            assert!(t.mass(&iv.parent().unwrap()) >= 20.0);
        }
        assert!((end - 1.0).abs() < 1e-12);
        let leaf = t.box_of_point(0.5).unwrap();
        assert!(leaf.interval.start(1.0) < 0.5);
    }

    #[test]
    fn cantor_set_dimension() {
        let mut k = 0usize;
        let x = BoundarySet::cantor(1024, 1.0, 0.0, 1.0, || {
            k += 1;
            if k.is_multiple_of(2) {
                [0, 2]
            } else {
                [1, 3]
            }
        })
        .unwrap();
        assert_eq!(x.count(10), 32);
        let (_, est) = fit_boundary_euclidean(&[x], &[2, 4, 6, 8, 10]).unwrap();
        assert!((est.slope - 0.5).abs() < 1e-12, "{}", est.slope);
    }
}
