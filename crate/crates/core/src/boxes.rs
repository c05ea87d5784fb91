//! (mu, delta) box tilings of the root square.
//!
//! A dyadic square at level `l` has side `L / 2^l`; level `k = log2 n` is
//! a single lattice cell. A square is subdivided while its mass is at least
//! `delta`; a lattice cell that still has mass `>= delta` becomes a forced
//! leaf.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::domain::Point;
use crate::error::{Error, Result};
use crate::measure::QuantumMeasure;

/// Per-level masses of all dyadic squares; each parent is the sum of its
/// four children.
#[derive(Debug, Clone)]
pub struct MassPyramid {
    levels: Vec<Vec<f64>>,
}

impl MassPyramid {
    /// `cells` is `n x n` row-major with `n` a power of two.
    pub fn new(cells: &[f64], n: usize) -> Result<Self> {
        if !n.is_power_of_two() || cells.len() != n * n {
            return Err(Error::GridMismatch {
                expected: n * n,
                got: cells.len(),
            });
        }
        let k = n.trailing_zeros() as usize;
        let mut levels = vec![Vec::new(); k + 1];
        levels[k] = cells.to_vec();
        for l in (0..k).rev() {
            let m = 1usize << l;
            let child = &levels[l + 1];
            let mut cur = vec![0.0; m * m];
            for y in 0..m {
                for x in 0..m {
                    let (cx, cy) = (2 * x, 2 * y);
                    let w = 2 * m;
                    cur[y * m + x] = (child[cy * w + cx] + child[cy * w + cx + 1])
                        + (child[(cy + 1) * w + cx] + child[(cy + 1) * w + cx + 1]);
                }
            }
            levels[l] = cur;
        }
        Ok(Self { levels })
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    #[inline]
    pub fn mass(&self, level: usize, ix: usize, iy: usize) -> f64 {
        self.levels[level][(iy << level) + ix]
    }

    pub fn total(&self) -> f64 {
        self.levels[0][0]
    }
}

/// Occupancy pyramid of a rasterized set: a square is marked when it
/// contains a marked cell.
#[derive(Debug, Clone)]
struct HitPyramid {
    levels: Vec<Vec<bool>>,
}

impl HitPyramid {
    fn new(cells: &[bool], n: usize) -> Self {
        let k = n.trailing_zeros() as usize;
        let mut levels = vec![Vec::new(); k + 1];
        levels[k] = cells.to_vec();
        for l in (0..k).rev() {
            let m = 1usize << l;
            let w = 2 * m;
            let child = &levels[l + 1];
            let mut cur = vec![false; m * m];
            for y in 0..m {
                for x in 0..m {
                    let (cx, cy) = (2 * x, 2 * y);
                    cur[y * m + x] = child[cy * w + cx]
                        || child[cy * w + cx + 1]
                        || child[(cy + 1) * w + cx]
                        || child[(cy + 1) * w + cx + 1];
                }
            }
            levels[l] = cur;
        }
        Self { levels }
    }

    #[inline]
    fn hit(&self, level: usize, ix: usize, iy: usize) -> bool {
        self.levels[level][(iy << level) + ix]
    }

    fn count(&self, level: usize) -> usize {
        self.levels[level].iter().filter(|&&b| b).count()
    }
}

/// A dyadic square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Square {
    pub level: u8,
    pub ix: u32,
    pub iy: u32,
}

impl Square {
    pub const ROOT: Square = Square {
        level: 0,
        ix: 0,
        iy: 0,
    };

    pub fn size(&self, side: f64) -> f64 {
        side / (1u64 << self.level) as f64
    }

    pub fn corner(&self, side: f64) -> Point {
        let s = self.size(side);
        Point::new(self.ix as f64 * s, self.iy as f64 * s)
    }

    pub fn parent(&self) -> Option<Square> {
        (self.level > 0).then(|| Square {
            level: self.level - 1,
            ix: self.ix / 2,
            iy: self.iy / 2,
        })
    }

    pub fn children(&self) -> [Square; 4] {
        let (l, x, y) = (self.level + 1, 2 * self.ix, 2 * self.iy);
        [
            Square {
                level: l,
                ix: x,
                iy: y,
            },
            Square {
                level: l,
                ix: x + 1,
                iy: y,
            },
            Square {
                level: l,
                ix: x,
                iy: y + 1,
            },
            Square {
                level: l,
                ix: x + 1,
                iy: y + 1,
            },
        ]
    }

    /// Whether `other` is this square or lies inside it.
    pub fn contains(&self, other: &Square) -> bool {
        other.level >= self.level && {
            let sh = other.level - self.level;
            other.ix >> sh == self.ix && other.iy >> sh == self.iy
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leaf {
    pub square: Square,
    pub mass: f64,
    /// A lattice cell whose mass is still at least `delta`.
    pub forced: bool,
}

#[derive(Debug, Clone)]
pub struct BoxTiling {
    side: f64,
    delta: f64,
    pyramid: MassPyramid,
    leaves: Vec<Leaf>,
}

/// Counts and masses of the boxes hit by a set.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HitSummary {
    /// `N(mu, delta, X)`.
    pub boxes: usize,
    /// `mu(S^delta(X))`.
    pub mass: f64,
    /// Hit boxes that are forced leaves.
    pub forced: usize,
    /// Distinct parents of hit boxes.
    pub parents: usize,
    /// Sum of the masses of those parents.
    pub parent_mass: f64,
}

impl BoxTiling {
    /// Tiles an `n x n` array of cell masses over a root square of side
    /// `side`.
    pub fn build(cells: &[f64], n: usize, side: f64, delta: f64) -> Result<Self> {
        let pyramid = MassPyramid::new(cells, n)?;
        Self::from_pyramid(pyramid, side, delta)
    }

    pub fn from_pyramid(pyramid: MassPyramid, side: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::Threshold(delta));
        }
        let mut leaves = Vec::new();
        let k = pyramid.depth();
        let mut stack = vec![Square::ROOT];
        while let Some(sq) = stack.pop() {
            let m = pyramid.mass(sq.level as usize, sq.ix as usize, sq.iy as usize);
            if m < delta {
                leaves.push(Leaf {
                    square: sq,
                    mass: m,
                    forced: false,
                });
            } else if sq.level as usize == k {
                leaves.push(Leaf {
                    square: sq,
                    mass: m,
                    forced: true,
                });
            } else {
                let ch = sq.children();
                stack.extend(ch.iter().rev());
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

    pub fn pyramid(&self) -> &MassPyramid {
        &self.pyramid
    }

    /// Leaves in depth-first order (children lower-left, lower-right,
    /// upper-left, upper-right).
    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
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

    pub fn mass(&self, sq: &Square) -> f64 {
        self.pyramid
            .mass(sq.level as usize, sq.ix as usize, sq.iy as usize)
    }

    fn is_leaf(&self, sq: &Square) -> bool {
        self.mass(sq) < self.delta || sq.level as usize == self.depth()
    }

    /// Number of leaves at each level.
    pub fn level_histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.depth() + 1];
        for l in &self.leaves {
            h[l.square.level as usize] += 1;
        }
        h
    }

    /// The leaf containing `z`. Points on dyadic lines go to the candidate
    /// whose lower-left corner is lexicographically smallest.
    pub fn box_of_point(&self, z: Point) -> Result<Leaf> {
        let l = self.side;
        if !(z.x >= 0.0 && z.y >= 0.0 && z.x <= l && z.y <= l) {
            return Err(Error::OutsideDomain(z.x, z.y));
        }
        let mut sq = Square::ROOT;
        loop {
            if self.is_leaf(&sq) {
                let mass = self.mass(&sq);
                return Ok(Leaf {
                    square: sq,
                    mass,
                    forced: mass >= self.delta,
                });
            }
            let s = sq.size(l);
            let c = sq.corner(l);
            let right = z.x > c.x + 0.5 * s;
            let up = z.y > c.y + 0.5 * s;
            sq = sq.children()[usize::from(right) + 2 * usize::from(up)];
        }
    }

    /// Counts the leaves containing a cell of `x`, with their masses and
    /// parents.
    pub fn hits(&self, x: &FractalSet) -> Result<HitSummary> {
        let n = 1usize << self.depth();
        if x.n() != n {
            return Err(Error::GridMismatch {
                expected: n,
                got: x.n(),
            });
        }
        let hp = x.pyramid();
        let mut out = HitSummary::default();
        if !hp.hit(0, 0, 0) {
            return Err(Error::EmptySet);
        }
        if self.is_leaf(&Square::ROOT) {
            out.boxes = 1;
            out.mass = self.mass(&Square::ROOT);
            out.forced = usize::from(out.mass >= self.delta);
            return Ok(out);
        }
        let mut stack = vec![Square::ROOT];
        while let Some(sq) = stack.pop() {
            let mut parent_counted = false;
            for ch in sq.children() {
                let (l, cx, cy) = (ch.level as usize, ch.ix as usize, ch.iy as usize);
                if !hp.hit(l, cx, cy) {
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
                        out.parent_mass += self.mass(&sq);
                    }
                } else {
                    stack.push(ch);
                }
            }
        }
        Ok(out)
    }
}

pub fn build_tiling(measure: &QuantumMeasure, delta: f64) -> Result<BoxTiling> {
    let spec = measure.spec();
    BoxTiling::build(&measure.cell_masses(), spec.n(), spec.side(), delta)
}

/// `N(mu, delta, X)`.
pub fn count_boxes_hit(tiling: &BoxTiling, x: &FractalSet) -> Result<usize> {
    Ok(tiling.hits(x)?.boxes)
}

/// `N(eps, X)` for `eps = side / 2^level`.
pub fn euclid_box_count(x: &FractalSet, level: usize) -> Result<usize> {
    if x.is_empty() {
        return Err(Error::EmptySet);
    }
    if level > x.depth() {
        return Err(Error::Parameter {
            name: "level",
            value: level as f64,
        });
    }
    Ok(x.pyramid().count(level))
}

/// Lebesgue area of the union of level-`level` dyadic squares hit by `x`.
pub fn euclid_neighborhood_area(x: &FractalSet, level: usize) -> Result<f64> {
    let s = x.side() / (1u64 << level) as f64;
    Ok(euclid_box_count(x, level)? as f64 * s * s)
}

/// Lebesgue area of the cells whose centres lie within distance `r` of the
/// centre of some cell of `x`.
pub fn ball_neighborhood_area(x: &FractalSet, r: f64) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::EmptySet);
    }
    let n = x.n();
    let a = x.side() / n as f64;
    let d2 = squared_distance_transform(x.cells(), n);
    let lim = (r / a) * (r / a);
    let count = d2.iter().filter(|&&d| d <= lim).count();
    Ok(count as f64 * a * a)
}

/// Exact squared Euclidean distance (in cells) from every cell to the
/// nearest marked cell, by separable lower envelopes of parabolas.
pub fn squared_distance_transform(mask: &[bool], n: usize) -> Vec<f64> {
    const BIG: f64 = 1e30;
    let mut d: Vec<f64> = mask.iter().map(|&b| if b { 0.0 } else { BIG }).collect();
    let mut f = vec![0.0; n];
    let mut out = vec![0.0; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0; n + 1];
    let mut pass = |f: &[f64], out: &mut [f64]| {
        let mut k = 0usize;
        v[0] = 0;
        z[0] = f64::NEG_INFINITY;
        z[1] = f64::INFINITY;
        for q in 1..n {
            loop {
                let p = v[k];
                let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64))
                    / (2.0 * (q as f64 - p as f64));
                if s <= z[k] && k > 0 {
                    k -= 1;
                } else if s <= z[k] {
                    v[0] = q;
                    z[1] = f64::INFINITY;
                    break;
                } else {
                    k += 1;
                    v[k] = q;
                    z[k] = s;
                    z[k + 1] = f64::INFINITY;
                    break;
                }
            }
        }
        k = 0;
        for (q, o) in out.iter_mut().enumerate() {
            while z[k + 1] < q as f64 {
                k += 1;
            }
            let dq = q as f64 - v[k] as f64;
            *o = dq * dq + f[v[k]];
        }
    };
    for y in 0..n {
        f.copy_from_slice(&d[y * n..(y + 1) * n]);
        pass(&f, &mut out);
        d[y * n..(y + 1) * n].copy_from_slice(&out);
    }
    for x in 0..n {
        for y in 0..n {
            f[y] = d[y * n + x];
        }
        pass(&f, &mut out);
        for y in 0..n {
            d[y * n + x] = out[y];
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SetKind {
    Segment,
    PointSet,
    /// Cantor dust keeping 2 of every 4 sub-intervals on each axis.
    CantorDust,
    Custom,
}

impl SetKind {
    pub fn name(self) -> &'static str {
        match self {
            SetKind::Segment => "segment",
            SetKind::PointSet => "point_set",
            SetKind::CantorDust => "cantor_dust",
            SetKind::Custom => "custom",
        }
    }
}

/// A test set rasterized on the `n x n` cells of a square of side `side`.
#[derive(Debug, Clone)]
pub struct FractalSet {
    n: usize,
    side: f64,
    cells: Vec<bool>,
    kind: SetKind,
    exponent: Option<f64>,
    hits: HitPyramid,
}

fn cell_of(v: f64, a: f64, n: usize) -> usize {
    (libm::floor(v / a).max(0.0) as usize).min(n - 1)
}

impl FractalSet {
    pub fn from_cells(
        n: usize,
        side: f64,
        cells: Vec<bool>,
        kind: SetKind,
        exponent: Option<f64>,
    ) -> Result<Self> {
        if !n.is_power_of_two() || cells.len() != n * n {
            return Err(Error::GridMismatch {
                expected: n * n,
                got: cells.len(),
            });
        }
        if !cells.iter().any(|&b| b) {
            return Err(Error::EmptySet);
        }
        let hits = HitPyramid::new(&cells, n);
        Ok(Self {
            n,
            side,
            cells,
            kind,
            exponent,
            hits,
        })
    }

    /// Horizontal segment `[x0, x1] x {y}`; `x = 1/2`.
    pub fn segment(n: usize, side: f64, y: f64, x0: f64, x1: f64) -> Result<Self> {
        if !(0.0..=side).contains(&y) || !(x0 <= x1) || x0 < 0.0 || x1 > side {
            return Err(Error::OutsideDomain(x0, y));
        }
        let a = side / n as f64;
        let mut cells = vec![false; n * n];
        let j = cell_of(y, a, n);
        for i in cell_of(x0, a, n)..=cell_of(x1, a, n) {
            cells[j * n + i] = true;
        }
        Self::from_cells(n, side, cells, SetKind::Segment, Some(0.5))
    }

    /// Cells containing the given points; `x = 1`.
    pub fn points(n: usize, side: f64, pts: &[Point]) -> Result<Self> {
        let a = side / n as f64;
        let mut cells = vec![false; n * n];
        for p in pts {
            if !(p.x >= 0.0 && p.y >= 0.0 && p.x <= side && p.y <= side) {
                return Err(Error::OutsideDomain(p.x, p.y));
            }
            cells[cell_of(p.y, a, n) * n + cell_of(p.x, a, n)] = true;
        }
        Self::from_cells(n, side, cells, SetKind::PointSet, Some(1.0))
    }

    /// Cantor dust in the square `[x0, x0 + w]^2`, `w` a dyadic fraction of
    /// the side: at every level each axis keeps 2 of its 4 sub-intervals,
    /// chosen by `choose`, down to the lattice scale. Dimension 1, `x = 1/2`.
    pub fn cantor_dust(
        n: usize,
        side: f64,
        origin: Point,
        width: f64,
        mut choose: impl FnMut() -> [usize; 2],
    ) -> Result<Self> {
        let a = side / n as f64;
        if origin.x < 0.0 || origin.y < 0.0 || origin.x + width > side || origin.y + width > side {
            return Err(Error::OutsideDomain(origin.x, origin.y));
        }
        let w_cells = libm::round(width / a) as usize;
        if w_cells == 0
            || !w_cells.is_power_of_two()
            || libm::fabs(w_cells as f64 * a - width) > 1e-9 * a
        {
            return Err(Error::Parameter {
                name: "width",
                value: width,
            });
        }
        let (ox, oy) = (
            cell_of(origin.x + 0.5 * a, a, n),
            cell_of(origin.y + 0.5 * a, a, n),
        );
        // intervals along each axis, in cells
        let mut xs: Vec<(usize, usize)> = vec![(0, w_cells)];
        let mut ys = xs.clone();
        let mut len = w_cells;
        while len >= 4 {
            len /= 4;
            let split = |ivs: &[(usize, usize)], choose: &mut dyn FnMut() -> [usize; 2]| {
                let mut next = Vec::with_capacity(2 * ivs.len());
                for &(s, _) in ivs {
                    for k in choose() {
                        next.push((s + k * len, len));
                    }
                }
                next
            };
            xs = split(&xs, &mut choose);
            ys = split(&ys, &mut choose);
        }
        let mut cells = vec![false; n * n];
        for &(sy, ly) in &ys {
            for &(sx, lx) in &xs {
                for j in 0..ly {
                    for i in 0..lx {
                        cells[(oy + sy + j) * n + ox + sx + i] = true;
                    }
                }
            }
        }
        Self::from_cells(n, side, cells, SetKind::CantorDust, Some(0.5))
    }

    /// Cantor dust with independently chosen pairs of sub-intervals.
    pub fn random_cantor_dust<R: Rng>(
        n: usize,
        side: f64,
        origin: Point,
        width: f64,
        rng: &mut R,
    ) -> Result<Self> {
        Self::cantor_dust(n, side, origin, width, || {
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
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn depth(&self) -> usize {
        self.n.trailing_zeros() as usize
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    /// Euclidean scaling exponent, when known.
    pub fn exponent(&self) -> Option<f64> {
        self.exponent
    }

    pub fn len(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn pyramid(&self) -> &HitPyramid {
        &self.hits
    }

    /// Whether every cell lies in the closed square `[lo, hi]^2`.
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        let a = self.side / self.n as f64;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .all(|(k, _)| {
                let (i, j) = (k % self.n, k / self.n);
                let (x0, y0) = (i as f64 * a, j as f64 * a);
                x0 >= lo - 1e-12 && y0 >= lo - 1e-12 && x0 + a <= hi + 1e-12 && y0 + a <= hi + 1e-12
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / (n * n) as f64; n * n]
    }

    #[test]
    fn uniform_measure_tilings() {
        let n = 64;
        let t = BoxTiling::build(&uniform(n), n, 1.0, 1.5).unwrap();
        assert_eq!(t.leaves().len(), 1);
        for k in 0..=5u32 {
            let delta = libm::pow(2.0, -2.0 * k as f64) * (1.0 + 1e-9);
            let t = BoxTiling::build(&uniform(n), n, 1.0, delta).unwrap();
            assert_eq!(t.leaves().len(), 1 << (2 * k));
            assert!(t
                .leaves()
                .iter()
                .all(|l| l.square.level as u32 == k && !l.forced));
        }
        assert!(matches!(
            BoxTiling::build(&uniform(n), n, 1.0, 0.0),
            Err(Error::Threshold(_))
        ));
    }

    #[test]
    fn forced_leaves_are_flagged() {
        let n = 16;
        let mut cells = uniform(n);
        cells[5 * n + 7] = 10.0;
        let t = BoxTiling::build(&cells, n, 1.0, 0.5).unwrap();
        assert_eq!(t.forced_count(), 1);
        assert_eq!(t.forced_mass(), 10.0);
    }

    #[test]
    fn point_location_and_tie_break() {
        let n = 64;
        let t = BoxTiling::build(&uniform(n), n, 1.0, 1.0 / 16.0 * (1.0 + 1e-9)).unwrap();
        let leaf = t.box_of_point(Point::new(0.3, 0.6)).unwrap();
        assert_eq!(
            leaf.square,
            Square {
                level: 2,
                ix: 1,
                iy: 2
            }
        );
        let tie = t.box_of_point(Point::new(0.5, 0.25)).unwrap();
        assert_eq!(
            tie.square,
            Square {
                level: 2,
                ix: 1,
                iy: 0
            }
        );
        assert!(t.box_of_point(Point::new(1.1, 0.2)).is_err());
    }

    #[test]
    fn euclidean_counts() {
        let n = 256;
        let seg = FractalSet::segment(n, 1.0, 1.0 / 3.0, 0.0, 1.0).unwrap();
        for k in 0..=8 {
            assert_eq!(euclid_box_count(&seg, k).unwrap(), 1 << k);
        }
        let full =
            FractalSet::from_cells(n, 1.0, vec![true; n * n], SetKind::Custom, Some(0.0)).unwrap();
        assert_eq!(euclid_box_count(&full, 5).unwrap(), 1024);
        let pt = FractalSet::points(n, 1.0, &[Point::new(0.3, 0.3)]).unwrap();
        assert_eq!(euclid_box_count(&pt, 6).unwrap(), 1);
        assert!(matches!(
            FractalSet::points(n, 1.0, &[]),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn cantor_dust_counts() {
        let n = 256;
        let d = FractalSet::cantor_dust(n, 1.0, Point::new(0.0, 0.0), 1.0, || [0, 3]).unwrap();
        // level 2l squares: 4^l of them
        for l in 0..=4 {
            assert_eq!(euclid_box_count(&d, 2 * l).unwrap(), 1 << (2 * l));
        }
        assert!(d.within(0.0, 1.0));
    }

    #[test]
    fn distance_transform_matches_brute_force() {
        let n = 32;
        let mut mask = vec![false; n * n];
        for &(i, j) in &[(3usize, 4usize), (20, 7), (11, 30), (31, 0)] {
            mask[j * n + i] = true;
        }
        let d = squared_distance_transform(&mask, n);
        for y in 0..n {
            for x in 0..n {
                let best = mask
                    .iter()
                    .enumerate()
                    .filter(|(_, &b)| b)
                    .map(|(k, _)| {
                        let (i, j) = ((k % n) as f64, (k / n) as f64);
                        (x as f64 - i).powi(2) + (y as f64 - j).powi(2)
                    })
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(d[y * n + x], best);
            }
        }
    }

    #[test]
    fn lebesgue_neighbourhood_is_area_of_boxes() {
        let n = 128;
        let t = BoxTiling::build(&uniform(n), n, 1.0, 1.0 / 256.0 * (1.0 + 1e-9)).unwrap();
        let seg = FractalSet::segment(n, 1.0, 0.4, 0.1, 0.7).unwrap();
        let h = t.hits(&seg).unwrap();
        let eps = 1.0 / 16.0;
        assert!((h.mass - eps * eps * euclid_box_count(&seg, 4).unwrap() as f64).abs() < 1e-12);
        assert_eq!(h.boxes, euclid_box_count(&seg, 4).unwrap());
    }
}
