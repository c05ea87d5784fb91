//! Regularized Liouville measures on grids.
//!
//! Masses live on vertices, each vertex carrying its share of the
//! surrounding cells as quadrature weight. [`QuantumMeasure::cell_masses`]
//! redistributes them onto the `n x n` lattice cells for box counting.

use alloc::vec;
use alloc::vec::Vec;

use crate::circle::{circle_average_grid, ConformalRadiusMap};
use crate::domain::{DomainKind, DomainSpec, Point};
use crate::error::{Error, Result};
use crate::field::{project_lowpass, Field, ModeOrder};
use crate::stats::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization {
    /// `eps^{gamma^2/2} e^{gamma h_eps}` with circle averages at radius eps.
    Circle(f64),
    /// `e^{gamma h(v)}` on vertices.
    Discrete,
    /// Conditional expectation given the first `n` eigenmodes.
    Projected(usize),
    /// Masses supplied directly.
    Given,
}

impl Regularization {
    pub fn code(self) -> u8 {
        match self {
            Regularization::Circle(_) => 0,
            Regularization::Discrete => 1,
            Regularization::Projected(_) => 2,
            Regularization::Given => 3,
        }
    }

    pub fn eps(self) -> f64 {
        match self {
            Regularization::Circle(e) => e,
            _ => 0.0,
        }
    }
}

pub fn check_gamma(gamma: f64) -> Result<()> {
    if (0.0..2.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::Gamma(gamma))
    }
}

/// Number of lattice cells adjacent to a vertex (1 to 4). Cell-centred
/// grids identify vertices with cells.
fn adjacent_cells(spec: &DomainSpec, i: usize, j: usize) -> usize {
    if spec.kind().cell_centered() {
        return 4;
    }
    let n = spec.n();
    let cx = usize::from(i > 0) + usize::from(i < n);
    let cy = usize::from(j > 0) + usize::from(j < n);
    cx * cy
}

/// Quadrature weight of every vertex: `a^2` for vertices carrying a degree
/// of freedom (reduced on the free edge of the mixed square), zero on
/// Dirichlet boundaries and outside the disc.
pub fn vertex_weights(spec: &DomainSpec) -> Vec<f64> {
    let a2 = spec.spacing() * spec.spacing();
    let (nx, ny) = spec.dims();
    let mut w = vec![0.0; spec.len()];
    for j in 0..ny {
        for i in 0..nx {
            if spec.is_interior(i, j) {
                w[j * nx + i] = a2 * adjacent_cells(spec, i, j) as f64 / 4.0;
            }
        }
    }
    w
}

/// Set of vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    spec: DomainSpec,
    mask: Vec<bool>,
}

/// Simple planar shapes, rasterized to vertex sets on demand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Ball { center: Point, radius: f64 },
    Rect { x0: f64, y0: f64, x1: f64, y1: f64 },
}

impl Shape {
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Shape::Ball { center, radius } => p.dist(center) <= radius,
            Shape::Rect { x0, y0, x1, y1 } => p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1,
        }
    }

    /// Centre of a ball, lower-left corner of a rectangle.
    pub fn anchor(&self) -> Point {
        match *self {
            Shape::Ball { center, .. } => center,
            Shape::Rect { x0, y0, .. } => Point::new(x0, y0),
        }
    }

    /// Image under `z -> r z`.
    pub fn scaled(&self, r: f64) -> Shape {
        match *self {
            Shape::Ball { center, radius } => Shape::Ball {
                center: Point::new(r * center.x, r * center.y),
                radius: r * radius,
            },
            Shape::Rect { x0, y0, x1, y1 } => Shape::Rect {
                x0: r * x0,
                y0: r * y0,
                x1: r * x1,
                y1: r * y1,
            },
        }
    }

    /// Whether the closed shape lies in the closed domain.
    pub fn inside(&self, spec: &DomainSpec) -> bool {
        match *self {
            Shape::Ball { center, radius } => {
                spec.contains(center) && spec.boundary_distance(center) >= radius
            }
            Shape::Rect { x0, y0, x1, y1 } => [(x0, y0), (x1, y0), (x0, y1), (x1, y1)]
                .iter()
                .all(|&(x, y)| spec.contains(Point::new(x, y))),
        }
    }
}

impl Region {
    pub fn from_mask(spec: &DomainSpec, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != spec.len() {
            return Err(Error::GridMismatch {
                expected: spec.len(),
                got: mask.len(),
            });
        }
        Ok(Self { spec: *spec, mask })
    }

    pub fn all(spec: &DomainSpec) -> Self {
        Self {
            spec: *spec,
            mask: vec![true; spec.len()],
        }
    }

    /// Vertices inside `shape`; the shape must lie in the domain.
    pub fn shape(spec: &DomainSpec, shape: Shape) -> Result<Self> {
        if !shape.inside(spec) {
            let p = shape.anchor();
            return Err(Error::OutsideDomain(p.x, p.y));
        }
        let (nx, ny) = spec.dims();
        let mut mask = vec![false; spec.len()];
        for j in 0..ny {
            for i in 0..nx {
                mask[j * nx + i] = shape.contains(spec.position(i, j));
            }
        }
        Ok(Self { spec: *spec, mask })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.mask[idx]
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Nonnegative vertex masses with their total.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumMeasure {
    spec: DomainSpec,
    gamma: f64,
    reg: Regularization,
    masses: Vec<f64>,
    total: f64,
}

impl QuantumMeasure {
    pub fn from_masses(
        spec: &DomainSpec,
        gamma: f64,
        reg: Regularization,
        masses: Vec<f64>,
    ) -> Result<Self> {
        if masses.len() != spec.len() {
            return Err(Error::GridMismatch {
                expected: spec.len(),
                got: masses.len(),
            });
        }
        if let Some(&bad) = masses.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::Parameter {
                name: "mass",
                value: bad,
            });
        }
        let total = pairwise_sum(&masses);
        Ok(Self {
            spec: *spec,
            gamma,
            reg,
            masses,
            total,
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn regularization(&self) -> Regularization {
        self.reg
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn total_mass(&self) -> f64 {
        self.total
    }

    pub fn mass_of(&self, region: &Region) -> Result<f64> {
        if region.spec() != &self.spec {
            return Err(Error::GridMismatch {
                expected: self.spec.len(),
                got: region.spec().len(),
            });
        }
        let v: Vec<f64> = self
            .masses
            .iter()
            .zip(region.mask())
            .map(|(&m, &b)| if b { m } else { 0.0 })
            .collect();
        Ok(pairwise_sum(&v))
    }

    /// Masses of the `n x n` lattice cells, row-major. A vertex shared by
    /// several cells splits its mass evenly among them, so the cell masses
    /// sum to the total.
    pub fn cell_masses(&self) -> Vec<f64> {
        let spec = &self.spec;
        let n = spec.n();
        if spec.kind().cell_centered() {
            return self.masses.clone();
        }
        let nx = n + 1;
        let mut cells = vec![0.0; n * n];
        for j in 0..=n {
            for i in 0..=n {
                let m = self.masses[j * nx + i];
                if m == 0.0 {
                    continue;
                }
                let share = m / adjacent_cells(spec, i, j) as f64;
                for cj in j.saturating_sub(1)..j.min(n - 1) + 1 {
                    for ci in i.saturating_sub(1)..i.min(n - 1) + 1 {
                        cells[cj * n + ci] += share;
                    }
                }
            }
        }
        cells
    }
}

/// `m(v) = w(v) eps^{gamma^2/2} e^{gamma h_eps(v)}` with `w(v) = a^2` in the
/// interior.
pub fn build_measure(field: &Field, gamma: f64, eps: f64) -> Result<QuantumMeasure> {
    check_gamma(gamma)?;
    let spec = field.spec();
    let he = circle_average_grid(field, eps)?;
    let w = vertex_weights(spec);
    let pre = libm::pow(eps, 0.5 * gamma * gamma);
    let masses = he
        .iter()
        .zip(&w)
        .map(|(&h, &w)| {
            if w > 0.0 {
                w * pre * libm::exp(gamma * h)
            } else {
                0.0
            }
        })
        .collect();
    QuantumMeasure::from_masses(spec, gamma, Regularization::Circle(eps), masses)
}

/// `m(v) = e^{gamma h(v)}` on vertices carrying a degree of freedom.
pub fn build_measure_discrete(field: &Field, gamma: f64) -> Result<QuantumMeasure> {
    check_gamma(gamma)?;
    let spec = field.spec();
    let (nx, _) = spec.dims();
    let masses = field
        .values()
        .iter()
        .enumerate()
        .map(|(k, &h)| {
            if spec.is_interior(k % nx, k / nx) {
                libm::exp(gamma * h)
            } else {
                0.0
            }
        })
        .collect();
    QuantumMeasure::from_masses(spec, gamma, Regularization::Discrete, masses)
}

/// Midpoint quadrature of `C(z)^{gamma^2/2} e^{gamma h0(z)}` over a region.
pub fn expected_mass(
    crm: &ConformalRadiusMap,
    gamma: f64,
    region: &Region,
    h0: Option<&[f64]>,
) -> Result<f64> {
    check_gamma(gamma)?;
    let spec = crm.spec();
    if region.spec() != spec {
        return Err(Error::GridMismatch {
            expected: spec.len(),
            got: region.spec().len(),
        });
    }
    if let Some(h0) = h0 {
        if h0.len() != spec.len() {
            return Err(Error::GridMismatch {
                expected: spec.len(),
                got: h0.len(),
            });
        }
    }
    let w = vertex_weights(spec);
    let half = 0.5 * gamma * gamma;
    let terms: Vec<f64> = (0..spec.len())
        .filter(|&k| region.contains(k) && w[k] > 0.0)
        .map(|k| {
            let shift = h0.map_or(0.0, |h| gamma * h[k]);
            w[k] * libm::exp(half * crm.log_values()[k] + shift)
        })
        .collect();
    Ok(pairwise_sum(&terms))
}

/// `mu^n`: density `exp(gamma h^n - (gamma^2/2) Var h^n + (gamma^2/2) log C)`.
#[derive(Debug, Clone)]
pub struct ProjectedMeasure {
    pub modes: usize,
    pub measure: QuantumMeasure,
}

/// Reusable data for conditional measures on one grid.
#[derive(Debug, Clone)]
pub struct Conditioner {
    order: ModeOrder,
    crm: ConformalRadiusMap,
    weights: Vec<f64>,
}

impl Conditioner {
    pub fn new(spec: &DomainSpec) -> Result<Self> {
        if spec.kind() != DomainKind::DirichletSquare {
            return Err(Error::UnsupportedKind(spec.kind().name()));
        }
        Ok(Self {
            order: ModeOrder::new(spec)?,
            crm: ConformalRadiusMap::new(spec)?,
            weights: vertex_weights(spec),
        })
    }

    pub fn conformal_radius(&self) -> &ConformalRadiusMap {
        &self.crm
    }

    pub fn measure(&self, field: &Field, n: usize, gamma: f64) -> Result<ProjectedMeasure> {
        check_gamma(gamma)?;
        let hn = project_lowpass(field, n)?;
        let var = self.order.lowpass_variance(n)?;
        let half = 0.5 * gamma * gamma;
        let masses = (0..hn.values().len())
            .map(|k| {
                let w = self.weights[k];
                if w > 0.0 {
                    w * libm::exp(
                        gamma * hn.values()[k] - half * var[k] + half * self.crm.log_values()[k],
                    )
                } else {
                    0.0
                }
            })
            .collect();
        let measure =
            QuantumMeasure::from_masses(field.spec(), gamma, Regularization::Projected(n), masses)?;
        Ok(ProjectedMeasure { modes: n, measure })
    }
}

pub fn conditional_measure(field: &Field, n: usize, gamma: f64) -> Result<ProjectedMeasure> {
    Conditioner::new(field.spec())?.measure(field, n, gamma)
}

/// Both sides of the expectation-level coordinate change under `z -> r z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PullbackResidual {
    /// `int_A C(z; D~)^{gamma^2/2} |psi'|^{gamma Q} dz` with `D~ = D / r`.
    pub pulled_back: f64,
    /// `int_{psi(A)} C(w; D)^{gamma^2/2} dw`.
    pub direct: f64,
}

impl PullbackResidual {
    pub fn absolute(&self) -> f64 {
        libm::fabs(self.pulled_back - self.direct)
    }

    pub fn relative(&self) -> f64 {
        self.absolute() / libm::fabs(self.direct)
    }
}

/// Compares the two integrals, each by quadrature on its own grid (`D` and
/// `D~ = D / r`, same number of cells). `region` is given in the
/// coordinates of `D~`.
pub fn pullback_identity_residual(
    spec: &DomainSpec,
    gamma: f64,
    r: f64,
    region: Shape,
) -> Result<PullbackResidual> {
    if !(gamma > 0.0 && gamma < 2.0) {
        return Err(Error::Gamma(gamma));
    }
    if !(r > 0.0) {
        return Err(Error::Parameter {
            name: "r",
            value: r,
        });
    }
    let pre = spec.with_side(spec.side() / r)?;
    let image = region.scaled(r);
    if !image.inside(spec) {
        let p = image.anchor();
        return Err(Error::OutsideDomain(p.x, p.y));
    }
    let q = 2.0 / gamma + 0.5 * gamma;
    let a_pre = Region::shape(&pre, region)?;
    let a_img = Region::shape(spec, image)?;
    let lhs = expected_mass(&ConformalRadiusMap::new(&pre)?, gamma, &a_pre, None)?
        * libm::pow(r, gamma * q);
    let rhs = expected_mass(&ConformalRadiusMap::new(spec)?, gamma, &a_img, None)?;
    Ok(PullbackResidual {
        pulled_back: lhs,
        direct: rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{add_background, FieldTag, GffSampler};

    #[test]
    fn gamma_zero_is_lebesgue() {
        let s = DomainSpec::unit(DomainKind::DirichletSquare, 32).unwrap();
        let f = GffSampler::new(s).unwrap().sample(2);
        let m = build_measure(&f, 0.0, 0.125).unwrap();
        let a2 = s.spacing() * s.spacing();
        for j in 1..32 {
            for i in 1..32 {
                assert_eq!(m.masses()[s.index(i, j)], a2);
            }
        }
        assert!((m.total_mass() - 31.0 * 31.0 * a2).abs() < 1e-12);
        let cells = m.cell_masses();
        assert!((pairwise_sum(&cells) - m.total_mass()).abs() < 1e-12);
        assert!(matches!(
            build_measure(&f, 2.0, 0.125),
            Err(Error::Gamma(_))
        ));
        assert!(matches!(
            build_measure(&f, 1.0, 0.01),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn mixed_weights_cover_the_square() {
        let s = DomainSpec::unit(DomainKind::MixedSquare, 16).unwrap();
        let w = vertex_weights(&s);
        // free bottom edge counts half cells; Dirichlet sides none
        assert!((pairwise_sum(&w) - 15.0 * 15.5 / 256.0).abs() < 1e-12);
    }

    #[test]
    fn constant_shift_scales_masses() {
        let s = DomainSpec::unit(DomainKind::Torus, 32).unwrap();
        let f = GffSampler::new(s).unwrap().sample(5);
        let c = 0.7;
        let g = add_background(&f, &vec![c; s.len()]).unwrap();
        for gamma in [0.5, 1.0] {
            let factor = libm::exp(gamma * c);
            let (m0, m1) = (
                build_measure(&f, gamma, 0.0625).unwrap(),
                build_measure(&g, gamma, 0.0625).unwrap(),
            );
            let (d0, d1) = (
                build_measure_discrete(&f, gamma).unwrap(),
                build_measure_discrete(&g, gamma).unwrap(),
            );
            assert!((m1.total_mass() / m0.total_mass() / factor - 1.0).abs() < 1e-12);
            assert!((d1.total_mass() / d0.total_mass() / factor - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn disc_expected_mass_closed_form() {
        let s = DomainSpec::new(DomainKind::DiscEmbedded, 256, 2.0).unwrap();
        let crm = ConformalRadiusMap::with_solver(&s, 64).unwrap();
        let ball = Region::shape(
            &s,
            Shape::Ball {
                center: s.center(),
                radius: 0.5,
            },
        )
        .unwrap();
        let got = expected_mass(&crm, 1.0, &ball, None).unwrap();
        let expect = 2.0 * core::f64::consts::PI / 3.0 * (1.0 - libm::pow(0.75, 1.5));
        assert!((got / expect - 1.0).abs() < 5e-3, "{got} vs {expect}");
        let area = expected_mass(&crm, 0.0, &ball, None).unwrap();
        assert!((area / (core::f64::consts::PI * 0.25) - 1.0).abs() < 5e-3);
    }

    #[test]
    fn conditional_measure_with_no_modes() {
        let s = DomainSpec::unit(DomainKind::DirichletSquare, 32).unwrap();
        let f = GffSampler::new(s).unwrap().sample(9);
        let cond = Conditioner::new(&s).unwrap();
        let p = cond.measure(&f, 0, 1.0).unwrap();
        let w = vertex_weights(&s);
        for k in 0..s.len() {
            let expect = if w[k] > 0.0 {
                w[k] * libm::exp(0.5 * cond.conformal_radius().log_values()[k])
            } else {
                0.0
            };
            assert!((p.measure.masses()[k] - expect).abs() < 1e-15);
        }
        let lebesgue = cond.measure(&f, 40, 0.0).unwrap();
        assert_eq!(lebesgue.measure.masses(), w.as_slice());
        let t = Field::from_values(
            DomainSpec::unit(DomainKind::Torus, 16).unwrap(),
            vec![0.0; 256],
            0,
            FieldTag::Centered,
        )
        .unwrap();
        assert!(conditional_measure(&t, 1, 1.0).is_err());
    }

    #[test]
    fn pullback_identity() {
        let s = DomainSpec::new(DomainKind::DiscEmbedded, 64, 2.0).unwrap();
        let region = Shape::Ball {
            center: Point::new(2.0, 2.0),
            radius: 1.0,
        };
        for gamma in [0.5, 1.0, 1.5] {
            let r = pullback_identity_residual(&s, gamma, 0.5, region).unwrap();
            assert!(r.relative() < 1e-3, "{r:?}");
        }
        let same = pullback_identity_residual(
            &s,
            1.0,
            1.0,
            Shape::Ball {
                center: s.center(),
                radius: 0.5,
            },
        )
        .unwrap();
        assert!(same.relative() < 1e-12);
        let tiny = pullback_identity_residual(&s, 1e-9, 0.5, region).unwrap();
        assert!(tiny.relative() < 1e-8);
        assert!(pullback_identity_residual(
            &s,
            1.0,
            0.5,
            Shape::Ball {
                center: Point::new(3.5, 2.0),
                radius: 1.0
            }
        )
        .is_err());
    }
}
