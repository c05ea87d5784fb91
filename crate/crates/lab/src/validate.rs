//! Pre-run diagnostics for a [`RunConfig`].

use std::fmt;

use lqg_core::boundary::{BoundaryCondition, BoundarySetKind};
use lqg_core::passage::PassageProblem;
use lqg_core::DomainKind;

use crate::config::{Experiment, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Config path of the offending value, e.g. `domain.n`.
    pub field: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{level}: {}: {}", self.field, self.message)
    }
}

#[derive(Default)]
struct Diags(Vec<Diagnostic>);

impl Diags {
    fn warn(&mut self, field: &str, message: String) {
        self.0.push(Diagnostic {
            severity: Severity::Warning,
            field: field.into(),
            message,
        });
    }

    fn error(&mut self, field: &str, message: String) {
        self.0.push(Diagnostic {
            severity: Severity::Error,
            field: field.into(),
            message,
        });
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

/// Exponent `m` such that the heaviest lattice cell of a `cells`-per-side
/// grid carries about `2^{-m}` of the total mass: `(d/2)(2 - gamma)^2 log2 n`
/// in the interior (`d = 2`), `(1 - gamma/2)^2 log2 n` on a boundary edge.
pub fn heaviest_cell_exponent(n: usize, gamma: f64, boundary: bool) -> f64 {
    let l = (n as f64).log2();
    if boundary {
        (1.0 - 0.5 * gamma).powi(2) * l
    } else {
        0.5 * (2.0 - gamma).powi(2) * l
    }
}

fn check_eps(d: &mut Diags, field: &str, eps: f64, a: f64) {
    if !(eps > 0.0) {
        d.error(field, format!("radius {eps} must be positive"));
    } else if eps < 2.0 * a - 1e-12 {
        d.error(
            field,
            format!("radius {eps} is below two lattice spacings ({})", 2.0 * a),
        );
    } else if eps < 4.0 * a - 1e-12 {
        d.warn(field, format!("radius {eps} is under four lattice spacings; circle averages carry a visible lattice bias"));
    }
}

pub fn validate(cfg: &RunConfig) -> Vec<Diagnostic> {
    let mut d = Diags::default();
    for (k, &g) in cfg.gammas.iter().enumerate() {
        if !(0.0..2.0).contains(&g) {
            d.error(
                &format!("gammas[{k}]"),
                format!("gamma = {g} is outside the allowed range \"γ ∈ [0, 2)\""),
            );
        }
    }
    if cfg.gammas.is_empty() {
        d.error("gammas", "at least one gamma is required".into());
    }
    if cfg.samples == 0 {
        d.error("samples", "must be positive".into());
    }
    let spec = match cfg.spec() {
        Ok(s) => Some(s),
        Err(e) => {
            d.error("domain", format!("{e:#}"));
            None
        }
    };
    let gammas: Vec<f64> = cfg
        .gammas
        .iter()
        .copied()
        .filter(|g| (0.0..2.0).contains(g))
        .collect();
    let deepest = cfg.delta_exps.iter().copied().max().unwrap_or(0);
    let ladder = |d: &mut Diags, n: usize, boundary: bool| {
        if cfg.delta_exps.is_empty() {
            d.error("delta_exps", "threshold ladder is empty".into());
        }
        if cfg.delta_exps.contains(&0) {
            d.error(
                "delta_exps",
                "threshold 2^0 is the total mass; exponents must be positive".into(),
            );
        }
        for &g in &gammas {
            let m = heaviest_cell_exponent(n, g, boundary);
            if deepest as f64 >= m {
                d.warn(
                    "delta_exps",
                    format!(
                        "at gamma = {g} the heaviest of {n} cells per side holds about 2^-{m:.1} of the mass; \
                         thresholds down to 2^-{deepest} will produce forced leaves"
                    ),
                );
            }
        }
    };
    match (cfg.experiment, spec) {
        (_, None) => {}
        (Experiment::Figures | Experiment::Kpz, Some(s)) => {
            ladder(&mut d, s.n(), false);
            if cfg.experiment == Experiment::Kpz {
                if !matches!(cfg.set.as_str(), "segment" | "points" | "cantor") {
                    d.error(
                        "set",
                        format!("unknown test set `{}` (segment, points, cantor)", cfg.set),
                    );
                }
                if cfg.sets_per_field == 0 {
                    d.error("sets_per_field", "must be positive".into());
                }
                if cfg.delta_exps.len() < 4 {
                    d.error(
                        "delta_exps",
                        "the exponent fit needs at least four thresholds".into(),
                    );
                }
                if s.kind() == DomainKind::DiscEmbedded {
                    d.error("domain.kind", "test sets need a square domain".into());
                }
            }
        }
        (Experiment::Boundary, Some(s)) => {
            match BoundaryCondition::from_name(&cfg.bc) {
                Ok(bc) if bc.kind() != s.kind() => d.error(
                    "domain.kind",
                    format!(
                        "bc `{}` needs a `{}` domain, got `{}`",
                        cfg.bc,
                        bc.kind().name(),
                        s.kind().name()
                    ),
                ),
                Ok(_) => {}
                Err(_) => d.error(
                    "bc",
                    format!("unknown boundary condition `{}` (free, mixed)", cfg.bc),
                ),
            }
            if BoundarySetKind::from_name(&cfg.set).is_none() {
                d.error(
                    "set",
                    format!(
                        "unknown boundary set `{}` (points, segment, cantor)",
                        cfg.set
                    ),
                );
            }
            if cfg.delta_exps.len() < 4 {
                d.error(
                    "delta_exps",
                    "the exponent fit needs at least four thresholds".into(),
                );
            }
            ladder(&mut d, s.n(), true);
            let a = s.spacing();
            let eps = cfg.boundary.eps_cells * a;
            check_eps(&mut d, "boundary.eps_cells", eps, a);
            let widest = cfg
                .boundary
                .stability_factors
                .iter()
                .copied()
                .fold(1.0, f64::max)
                * eps;
            if widest > 0.25 * s.side() {
                d.error(
                    "boundary.stability_factors",
                    format!("radius {widest} reaches past the middle half of the edge"),
                );
            }
            if cfg.boundary.variance_n < 64 || !cfg.boundary.variance_n.is_power_of_two() {
                d.error(
                    "boundary.variance_n",
                    "must be a power of two of at least 64".into(),
                );
            }
        }
        (Experiment::Moments, Some(s)) => {
            if s.kind() != DomainKind::DirichletSquare {
                d.error(
                    "domain.kind",
                    "the first-moment check needs a dirichlet_square".into(),
                );
            }
            let a = s.spacing();
            for (k, &e) in cfg.eps.iter().enumerate() {
                check_eps(&mut d, &format!("eps[{k}]"), e, a);
                if e >= 0.3 * s.side() {
                    d.error(
                        &format!("eps[{k}]"),
                        format!("circle of radius {e} leaves the domain at the test points"),
                    );
                }
            }
            if cfg.eps.is_empty() {
                d.error("eps", "at least one radius is required".into());
            }
            let pa = s.side() / cfg.pairs.n as f64;
            check_eps(&mut d, "pairs.eps", cfg.pairs.eps, pa);
            if let Some(&e) = cfg.pairs.sep_exps.iter().max() {
                let r = s.side() * 0.5f64.powi(e as i32);
                if r < 2.0 * cfg.pairs.eps {
                    d.warn(
                        "pairs.sep_exps",
                        format!("separation {r} is under two radii; the circles overlap"),
                    );
                }
            }
        }
        (Experiment::Rooted, Some(s)) => {
            if !matches!(
                s.kind(),
                DomainKind::DirichletSquare | DomainKind::DiscEmbedded
            ) {
                d.error(
                    "domain.kind",
                    "rooted sampling needs a Dirichlet domain".into(),
                );
            }
            let a = s.spacing();
            let margin = crate::pipelines::ROOT_MARGIN * s.side();
            for (k, &e0) in cfg.eps.iter().enumerate() {
                if e0 >= margin {
                    d.error(
                        &format!("eps[{k}]"),
                        format!("eps0 = {e0} is not below the distance {margin} from the root support to the boundary"),
                    );
                }
                check_eps(&mut d, &format!("eps[{k}]"), e0 * (-cfg.rooted.t).exp(), a);
            }
            if cfg.eps.is_empty() {
                d.error("eps", "eps0 is required".into());
            }
            if gammas.contains(&0.0) {
                d.error("gammas", "the rooted measure needs gamma > 0".into());
            }
        }
        (Experiment::Passage, Some(_)) => {
            let p = &cfg.passage;
            let a =
                p.a.unwrap_or_else(|| gammas.first().map_or(f64::NAN, |&g| 2.0 / g - 0.5 * g));
            if let Err(e) = PassageProblem::new(a, p.level, p.x) {
                d.error("passage", e.to_string());
            }
            if !(p.dt > 0.0) {
                d.error("passage.dt", "time step must be positive".into());
            } else if p.dt > 1e-2 {
                d.warn(
                    "passage.dt",
                    format!(
                        "time step {} is coarse; the walk overshoots the level",
                        p.dt
                    ),
                );
            }
            if p.euler_samples == 0 {
                d.error("passage.euler_samples", "must be positive".into());
            }
        }
    }
    let mut out = d.0;
    out.sort_by_key(|d| std::cmp::Reverse(d.severity));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_have_no_errors() {
        for e in Experiment::ALL {
            let diags = validate(&RunConfig::preset(e));
            assert!(!has_errors(&diags), "{e}: {diags:?}");
        }
    }

    #[test]
    fn gamma_two_is_rejected_with_range() {
        let mut c = RunConfig::preset(Experiment::Kpz);
        c.gammas = vec![1.0, 2.0];
        let diags = validate(&c);
        let e = diags
            .iter()
            .find(|d| d.severity == Severity::Error)
            .unwrap();
        assert_eq!(e.field, "gammas[1]");
        assert!(e.message.contains("γ ∈ [0, 2)"));
    }

    #[test]
    fn small_radius_is_an_error() {
        let mut c = RunConfig::preset(Experiment::Moments);
        c.eps = vec![1.0 / 256.0];
        let diags = validate(&c);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.field == "eps[0]"));
        c.eps = vec![3.0 / 128.0];
        let diags = validate(&c);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Warning && d.field == "eps[0]"));
    }

    #[test]
    fn deep_ladder_warns_about_forced_leaves() {
        let mut c = RunConfig::preset(Experiment::Kpz);
        c.domain.n = 64;
        c.gammas = vec![0.5];
        c.delta_exps = vec![4, 6, 8, 10, 12];
        let diags = validate(&c);
        assert!(
            diags
                .iter()
                .any(|d| d.field == "delta_exps" && d.message.contains("forced")),
            "{diags:?}"
        );
        c.delta_exps = vec![2, 3, 4, 5];
        assert!(validate(&c).is_empty());
    }
}
