use lqg_core::boundary::{
    build_boundary_measure, sample_gff_boundary, semicircle_average, semicircle_weights,
    BoundaryCondition, BoundaryExperiment, BoundaryPotential, BoundarySetKind,
};
use lqg_core::circle::CircleKernel;
use lqg_core::field::GffSampler;
use lqg_core::kpz::{fit_quantum, threshold_ladder};
use lqg_core::stats::{mean, ols};
use lqg_core::{DomainKind, DomainSpec, Point};

const Z: Point = Point::new(0.5, 0.0);

#[test]
fn free_inner_product_table() {
    let s = DomainSpec::unit(DomainKind::FreeSquare, 128).unwrap();
    let sampler = GffSampler::new(s).unwrap();
    let reference = BoundaryPotential::with_sampler(&sampler, Z, 0.25).unwrap();
    let g = reference.harmonic_at_center();
    let eps = [1.0 / 8.0, 1.0 / 16.0];
    for &e1 in &eps {
        for &e2 in &eps {
            let w1 = semicircle_weights(&s, Z, e1).unwrap();
            let w2 = semicircle_weights(&s, Z, e2).unwrap();
            let got = sampler.functional_covariance(&w1, &w2);
            let want = reference.inner_product_formula(e1, e2, g);
            assert!(
                (got / want - 1.0).abs() < 0.05,
                "({e1}, {e2}): {got} vs {want}"
            );
        }
    }
    assert!(mean(reference.xi_grid()).abs() < 1e-12);
}

#[test]
fn harmonic_correction_is_radius_independent() {
    for kind in [DomainKind::FreeSquare, DomainKind::MixedSquare] {
        let s = DomainSpec::unit(kind, 256).unwrap();
        let sampler = GffSampler::new(s).unwrap();
        let g: Vec<f64> = [0.25, 0.125, 0.0625]
            .iter()
            .map(|&e| {
                BoundaryPotential::with_sampler(&sampler, Z, e)
                    .unwrap()
                    .harmonic_at_center()
            })
            .collect();
        for v in &g {
            assert!((v - g[0]).abs() < 0.05, "{kind:?} {g:?}");
        }
        // away from z the correction is smooth and agrees between radii
        let y = Point::new(0.5, 0.6);
        let a = BoundaryPotential::with_sampler(&sampler, Z, 0.125)
            .unwrap()
            .harmonic_at(y);
        let b = BoundaryPotential::with_sampler(&sampler, Z, 0.0625)
            .unwrap()
            .harmonic_at(y);
        assert!((a - b).abs() < 0.01, "{kind:?} {a} {b}");
    }
}

#[test]
fn boundary_variance_doubles_the_interior_slope() {
    let s = DomainSpec::unit(DomainKind::MixedSquare, 256).unwrap();
    let sampler = GffSampler::new(s).unwrap();
    let eps: [f64; 4] = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let xs: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let edge: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let w = semicircle_weights(&s, Z, e).unwrap();
            sampler.functional_covariance(&w, &w)
        })
        .collect();
    let inner: Vec<f64> = eps
        .iter()
        .map(|&e| {
            let w = CircleKernel::new(&s, Point::new(0.5, 0.5), e)
                .unwrap()
                .weights(&s);
            sampler.functional_covariance(&w, &w)
        })
        .collect();
    let (se, si) = (ols(&xs, &edge).slope, ols(&xs, &inner).slope);
    assert!((se - 2.0).abs() < 0.1, "{se}");
    assert!((si - 1.0).abs() < 0.05, "{si}");
}

#[test]
fn expected_boundary_mass_is_radius_independent() {
    let s = DomainSpec::unit(DomainKind::MixedSquare, 256).unwrap();
    let sampler = GffSampler::new(s).unwrap();
    let a = s.spacing();
    let gamma: f64 = 1.0;
    let expected = |eps: f64| -> f64 {
        (0..s.n())
            .map(|k| (k as f64 + 0.5) * a)
            .filter(|x| (0.25..=0.75).contains(x))
            .map(|x| {
                let w = semicircle_weights(&s, Point::new(x, 0.0), eps).unwrap();
                let var = sampler.functional_covariance(&w, &w);
                a * (0.25 * gamma * gamma * eps.ln() + gamma * gamma / 8.0 * var).exp()
            })
            .sum()
    };
    let e: Vec<f64> = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0]
        .iter()
        .map(|&x| expected(x))
        .collect();
    let hi = e.iter().copied().fold(f64::MIN, f64::max);
    let lo = e.iter().copied().fold(f64::MAX, f64::min);
    assert!((hi - lo) / mean(&e) < 0.05, "{e:?}");
    // Monte Carlo against the exact mean
    let masses: Vec<f64> = (0..200u64)
        .map(|seed| {
            build_boundary_measure(&sampler.sample(seed), gamma, 1.0 / 16.0)
                .unwrap()
                .mass_between(0.25, 0.75)
        })
        .collect();
    let m = mean(&masses);
    let sd = (masses.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / 199.0).sqrt();
    assert!(
        (m - e[1]).abs() < 4.0 * sd / (200f64).sqrt(),
        "{m} vs {}",
        e[1]
    );
    assert!(masses.iter().all(|&v| v > 0.0 && v.is_finite()));
}

#[test]
fn mixed_field_semicircle_samples() {
    let s = DomainSpec::unit(DomainKind::DirichletSquare, 64).unwrap();
    let f = sample_gff_boundary(&s, BoundaryCondition::Mixed, 9).unwrap();
    assert_eq!(f.spec().kind(), DomainKind::MixedSquare);
    let v = semicircle_average(&f, Z, 0.25).unwrap();
    assert!(v.is_finite());
    let free = sample_gff_boundary(&s, BoundaryCondition::Free, 9).unwrap();
    assert!(free.mean().abs() < 1e-12);
    assert!(sample_gff_boundary(
        &DomainSpec::unit(DomainKind::Torus, 64).unwrap(),
        BoundaryCondition::Free,
        1
    )
    .is_err());
}

#[test]
fn point_experiment_small() {
    let exp = BoundaryExperiment {
        bc: BoundaryCondition::Mixed,
        n: 256,
        side: 1.0,
        gamma: 1.0,
        eps_cells: 2.0,
        set: BoundarySetKind::Points,
        sets_per_field: 8,
        rel_deltas: threshold_ladder(&[2, 3, 4, 5, 6]),
    };
    exp.validate().unwrap();
    let sampler = GffSampler::new(exp.spec().unwrap()).unwrap();
    let samples: Vec<_> = (0..60u64)
        .map(|seed| exp.trial_with(&sampler, seed).unwrap())
        .collect();
    let fit = fit_quantum(&exp.rel_deltas, &samples).unwrap();
    assert!(
        (fit.delta_mass.slope - exp.target().unwrap()).abs() < 0.15,
        "{}",
        fit.delta_mass.slope
    );
    // a single point is hit by exactly one box at every threshold
    assert!(fit.mean_count.iter().all(|&c| c == 1.0));
}
