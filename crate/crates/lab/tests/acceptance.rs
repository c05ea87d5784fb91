//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! fails. Pass criterion numbers as arguments to run a subset.

use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use lqg_core::boxes::{BoxTiling, FractalSet};
use lqg_core::circle::{apply_weights, CircleKernel};
use lqg_core::field::GffSampler;
use lqg_core::green::GreenOracle;
use lqg_core::kpz::{kpz_forward, kpz_inverse};
use lqg_core::measure::{pullback_identity_residual, Shape};
use lqg_core::rng::{stream, Purpose};
use lqg_core::stats::variance;
use lqg_core::{DomainKind, DomainSpec, Point};
use lqg_lab::pipelines::{run, tiling_violations, Check, Report, RunOptions};
use lqg_lab::{Experiment, RunConfig};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn from_checks<'a>(checks: impl IntoIterator<Item = &'a Check>) -> Outcome {
    let checks: Vec<&Check> = checks.into_iter().collect();
    let pass = !checks.is_empty() && checks.iter().all(|c| c.pass);
    let detail = checks
        .iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join("; ");
    outcome(pass, detail)
}

fn preset_run(e: Experiment) -> Result<Report> {
    run(&RunConfig::preset(e), &RunOptions::default())
}

fn c1() -> Result<Outcome> {
    let g = (8.0f64 / 3.0).sqrt();
    let mut worst = 0.0f64;
    for l in 1..=6u32 {
        let l = l as f64;
        let x = (4.0 * l * l - 1.0) / 24.0;
        worst = worst.max((kpz_inverse(x, g)? - 0.5 * (l - 0.5)).abs());
    }
    Ok(outcome(
        worst <= 1e-12,
        format!("max |Delta_L - (L - 1/2)/2| = {worst:.2e} (limit 1e-12)"),
    ))
}

fn c2() -> Result<Outcome> {
    let mut worst = 0.0f64;
    let mut fixed = 0.0f64;
    for i in 0..19 {
        let g = 0.1 * i as f64;
        for k in 0..20 {
            let x = 0.05 * (k + 1) as f64;
            let back = kpz_forward(kpz_inverse(x, g)?, g)?;
            worst = worst.max((back - x).abs());
            let d = 0.05 * k as f64;
            worst = worst.max((kpz_inverse(kpz_forward(d, g)?, g)? - d).abs());
        }
        fixed = fixed
            .max(kpz_inverse(0.0, g)?.abs())
            .max((kpz_inverse(1.0, g)? - 1.0).abs());
    }
    Ok(outcome(
        worst <= 1e-12 && fixed <= 1e-12,
        format!("round trip {worst:.2e}, fixed points {fixed:.2e} (limit 1e-12)"),
    ))
}

fn c3() -> Result<Outcome> {
    let s = DomainSpec::unit(DomainKind::DirichletSquare, 64)?;
    let sampler = GffSampler::new(s)?;
    let oracle = GreenOracle::new(s)?;
    let pairs = [
        ((32, 32), (32, 32)),
        ((32, 32), (33, 32)),
        ((32, 32), (36, 35)),
        ((32, 32), (48, 16)),
        ((10, 10), (10, 10)),
        ((10, 10), (12, 11)),
        ((3, 30), (5, 30)),
        ((1, 1), (2, 2)),
        ((20, 44), (44, 20)),
        ((60, 32), (4, 32)),
    ];
    let mut sums = vec![(0.0, 0.0); pairs.len()];
    let draws = 10_000u64;
    for seed in 0..draws {
        let (a, b) = sampler.sample_pair(seed);
        for f in [a, b] {
            for (k, &(x, y)) in pairs.iter().enumerate() {
                let p = f.value(x.0, x.1) * f.value(y.0, y.1);
                sums[k].0 += p;
                sums[k].1 += p * p;
            }
        }
    }
    let m = (2 * draws) as f64;
    let mut worst = 0.0f64;
    for (k, &(x, y)) in pairs.iter().enumerate() {
        let emp = sums[k].0 / m;
        let se = ((sums[k].1 / m - emp * emp) / m).sqrt();
        worst = worst.max((emp - oracle.solve(x, y)?).abs() / se);
    }
    Ok(outcome(
        worst < 4.0,
        format!("max |cov - G| / se over 10 pairs = {worst:.3} (limit 4)"),
    ))
}

fn c4() -> Result<Outcome> {
    let s = DomainSpec::unit(DomainKind::DirichletSquare, 512)?;
    let sampler = GffSampler::new(s)?;
    let z = Point::new(0.5, 0.5);
    let eps0 = 0.25;
    let ts = [2f64.ln(), 4f64.ln(), 8f64.ln()];
    let w0 = CircleKernel::new(&s, z, eps0)?.weights(&s);
    let ws = ts
        .iter()
        .map(|t| Ok(CircleKernel::new(&s, z, eps0 * (-t).exp())?.weights(&s)))
        .collect::<Result<Vec<_>>>()?;
    let mut v: Vec<Vec<f64>> = vec![Vec::with_capacity(10_000); ts.len()];
    for seed in 0..5_000u64 {
        let (a, b) = sampler.sample_pair(seed);
        for f in [a, b] {
            let h0 = apply_weights(&w0, f.values());
            for (k, w) in ws.iter().enumerate() {
                v[k].push(apply_weights(w, f.values()) - h0);
            }
        }
    }
    let ratios: Vec<f64> = v.iter().zip(ts).map(|(v, t)| variance(v) / t).collect();
    let pass = ratios.iter().all(|r| (0.9..=1.1).contains(r));
    Ok(outcome(
        pass,
        format!("Var(V_t)/t at t = log 2, log 4, log 8: {ratios:.4?} (range [0.9, 1.1])"),
    ))
}

/// Every leaf rule plus the box-count sandwich, on random lognormal cells.
fn c7() -> Result<Outcome> {
    let mut violations = 0usize;
    for k in 0..1_000u64 {
        let mut rng = stream(7, Purpose::Synthetic, k);
        let depth = rng.gen_range(3..=7);
        let n = 1usize << depth;
        let sigma = rng.gen_range(0.0..3.0);
        let cells: Vec<f64> = (0..n * n)
            .map(|_| (sigma * (rng.gen::<f64>() - 0.5) * 3.0).exp())
            .collect();
        let total: f64 = cells.iter().sum();
        let delta = total * 2f64.powf(-rng.gen_range(1.0..(2 * depth) as f64));
        let t = BoxTiling::build(&cells, n, 1.0, delta)?;
        violations += tiling_violations(&t);
        let pts: Vec<Point> = (0..rng.gen_range(1..20))
            .map(|_| Point::new(rng.gen(), rng.gen()))
            .collect();
        let y = rng.gen_range(0.05..0.95);
        for x in [
            FractalSet::points(n, 1.0, &pts)?,
            FractalSet::segment(n, 1.0, y, 0.1, 0.9)?,
        ] {
            let h = t.hits(&x)?;
            let nb = h.boxes as f64;
            if h.forced == 0 && h.mass > delta * nb * (1.0 + 1e-12) {
                violations += 1;
            }
            if h.parents > 0
                && (h.parent_mass < delta * h.parents as f64 || delta * nb > 4.0 * h.parent_mass)
            {
                violations += 1;
            }
        }
    }
    let a = preset_run(Experiment::Figures)?;
    let b = preset_run(Experiment::Figures)?;
    let same = a.tables == b.tables && a.files == b.files;
    let forced: usize = a
        .table("figures")
        .context("figures index")?
        .rows
        .iter()
        .map(|r| match r[4] {
            lqg_lab::io::Cell::Int(i) => i as usize,
            _ => 0,
        })
        .sum();
    let rules = a.checks.iter().all(|c| c.pass);
    Ok(outcome(
        violations == 0 && same && rules,
        format!(
            "{violations} violations over 1000 measures; figures deterministic: {same}, tiling rules: {rules}, \
             {} artifacts, {forced} forced leaves",
            a.tables.len() + a.files.len()
        ),
    ))
}

fn c12() -> Result<Outcome> {
    let s = DomainSpec::unit(DomainKind::DirichletSquare, 64)?;
    let shape = Shape::Ball {
        center: Point::new(0.9, 1.1),
        radius: 0.4,
    };
    let mut res = Vec::new();
    for g in [0.5, 1.0, 1.5] {
        res.push(pullback_identity_residual(&s, g, 0.5, shape)?.relative());
    }
    let pass = res.iter().all(|&r| r < 1e-3);
    Ok(outcome(
        pass,
        format!(
            "relative residuals at gamma 0.5, 1, 1.5: {} (limit 1e-3)",
            res.iter()
                .map(|r| format!("{r:.2e}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ))
}

fn main() -> ExitCode {
    let only: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let wanted = |k: u32| only.is_empty() || only.contains(&k);
    // moments covers two criteria; run it once
    let mut moments: Option<Result<Report>> = None;
    let mut moments_run = || -> Result<Report> {
        match moments.get_or_insert_with(|| preset_run(Experiment::Moments)) {
            Ok(r) => Ok(r.clone()),
            Err(e) => Err(anyhow::anyhow!("{e:#}")),
        }
    };
    let mut failed = 0;
    for k in 1..=12u32 {
        if !wanted(k) {
            continue;
        }
        let start = Instant::now();
        let (name, result): (&str, Result<Outcome>) = match k {
            1 => ("KPZ algebra", c1()),
            2 => ("round trip and fixed points", c2()),
            3 => ("GFF covariance", c3()),
            4 => ("circle-average Brownian ladder", c4()),
            5 => (
                "first moment",
                moments_run().map(|r| {
                    from_checks(
                        r.checks
                            .iter()
                            .filter(|c| c.name.starts_with("first moment")),
                    )
                }),
            ),
            6 => (
                "two-point exponent",
                moments_run().map(|r| from_checks(r.check("two-point slope gamma=1"))),
            ),
            7 => ("tiling exactness", c7()),
            8 => (
                "interior KPZ",
                preset_run(Experiment::Kpz).map(|r| from_checks(&r.checks)),
            ),
            9 => (
                "stopping-time engine",
                preset_run(Experiment::Passage).map(|r| from_checks(&r.checks)),
            ),
            10 => (
                "rooted thick points",
                preset_run(Experiment::Rooted).map(|r| from_checks(&r.checks)),
            ),
            11 => (
                "boundary regime",
                preset_run(Experiment::Boundary).map(|r| from_checks(&r.checks)),
            ),
            12 => ("coordinate covariance", c12()),
            _ => unreachable!(),
        };
        let secs = start.elapsed().as_secs_f64();
        let o = result.unwrap_or_else(|e| outcome(false, format!("error: {e:#}")));
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} {k:>2} {name} [{secs:.1} s]: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
