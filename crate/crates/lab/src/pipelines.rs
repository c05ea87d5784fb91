//! Experiment pipelines. Each run turns a [`RunConfig`] into tables,
//! pictures and tolerance checks; nothing here depends on wall-clock time
//! or thread scheduling.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lqg_core::boundary::{
    boundary_sample_boxes, build_boundary_measure, semicircle_weights, BoundaryCondition,
    BoundaryExperiment, BoundarySetKind,
};
use lqg_core::boxes::{BoxTiling, SetKind};
use lqg_core::circle::{apply_weights, log_conformal_radius_at, CircleKernel};
use lqg_core::field::GffSampler;
use lqg_core::kpz::{fit_quantum, InteriorExperiment, QuantumFit, SampleBoxes};
use lqg_core::measure::{build_measure_discrete, Shape};
use lqg_core::passage::{
    euler_passage, first_passage_cdf, laplace_expected, normalization, ExactSampler, PassageProblem,
};
use lqg_core::rng::{Purpose, StreamKey};
use lqg_core::rooted::RootedSampler;
use lqg_core::stats::{ks_pvalue, ks_statistic, ks_two_sample, mean, ols, std_error, variance};
use lqg_core::{DomainKind, DomainSpec, Point};
use rayon::ThreadPool;

use crate::config::{Experiment, RunConfig};
use crate::ensemble::{member_seed, pool, try_map_indexed};
use crate::io::{Cell, Provenance, Table};
use crate::render::{encode_png, tiling_raster, tiling_svg, Style};
use crate::validate::{has_errors, validate, Severity};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// `|value - target| <= tolerance`.
    Near { target: f64, tolerance: f64 },
    /// `value < limit`.
    Below(f64),
    /// A yes/no property; `value` counts violations.
    Holds,
}

/// One tolerance comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub pass: bool,
}

impl Check {
    pub fn near(name: impl Into<String>, value: f64, target: f64, tolerance: f64) -> Self {
        let pass = (value - target).abs() <= tolerance;
        Self {
            name: name.into(),
            value,
            bound: Bound::Near { target, tolerance },
            pass,
        }
    }

    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound: Bound::Below(limit),
            pass: value < limit,
        }
    }

    pub fn holds(name: impl Into<String>, violations: usize) -> Self {
        Self {
            name: name.into(),
            value: violations as f64,
            bound: Bound::Holds,
            pass: violations == 0,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        let v = self.value;
        let value = if v != 0.0 && v.abs() < 1e-3 {
            format!("{v:.3e}")
        } else {
            format!("{v:.6}")
        };
        match self.bound {
            Bound::Near { target, tolerance } => {
                write!(
                    f,
                    "{tag} {}: {value} (target {target:.6} ± {tolerance})",
                    self.name
                )
            }
            Bound::Below(limit) => write!(f, "{tag} {}: {value} (limit {limit:e})", self.name),
            Bound::Holds => write!(f, "{tag} {}: {} violations", self.name, self.value),
        }
    }
}

/// Output of a run. Tables are written as `<name>.csv`, files verbatim.
#[derive(Debug, Clone)]
pub struct Report {
    pub experiment: Experiment,
    pub provenance: Provenance,
    pub summary: Vec<String>,
    pub tables: Vec<(String, Table)>,
    pub files: Vec<(String, Vec<u8>)>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(cfg: &RunConfig) -> Self {
        Self {
            experiment: cfg.experiment,
            provenance: Provenance::of(cfg),
            summary: Vec::new(),
            tables: Vec::new(),
            files: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Human-readable summary: provenance, notes, then one line per check.
    pub fn text(&self) -> String {
        let mut s = format!(
            "# {} experiment={}\n",
            self.provenance.line(),
            self.experiment
        );
        for line in &self.summary {
            s.push_str(line);
            s.push('\n');
        }
        for c in &self.checks {
            s.push_str(&c.to_string());
            s.push('\n');
        }
        s
    }

    /// Writes every artifact under `dir`; returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut out = Vec::new();
        for (name, t) in &self.tables {
            let p = dir.join(format!("{name}.csv"));
            t.write(&p, &self.provenance)?;
            out.push(p);
        }
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            fs::write(&p, bytes).with_context(|| format!("writing {}", p.display()))?;
            out.push(p);
        }
        let p = dir.join(format!("{}_summary.txt", self.experiment));
        fs::write(&p, self.text()).with_context(|| format!("writing {}", p.display()))?;
        out.push(p);
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub threads: Option<usize>,
}

/// Validates the config, then runs its experiment.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<Report> {
    let diags = validate(cfg);
    if has_errors(&diags) {
        let lines: Vec<String> = diags
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .map(ToString::to_string)
            .collect();
        bail!("invalid config:\n  {}", lines.join("\n  "));
    }
    let pool = pool(opts.threads)?;
    let mut report = match cfg.experiment {
        Experiment::Figures => figures(cfg),
        Experiment::Kpz => kpz(cfg, &pool),
        Experiment::Boundary => boundary(cfg, &pool),
        Experiment::Passage => passage(cfg, &pool),
        Experiment::Moments => moments(cfg, &pool),
        Experiment::Rooted => rooted(cfg, &pool),
    }?;
    let warnings: Vec<String> = diags.iter().map(ToString::to_string).collect();
    report.summary.splice(0..0, warnings);
    Ok(report)
}

fn gamma_tag(g: f64) -> String {
    format!("g{g}")
}

/// Violations of the tiling rules: leaves cover every lattice cell exactly
/// once, masses add up, each non-forced leaf has mass below `delta`, each
/// parent at least `delta`, and forced leaves sit at lattice scale.
pub fn tiling_violations(t: &BoxTiling) -> usize {
    let depth = t.depth();
    let n = 1usize << depth;
    let mut cover = vec![0u8; n * n];
    let mut bad = 0;
    let mut mass = 0.0;
    for leaf in t.leaves() {
        let sq = leaf.square;
        let sh = depth - sq.level as usize;
        let (x0, y0, w) = ((sq.ix as usize) << sh, (sq.iy as usize) << sh, 1usize << sh);
        for j in y0..y0 + w {
            for c in &mut cover[j * n + x0..j * n + x0 + w] {
                *c = c.saturating_add(1);
            }
        }
        mass += leaf.mass;
        if leaf.forced {
            bad += usize::from(sq.level as usize != depth || leaf.mass < t.delta());
        } else {
            bad += usize::from(!(leaf.mass < t.delta()));
        }
        if let Some(p) = sq.parent() {
            bad += usize::from(!(t.mass(&p) >= t.delta()));
        }
    }
    bad += cover.iter().filter(|&&c| c != 1).count();
    let total = t.pyramid().total();
    bad += usize::from((mass - total).abs() > 1e-9 * total);
    bad
}

fn tiling_table(t: &BoxTiling) -> Table {
    let mut tab = Table::new(&["x0", "y0", "size", "mass", "forced"]);
    for leaf in t.leaves() {
        let c = leaf.square.corner(t.side());
        tab.push(vec![
            c.x.into(),
            c.y.into(),
            leaf.square.size(t.side()).into(),
            leaf.mass.into(),
            leaf.forced.into(),
        ]);
    }
    tab
}

fn figures(cfg: &RunConfig) -> Result<Report> {
    let mut r = Report::new(cfg);
    let spec = cfg.spec()?;
    let field = GffSampler::new(spec)?.sample(member_seed(cfg.seed, 0));
    let style = Style {
        stroke: cfg.figure.stroke,
        color_by_depth: cfg.figure.color_by_depth,
        size: cfg.figure.pixels,
    };
    let mut index = Table::new(&[
        "gamma",
        "delta_exp",
        "leaves",
        "max_level",
        "forced_leaves",
        "forced_mass_fraction",
    ]);
    for &g in &cfg.gammas {
        let cells = build_measure_discrete(&field, g)?.cell_masses();
        for &e in &cfg.delta_exps {
            let total: f64 = lqg_core::stats::pairwise_sum(&cells);
            let t = BoxTiling::build(&cells, spec.n(), spec.side(), 0.5f64.powi(e as i32) * total)?;
            let name = format!("tiling_{}_d{e}", gamma_tag(g));
            let max_level = t.leaves().iter().map(|l| l.square.level).max().unwrap_or(0);
            index.push(vec![
                g.into(),
                (e as usize).into(),
                t.leaves().len().into(),
                (max_level as usize).into(),
                t.forced_count().into(),
                (t.forced_mass() / total).into(),
            ]);
            r.checks.push(Check::holds(
                format!("tiling rules gamma={g} delta=2^-{e}"),
                tiling_violations(&t),
            ));
            let title = format!("(mu, delta) boxes, gamma = {g}, delta = 2^-{e} of the total mass");
            r.files.push((
                format!("{name}.svg"),
                tiling_svg(&t, &style, &r.provenance, &title).into_bytes(),
            ));
            if cfg.png {
                let px = tiling_raster(&t, &style);
                r.files.push((
                    format!("{name}.png"),
                    encode_png(style.size, &px, &r.provenance)?,
                ));
            }
            r.tables.push((name, tiling_table(&t)));
            r.summary.push(format!(
                "gamma {g}, delta 2^-{e}: {} leaves, {} forced",
                t.leaves().len(),
                t.forced_count()
            ));
        }
    }
    r.tables.insert(0, ("figures".into(), index));
    Ok(r)
}

/// Tolerance on the fitted exponent: wider at large gamma, where the
/// heavier tails slow convergence.
pub fn kpz_tolerance(gamma: f64) -> f64 {
    if gamma > 1.25 {
        0.10
    } else {
        0.07
    }
}

fn interior_set(name: &str) -> Result<SetKind> {
    Ok(match name {
        "segment" => SetKind::Segment,
        "points" => SetKind::PointSet,
        "cantor" => SetKind::CantorDust,
        other => bail!("set: unknown test set `{other}`"),
    })
}

fn fit_row(fit: &QuantumFit, samples: &[SampleBoxes]) -> Vec<Cell> {
    let forced: usize = samples.iter().map(|s| s.forced_hits).sum();
    let frac = samples
        .iter()
        .map(|s| s.forced_fraction)
        .fold(0.0, f64::max);
    vec![
        fit.delta_mass.slope.into(),
        fit.delta_mass.stderr.into(),
        fit.jackknife_mass.into(),
        fit.delta_count.slope.into(),
        fit.jackknife_count.into(),
        forced.into(),
        frac.into(),
        fit.samples.into(),
    ]
}

const FIT_COLUMNS: [&str; 8] = [
    "delta_hat",
    "ols_stderr",
    "jackknife_stderr",
    "count_slope",
    "count_jackknife_stderr",
    "forced_hits",
    "max_forced_mass_fraction",
    "samples",
];

fn scales_rows(tab: &mut Table, g: f64, fit: &QuantumFit) {
    for k in 0..fit.rel_deltas.len() {
        tab.push(vec![
            g.into(),
            fit.rel_deltas[k].into(),
            fit.mean_mass[k].into(),
            fit.mean_count[k].into(),
        ]);
    }
}

fn kpz(cfg: &RunConfig, pool: &ThreadPool) -> Result<Report> {
    let mut r = Report::new(cfg);
    let spec = cfg.spec()?;
    let sampler = GffSampler::new(spec)?;
    let set = interior_set(&cfg.set)?;
    let mut cols = vec!["gamma", "set", "x", "target", "tolerance"];
    cols.extend(FIT_COLUMNS);
    let mut tab = Table::new(&cols);
    let mut scales = Table::new(&["gamma", "rel_delta", "mean_mass_fraction", "mean_count"]);
    for &g in &cfg.gammas {
        let exp = InteriorExperiment {
            spec,
            gamma: g,
            set,
            sets_per_field: cfg.sets_per_field,
            rel_deltas: cfg.rel_deltas(),
        };
        exp.validate()?;
        let samples = try_map_indexed(pool, cfg.samples, |k| {
            Ok(exp.trial_with(&sampler, member_seed(cfg.seed, k as u64))?)
        })?;
        let fit = fit_quantum(&exp.rel_deltas, &samples)?;
        let target = exp.target()?;
        let tol = kpz_tolerance(g);
        let mut row: Vec<Cell> = vec![
            g.into(),
            cfg.set.as_str().into(),
            exp.x().into(),
            target.into(),
            tol.into(),
        ];
        row.extend(fit_row(&fit, &samples));
        tab.push(row);
        scales_rows(&mut scales, g, &fit);
        r.summary.push(format!(
            "gamma {g}: Delta = {:.4} ± {:.4} (target {target:.4}), count slope {:.4}",
            fit.delta_mass.slope, fit.jackknife_mass, fit.delta_count.slope
        ));
        r.checks.push(Check::near(
            format!("kpz Delta gamma={g}"),
            fit.delta_mass.slope,
            target,
            tol,
        ));
    }
    r.tables.push(("kpz".into(), tab));
    r.tables.push(("kpz_scales".into(), scales));
    Ok(r)
}

/// Sample variance and its standard error `var sqrt(2/(m-1))`.
fn var_se(v: &[f64]) -> (f64, f64) {
    let s = variance(v);
    (s, s * (2.0 / (v.len() as f64 - 1.0)).sqrt())
}

/// Semicircle variance slope of the boundary field at the edge midpoint
/// against `-log eps`, for `eps = L 2^{-3}` down to four lattice spacings.
pub struct VarianceSlope {
    pub eps: Vec<f64>,
    pub var: Vec<(f64, f64)>,
    pub exact: Vec<f64>,
    pub slope: f64,
    pub exact_slope: f64,
}

pub fn boundary_variance_slope(
    bc: BoundaryCondition,
    n: usize,
    side: f64,
    fields: usize,
    seed: u64,
    pool: &ThreadPool,
) -> Result<VarianceSlope> {
    let spec = DomainSpec::new(bc.kind(), n, side)?;
    let sampler = GffSampler::new(spec)?;
    let z = Point::new(0.5 * side, 0.0);
    let levels = 3..=(n.trailing_zeros() as i32 - 2);
    let eps: Vec<f64> = levels.map(|k| side * 0.5f64.powi(k)).collect();
    let ws: Vec<Vec<(usize, f64)>> = eps
        .iter()
        .map(|&e| semicircle_weights(&spec, z, e))
        .collect::<Result<_, _>>()?;
    let pairs = fields.div_ceil(2);
    let rows = try_map_indexed(pool, pairs, |k| {
        let (a, b) = sampler.sample_pair(member_seed(seed, k as u64));
        Ok([&a, &b].map(|f| {
            ws.iter()
                .map(|w| apply_weights(w, f.values()))
                .collect::<Vec<f64>>()
        }))
    })?;
    let var: Vec<(f64, f64)> = (0..eps.len())
        .map(|j| {
            var_se(
                &rows
                    .iter()
                    .flat_map(|p| [p[0][j], p[1][j]])
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let exact: Vec<f64> = ws
        .iter()
        .map(|w| sampler.functional_covariance(w, w))
        .collect();
    let xs: Vec<f64> = eps.iter().map(|e| -e.ln()).collect();
    let slope = ols(&xs, &var.iter().map(|v| v.0).collect::<Vec<_>>()).slope;
    let exact_slope = ols(&xs, &exact).slope;
    Ok(VarianceSlope {
        eps,
        var,
        exact,
        slope,
        exact_slope,
    })
}

fn boundary(cfg: &RunConfig, pool: &ThreadPool) -> Result<Report> {
    let mut r = Report::new(cfg);
    let spec = cfg.spec()?;
    let bc = BoundaryCondition::from_name(&cfg.bc)?;
    let set = BoundarySetKind::from_name(&cfg.set)
        .with_context(|| format!("set: unknown `{}`", cfg.set))?;
    let aux = &cfg.boundary;

    let vs = boundary_variance_slope(
        bc,
        aux.variance_n,
        spec.side(),
        aux.variance_samples,
        cfg.seed,
        pool,
    )?;
    let mut vt = Table::new(&["eps", "var", "stderr", "exact_var"]);
    for (k, &e) in vs.eps.iter().enumerate() {
        vt.push(vec![
            e.into(),
            vs.var[k].0.into(),
            vs.var[k].1.into(),
            vs.exact[k].into(),
        ]);
    }
    r.tables.push(("boundary_variance".into(), vt));
    r.summary.push(format!(
        "semicircle variance slope {:.4} (exact discrete {:.4})",
        vs.slope, vs.exact_slope
    ));
    r.checks
        .push(Check::near("boundary variance slope", vs.slope, 2.0, 0.2));

    let sampler = GffSampler::new(spec)?;
    let mut cols = vec!["gamma", "bc", "set", "x", "target", "tolerance"];
    cols.extend(FIT_COLUMNS);
    let mut tab = Table::new(&cols);
    let mut scales = Table::new(&["gamma", "rel_delta", "mean_mass_fraction", "mean_count"]);
    let mut stab = Table::new(&["gamma", "eps", "mean_middle_mass", "stderr"]);
    let (lo, hi) = (0.25 * spec.side(), 0.75 * spec.side());
    for &g in &cfg.gammas {
        let exp = BoundaryExperiment {
            bc,
            n: spec.n(),
            side: spec.side(),
            gamma: g,
            eps_cells: aux.eps_cells,
            set,
            sets_per_field: cfg.sets_per_field,
            rel_deltas: cfg.rel_deltas(),
        };
        exp.validate()?;
        let a = spec.spacing();
        let trials = try_map_indexed(pool, cfg.samples, |k| {
            let seed = member_seed(cfg.seed, k as u64);
            let field = sampler.sample(seed);
            let mu = build_boundary_measure(&field, g, exp.eps_cells * a)?;
            let boxes =
                boundary_sample_boxes(mu.masses(), exp.side, &exp.rel_deltas, &exp.sets(seed)?)?;
            let middle = aux
                .stability_factors
                .iter()
                .map(|&f| {
                    Ok(build_boundary_measure(&field, g, f * exp.eps_cells * a)?
                        .mass_between(lo, hi))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok((boxes, middle))
        })?;
        let (boxes, middle): (Vec<SampleBoxes>, Vec<Vec<f64>>) = trials.into_iter().unzip();
        let fit = fit_quantum(&exp.rel_deltas, &boxes)?;
        let target = exp.target()?;
        let mut row: Vec<Cell> = vec![
            g.into(),
            bc.name().into(),
            set.name().into(),
            set.exponent().into(),
            target.into(),
            0.10.into(),
        ];
        row.extend(fit_row(&fit, &boxes));
        tab.push(row);
        scales_rows(&mut scales, g, &fit);
        r.summary.push(format!(
            "gamma {g}: boundary Delta = {:.4} ± {:.4} (target {target:.4})",
            fit.delta_mass.slope, fit.jackknife_mass
        ));
        r.checks.push(Check::near(
            format!("boundary Delta gamma={g}"),
            fit.delta_mass.slope,
            target,
            0.10,
        ));

        let means: Vec<f64> = (0..aux.stability_factors.len())
            .map(|j| {
                let col: Vec<f64> = middle.iter().map(|m| m[j]).collect();
                stab.push(vec![
                    g.into(),
                    (aux.stability_factors[j] * exp.eps_cells * a).into(),
                    mean(&col).into(),
                    std_error(&col).into(),
                ]);
                mean(&col)
            })
            .collect();
        let drift = means
            .iter()
            .map(|m| (m / means[0] - 1.0).abs())
            .fold(0.0, f64::max);
        r.summary.push(format!(
            "gamma {g}: middle-half boundary mass over eps {means:?}, drift {drift:.4}"
        ));
        r.checks.push(Check::below(
            format!("boundary measure eps drift gamma={g}"),
            drift,
            0.10,
        ));
    }
    r.tables.push(("boundary".into(), tab));
    r.tables.push(("boundary_scales".into(), scales));
    r.tables.push(("boundary_stability".into(), stab));
    Ok(r)
}

/// Draws per RNG block; fixed so results do not depend on the pool size.
const PASSAGE_CHUNK: usize = 10_000;

fn chunked_draws(
    pool: &ThreadPool,
    total: usize,
    key: StreamKey,
    draw: impl Fn(&mut lqg_core::rng::StreamRng) -> f64 + Sync + Send,
) -> Vec<f64> {
    let chunks = total.div_ceil(PASSAGE_CHUNK);
    crate::ensemble::map_indexed(pool, chunks, |c| {
        let mut rng = key.block(c as u64);
        let len = PASSAGE_CHUNK.min(total - c * PASSAGE_CHUNK);
        (0..len).map(|_| draw(&mut rng)).collect::<Vec<f64>>()
    })
    .concat()
}

pub fn passage_problem(cfg: &RunConfig) -> Result<PassageProblem> {
    let p = &cfg.passage;
    let a = match p.a {
        Some(a) => a,
        None => {
            let g = *cfg.gammas.first().context("gammas: empty")?;
            2.0 / g - 0.5 * g
        }
    };
    Ok(PassageProblem::new(a, p.level, p.x)?)
}

fn passage(cfg: &RunConfig, pool: &ThreadPool) -> Result<Report> {
    let mut r = Report::new(cfg);
    let p = passage_problem(cfg)?;
    let exact = ExactSampler::new(&p);
    let mut t_exact = chunked_draws(
        pool,
        cfg.samples,
        StreamKey::new(cfg.seed, Purpose::Passage, 0),
        |rng| exact.sample(rng),
    );
    let dt = cfg.passage.dt;
    let mut t_euler = chunked_draws(
        pool,
        cfg.passage.euler_samples,
        StreamKey::new(cfg.seed, Purpose::EulerWalk, 0),
        |rng| euler_passage(&p, dt, rng),
    );
    let m = mean(&t_exact);
    let laplace: Vec<f64> = t_exact.iter().map(|t| (-2.0 * p.x * t).exp()).collect();
    let lap = mean(&laplace);
    let lap_want = laplace_expected(&p);
    let ks_two = ks_two_sample(&mut t_exact.clone(), &mut t_euler);
    let ks_one = ks_statistic(&mut t_exact, |t| first_passage_cdf(t, &p));
    let norm = normalization(&p, 1e-10);

    let mut tab = Table::new(&["quantity", "value", "reference", "stderr", "samples"]);
    tab.push(vec![
        "mean_T".into(),
        m.into(),
        p.mean().into(),
        std_error(&t_exact).into(),
        t_exact.len().into(),
    ]);
    tab.push(vec![
        "laplace".into(),
        lap.into(),
        lap_want.into(),
        std_error(&laplace).into(),
        laplace.len().into(),
    ]);
    tab.push(vec![
        "ks_exact_vs_cdf".into(),
        ks_one.into(),
        ks_pvalue(ks_one, t_exact.len()).into(),
        0.0.into(),
        t_exact.len().into(),
    ]);
    tab.push(vec![
        "ks_exact_vs_euler".into(),
        ks_two.into(),
        dt.into(),
        0.0.into(),
        t_euler.len().into(),
    ]);
    tab.push(vec![
        "density_integral".into(),
        norm.integral.into(),
        1.0.into(),
        norm.quadrature_error.into(),
        0usize.into(),
    ]);
    r.tables.push(("passage".into(), tab));
    r.summary.push(format!(
        "a = {}, A = {}, x = {}: mean {m:.5} vs {:.5}, Laplace {lap:.6} vs {lap_want:.6}, KS(exact, Euler) {ks_two:.5}",
        p.a,
        p.level,
        p.x,
        p.mean()
    ));
    r.checks.push(Check::below(
        "passage mean relative error",
        (m / p.mean() - 1.0).abs(),
        0.01,
    ));
    r.checks.push(Check::below(
        "passage Laplace relative error",
        (lap / lap_want - 1.0).abs(),
        0.01,
    ));
    r.checks
        .push(Check::below("passage KS exact vs Euler", ks_two, 0.01));
    r.checks.push(Check::below(
        "passage density normalization",
        (norm.integral - 1.0).abs(),
        1e-8,
    ));
    Ok(r)
}

/// Interior test points of the first-moment panel, as fractions of the side.
pub const MOMENT_PANEL: [(f64, f64); 3] = [(0.5, 0.5), (0.3, 0.4), (0.65, 0.7)];

fn moments(cfg: &RunConfig, pool: &ThreadPool) -> Result<Report> {
    let mut r = Report::new(cfg);
    let spec = cfg.spec()?;
    let l = spec.side();
    let sampler = GffSampler::new(spec)?;
    let zs: Vec<Point> = MOMENT_PANEL
        .iter()
        .map(|&(x, y)| Point::new(x * l, y * l))
        .collect();
    let mut kernels = Vec::new();
    for &z in &zs {
        for &e in &cfg.eps {
            kernels.push((z, e, CircleKernel::new(&spec, z, e)?.weights(&spec)));
        }
    }
    let pairs = cfg.samples.div_ceil(2);
    let rows = try_map_indexed(pool, pairs, |k| {
        let (a, b) = sampler.sample_pair(member_seed(cfg.seed, k as u64));
        Ok([&a, &b].map(|f| {
            kernels
                .iter()
                .map(|(_, _, w)| apply_weights(w, f.values()))
                .collect::<Vec<f64>>()
        }))
    })?;
    let mut tab = Table::new(&[
        "z_x",
        "z_y",
        "eps",
        "gamma",
        "estimate",
        "stderr",
        "target",
        "ratio",
        "exact_variance_ratio",
    ]);
    let log_cs: Vec<f64> = zs
        .iter()
        .map(|&z| log_conformal_radius_at(&spec, z, 256))
        .collect::<Result<_, _>>()?;
    for (j, (z, e, w)) in kernels.iter().enumerate() {
        let h: Vec<f64> = rows.iter().flat_map(|p| [p[0][j], p[1][j]]).collect();
        let log_c = log_cs[j / cfg.eps.len()];
        let exact_var = sampler.functional_covariance(w, w);
        for &g in &cfg.gammas {
            let half = 0.5 * g * g;
            let pre = e.powf(half);
            // h and -h have the same law
            let v: Vec<f64> = h.iter().map(|x| pre * (g * x).cosh()).collect();
            let (est, se) = (mean(&v), std_error(&v));
            let target = (half * log_c).exp();
            let exact = (half * e.ln() + half * exact_var).exp() / target;
            tab.push(vec![
                z.x.into(),
                z.y.into(),
                (*e).into(),
                g.into(),
                est.into(),
                se.into(),
                target.into(),
                (est / target).into(),
                exact.into(),
            ]);
            r.checks.push(Check::near(
                format!("first moment z=({},{}) eps={e} gamma={g}", z.x, z.y),
                est / target,
                1.0,
                0.05,
            ));
        }
    }
    r.tables.push(("first_moment".into(), tab));

    let tp = two_point(cfg, spec.side(), pool)?;
    let mut t2 = Table::new(&[
        "gamma",
        "r",
        "log_pair_moment",
        "log_pair_moment_exact",
        "var_sum",
        "var_sum_stderr",
    ]);
    for &g in &cfg.gammas {
        let log_m = |v: f64| g * g * cfg.pairs.eps.ln() + 0.5 * g * g * v;
        for (k, &sep) in tp.seps.iter().enumerate() {
            t2.push(vec![
                g.into(),
                sep.into(),
                log_m(tp.var[k].0).into(),
                log_m(tp.exact[k]).into(),
                tp.var[k].0.into(),
                tp.var[k].1.into(),
            ]);
        }
        if g > 0.0 {
            let (s, se_) = (g * g * tp.slope, g * g * tp.exact_slope);
            r.summary.push(format!(
                "gamma {g}: two-point slope {s:.4} (exact discrete {se_:.4}, target {:.4})",
                -g * g
            ));
            r.checks.push(Check::near(
                format!("two-point slope gamma={g}"),
                s,
                -g * g,
                0.15 * g * g,
            ));
        }
    }
    r.tables.push(("two_point".into(), t2));
    Ok(r)
}

/// `Var(h_eps(y) + h_eps(z))` for centred pairs at separations `r`; the log
/// pair moment is `gamma^2 log eps + (gamma^2/2)` times it, so its slope in
/// `log r` is `gamma^2` times the stored one.
struct TwoPoint {
    seps: Vec<f64>,
    var: Vec<(f64, f64)>,
    exact: Vec<f64>,
    slope: f64,
    exact_slope: f64,
}

fn two_point(cfg: &RunConfig, side: f64, pool: &ThreadPool) -> Result<TwoPoint> {
    let pc = &cfg.pairs;
    let spec = DomainSpec::new(DomainKind::DirichletSquare, pc.n, side)?;
    let sampler = GffSampler::new(spec)?;
    let c = spec.center();
    let seps: Vec<f64> = pc
        .sep_exps
        .iter()
        .map(|&e| side * 0.5f64.powi(e as i32))
        .collect();
    let ws: Vec<[Vec<(usize, f64)>; 2]> = seps
        .iter()
        .map(|&s| {
            let y = Point::new(c.x - 0.5 * s, c.y);
            let z = Point::new(c.x + 0.5 * s, c.y);
            Ok([
                CircleKernel::new(&spec, y, pc.eps)?.weights(&spec),
                CircleKernel::new(&spec, z, pc.eps)?.weights(&spec),
            ])
        })
        .collect::<Result<_>>()?;
    let seed = member_seed(cfg.seed, u64::MAX);
    let rows = try_map_indexed(pool, pc.samples.div_ceil(2), |k| {
        let (a, b) = sampler.sample_pair(member_seed(seed, k as u64));
        Ok([&a, &b].map(|f| {
            ws.iter()
                .map(|[wy, wz]| apply_weights(wy, f.values()) + apply_weights(wz, f.values()))
                .collect::<Vec<_>>()
        }))
    })?;
    let var: Vec<(f64, f64)> = (0..seps.len())
        .map(|j| {
            var_se(
                &rows
                    .iter()
                    .flat_map(|p| [p[0][j], p[1][j]])
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let exact: Vec<f64> = ws
        .iter()
        .map(|[wy, wz]| {
            sampler.functional_covariance(wy, wy)
                + sampler.functional_covariance(wz, wz)
                + 2.0 * sampler.functional_covariance(wy, wz)
        })
        .collect();
    let xs: Vec<f64> = seps.iter().map(|s| s.ln()).collect();
    let half = |v: Vec<f64>| v.into_iter().map(|x| 0.5 * x).collect::<Vec<_>>();
    let slope = ols(&xs, &half(var.iter().map(|v| v.0).collect())).slope;
    let exact_slope = ols(&xs, &half(exact.clone())).slope;
    Ok(TwoPoint {
        seps,
        var,
        exact,
        slope,
        exact_slope,
    })
}

/// Roots are drawn from the square inset by this fraction of the side.
pub const ROOT_MARGIN: f64 = 0.3;

/// Number of `t` values reported along the ladder, ending at the configured `t`.
const ROOTED_STEPS: usize = 6;

/// Bins per side of the root-location histogram.
const ROOT_BINS: usize = 16;

fn rooted(cfg: &RunConfig, pool: &ThreadPool) -> Result<Report> {
    let mut r = Report::new(cfg);
    let spec = cfg.spec()?;
    let l = spec.side();
    let eps0 = *cfg.eps.first().context("eps: eps0 missing")?;
    let support = Shape::Rect {
        x0: ROOT_MARGIN * l,
        y0: ROOT_MARGIN * l,
        x1: (1.0 - ROOT_MARGIN) * l,
        y1: (1.0 - ROOT_MARGIN) * l,
    };
    let gff = GffSampler::new(spec)?;
    let ts: Vec<f64> = (1..=ROOTED_STEPS)
        .map(|j| cfg.rooted.t * j as f64 / ROOTED_STEPS as f64)
        .collect();
    let mut tab = Table::new(&[
        "gamma",
        "t",
        "eps",
        "mean_slope",
        "stderr",
        "increment_slope",
        "increment_stderr",
        "control_mean",
        "control_stderr",
    ]);
    let mut heat = Table::new(&["gamma", "x0", "y0", "bin_size", "count"]);
    let (nx, _) = spec.dims();
    for &g in &cfg.gammas {
        let rs = RootedSampler::with_support(&spec, g, Some(support))?;
        let rows = try_map_indexed(pool, cfg.samples.div_ceil(2), |k| {
            let seed = member_seed(cfg.seed, k as u64);
            let (a, b) = gff.sample_pair(seed);
            let mut out = Vec::with_capacity(2);
            for (i, f) in [a, b].into_iter().enumerate() {
                let v = rs.root_law().0[rs.sample_root(member_seed(seed, i as u64))];
                let z = spec.position(v % nx, v / nx);
                let mut ws = vec![CircleKernel::new(&spec, z, eps0)?.weights(&spec)];
                for &t in &ts {
                    ws.push(CircleKernel::new(&spec, z, eps0 * (-t).exp())?.weights(&spec));
                }
                let refs: Vec<&[(usize, f64)]> = ws.iter().map(|w| w.as_slice()).collect();
                let shift = rs.shift_functionals(z, &refs)?;
                let plain: Vec<f64> = ws.iter().map(|w| apply_weights(w, f.values())).collect();
                let h0 = plain[0] + shift[0];
                let mut vals = Vec::with_capacity(3 * ts.len());
                for (j, &t) in ts.iter().enumerate() {
                    let le = t - eps0.ln();
                    let h = plain[j + 1] + shift[j + 1];
                    vals.extend([h / le, (h - h0) / t, plain[j + 1] / le]);
                }
                out.push((z, vals));
            }
            Ok(out)
        })?;
        let rows: Vec<(Point, Vec<f64>)> = rows.into_iter().flatten().take(cfg.samples).collect();
        for (j, &t) in ts.iter().enumerate() {
            let col = |c: usize| rows.iter().map(|(_, v)| v[3 * j + c]).collect::<Vec<f64>>();
            let (ratio, inc, control) = (col(0), col(1), col(2));
            let (m, se) = (mean(&ratio), std_error(&ratio));
            let (m0, se0) = (mean(&control), std_error(&control));
            tab.push(vec![
                g.into(),
                t.into(),
                (eps0 * (-t).exp()).into(),
                m.into(),
                se.into(),
                mean(&inc).into(),
                std_error(&inc).into(),
                m0.into(),
                se0.into(),
            ]);
            if j + 1 == ts.len() {
                r.summary.push(format!(
                    "gamma {g}, t = {t:.4}: h_eps/log(1/eps) {m:.4} ± {se:.4}, increment slope {:.4}, control {m0:.4} ± {se0:.4}",
                    mean(&inc)
                ));
                r.checks.push(Check::below(
                    format!("rooted slope relative error gamma={g}"),
                    (m / g - 1.0).abs(),
                    0.10,
                ));
                r.checks.push(Check::below(
                    format!("unrooted control gamma={g}"),
                    m0.abs() / se0,
                    4.0,
                ));
            }
        }
        let mut counts = vec![0usize; ROOT_BINS * ROOT_BINS];
        let bin = l / ROOT_BINS as f64;
        for (z, _) in &rows {
            let i = ((z.x / bin) as usize).min(ROOT_BINS - 1);
            let j = ((z.y / bin) as usize).min(ROOT_BINS - 1);
            counts[j * ROOT_BINS + i] += 1;
        }
        for (k, &c) in counts.iter().enumerate() {
            let (i, j) = (k % ROOT_BINS, k / ROOT_BINS);
            heat.push(vec![
                g.into(),
                (i as f64 * bin).into(),
                (j as f64 * bin).into(),
                bin.into(),
                c.into(),
            ]);
        }
    }
    r.tables.push(("rooted".into(), tab));
    r.tables.push(("rooted_roots".into(), heat));
    Ok(r)
}
