use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use lqg_lab::config::{resolve_out_dir, Experiment, RunConfig};
use lqg_lab::pipelines::{run, RunOptions};
use lqg_lab::validate::{has_errors, validate};

/// Liouville quantum gravity and KPZ numerical experiments.
#[derive(Parser)]
#[command(name = "lqg", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tilings of the discrete measure into (mu, delta) boxes.
    Figures(RunArgs),
    /// Interior KPZ exponent of a test-set family.
    #[command(alias = "kpz-run")]
    Kpz(RunArgs),
    /// Boundary variance slope, measure stability and boundary KPZ exponent.
    #[command(alias = "boundary-run")]
    Boundary(RunArgs),
    /// First-passage times of drifted Brownian motion.
    Passage(RunArgs),
    /// First moment and two-point exponent of the regularized measure.
    Moments(RunArgs),
    /// Thick points of the rooted measure.
    Rooted(RunArgs),
    /// Prints diagnostics for a config without running it.
    Validate {
        /// Experiment whose preset is checked when no config file names one.
        experiment: Option<String>,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args, Default)]
struct RunArgs {
    /// TOML config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Ensemble size (field samples, or draws for passage).
    #[arg(long, visible_alias = "n")]
    samples: Option<usize>,
    /// Lattice cells per side.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    side: Option<f64>,
    /// torus, dirichlet_square, disc_embedded, free_square, mixed_square.
    #[arg(long)]
    domain: Option<String>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<f64>>,
    /// Threshold exponents; `-12` and `12` both mean `2^-12` of the total.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    delta_exp: Option<Vec<i64>>,
    /// Comma-separated radii.
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Test set family: segment, points, cantor.
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    sets_per_field: Option<usize>,
    /// Boundary condition: mixed or free.
    #[arg(long)]
    bc: Option<String>,
    /// Drift of the passage problem.
    #[arg(long)]
    a: Option<f64>,
    /// Level of the passage problem.
    #[arg(long = "A")]
    level: Option<f64>,
    /// Laplace exponent of the passage problem.
    #[arg(long)]
    x: Option<f64>,
    /// Euler time step.
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    euler_samples: Option<usize>,
    /// Tiling stroke width in pixels.
    #[arg(long)]
    stroke: Option<f64>,
    /// Fill tiling boxes by depth.
    #[arg(long)]
    color_by_depth: bool,
    /// Also write PNG rasters.
    #[arg(long)]
    png: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (default: $LQG_OUT_DIR, else ./lqg-out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit nonzero when a tolerance check fails.
    #[arg(long)]
    check: bool,
}

impl RunArgs {
    fn config(&self, exp: Option<Experiment>) -> Result<RunConfig> {
        let mut c = match (&self.config, exp) {
            (Some(p), e) => RunConfig::load(p, e)?,
            (None, Some(e)) => RunConfig::preset(e),
            (None, None) => anyhow::bail!("name an experiment or pass --config"),
        };
        macro_rules! set {
            ($flag:expr, $field:expr) => {
                if let Some(v) = $flag.clone() {
                    $field = v;
                }
            };
        }
        set!(self.seed, c.seed);
        set!(self.samples, c.samples);
        set!(self.grid, c.domain.n);
        set!(self.side, c.domain.side);
        set!(self.domain, c.domain.kind);
        set!(self.gamma, c.gammas);
        set!(self.eps, c.eps);
        set!(self.set, c.set);
        set!(self.sets_per_field, c.sets_per_field);
        set!(self.bc, c.bc);
        set!(self.level, c.passage.level);
        set!(self.x, c.passage.x);
        set!(self.dt, c.passage.dt);
        set!(self.euler_samples, c.passage.euler_samples);
        set!(self.stroke, c.figure.stroke);
        if let Some(a) = self.a {
            c.passage.a = Some(a);
        }
        if let Some(d) = &self.delta_exp {
            c.delta_exps = d.iter().map(|e| e.unsigned_abs() as u32).collect();
        }
        c.png |= self.png;
        c.figure.color_by_depth |= self.color_by_depth;
        Ok(c)
    }
}

fn execute(exp: Experiment, args: &RunArgs) -> Result<ExitCode> {
    let cfg = args.config(Some(exp))?;
    let report = run(
        &cfg,
        &RunOptions {
            threads: args.threads,
        },
    )?;
    let dir = resolve_out_dir(args.out.clone());
    report.write(&dir)?;
    std::fs::write(
        dir.join(format!("{exp}_config.toml")),
        format!("# {}\n{}", report.provenance.line(), cfg.to_toml()),
    )?;
    print!("{}", report.text());
    println!("artifacts in {}", dir.display());
    Ok(if args.check && !report.passed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Figures(a) => execute(Experiment::Figures, a),
        Cmd::Kpz(a) => execute(Experiment::Kpz, a),
        Cmd::Boundary(a) => execute(Experiment::Boundary, a),
        Cmd::Passage(a) => execute(Experiment::Passage, a),
        Cmd::Moments(a) => execute(Experiment::Moments, a),
        Cmd::Rooted(a) => execute(Experiment::Rooted, a),
        Cmd::Validate { experiment, run } => (|| {
            let exp = match experiment {
                Some(s) => Some(
                    Experiment::from_name(s)
                        .ok_or_else(|| anyhow::anyhow!("unknown experiment `{s}`"))?,
                ),
                None => None,
            };
            let diags = validate(&run.config(exp)?);
            for d in &diags {
                println!("{d}");
            }
            if diags.is_empty() {
                println!("ok");
            }
            Ok(if has_errors(&diags) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        })(),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(2)
    })
}
