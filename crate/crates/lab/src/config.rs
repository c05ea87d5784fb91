//! Run configuration: presets per experiment, TOML files and flag overrides.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lqg_core::{DomainKind, DomainSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LQG_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Figures,
    Kpz,
    Boundary,
    Passage,
    Moments,
    Rooted,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Figures,
        Experiment::Kpz,
        Experiment::Boundary,
        Experiment::Passage,
        Experiment::Moments,
        Experiment::Rooted,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Figures => "figures",
            Experiment::Kpz => "kpz",
            Experiment::Boundary => "boundary",
            Experiment::Passage => "passage",
            Experiment::Moments => "moments",
            Experiment::Rooted => "rooted",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: String,
    pub n: usize,
    pub side: f64,
}

impl DomainConfig {
    pub fn spec(&self) -> Result<DomainSpec> {
        let kind = DomainKind::from_name(&self.kind)
            .with_context(|| format!("domain.kind: unknown domain `{}`", self.kind))?;
        DomainSpec::new(kind, self.n, self.side).context("domain")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PassageConfig {
    /// Drift `a`; when absent it is `Q - gamma` for the first gamma.
    pub a: Option<f64>,
    pub level: f64,
    pub x: f64,
    pub dt: f64,
    /// Draws for the Euler comparison.
    pub euler_samples: usize,
}

/// Two-point experiment of the moments run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub n: usize,
    pub eps: f64,
    /// Separations `2^{-e}`.
    pub sep_exps: Vec<u32>,
    pub samples: usize,
}

/// Side checks of the boundary run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryAux {
    /// Regularization radius of the point experiment, in lattice units.
    pub eps_cells: f64,
    /// Grid and field count for the semicircle variance slope.
    pub variance_n: usize,
    pub variance_samples: usize,
    /// Radii `eps_cells * k` compared for the stability drift.
    pub stability_factors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RootedConfig {
    /// Circle-average time `t` with `eps = eps0 e^{-t}`.
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigureConfig {
    pub stroke: f64,
    pub color_by_depth: bool,
    pub pixels: u32,
}

/// Everything a run depends on. Serializes to TOML; the hash of that text
/// identifies the run in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub seed: u64,
    /// Field samples (or passage draws) per gamma.
    pub samples: usize,
    pub gammas: Vec<f64>,
    /// Relative thresholds `delta = 2^{-e} * total`.
    pub delta_exps: Vec<u32>,
    /// Regularization radii; empty means the experiment default.
    pub eps: Vec<f64>,
    /// Test set family: `segment`, `cantor`, `points`.
    pub set: String,
    pub sets_per_field: usize,
    /// Boundary condition for the boundary experiment.
    pub bc: String,
    pub png: bool,
    pub domain: DomainConfig,
    pub passage: PassageConfig,
    pub pairs: PairConfig,
    pub boundary: BoundaryAux,
    pub rooted: RootedConfig,
    pub figure: FigureConfig,
}

impl RunConfig {
    /// Defaults for an experiment, matching the reference runs.
    pub fn preset(experiment: Experiment) -> Self {
        let mut c = RunConfig {
            experiment,
            seed: 1,
            samples: 50,
            gammas: vec![0.5, 1.0, 1.5],
            delta_exps: (8..=14).collect(),
            eps: Vec::new(),
            set: "segment".into(),
            sets_per_field: 4,
            bc: "mixed".into(),
            png: false,
            domain: DomainConfig {
                kind: "torus".into(),
                n: 1024,
                side: 1.0,
            },
            passage: PassageConfig {
                a: Some(1.5),
                level: 3.0,
                x: 0.5,
                dt: 1e-4,
                euler_samples: 100_000,
            },
            pairs: PairConfig {
                n: 256,
                eps: 1.0 / 64.0,
                sep_exps: vec![2, 3, 4, 5],
                samples: 8000,
            },
            boundary: BoundaryAux {
                eps_cells: 2.0,
                variance_n: 256,
                variance_samples: 10_000,
                stability_factors: vec![1.0, 2.0, 4.0],
            },
            rooted: RootedConfig { t: 64f64.ln() },
            figure: FigureConfig {
                stroke: 0.5,
                color_by_depth: false,
                pixels: 1024,
            },
        };
        match experiment {
            Experiment::Figures => {
                c.samples = 1;
                c.delta_exps = vec![12];
            }
            Experiment::Kpz => {}
            Experiment::Boundary => {
                c.gammas = vec![1.0];
                c.samples = 200;
                c.delta_exps = (2..=6).collect();
                c.set = "points".into();
                c.sets_per_field = 8;
                c.domain = DomainConfig {
                    kind: "mixed_square".into(),
                    n: 512,
                    side: 1.0,
                };
            }
            Experiment::Passage => {
                c.gammas = vec![1.0];
                c.samples = 1_000_000;
            }
            Experiment::Moments => {
                c.gammas = vec![0.5, 1.0];
                c.samples = 80_000;
                c.eps = vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0];
                c.domain = DomainConfig {
                    kind: "dirichlet_square".into(),
                    n: 128,
                    side: 1.0,
                };
            }
            Experiment::Rooted => {
                c.gammas = vec![1.0];
                c.samples = 2000;
                c.eps = vec![0.5];
                c.domain = DomainConfig {
                    kind: "dirichlet_square".into(),
                    n: 1024,
                    side: 2.0,
                };
            }
        }
        c
    }

    /// Preset for the experiment named in `text`, overlaid with the file's
    /// keys. Unknown keys are errors that name the offending field.
    pub fn from_toml(text: &str, experiment: Option<Experiment>) -> Result<Self> {
        let file: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
        let exp = match (experiment, file.get("experiment")) {
            (Some(e), _) => e,
            (None, Some(v)) => {
                let s = v.as_str().context("experiment: expected a string")?;
                Experiment::from_name(s)
                    .with_context(|| format!("experiment: unknown experiment `{s}`"))?
            }
            (None, None) => bail!("experiment: missing"),
        };
        let mut base = toml::Table::try_from(Self::preset(exp)).context("serializing preset")?;
        merge(&mut base, file);
        base.insert("experiment".into(), toml::Value::String(exp.name().into()));
        let cfg: RunConfig = base.try_into().context("config")?;
        Ok(cfg)
    }

    pub fn load(path: &Path, experiment: Option<Experiment>) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text, experiment).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML text.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn spec(&self) -> Result<DomainSpec> {
        self.domain.spec()
    }

    /// Thresholds `2^{-e}` in ladder order.
    pub fn rel_deltas(&self) -> Vec<f64> {
        lqg_core::kpz::threshold_ladder(&self.delta_exps)
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Output directory: explicit flag, else `$LQG_OUT_DIR`, else `lqg-out`.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("lqg-out"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip_through_toml() {
        for e in Experiment::ALL {
            let c = RunConfig::preset(e);
            let back = RunConfig::from_toml(&c.to_toml(), None).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.hash(), c.hash());
        }
    }

    #[test]
    fn file_keys_override_preset() {
        let c = RunConfig::from_toml("experiment = \"kpz\"\nseed = 7\n[domain]\nn = 256\n", None)
            .unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.domain.n, 256);
        assert_eq!(c.domain.kind, "torus");
        assert_ne!(c.hash(), RunConfig::preset(Experiment::Kpz).hash());
    }

    #[test]
    fn errors_name_the_field() {
        let err = RunConfig::from_toml("experiment = \"kpz\"\n[domain]\nn = \"big\"\n", None)
            .unwrap_err();
        assert!(
            format!("{err:#}").contains("domain.n") || format!("{err:#}").contains("n"),
            "{err:#}"
        );
        let err = RunConfig::from_toml("experiment = \"kpz\"\nbogus = 1\n", None).unwrap_err();
        assert!(format!("{err:#}").contains("bogus"), "{err:#}");
    }
}
