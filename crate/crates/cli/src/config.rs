//! Run configuration: optional TOML file, command-line overrides, and the
//! merged result every command consumes.
//!
//! Precedence is command-line flag over config file over built-in default.
//! The config file is versioned (`schema_version = 1`) and rejects unknown
//! keys, so a typo fails loudly instead of silently running defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use fockbound::Tolerances;

use crate::error::{io_err, CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// An inclusive sweep range with a positive step.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub const fn new(start: f64, stop: f64, step: f64) -> Self {
        Self { start, stop, step }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.step > 0.0) {
            return Err(CliError::Input(format!(
                "range {name}: step must be positive (got {})",
                self.step
            )));
        }
        if !(self.stop >= self.start) {
            return Err(CliError::Input(format!(
                "range {name}: stop {} is below start {}",
                self.stop, self.start
            )));
        }
        Ok(())
    }

    /// Grid points start, start+step, …, never exceeding stop. The endpoint
    /// count tolerates float rounding (so 0..1.5 by 0.05, whose ratio is
    /// 29.999…, still has 31 points) but a stop genuinely off the lattice is
    /// not rounded up to.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    dir: Option<PathBuf>,
    svg: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RunSection {
    cutoff: Option<usize>,
    /// Worker threads for sweeps; 0 or absent means one per logical core.
    parallelism: Option<usize>,
}

/// Per-field overrides of [`Tolerances`]; absent fields keep the value the
/// command would use anyway.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct TolSection {
    herm: Option<f64>,
    psd: Option<f64>,
    norm: Option<f64>,
    unitary: Option<f64>,
    trunc: Option<f64>,
    bound: Option<f64>,
}

impl TolSection {
    fn apply(&self, mut base: Tolerances) -> Tolerances {
        if let Some(v) = self.herm {
            base.herm = v;
        }
        if let Some(v) = self.psd {
            base.psd = v;
        }
        if let Some(v) = self.norm {
            base.norm = v;
        }
        if let Some(v) = self.unitary {
            base.unitary = v;
        }
        if let Some(v) = self.trunc {
            base.trunc = v;
        }
        if let Some(v) = self.bound {
            base.bound = v;
        }
        base
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RangesSection {
    alpha: Option<Range>,
    r: Option<Range>,
    nbar: Option<Range>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegionSection {
    b_values: Option<Vec<f64>>,
    nu_max: Option<f64>,
    steps: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntangleSection {
    alpha: Option<f64>,
    strong: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    schema_version: u32,
    #[serde(default)]
    output: OutputSection,
    #[serde(default)]
    run: RunSection,
    #[serde(default)]
    tolerances: TolSection,
    #[serde(default)]
    ranges: RangesSection,
    #[serde(default)]
    region: RegionSection,
    #[serde(default)]
    entangle: EntangleSection,
}

/// Command-line flags shared by every verb; `None` defers to the config
/// file and then to the built-in default.
#[derive(Debug, Clone, Default)]
pub struct CommonArgs {
    pub out: Option<PathBuf>,
    pub cutoff: Option<usize>,
    pub svg: bool,
    pub config: Option<PathBuf>,
}

/// The merged configuration commands actually read.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    pub svg: bool,
    /// Explicit cutoff, if the user gave one; commands fall back to their
    /// own documented defaults otherwise.
    pub cutoff: Option<usize>,
    pub parallelism: usize,
    tol: TolSection,
    pub alpha_range: Range,
    pub r_range: Range,
    pub nbar_range: Range,
    pub region_b: Vec<f64>,
    pub region_nu_max: f64,
    pub region_steps: usize,
    pub entangle_alpha: f64,
    pub entangle_strong: bool,
}

impl RunConfig {
    /// Loads the config file named in `args` (if any) and merges it with the
    /// command-line flags.
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let file = match &args.config {
            Some(path) => Some(load_config_file(path)?),
            None => None,
        };
        let file = file.unwrap_or(ConfigFile {
            schema_version: SCHEMA_VERSION,
            output: OutputSection::default(),
            run: RunSection::default(),
            tolerances: TolSection::default(),
            ranges: RangesSection::default(),
            region: RegionSection::default(),
            entangle: EntangleSection::default(),
        });

        let parallelism = match file.run.parallelism {
            Some(0) | None => std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
            Some(n) => n,
        };

        let cfg = Self {
            out_dir: args
                .out
                .clone()
                .or(file.output.dir)
                .unwrap_or_else(|| PathBuf::from("out")),
            svg: args.svg || file.output.svg.unwrap_or(false),
            cutoff: args.cutoff.or(file.run.cutoff),
            parallelism,
            tol: file.tolerances,
            alpha_range: file.ranges.alpha.unwrap_or(Range::new(0.0, 3.0, 0.05)),
            r_range: file.ranges.r.unwrap_or(Range::new(0.0, 1.5, 0.05)),
            nbar_range: file.ranges.nbar.unwrap_or(Range::new(0.0, 3.0, 0.1)),
            region_b: file
                .region
                .b_values
                .unwrap_or_else(|| vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]),
            region_nu_max: file.region.nu_max.unwrap_or(3.0),
            region_steps: file.region.steps.unwrap_or(61),
            entangle_alpha: file.entangle.alpha.unwrap_or(1.0),
            entangle_strong: file.entangle.strong.unwrap_or(false),
        };

        cfg.alpha_range.validate("alpha")?;
        cfg.r_range.validate("r")?;
        cfg.nbar_range.validate("nbar")?;
        if cfg.region_b.is_empty() {
            return Err(CliError::Input(String::from(
                "region: b_values must not be empty",
            )));
        }
        if cfg.region_steps < 2 || !(cfg.region_nu_max > 0.5) {
            return Err(CliError::Input(format!(
                "region: need steps >= 2 and nu_max > 0.5 (got {} and {})",
                cfg.region_steps, cfg.region_nu_max
            )));
        }
        if cfg.parallelism == 0 {
            return Err(CliError::Input(String::from(
                "run.parallelism resolved to zero workers",
            )));
        }
        Ok(cfg)
    }

    /// Tolerances for a command whose documented default is `base`; config
    /// overrides win field by field.
    pub fn tolerances(&self, base: Tolerances) -> Tolerances {
        self.tol.apply(base)
    }

    /// Creates the output directory (and parents) if needed.
    pub fn ensure_out_dir(&self) -> Result<()> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| io_err("cannot create output directory", &self.out_dir, e))
    }
}

fn load_config_file(path: &Path) -> Result<ConfigFile> {
    let text =
        std::fs::read_to_string(path).map_err(|e| io_err("cannot read config", path, e))?;
    let parsed: ConfigFile = toml::from_str(&text)
        .map_err(|e| CliError::Input(format!("config {}: {e}", path.display())))?;
    if parsed.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "config {}: schema_version {} is not supported (expected {})",
            path.display(),
            parsed.schema_version,
            SCHEMA_VERSION
        )));
    }
    Ok(parsed)
}
