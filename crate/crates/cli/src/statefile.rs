//! State-file ingestion: a small versioned TOML schema that maps onto the
//! library's `StateSpec`.
//!
//! ```toml
//! schema_version = 1
//! family = "odd-cat"      # vacuum | number | coherent | thermal |
//!                         # squeezed-thermal | even-cat | odd-cat | pacs |
//!                         # cat-thermal-tms | dense
//! cutoff = 40             # optional; --cutoff wins, default 40
//!
//! [params]
//! alpha = 1.0             # complex values take either a float or [re, im]
//! ```
//!
//! The dense variant carries the matrix explicitly: `modes` (1 or 2),
//! `cutoff` per mode, and `data`, a row-major flattened list of `[re, im]`
//! pairs of length (cutoff^modes)².
//!
//! Unknown keys and parameters a family does not use are rejected, so a
//! misspelled or misplaced parameter cannot silently fall back to a default.

use std::path::Path;

use serde::Deserialize;

use fockbound::fock::Modes;
use fockbound::states::StateSpec;
use fockbound::Complex64;

use crate::error::{io_err, CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;
const DEFAULT_CUTOFF: usize = 40;

/// A complex parameter: plain float for real values, `[re, im]` otherwise.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Cplx {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Cplx> for Complex64 {
    fn from(c: Cplx) -> Self {
        match c {
            Cplx::Real(re) => Complex64::new(re, 0.0),
            Cplx::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Params {
    alpha: Option<Cplx>,
    xi: Option<Cplx>,
    nbar: Option<f64>,
    n: Option<usize>,
    r: Option<f64>,
    modes: Option<u8>,
    data: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateFile {
    schema_version: u32,
    family: String,
    cutoff: Option<usize>,
    #[serde(default)]
    params: Params,
}

/// Reads a state file and resolves it to a `StateSpec`, applying the
/// command-line cutoff override when given.
pub fn load(path: &Path, cutoff_override: Option<usize>) -> Result<StateSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err("cannot read state file", path, e))?;
    let parsed: StateFile = toml::from_str(&text)
        .map_err(|e| CliError::Input(format!("state file {}: {e}", path.display())))?;
    if parsed.schema_version != SCHEMA_VERSION {
        return Err(CliError::Input(format!(
            "state file {}: schema_version {} is not supported (expected {})",
            path.display(),
            parsed.schema_version,
            SCHEMA_VERSION
        )));
    }
    to_spec(&parsed).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("state file {}: {msg}", path.display())),
        other => other,
    })
    .map(|spec| apply_cutoff(spec, cutoff_override))
}

fn apply_cutoff(spec: StateSpec, cutoff_override: Option<usize>) -> StateSpec {
    let Some(d) = cutoff_override else {
        return spec;
    };
    match spec {
        StateSpec::Vacuum { .. } => StateSpec::Vacuum { cutoff: d },
        StateSpec::Number { n, .. } => StateSpec::Number { n, cutoff: d },
        StateSpec::Coherent { alpha, .. } => StateSpec::Coherent { alpha, cutoff: d },
        StateSpec::Thermal { nbar, .. } => StateSpec::Thermal { nbar, cutoff: d },
        StateSpec::SqueezedThermal { xi, nbar, .. } => {
            StateSpec::SqueezedThermal { xi, nbar, cutoff: d }
        }
        StateSpec::EvenCat { alpha, .. } => StateSpec::EvenCat { alpha, cutoff: d },
        StateSpec::OddCat { alpha, .. } => StateSpec::OddCat { alpha, cutoff: d },
        StateSpec::Pacs { alpha, .. } => StateSpec::Pacs { alpha, cutoff: d },
        StateSpec::CatThermalTms { alpha, nbar, r, .. } => {
            StateSpec::CatThermalTms { alpha, nbar, r, cutoff: d }
        }
        // The dense payload's dimension is the data's; overriding it could
        // only mismatch, so the flag is ignored here.
        dense @ StateSpec::Dense { .. } => dense,
    }
}

fn to_spec(file: &StateFile) -> Result<StateSpec> {
    let p = &file.params;
    let cutoff = file.cutoff.unwrap_or(DEFAULT_CUTOFF);
    if cutoff < 2 {
        return Err(CliError::Input(format!("cutoff {cutoff} is too small")));
    }

    let spec = match file.family.as_str() {
        "vacuum" => {
            ensure_unused(p, &[])?;
            StateSpec::Vacuum { cutoff }
        }
        "number" => {
            let n = require(p.n, "n")?;
            ensure_unused(p, &["n"])?;
            StateSpec::Number { n, cutoff }
        }
        "coherent" => {
            let alpha = require(p.alpha, "alpha")?.into();
            ensure_unused(p, &["alpha"])?;
            StateSpec::Coherent { alpha, cutoff }
        }
        "thermal" => {
            let nbar = require(p.nbar, "nbar")?;
            ensure_unused(p, &["nbar"])?;
            StateSpec::Thermal { nbar, cutoff }
        }
        "squeezed-thermal" => {
            let xi = require(p.xi, "xi")?.into();
            let nbar = require(p.nbar, "nbar")?;
            ensure_unused(p, &["xi", "nbar"])?;
            StateSpec::SqueezedThermal { xi, nbar, cutoff }
        }
        "even-cat" => {
            let alpha = require(p.alpha, "alpha")?.into();
            ensure_unused(p, &["alpha"])?;
            StateSpec::EvenCat { alpha, cutoff }
        }
        "odd-cat" => {
            let alpha = require(p.alpha, "alpha")?.into();
            ensure_unused(p, &["alpha"])?;
            StateSpec::OddCat { alpha, cutoff }
        }
        "pacs" => {
            let alpha = require(p.alpha, "alpha")?.into();
            ensure_unused(p, &["alpha"])?;
            StateSpec::Pacs { alpha, cutoff }
        }
        "cat-thermal-tms" => {
            let alpha = match require(p.alpha, "alpha")? {
                Cplx::Real(a) => a,
                Cplx::Pair(_) => {
                    return Err(CliError::Input(String::from(
                        "cat-thermal-tms takes a real alpha",
                    )))
                }
            };
            let nbar = require(p.nbar, "nbar")?;
            let r = require(p.r, "r")?;
            ensure_unused(p, &["alpha", "nbar", "r"])?;
            StateSpec::CatThermalTms { alpha, nbar, r, cutoff }
        }
        "dense" => {
            let modes = match require(p.modes, "modes")? {
                1 => Modes::One,
                2 => Modes::Two,
                m => {
                    return Err(CliError::Input(format!(
                        "dense states support modes = 1 or 2 (got {m})"
                    )))
                }
            };
            let data = p
                .data
                .as_ref()
                .ok_or_else(|| missing("data"))?
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect::<Vec<_>>();
            ensure_unused(p, &["modes", "data"])?;
            let total = match modes {
                Modes::One => cutoff,
                Modes::Two => cutoff * cutoff,
            };
            if data.len() != total * total {
                return Err(CliError::Input(format!(
                    "dense data has {} entries, expected {}²={} for cutoff {cutoff}",
                    data.len(),
                    total,
                    total * total
                )));
            }
            StateSpec::Dense { data, modes, cutoff }
        }
        other => {
            return Err(CliError::Input(format!(
                "unknown state family \"{other}\""
            )))
        }
    };
    Ok(spec)
}

fn require<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| missing(name))
}

fn missing(name: &str) -> CliError {
    CliError::Input(format!("missing required parameter \"{name}\""))
}

/// Rejects parameters the family does not consume.
fn ensure_unused(p: &Params, used: &[&str]) -> Result<()> {
    let fields: [(&str, bool); 7] = [
        ("alpha", p.alpha.is_some()),
        ("xi", p.xi.is_some()),
        ("nbar", p.nbar.is_some()),
        ("n", p.n.is_some()),
        ("r", p.r.is_some()),
        ("modes", p.modes.is_some()),
        ("data", p.data.is_some()),
    ];
    for (name, present) in fields {
        if present && !used.contains(&name) {
            return Err(CliError::Input(format!(
                "parameter \"{name}\" is not used by this family"
            )));
        }
    }
    Ok(())
}

/// The family name as written in state files; used to echo the input back
/// into reports.
pub fn family_name(spec: &StateSpec) -> &'static str {
    match spec {
        StateSpec::Vacuum { .. } => "vacuum",
        StateSpec::Number { .. } => "number",
        StateSpec::Coherent { .. } => "coherent",
        StateSpec::Thermal { .. } => "thermal",
        StateSpec::SqueezedThermal { .. } => "squeezed-thermal",
        StateSpec::EvenCat { .. } => "even-cat",
        StateSpec::OddCat { .. } => "odd-cat",
        StateSpec::Pacs { .. } => "pacs",
        StateSpec::CatThermalTms { .. } => "cat-thermal-tms",
        StateSpec::Dense { .. } => "dense",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(text: &str) -> (tempfile::TempDir, std::path::PathBuf) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.toml");
        std::fs::write(&path, text).unwrap();
        (dir, path)
    }

    #[test]
    fn parses_the_families() {
        let (_d, p) = write(
            "schema_version = 1\nfamily = \"odd-cat\"\ncutoff = 32\n[params]\nalpha = 1.0\n",
        );
        let spec = load(&p, None).unwrap();
        assert!(matches!(spec, StateSpec::OddCat { cutoff: 32, .. }));
        let spec = load(&p, Some(50)).unwrap();
        assert_eq!(spec.cutoff(), 50);

        let (_d, p) = write(
            "schema_version = 1\nfamily = \"squeezed-thermal\"\n[params]\nxi = [0.3, 0.1]\nnbar = 0.5\n",
        );
        match load(&p, None).unwrap() {
            StateSpec::SqueezedThermal { xi, nbar, cutoff } => {
                assert_eq!(xi, Complex64::new(0.3, 0.1));
                assert_eq!(nbar, 0.5);
                assert_eq!(cutoff, 40);
            }
            other => panic!("wrong spec: {other:?}"),
        }
    }

    #[test]
    fn dense_round_trip() {
        // 2×2 maximally mixed single-mode state at cutoff 2.
        let (_d, p) = write(
            "schema_version = 1\nfamily = \"dense\"\ncutoff = 2\n[params]\nmodes = 1\ndata = [[0.5, 0.0], [0.0, 0.0], [0.0, 0.0], [0.5, 0.0]]\n",
        );
        match load(&p, None).unwrap() {
            StateSpec::Dense { data, modes, cutoff } => {
                assert_eq!(modes, Modes::One);
                assert_eq!(cutoff, 2);
                assert_eq!(data.len(), 4);
            }
            other => panic!("wrong spec: {other:?}"),
        }
    }

    #[test]
    fn rejects_malformed_input() {
        // Unknown family.
        let (_d, p) = write("schema_version = 1\nfamily = \"catt\"\n");
        assert!(matches!(load(&p, None), Err(CliError::Input(_))));

        // Parameter not taken by the family.
        let (_d, p) = write(
            "schema_version = 1\nfamily = \"vacuum\"\n[params]\nnbar = 1.0\n",
        );
        assert!(matches!(load(&p, None), Err(CliError::Input(_))));

        // Missing required parameter.
        let (_d, p) = write("schema_version = 1\nfamily = \"coherent\"\n");
        assert!(matches!(load(&p, None), Err(CliError::Input(_))));

        // Wrong dense payload length.
        let (_d, p) = write(
            "schema_version = 1\nfamily = \"dense\"\ncutoff = 2\n[params]\nmodes = 1\ndata = [[1.0, 0.0]]\n",
        );
        assert!(matches!(load(&p, None), Err(CliError::Input(_))));

        // Bad schema version.
        let (_d, p) = write("schema_version = 3\nfamily = \"vacuum\"\n");
        assert!(matches!(load(&p, None), Err(CliError::Input(_))));
    }
}
