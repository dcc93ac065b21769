//! TOML profile files.
//!
//! ```toml
//! format = 1
//! name = "standard"
//! mode = "lines"            # "model-exact" | "continuum" | "lines"
//! humidity_scale = 1.0      # optional
//!
//! [band]
//! f_lo = 0.1
//! f_hi = 1.0
//!
//! [[continuum]]
//! amplitude_poly = [0.01, 0.2, 3.0]   # κ(f) = Σ cᵢ·fⁱ, 1/km, f in THz
//! scale_height = 2.1
//!
//! [[lines]]
//! center = 0.18331
//! strength = 6.0
//! half_width = 0.003
//! scale_height = 2.1
//! ```
//!
//! `model-exact` profiles carry a `[model_exact]` table with `b2h`, `b2v`,
//! `lambda_h` and `lambda_v` instead of continuum terms and lines.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AbsorptionProfile, ContinuumTerm, ExactModel, Line, ProfileMode};
use crate::error::{Error, Result};

pub const PROFILE_FORMAT: i64 = 1;

/// The shipped synthetic profile. Not spectroscopic truth.
pub const STANDARD_PROFILE: &str = include_str!("../../profiles/standard.prof");

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileFile {
    format: i64,
    name: String,
    mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    humidity_scale: Option<f64>,
    band: BandSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    model_exact: Option<ExactSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    continuum: Vec<TermSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    lines: Vec<LineSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BandSection {
    f_lo: f64,
    f_hi: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExactSection {
    b2h: f64,
    b2v: f64,
    lambda_h: Vec<f64>,
    lambda_v: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermSection {
    amplitude_poly: Vec<f64>,
    scale_height: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineSection {
    center: f64,
    strength: f64,
    half_width: f64,
    scale_height: f64,
}

fn schema(reason: impl Into<String>) -> Error {
    Error::Schema(reason.into())
}

/// Parses and validates a profile from TOML text.
pub fn parse_profile(text: &str) -> Result<AbsorptionProfile> {
    let file: ProfileFile = toml::from_str(text).map_err(|e| schema(format!("profile: {}", e.message())))?;
    if file.format != PROFILE_FORMAT {
        return Err(schema(format!(
            "unsupported profile format {} (expected {PROFILE_FORMAT})",
            file.format
        )));
    }
    let terms = || -> Vec<ContinuumTerm> {
        file.continuum
            .iter()
            .map(|t| ContinuumTerm {
                amplitude_poly: t.amplitude_poly.clone(),
                scale_height: t.scale_height,
            })
            .collect()
    };
    let mode = match file.mode.as_str() {
        "model-exact" => {
            let m = file
                .model_exact
                .as_ref()
                .ok_or_else(|| schema("mode `model-exact` needs a [model_exact] table"))?;
            if !file.continuum.is_empty() || !file.lines.is_empty() {
                return Err(schema("mode `model-exact` takes no continuum terms or lines"));
            }
            ProfileMode::ModelExact(ExactModel {
                b2h: m.b2h,
                b2v: m.b2v,
                lambda_h: m.lambda_h.clone(),
                lambda_v: m.lambda_v.clone(),
            })
        }
        "continuum" => {
            if !file.lines.is_empty() || file.model_exact.is_some() {
                return Err(schema("mode `continuum` takes only [[continuum]] terms"));
            }
            ProfileMode::Continuum(terms())
        }
        "lines" => {
            if file.model_exact.is_some() {
                return Err(schema("mode `lines` takes no [model_exact] table"));
            }
            ProfileMode::Lines {
                continuum: terms(),
                lines: file
                    .lines
                    .iter()
                    .map(|l| Line {
                        center: l.center,
                        strength: l.strength,
                        half_width: l.half_width,
                        scale_height: l.scale_height,
                    })
                    .collect(),
            }
        }
        other => {
            return Err(schema(format!(
                "unknown mode `{other}`; valid modes are model-exact, continuum, lines"
            )))
        }
    };
    let profile = AbsorptionProfile::new(file.name, mode, file.band.f_lo, file.band.f_hi)?;
    match file.humidity_scale {
        Some(s) => profile.with_humidity_scale(s),
        None => Ok(profile),
    }
}

/// Reads a profile file from disk.
pub fn load_profile(path: impl AsRef<Path>) -> Result<AbsorptionProfile> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_profile(&text)
}

/// Profiles shipped with the library, by name.
pub fn builtin_profile(name: &str) -> Result<AbsorptionProfile> {
    match name.to_ascii_lowercase().as_str() {
        "standard" => parse_profile(STANDARD_PROFILE),
        _ => Err(Error::Lookup {
            kind: "profile",
            name: name.into(),
            valid: "standard".into(),
        }),
    }
}

/// Serializes a profile back to TOML.
pub fn profile_to_toml(p: &AbsorptionProfile) -> String {
    let term = |t: &ContinuumTerm| TermSection {
        amplitude_poly: t.amplitude_poly.clone(),
        scale_height: t.scale_height,
    };
    let (mode, model_exact, continuum, lines) = match p.mode() {
        ProfileMode::ModelExact(m) => (
            "model-exact",
            Some(ExactSection {
                b2h: m.b2h,
                b2v: m.b2v,
                lambda_h: m.lambda_h.clone(),
                lambda_v: m.lambda_v.clone(),
            }),
            Vec::new(),
            Vec::new(),
        ),
        ProfileMode::Continuum(terms) => ("continuum", None, terms.iter().map(term).collect(), Vec::new()),
        ProfileMode::Lines { continuum, lines } => (
            "lines",
            None,
            continuum.iter().map(term).collect(),
            lines
                .iter()
                .map(|l| LineSection {
                    center: l.center,
                    strength: l.strength,
                    half_width: l.half_width,
                    scale_height: l.scale_height,
                })
                .collect(),
        ),
    };
    let (f_lo, f_hi) = p.band();
    let file = ProfileFile {
        format: PROFILE_FORMAT,
        name: p.name().to_string(),
        mode: mode.into(),
        humidity_scale: Some(p.humidity_scale()),
        band: BandSection { f_lo, f_hi },
        model_exact,
        continuum,
        lines,
    };
    toml::to_string(&file).expect("profile serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_profile_parses() {
        let p = builtin_profile("standard").unwrap();
        assert_eq!(p.band(), (0.1, 1.0));
        match p.mode() {
            ProfileMode::Lines { continuum, lines } => {
                assert_eq!(continuum.len(), 1);
                assert_eq!(continuum[0].scale_height, 2.1);
                assert_eq!(lines.len(), 7);
            }
            m => panic!("unexpected mode {m:?}"),
        }
    }

    #[test]
    fn round_trip() {
        let p = builtin_profile("standard").unwrap().with_humidity_scale(1.5).unwrap();
        let back = parse_profile(&profile_to_toml(&p)).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn model_exact_profile() {
        let text = r#"
format = 1
name = "exact"
mode = "model-exact"
[band]
f_lo = 0.327
f_hi = 0.368
[model_exact]
b2h = -0.4
b2v = -0.55
lambda_h = [-1.0, 0.2]
lambda_v = [-0.5]
"#;
        let p = parse_profile(text).unwrap();
        assert!(matches!(p.mode(), ProfileMode::ModelExact(_)));
        assert_eq!(parse_profile(&profile_to_toml(&p)).unwrap(), p);
    }

    #[test]
    fn schema_errors() {
        let bad_format = STANDARD_PROFILE.replace("format = 1", "format = 2");
        assert!(matches!(parse_profile(&bad_format), Err(Error::Schema(_))));
        let bad_mode = STANDARD_PROFILE.replace("mode = \"lines\"", "mode = \"rain\"");
        assert!(matches!(parse_profile(&bad_mode), Err(Error::Schema(_))));
        assert!(matches!(parse_profile("format = 1"), Err(Error::Schema(_))));
        assert!(matches!(builtin_profile("tropical"), Err(Error::Lookup { .. })));
    }
}
