//! Versioned TOML model files.
//!
//! Floats are written in shortest round-trip form, so export → import →
//! export reproduces the file byte for byte.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AdaptiveModel, AgnosticModel, AngleCoefficients, FitMetadata, PathLossModel};
use crate::datagrid::SubBand;
use crate::error::{Error, Result};
use crate::regression::{FreqMap, PolyFit};

pub const MODEL_FORMAT: &str = "skyloss-model v1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    format: String,
    kind: String,
    units: Units,
    band: BandSection,
    f_map: FMapSection,
    #[serde(default)]
    metadata: MetadataSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizontal: Option<BranchSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertical: Option<BranchSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    angles: Option<Vec<AngleSection>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Units {
    length: String,
    frequency: String,
    #[serde(default = "default_angle_unit")]
    angle: String,
}

fn default_angle_unit() -> String {
    "deg".into()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BandSection {
    name: String,
    f_lo: f64,
    f_hi: f64,
    step: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FMapSection {
    lo: f64,
    hi: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct MetadataSection {
    training_scenario: String,
    step2_estimator: String,
    intercept_refit: bool,
    tau_min: f64,
    excluded_samples: u64,
    clamp_events: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficient_count: Option<u64>,
}

impl Default for MetadataSection {
    fn default() -> Self {
        let m = FitMetadata::default();
        Self {
            training_scenario: m.training_scenario,
            step2_estimator: m.step2_estimator,
            intercept_refit: m.intercept_refit,
            tau_min: m.tau_min,
            excluded_samples: 0,
            clamp_events: 0,
            coefficient_count: None,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchSection {
    b2: f64,
    lambda: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AngleSection {
    theta: f64,
    b2: f64,
    lambda: Vec<f64>,
}

fn schema(reason: impl Into<String>) -> Error {
    Error::Schema(reason.into())
}

fn branch(b2: f64, poly: &PolyFit) -> BranchSection {
    BranchSection {
        b2,
        lambda: poly.coeffs().to_vec(),
    }
}

/// Serializes a model to its TOML text.
pub fn export_model_to_string(model: &PathLossModel) -> Result<String> {
    let band = model.band();
    let meta = model.metadata();
    let f_map = match model {
        PathLossModel::Agnostic(m) => m.poly_h.f_map(),
        PathLossModel::Adaptive(m) => m.angles()[0].poly.f_map(),
    };
    let mut file = ModelFile {
        format: MODEL_FORMAT.into(),
        kind: model.kind().into(),
        units: Units {
            length: "km".into(),
            frequency: "THz".into(),
            angle: "deg".into(),
        },
        band: BandSection {
            name: band.name().into(),
            f_lo: band.f_lo(),
            f_hi: band.f_hi(),
            step: band.step(),
        },
        f_map: FMapSection {
            lo: f_map.lo(),
            hi: f_map.hi(),
        },
        metadata: MetadataSection {
            training_scenario: meta.training_scenario.clone(),
            step2_estimator: meta.step2_estimator.clone(),
            intercept_refit: meta.intercept_refit,
            tau_min: meta.tau_min,
            excluded_samples: meta.excluded_samples as u64,
            clamp_events: meta.clamp_events as u64,
            coefficient_count: Some(model.coefficient_count() as u64),
        },
        horizontal: None,
        vertical: None,
        angles: None,
    };
    match model {
        PathLossModel::Agnostic(m) => {
            file.horizontal = Some(branch(m.b2_h, &m.poly_h));
            file.vertical = Some(branch(m.b2_v, &m.poly_v));
        }
        PathLossModel::Adaptive(m) => {
            file.angles = Some(
                m.angles()
                    .iter()
                    .map(|a| AngleSection {
                        theta: a.theta,
                        b2: a.b2,
                        lambda: a.poly.coeffs().to_vec(),
                    })
                    .collect(),
            );
        }
    }
    let all_finite = [
        file.band.f_lo,
        file.band.f_hi,
        file.f_map.lo,
        file.f_map.hi,
        file.metadata.tau_min,
    ]
    .into_iter()
    .chain(
        file.horizontal
            .iter()
            .chain(&file.vertical)
            .flat_map(|b| std::iter::once(b.b2).chain(b.lambda.iter().copied())),
    )
    .chain(
        file.angles
            .iter()
            .flatten()
            .flat_map(|a| [a.theta, a.b2].into_iter().chain(a.lambda.iter().copied())),
    )
    .all(f64::is_finite);
    if !all_finite {
        return Err(Error::NumericFailure("model has non-finite coefficients".into()));
    }
    toml::to_string(&file).map_err(|e| Error::NumericFailure(format!("model serialization failed: {e}")))
}

/// Writes a model file.
pub fn export_model(model: &PathLossModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = export_model_to_string(model)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn poly(lambda: Vec<f64>, f_map: FreqMap, what: &str) -> Result<PolyFit> {
    PolyFit::from_coeffs(lambda, f_map).map_err(|e| schema(format!("{what}: {e}")))
}

/// Parses a model from TOML text.
pub fn import_model_from_str(text: &str) -> Result<PathLossModel> {
    let file: ModelFile = toml::from_str(text).map_err(|e| schema(e.message().to_string()))?;
    if file.format != MODEL_FORMAT {
        return Err(schema(format!(
            "version mismatch: file is `{}`, expected `{MODEL_FORMAT}`",
            file.format
        )));
    }
    if (
        file.units.length.as_str(),
        file.units.frequency.as_str(),
        file.units.angle.as_str(),
    ) != ("km", "THz", "deg")
    {
        return Err(schema(
            "units must be length = \"km\", frequency = \"THz\", angle = \"deg\"",
        ));
    }
    let band = SubBand::new(file.band.name, file.band.f_lo, file.band.f_hi, file.band.step)
        .map_err(|e| schema(format!("band: {e}")))?;
    let f_map = FreqMap::new(file.f_map.lo, file.f_map.hi).map_err(|e| schema(format!("f_map: {e}")))?;
    let meta = file.metadata;
    let metadata = FitMetadata {
        training_scenario: meta.training_scenario,
        step2_estimator: meta.step2_estimator,
        intercept_refit: meta.intercept_refit,
        tau_min: meta.tau_min,
        excluded_samples: meta.excluded_samples as usize,
        clamp_events: meta.clamp_events as usize,
    };
    let model = match file.kind.as_str() {
        "agnostic" => {
            if file.angles.is_some() {
                return Err(schema("agnostic model must not have [[angles]]"));
            }
            let h = file.horizontal.ok_or_else(|| schema("missing [horizontal] section"))?;
            let v = file.vertical.ok_or_else(|| schema("missing [vertical] section"))?;
            if !(h.b2.is_finite() && v.b2.is_finite()) {
                return Err(schema("non-finite b2"));
            }
            PathLossModel::Agnostic(AgnosticModel {
                b2_h: h.b2,
                b2_v: v.b2,
                poly_h: poly(h.lambda, f_map, "horizontal lambda")?,
                poly_v: poly(v.lambda, f_map, "vertical lambda")?,
                band,
                metadata,
            })
        }
        "adaptive" => {
            if file.horizontal.is_some() || file.vertical.is_some() {
                return Err(schema("adaptive model must not have [horizontal]/[vertical]"));
            }
            let angles = file.angles.ok_or_else(|| schema("missing [[angles]] sections"))?;
            let angles = angles
                .into_iter()
                .map(|a| {
                    Ok(AngleCoefficients {
                        theta: a.theta,
                        b2: a.b2,
                        poly: poly(a.lambda, f_map, "angle lambda")?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            PathLossModel::Adaptive(AdaptiveModel::new(angles, band, metadata).map_err(|e| schema(e.to_string()))?)
        }
        other => {
            return Err(schema(format!(
                "unknown model kind `{other}`; expected agnostic or adaptive"
            )))
        }
    };
    if let Some(n) = meta.coefficient_count {
        if n != model.coefficient_count() as u64 {
            return Err(schema(format!(
                "coefficient_count = {n} but the file holds {}",
                model.coefficient_count()
            )));
        }
    }
    Ok(model)
}

/// Reads a model file.
pub fn import_model(path: impl AsRef<Path>) -> Result<PathLossModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    import_model_from_str(&text)
}
