//! Synthetic plane-parallel atmosphere used to generate transmittance grids.
//!
//! Absorption is a sum of exponentially decaying layers, optionally with
//! Lorentzian lines, so every slant-path integral has a closed form. A
//! `ModelExact` profile instead evaluates the fitted model's functional form
//! directly with known coefficients.

mod config;
mod quadrature;

pub use config::{builtin_profile, load_profile, parse_profile, profile_to_toml, PROFILE_FORMAT, STANDARD_PROFILE};
pub use quadrature::{optical_depth_quadrature, transmittance_quadrature, MAX_DEPTH};

use crate::datagrid::{GridAxes, ScenarioSpec, SubBand, TransmittanceGrid};
use crate::error::{Error, Result};
use crate::geometry::{check_theta, cos_deg, sin_deg};
use crate::regression::{horner, FreqMap};

/// Number of frequency samples used to validate non-negativity.
const VALIDATION_SAMPLES: usize = 2001;

/// Exponential layer `κ(f)·e^{−z/H}` with `κ(f) = Σ cᵢ·fⁱ` in 1/km (f in THz).
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuumTerm {
    pub amplitude_poly: Vec<f64>,
    pub scale_height: f64,
}

impl ContinuumTerm {
    pub fn kappa(&self, f: f64) -> f64 {
        horner(&self.amplitude_poly, f)
    }
}

/// Lorentzian line `S·w²/((f − f₀)² + w²)·e^{−z/H}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    pub center: f64,
    pub strength: f64,
    pub half_width: f64,
    pub scale_height: f64,
}

impl Line {
    pub fn kappa(&self, f: f64) -> f64 {
        let w2 = self.half_width * self.half_width;
        let df = f - self.center;
        self.strength * w2 / (df * df + w2)
    }
}

/// Ground-truth coefficients of the closed-form model; `Λ` polynomials are
/// in frequency normalized to the profile's validity band.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactModel {
    pub b2h: f64,
    pub b2v: f64,
    pub lambda_h: Vec<f64>,
    pub lambda_v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileMode {
    ModelExact(ExactModel),
    Continuum(Vec<ContinuumTerm>),
    Lines {
        continuum: Vec<ContinuumTerm>,
        lines: Vec<Line>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsorptionProfile {
    name: String,
    mode: ProfileMode,
    f_lo: f64,
    f_hi: f64,
    humidity_scale: f64,
}

impl AbsorptionProfile {
    /// Validates scale heights and samples the band to confirm `k ≥ 0`
    /// (or `Λ ≤ 0` for `ModelExact`).
    pub fn new(name: impl Into<String>, mode: ProfileMode, f_lo: f64, f_hi: f64) -> Result<Self> {
        if !(f_lo.is_finite() && f_hi.is_finite() && 0.0 < f_lo && f_lo < f_hi) {
            return Err(Error::invalid(
                "profile band",
                format!("need 0 < f_lo < f_hi, got [{f_lo}, {f_hi}]"),
            ));
        }
        let p = Self {
            name: name.into(),
            mode,
            f_lo,
            f_hi,
            humidity_scale: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    /// Scales all absorption by `s ≥ 0`.
    pub fn with_humidity_scale(mut self, s: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::range("humidity scale", s, ">= 0"));
        }
        self.humidity_scale = s;
        Ok(self)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mode(&self) -> &ProfileMode {
        &self.mode
    }

    pub fn band(&self) -> (f64, f64) {
        (self.f_lo, self.f_hi)
    }

    pub fn humidity_scale(&self) -> f64 {
        self.humidity_scale
    }

    /// An empty continuum: no absorption anywhere in `[f_lo, f_hi]`.
    pub fn transparent(f_lo: f64, f_hi: f64) -> Result<Self> {
        Self::new("transparent", ProfileMode::Continuum(Vec::new()), f_lo, f_hi)
    }

    fn sample_freqs(&self) -> impl Iterator<Item = f64> + '_ {
        let n = VALIDATION_SAMPLES - 1;
        (0..=n).map(move |i| self.f_lo + (self.f_hi - self.f_lo) * i as f64 / n as f64)
    }

    fn validate(&self) -> Result<()> {
        let bad = |reason: String| Err(Error::invalid("absorption profile", reason));
        let check_h = |h: f64| -> Result<()> {
            if h > 0.0 && h.is_finite() {
                Ok(())
            } else {
                bad(format!("scale height {h} must be > 0"))
            }
        };
        let check_terms = |terms: &[ContinuumTerm]| -> Result<()> {
            for (j, t) in terms.iter().enumerate() {
                check_h(t.scale_height)?;
                if t.amplitude_poly.iter().any(|c| !c.is_finite()) {
                    return bad(format!("continuum term {j} has a non-finite coefficient"));
                }
                if let Some(f) = self.sample_freqs().find(|&f| !(t.kappa(f) >= 0.0)) {
                    return bad(format!("continuum term {j} has negative kappa at f = {f} THz"));
                }
            }
            Ok(())
        };
        match &self.mode {
            ProfileMode::ModelExact(m) => {
                if !(m.b2h.is_finite() && m.b2v.is_finite()) {
                    return bad("non-finite b2".into());
                }
                if m.lambda_h.is_empty() || m.lambda_v.is_empty() {
                    return bad("empty lambda polynomial".into());
                }
                let map = self.freq_map();
                for f in self.sample_freqs() {
                    let u = map.apply(f);
                    if !(horner(&m.lambda_h, u) <= 0.0 && horner(&m.lambda_v, u) <= 0.0) {
                        return bad(format!("lambda is positive at f = {f} THz"));
                    }
                }
                Ok(())
            }
            ProfileMode::Continuum(terms) => check_terms(terms),
            ProfileMode::Lines { continuum, lines } => {
                check_terms(continuum)?;
                for (j, line) in lines.iter().enumerate() {
                    check_h(line.scale_height)?;
                    if !(line.strength >= 0.0 && line.strength.is_finite()) {
                        return bad(format!("line {j} strength {} must be >= 0", line.strength));
                    }
                    if !(line.half_width > 0.0 && line.half_width.is_finite() && line.center.is_finite()) {
                        return bad(format!("line {j} needs a finite center and half-width > 0"));
                    }
                }
                Ok(())
            }
        }
    }

    pub(crate) fn freq_map(&self) -> FreqMap {
        FreqMap::new(self.f_lo, self.f_hi).expect("validated band")
    }

    pub(crate) fn check_freq(&self, f: f64) -> Result<()> {
        if f >= self.f_lo - crate::datagrid::FREQ_EPS && f <= self.f_hi + crate::datagrid::FREQ_EPS {
            Ok(())
        } else {
            Err(Error::range(
                "f",
                f,
                format!("profile band [{}, {}] THz", self.f_lo, self.f_hi),
            ))
        }
    }

    /// `(κ(f), H)` for every exponential layer, humidity scale applied.
    pub(crate) fn layers(&self, f: f64) -> Vec<(f64, f64)> {
        let s = self.humidity_scale;
        match &self.mode {
            ProfileMode::ModelExact(_) => Vec::new(),
            ProfileMode::Continuum(terms) => terms.iter().map(|t| (s * t.kappa(f), t.scale_height)).collect(),
            ProfileMode::Lines { continuum, lines } => continuum
                .iter()
                .map(|t| (s * t.kappa(f), t.scale_height))
                .chain(lines.iter().map(|ln| (s * ln.kappa(f), ln.scale_height)))
                .collect(),
        }
    }
}

fn check_path(l: f64, d: f64, theta: f64) -> Result<()> {
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::range("l", l, ">= 0 km"));
    }
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::range("d", d, "> 0 km"));
    }
    check_theta(theta)
}

/// Absorption coefficient `k(z, f)` in 1/km.
pub fn absorption_coefficient(profile: &AbsorptionProfile, z: f64, f: f64) -> Result<f64> {
    if let ProfileMode::ModelExact(_) = profile.mode {
        return Err(Error::Unsupported(
            "a ModelExact profile has no pointwise absorption coefficient".into(),
        ));
    }
    if !(z >= 0.0 && z.is_finite()) {
        return Err(Error::range("z", z, ">= 0 km"));
    }
    profile.check_freq(f)?;
    Ok(profile.layers(f).iter().map(|&(k, h)| k * (-z / h).exp()).sum())
}

/// `∫₀^d κ·e^{−(l + s·cos θ)/H} ds` in closed form.
fn layer_integral(kappa: f64, h: f64, l: f64, d: f64, cos_t: f64) -> f64 {
    let base = kappa * (-l / h).exp();
    if cos_t == 0.0 {
        base * d
    } else {
        base * (h / cos_t) * -(-d * cos_t / h).exp_m1()
    }
}

/// Optical depth `∫₀^d k(l + s·cos θ, f) ds` of a slant path in closed form.
/// For `ModelExact` profiles this is the negated model exponent.
pub fn optical_depth(profile: &AbsorptionProfile, l: f64, d: f64, theta: f64, f: f64) -> Result<f64> {
    check_path(l, d, theta)?;
    profile.check_freq(f)?;
    Ok(match &profile.mode {
        ProfileMode::ModelExact(m) => {
            let u = profile.freq_map().apply(f);
            -profile.humidity_scale
                * (horner(&m.lambda_h, u) * (m.b2h * l).exp() * d * sin_deg(theta)
                    + horner(&m.lambda_v, u) * (m.b2v * l).exp() * d * cos_deg(theta))
        }
        _ => {
            let c = cos_deg(theta);
            profile
                .layers(f)
                .iter()
                .map(|&(k, h)| layer_integral(k, h, l, d, c))
                .sum()
        }
    })
}

/// Transmittance along a slant path starting at altitude `l` (km), of length
/// `d` (km) at zenith angle `theta` (degrees).
pub fn transmittance_along_path(profile: &AbsorptionProfile, l: f64, d: f64, theta: f64, f: f64) -> Result<f64> {
    let depth = optical_depth(profile, l, d, theta, f)?;
    let tau = (-depth).exp();
    if tau > 0.0 {
        Ok(tau)
    } else {
        Err(Error::NumericFailure(format!(
            "transmittance underflows (optical depth {depth}) at l = {l}, d = {d}, theta = {theta}, f = {f}"
        )))
    }
}

/// Fills the `(l, d, θ, f)` tensor for a scenario and sub-band.
pub fn generate_grid(
    profile: &AbsorptionProfile,
    scenario: &ScenarioSpec,
    band: &SubBand,
) -> Result<TransmittanceGrid> {
    profile.check_freq(band.f_lo())?;
    profile.check_freq(band.f_hi())?;
    let axes = GridAxes::new(scenario.clone(), band.clone());
    TransmittanceGrid::from_fn(axes, |l, d, t, f| transmittance_along_path(profile, l, d, t, f))
}
