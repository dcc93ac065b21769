//! Scenario and sub-band axis definitions.

use crate::error::{Error, Result};

/// Default frequency sampling step: 0.3 GHz.
pub const DEFAULT_STEP_THZ: f64 = 0.0003;

/// Tolerance used when comparing frequencies against band edges.
pub(crate) const FREQ_EPS: f64 = 1e-9;

/// The ten sub-bands across 0.1–1 THz as `(name, f_lo, f_hi)` in THz.
pub const BUILTIN_BANDS: [(&str, f64, f64); 10] = [
    ("D-G", 0.120, 0.300),
    ("Y0", 0.327, 0.368),
    ("Y1", 0.386, 0.423),
    ("Y2", 0.454, 0.470),
    ("WR0", 0.493, 0.525),
    ("WR1", 0.594, 0.618),
    ("WR2", 0.625, 0.710),
    ("THz0", 0.790, 0.830),
    ("THz1", 0.836, 0.910),
    ("THz2", 0.920, 0.960),
];

pub const BUILTIN_SCENARIOS: [&str; 3] = ["Dr2Dr", "MAAC", "U2U"];

fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| !matches!(c, '-' | '–' | '—' | '_' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

fn check_axis(what: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(what, "axis is empty"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid(what, format!("non-finite value {v}")));
    }
    if let Some(w) = values.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            what,
            format!("not strictly increasing ({} then {})", w[0], w[1]),
        ));
    }
    Ok(())
}

/// A contiguous frequency window sampled at a fixed step.
#[derive(Debug, Clone, PartialEq)]
pub struct SubBand {
    name: String,
    f_lo: f64,
    f_hi: f64,
    step: f64,
}

impl SubBand {
    pub fn new(name: impl Into<String>, f_lo: f64, f_hi: f64, step: f64) -> Result<Self> {
        if !(f_lo >= 0.1 - FREQ_EPS && f_lo < f_hi && f_hi <= 1.0 + FREQ_EPS) {
            return Err(Error::invalid(
                "sub-band",
                format!("span [{f_lo}, {f_hi}] THz must satisfy 0.1 <= f_lo < f_hi <= 1.0"),
            ));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::range("step", step, "step > 0 THz"));
        }
        Ok(Self {
            name: name.into(),
            f_lo,
            f_hi,
            step,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn f_lo(&self) -> f64 {
        self.f_lo
    }

    pub fn f_hi(&self) -> f64 {
        self.f_hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Same span, different sampling step.
    pub fn with_step(&self, step: f64) -> Result<Self> {
        Self::new(self.name.clone(), self.f_lo, self.f_hi, step)
    }

    /// Number of samples `f_lo + k·step` that do not exceed `f_hi`.
    pub fn len(&self) -> usize {
        ((self.f_hi - self.f_lo) / self.step + FREQ_EPS).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency samples in THz, rounded to 1e-12 THz so that decimal steps
    /// print as clean decimals.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| ((self.f_lo + k as f64 * self.step) * 1e12).round() / 1e12)
            .collect()
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_lo - FREQ_EPS && f <= self.f_hi + FREQ_EPS
    }

    pub(crate) fn check_contains(&self, f: f64) -> Result<()> {
        if self.contains(f) {
            Ok(())
        } else {
            Err(Error::range(
                "f",
                f,
                format!("band {} [{}, {}] THz", self.name, self.f_lo, self.f_hi),
            ))
        }
    }

    /// Finds the builtin band a frequency axis was sampled from, if any.
    pub(crate) fn recognize(frequencies: &[f64]) -> Option<SubBand> {
        let first = *frequencies.first()?;
        let last = *frequencies.last()?;
        BUILTIN_BANDS
            .iter()
            .find(|(_, lo, hi)| (first - lo).abs() <= FREQ_EPS && last <= hi + FREQ_EPS)
            .map(|(name, lo, hi)| {
                let step = if frequencies.len() > 1 {
                    infer_step(frequencies)
                } else {
                    DEFAULT_STEP_THZ
                };
                SubBand {
                    name: (*name).to_string(),
                    f_lo: *lo,
                    f_hi: *hi,
                    step,
                }
            })
    }
}

/// Sampling step of an evenly spaced axis. The mean spacing is snapped to
/// its 9-significant-digit decimal when that regenerates the same axis, so
/// a band written with step 0.0003 reads back with exactly 0.0003.
pub(crate) fn infer_step(frequencies: &[f64]) -> f64 {
    let (first, n) = (frequencies[0], frequencies.len());
    let raw = (frequencies[n - 1] - first) / (n - 1) as f64;
    let snapped: f64 = format!("{raw:.8e}").parse().expect("float text");
    let regenerates = frequencies
        .iter()
        .enumerate()
        .all(|(k, &f)| ((first + k as f64 * snapped) * 1e12).round() / 1e12 == f);
    if regenerates {
        snapped
    } else {
        raw
    }
}

/// Looks up one of the ten builtin sub-bands, sampled every 0.3 GHz.
///
/// Matching ignores case and dashes, so `dg`, `D-G` and `D–G` are the same band.
pub fn builtin_band(name: &str) -> Result<SubBand> {
    let key = normalize_name(name);
    BUILTIN_BANDS
        .iter()
        .find(|(n, _, _)| normalize_name(n) == key)
        .map(|(n, lo, hi)| SubBand::new(*n, *lo, *hi, DEFAULT_STEP_THZ))
        .unwrap_or_else(|| {
            Err(Error::Lookup {
                kind: "band",
                name: name.to_string(),
                valid: BUILTIN_BANDS.iter().map(|b| b.0).collect::<Vec<_>>().join(", "),
            })
        })
}

pub fn builtin_bands() -> Vec<SubBand> {
    BUILTIN_BANDS
        .iter()
        .map(|(n, lo, hi)| SubBand::new(*n, *lo, *hi, DEFAULT_STEP_THZ).expect("builtin band"))
        .collect()
}

/// Zenith-angle grid 0°, 4.5°, …, 90°.
pub fn theta_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 4.5).collect()
}

/// Altitude, distance and zenith-angle axes of an aerial scenario.
///
/// Altitudes and distances are in km, angles in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSpec {
    name: String,
    altitudes: Vec<f64>,
    distances: Vec<f64>,
    thetas: Vec<f64>,
}

impl ScenarioSpec {
    pub fn new(name: impl Into<String>, altitudes: Vec<f64>, distances: Vec<f64>, thetas: Vec<f64>) -> Result<Self> {
        check_axis("altitude axis", &altitudes)?;
        check_axis("distance axis", &distances)?;
        check_axis("theta axis", &thetas)?;
        if altitudes[0] < 0.0 {
            return Err(Error::range("altitude", altitudes[0], "l >= 0 km"));
        }
        if distances[0] <= 0.0 {
            return Err(Error::range("distance", distances[0], "d > 0 km"));
        }
        if thetas[0] < 0.0 || thetas[thetas.len() - 1] > 90.0 {
            return Err(Error::invalid("theta axis", "angles must lie in [0, 90] deg"));
        }
        Ok(Self {
            name: name.into(),
            altitudes,
            distances,
            thetas,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn altitudes(&self) -> &[f64] {
        &self.altitudes
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Same name, altered axes (used for sub-grids).
    pub fn with_axes(&self, altitudes: Vec<f64>, distances: Vec<f64>, thetas: Vec<f64>) -> Result<Self> {
        Self::new(self.name.clone(), altitudes, distances, thetas)
    }

    pub(crate) fn recognize(altitudes: Vec<f64>, distances: Vec<f64>, thetas: Vec<f64>) -> Result<Self> {
        let name = BUILTIN_SCENARIOS
            .iter()
            .filter_map(|n| builtin_scenario(n).ok())
            .find(|s| s.altitudes == altitudes && s.distances == distances && s.thetas == thetas)
            .map(|s| s.name)
            .unwrap_or_else(|| "custom".to_string());
        Self::new(name, altitudes, distances, thetas)
    }
}

/// `start, start + step, …` for `n` samples, computed as `(a + i·b) / scale`
/// on integers so each sample is the double nearest its decimal value.
fn decimal_axis(start: i64, step: i64, n: usize, scale: f64) -> Vec<f64> {
    (0..n as i64).map(|i| (start + i * step) as f64 / scale).collect()
}

/// Looks up one of the builtin aerial scenarios (Dr2Dr, MAAC, U2U).
pub fn builtin_scenario(name: &str) -> Result<ScenarioSpec> {
    let (canonical, altitudes, distances) = match normalize_name(name).as_str() {
        "dr2dr" => ("Dr2Dr", decimal_axis(0, 1, 51, 100.0), decimal_axis(1, 1, 10, 100.0)),
        "maac" => ("MAAC", decimal_axis(2, 1, 29, 2.0), decimal_axis(1, 1, 20, 2.0)),
        "u2u" => ("U2U", decimal_axis(30, 1, 71, 2.0), decimal_axis(1, 1, 100, 2.0)),
        _ => {
            return Err(Error::Lookup {
                kind: "scenario",
                name: name.to_string(),
                valid: BUILTIN_SCENARIOS.join(", "),
            })
        }
    };
    ScenarioSpec::new(canonical, altitudes, distances, theta_grid())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_axis_lengths() {
        let dr = builtin_scenario("Dr2Dr").unwrap();
        assert_eq!(dr.altitudes().len(), 51);
        assert_eq!(dr.distances().len(), 10);
        assert_eq!(dr.altitudes()[50], 0.5);
        assert_eq!(dr.distances()[0], 0.01);
        assert_eq!(dr.distances()[9], 0.1);

        let maac = builtin_scenario("maac").unwrap();
        assert_eq!(maac.altitudes().len(), 29);
        assert_eq!(maac.distances().len(), 20);
        assert_eq!((maac.altitudes()[0], maac.altitudes()[28]), (1.0, 15.0));
        assert_eq!((maac.distances()[0], maac.distances()[19]), (0.5, 10.0));

        let u2u = builtin_scenario("U2U").unwrap();
        assert_eq!(u2u.altitudes().len(), 71);
        assert_eq!(u2u.distances().len(), 100);
        assert_eq!((u2u.altitudes()[0], u2u.altitudes()[70]), (15.0, 50.0));
        assert_eq!(u2u.distances()[99], 50.0);

        for s in [dr, maac, u2u] {
            assert_eq!(s.thetas().len(), 21);
            assert_eq!(s.thetas()[1], 4.5);
            assert_eq!(s.thetas()[20], 90.0);
        }
    }

    #[test]
    fn unknown_scenario() {
        let err = builtin_scenario("LEO").unwrap_err();
        assert!(err.to_string().contains("Dr2Dr"));
    }

    #[test]
    fn band_spans() {
        let y0 = builtin_band("Y0").unwrap();
        assert_eq!((y0.f_lo(), y0.f_hi()), (0.327, 0.368));
        let t2 = builtin_band("thz2").unwrap();
        assert_eq!((t2.f_lo(), t2.f_hi()), (0.920, 0.960));
        assert_eq!(builtin_band("D–G").unwrap().name(), "D-G");
        assert_eq!(builtin_bands().len(), 10);
    }

    #[test]
    fn dg_has_601_samples() {
        let dg = builtin_band("dg").unwrap();
        assert_eq!(dg.len(), 601);
        let f = dg.frequencies();
        assert_eq!(f.len(), 601);
        assert_eq!(f[0], 0.12);
        assert_eq!(f[600], 0.3);
        assert_eq!(f[1], 0.1203);
    }

    #[test]
    fn non_integral_spans_stop_at_f_hi() {
        let y0 = builtin_band("Y0").unwrap();
        let f = y0.frequencies();
        assert_eq!(f.len(), 137);
        assert!(*f.last().unwrap() <= y0.f_hi());
        assert!(f.last().unwrap() + y0.step() > y0.f_hi());
    }

    #[test]
    fn unknown_band_lists_valid_names() {
        let msg = builtin_band("W").unwrap_err().to_string();
        assert!(msg.contains("THz2") && msg.contains("D-G"));
    }

    #[test]
    fn invalid_axes_rejected() {
        assert!(ScenarioSpec::new("x", vec![1.0, 1.0], vec![1.0], vec![0.0]).is_err());
        assert!(ScenarioSpec::new("x", vec![-1.0], vec![1.0], vec![0.0]).is_err());
        assert!(ScenarioSpec::new("x", vec![0.0], vec![0.0], vec![0.0]).is_err());
        assert!(ScenarioSpec::new("x", vec![0.0], vec![1.0], vec![91.0]).is_err());
        assert!(ScenarioSpec::new("x", vec![0.0], vec![], vec![0.0]).is_err());
        assert!(SubBand::new("x", 0.05, 0.2, 0.001).is_err());
        assert!(SubBand::new("x", 0.3, 0.2, 0.001).is_err());
        assert!(SubBand::new("x", 0.2, 0.3, 0.0).is_err());
    }
}
