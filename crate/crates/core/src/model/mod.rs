//! Fitted path-loss models and their predictors.
//!
//! Both model kinds work in kilometers and THz. The θ-agnostic model is the
//! closed form
//!
//! ```text
//! τ̂(l, d_h, d_v, f) = exp(Λ_h(f)·e^{b₂,h·l}·d_h + Λ_v(f)·e^{b₂,v·l}·d_v)
//! ```
//!
//! and the θ-adaptive model keeps one `(b₂, Λ)` pair per training zenith
//! angle, `τ̂_θ(l, d, f) = exp(Λ_θ(f)·e^{b₂,θ·l}·d)`.

mod io;

pub use io::{export_model, export_model_to_string, import_model, import_model_from_str, MODEL_FORMAT};

use ndarray::Array4;

use crate::datagrid::{absorption_db, fspl_db, GridAxes, PathLossGrid, SubBand, FREQ_EPS};
use crate::error::{Error, Result};
use crate::geometry::{check_theta, cos_deg, link_geometry_from_positions, sin_deg, LinkGeometry, Position3D};
use crate::regression::PolyFit;

/// Provenance recorded alongside fitted coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FitMetadata {
    pub training_scenario: String,
    /// Altitude-stage estimator, `log-linear` or `gauss-newton`.
    pub step2_estimator: String,
    /// Whether `a₂` was refit per frequency after freezing `b₂` at its band mean.
    pub intercept_refit: bool,
    pub tau_min: f64,
    pub excluded_samples: usize,
    pub clamp_events: usize,
}

impl Default for FitMetadata {
    fn default() -> Self {
        Self {
            training_scenario: "custom".into(),
            step2_estimator: "log-linear".into(),
            intercept_refit: true,
            tau_min: 1e-12,
            excluded_samples: 0,
            clamp_events: 0,
        }
    }
}

/// A transmittance prediction, flagged when the raw value had to be clamped
/// into `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauPrediction {
    pub tau: f64,
    pub clamped: bool,
}

impl TauPrediction {
    fn from_exponent(exponent: f64) -> Self {
        if exponent > 0.0 {
            return Self {
                tau: 1.0,
                clamped: true,
            };
        }
        let tau = exponent.exp();
        if tau > 0.0 {
            Self { tau, clamped: false }
        } else {
            Self {
                tau: f64::MIN_POSITIVE,
                clamped: true,
            }
        }
    }
}

fn check_distance(what: &'static str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::range(what, v, ">= 0 km"))
    }
}

/// The closed-form θ-agnostic model.
#[derive(Debug, Clone, PartialEq)]
pub struct AgnosticModel {
    pub b2_h: f64,
    pub b2_v: f64,
    pub poly_h: PolyFit,
    pub poly_v: PolyFit,
    pub band: SubBand,
    pub metadata: FitMetadata,
}

impl AgnosticModel {
    /// `P_h + P_v + 4`.
    pub fn coefficient_count(&self) -> usize {
        let count = self.poly_h.coeffs().len() + self.poly_v.coeffs().len() + 2;
        debug_assert_eq!(count, self.poly_h.degree() + self.poly_v.degree() + 4);
        count
    }

    /// Horizontal and vertical exponent rates `Λ(f)·e^{b₂·l}` in 1/km.
    pub fn rates(&self, l: f64, f: f64) -> (f64, f64) {
        (
            self.poly_h.eval(f) * (self.b2_h * l).exp(),
            self.poly_v.eval(f) * (self.b2_v * l).exp(),
        )
    }

    pub fn predict_tau(&self, l: f64, d_h: f64, d_v: f64, f: f64) -> Result<TauPrediction> {
        predict_tau_agnostic(self, l, d_h, d_v, f)
    }
}

/// Evaluates the θ-agnostic closed form; distances and altitude in km.
pub fn predict_tau_agnostic(m: &AgnosticModel, l: f64, d_h: f64, d_v: f64, f: f64) -> Result<TauPrediction> {
    m.band.check_contains(f)?;
    check_distance("l", l)?;
    check_distance("d_h", d_h)?;
    check_distance("d_v", d_v)?;
    if d_h + d_v <= 0.0 {
        return Err(Error::DegenerateGeometry("zero-length link".into()));
    }
    let (rate_h, rate_v) = m.rates(l, f);
    Ok(TauPrediction::from_exponent(rate_h * d_h + rate_v * d_v))
}

/// Per-angle coefficients of the θ-adaptive model.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleCoefficients {
    pub theta: f64,
    pub b2: f64,
    pub poly: PolyFit,
}

impl AngleCoefficients {
    fn rate(&self, l: f64, f: f64) -> f64 {
        self.poly.eval(f) * (self.b2 * l).exp()
    }
}

/// The θ-adaptive model: one altitude/frequency fit per training angle.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveModel {
    angles: Vec<AngleCoefficients>,
    pub band: SubBand,
    pub metadata: FitMetadata,
}

impl AdaptiveModel {
    /// Angles must be strictly increasing within `[0, 90]`.
    pub fn new(angles: Vec<AngleCoefficients>, band: SubBand, metadata: FitMetadata) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::invalid("adaptive model", "no zenith angles"));
        }
        for a in &angles {
            check_theta(a.theta)?;
            if !a.b2.is_finite() {
                return Err(Error::invalid(
                    "adaptive model",
                    format!("non-finite b2 at theta = {}", a.theta),
                ));
            }
        }
        if angles.windows(2).any(|w| w[1].theta <= w[0].theta) {
            return Err(Error::invalid(
                "adaptive model",
                "zenith angles not strictly increasing",
            ));
        }
        Ok(Self { angles, band, metadata })
    }

    pub fn angles(&self) -> &[AngleCoefficients] {
        &self.angles
    }

    pub fn thetas(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.theta).collect()
    }

    /// `N_θ·(P + 2)` for a common degree `P`.
    pub fn coefficient_count(&self) -> usize {
        self.angles.iter().map(|a| a.poly.degree() + 2).sum()
    }

    /// Exponent rate in 1/km at an arbitrary angle inside the training range,
    /// linearly interpolated between the bracketing training angles.
    pub fn rate(&self, l: f64, theta: f64, f: f64) -> Result<f64> {
        let (lo, hi) = (self.angles[0].theta, self.angles[self.angles.len() - 1].theta);
        if !(theta >= lo - FREQ_EPS && theta <= hi + FREQ_EPS) {
            return Err(Error::range(
                "theta",
                theta,
                format!("model training range [{lo}, {hi}] deg"),
            ));
        }
        if let Some(a) = self.angles.iter().find(|a| (a.theta - theta).abs() <= FREQ_EPS) {
            return Ok(a.rate(l, f));
        }
        let j = self.angles.partition_point(|a| a.theta < theta);
        let (a, b) = (&self.angles[j - 1], &self.angles[j]);
        let w = (theta - a.theta) / (b.theta - a.theta);
        let (ra, rb) = (a.rate(l, f), b.rate(l, f));
        Ok(ra + w * (rb - ra))
    }

    pub fn predict_tau(&self, l: f64, d: f64, theta: f64, f: f64) -> Result<TauPrediction> {
        predict_tau_adaptive(self, l, d, theta, f)
    }
}

/// Evaluates the θ-adaptive model; distances and altitude in km.
pub fn predict_tau_adaptive(m: &AdaptiveModel, l: f64, d: f64, theta: f64, f: f64) -> Result<TauPrediction> {
    m.band.check_contains(f)?;
    check_distance("l", l)?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::range("d", d, "> 0 km"));
    }
    check_theta(theta)?;
    Ok(TauPrediction::from_exponent(m.rate(l, theta, f)? * d))
}

/// Either fitted model kind.
#[derive(Debug, Clone, PartialEq)]
pub enum PathLossModel {
    Agnostic(AgnosticModel),
    Adaptive(AdaptiveModel),
}

impl From<AgnosticModel> for PathLossModel {
    fn from(m: AgnosticModel) -> Self {
        PathLossModel::Agnostic(m)
    }
}

impl From<AdaptiveModel> for PathLossModel {
    fn from(m: AdaptiveModel) -> Self {
        PathLossModel::Adaptive(m)
    }
}

impl PathLossModel {
    pub fn kind(&self) -> &'static str {
        match self {
            PathLossModel::Agnostic(_) => "agnostic",
            PathLossModel::Adaptive(_) => "adaptive",
        }
    }

    pub fn band(&self) -> &SubBand {
        match self {
            PathLossModel::Agnostic(m) => &m.band,
            PathLossModel::Adaptive(m) => &m.band,
        }
    }

    pub fn metadata(&self) -> &FitMetadata {
        match self {
            PathLossModel::Agnostic(m) => &m.metadata,
            PathLossModel::Adaptive(m) => &m.metadata,
        }
    }

    pub fn coefficient_count(&self) -> usize {
        match self {
            PathLossModel::Agnostic(m) => m.coefficient_count(),
            PathLossModel::Adaptive(m) => m.coefficient_count(),
        }
    }

    /// Transmittance for a link given in km and degrees.
    pub fn predict_tau(&self, l: f64, d: f64, theta: f64, f: f64) -> Result<TauPrediction> {
        match self {
            PathLossModel::Agnostic(m) => {
                let (d_h, d_v) = crate::geometry::decompose(d, theta)?;
                m.predict_tau(l, d_h, d_v, f)
            }
            PathLossModel::Adaptive(m) => m.predict_tau(l, d, theta, f),
        }
    }

    fn predict_tau_link(&self, g: &LinkGeometry, f: f64) -> Result<TauPrediction> {
        let km = 1e-3;
        match self {
            PathLossModel::Agnostic(m) => m.predict_tau(g.l * km, g.d_h * km, g.d_v * km, f),
            PathLossModel::Adaptive(m) => m.predict_tau(g.l * km, g.d * km, g.theta, f),
        }
    }

    pub fn predict_path_loss(&self, q: &PathLossQuery) -> Result<PathLossPrediction> {
        predict_path_loss(self, q)
    }

    /// Predicted total path loss at every cell of a grid, plus the number of
    /// cells whose transmittance was clamped.
    pub fn predict_grid(&self, axes: &GridAxes) -> Result<(PathLossGrid, usize)> {
        use rayon::prelude::*;
        let cells: Vec<Result<(f64, bool)>> = (0..axes.n_samples())
            .into_par_iter()
            .map(|i| {
                let (l, d, t, f) = axes.coords(i);
                let p = match self {
                    PathLossModel::Agnostic(m) => m.predict_tau(l, d * sin_deg(t), d * cos_deg(t), f)?,
                    PathLossModel::Adaptive(m) => m.predict_tau(l, d, t, f)?,
                };
                Ok((fspl_db(d * 1000.0, f) + absorption_db(p.tau), p.clamped))
            })
            .collect();
        let mut values = Vec::with_capacity(cells.len());
        let mut clamped = 0;
        for c in cells {
            let (v, c) = c?;
            values.push(v);
            clamped += usize::from(c);
        }
        let values = Array4::from_shape_vec(axes.shape(), values).expect("one value per cell");
        Ok((PathLossGrid::new(axes.clone(), values)?, clamped))
    }
}

/// A path-loss query between two positions in meters at a frequency in THz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossQuery {
    pub p1: Position3D,
    pub p2: Position3D,
    pub f: f64,
}

impl PathLossQuery {
    pub fn new(p1: Position3D, p2: Position3D, f: f64) -> Result<Self> {
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::range("f", f, "> 0 THz"));
        }
        Ok(Self { p1, p2, f })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossPrediction {
    pub geometry: LinkGeometry,
    pub tau: TauPrediction,
    pub fspl_db: f64,
    pub abs_db: f64,
    pub total_db: f64,
}

/// Total path loss `FSPL + L_abs` between two positions.
pub fn predict_path_loss(m: &PathLossModel, q: &PathLossQuery) -> Result<PathLossPrediction> {
    let geometry = link_geometry_from_positions(q.p1, q.p2)?;
    let tau = m.predict_tau_link(&geometry, q.f)?;
    let fspl = fspl_db(geometry.d, q.f);
    let abs = absorption_db(tau.tau);
    Ok(PathLossPrediction {
        geometry,
        tau,
        fspl_db: fspl,
        abs_db: abs,
        total_db: fspl + abs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagrid::builtin_band;
    use crate::regression::FreqMap;
    use proptest::prelude::*;

    fn poly(band: &SubBand, c: &[f64]) -> PolyFit {
        PolyFit::from_coeffs(c.to_vec(), FreqMap::for_band(band)).unwrap()
    }

    fn agnostic(c_h: &[f64], c_v: &[f64]) -> AgnosticModel {
        let band = builtin_band("D-G").unwrap();
        AgnosticModel {
            b2_h: -0.4,
            b2_v: -0.55,
            poly_h: poly(&band, c_h),
            poly_v: poly(&band, c_v),
            band,
            metadata: FitMetadata::default(),
        }
    }

    fn adaptive(rates: &[(f64, f64)]) -> AdaptiveModel {
        let band = builtin_band("D-G").unwrap();
        let angles = rates
            .iter()
            .map(|&(theta, c0)| AngleCoefficients {
                theta,
                b2: -0.3,
                poly: poly(&band, &[c0, 0.1]),
            })
            .collect();
        AdaptiveModel::new(angles, band, FitMetadata::default()).unwrap()
    }

    fn pos(x: f64, y: f64, z: f64) -> Position3D {
        Position3D::new(x, y, z).unwrap()
    }

    #[test]
    fn zero_lambda_is_transparent() {
        let m = agnostic(&[0.0; 7], &[0.0; 7]);
        let p = m.predict_tau(0.2, 1.0, 3.0, 0.2).unwrap();
        assert_eq!(
            p,
            TauPrediction {
                tau: 1.0,
                clamped: false
            }
        );
        assert_eq!(m.coefficient_count(), 16);
    }

    #[test]
    fn doubling_horizontal_distance_squares_factor() {
        let m = agnostic(&[-1.0, 0.2], &[-0.5]);
        let one = m.predict_tau(0.3, 0.7, 0.0, 0.25).unwrap().tau;
        let two = m.predict_tau(0.3, 1.4, 0.0, 0.25).unwrap().tau;
        assert!((two - one * one).abs() <= 1e-12 * two);
    }

    #[test]
    fn out_of_band_and_bad_geometry() {
        let m = agnostic(&[-1.0], &[-1.0]);
        assert!(matches!(m.predict_tau(0.0, 1.0, 1.0, 0.31), Err(Error::Range { .. })));
        assert!(m.predict_tau(-1.0, 1.0, 1.0, 0.2).is_err());
        assert!(m.predict_tau(0.0, 0.0, 0.0, 0.2).is_err());
    }

    #[test]
    fn positive_exponent_is_clamped() {
        let m = agnostic(&[0.5], &[-0.1]);
        let p = m.predict_tau(0.0, 1.0, 0.0, 0.2).unwrap();
        assert_eq!(
            p,
            TauPrediction {
                tau: 1.0,
                clamped: true
            }
        );
    }

    #[test]
    fn adaptive_on_grid_and_midpoint() {
        let m = adaptive(&[(0.0, -1.0), (4.5, -2.0), (9.0, -4.0)]);
        assert_eq!(m.coefficient_count(), 3 * (1 + 2));
        let (l, f) = (0.1, 0.2);
        let r0 = m.rate(l, 0.0, f).unwrap();
        let r1 = m.rate(l, 4.5, f).unwrap();
        assert_eq!(r1, m.angles()[1].rate(l, f));
        let mid = m.rate(l, 2.25, f).unwrap();
        assert!((mid - 0.5 * (r0 + r1)).abs() <= 1e-15);
        let tau = m.predict_tau(l, 2.0, 2.25, f).unwrap().tau;
        assert!((tau - (mid * 2.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn adaptive_rejects_theta_outside_training_range() {
        let m = adaptive(&[(0.0, -1.0), (45.0, -2.0)]);
        assert!(matches!(m.predict_tau(0.0, 1.0, 60.0, 0.2), Err(Error::Range { .. })));
    }

    #[test]
    fn fspl_only_query() {
        let m: PathLossModel = agnostic(&[0.0], &[0.0]).into();
        let q = PathLossQuery::new(pos(0., 0., 0.), pos(0., 0., 1000.), 0.3).unwrap();
        let p = m.predict_path_loss(&q).unwrap();
        assert!((p.total_db - 141.99).abs() < 0.01);
        assert_eq!(p.abs_db, 0.0);
        assert_eq!(p.total_db, p.fspl_db);

        let half = PathLossQuery::new(pos(0., 0., 0.), pos(0., 0., 500.), 0.3).unwrap();
        let ph = m.predict_path_loss(&half).unwrap();
        assert!((p.fspl_db - ph.fspl_db - 6.020_599_913_279_624).abs() < 1e-9);
    }

    #[test]
    fn half_transmittance_adds_3db() {
        // ln 0.5 over a 1 km vertical link at l = 0.
        let m: PathLossModel = agnostic(&[0.0], &[-std::f64::consts::LN_2]).into();
        let q = PathLossQuery::new(pos(5., 5., 0.), pos(5., 5., 1000.), 0.2).unwrap();
        let p = m.predict_path_loss(&q).unwrap();
        assert!((p.abs_db - 3.010_299_956_639_812).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn separability(l in 0.0..5.0f64, h in 0.0..3.0f64, v in 0.0..3.0f64, f in 0.12..0.3f64) {
            prop_assume!(h > 0.0 && v > 0.0);
            let m = agnostic(&[-1.0, 0.3, 0.1], &[-0.7, -0.2]);
            let both = m.predict_tau(l, h, v, f).unwrap().tau;
            let ph = m.predict_tau(l, h, 0.0, f).unwrap().tau;
            let pv = m.predict_tau(l, 0.0, v, f).unwrap().tau;
            prop_assert!((both - ph * pv).abs() <= 1e-14 * both);
        }

        #[test]
        fn monotone_in_distance(l in 0.0..5.0f64, d in 0.01..3.0f64, s in 1.001..2.0f64, t in 0.0..=90.0f64) {
            let m = agnostic(&[-1.0, 0.3], &[-0.7, -0.2]);
            let (h, v) = crate::geometry::decompose(d, t).unwrap();
            let near = m.predict_tau(l, h, v, 0.2).unwrap().tau;
            let far = m.predict_tau(l, h * s, v * s, 0.2).unwrap().tau;
            prop_assert!(far < near);
            let a = adaptive(&[(0.0, -1.0), (45.0, -2.0), (90.0, -0.5)]);
            prop_assert!(a.predict_tau(l, d * s, t, 0.2).unwrap().tau < a.predict_tau(l, d, t, 0.2).unwrap().tau);
        }
    }
}
