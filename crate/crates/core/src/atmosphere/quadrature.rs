use super::{check_path, AbsorptionProfile, ProfileMode};
use crate::error::{Error, Result};
use crate::geometry::cos_deg;

/// Maximum bisection depth of the adaptive integrator.
pub const MAX_DEPTH: u32 = 48;

struct Simpson<'a> {
    k: &'a dyn Fn(f64) -> f64,
    tol: f64,
}

impl Simpson<'_> {
    fn rule(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &self,
        a: f64,
        fa: f64,
        m: f64,
        fm: f64,
        b: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = ((self.k)(lm), (self.k)(rm));
        let left = Self::rule(a, m, fa, flm, fm);
        let right = Self::rule(m, b, fm, frm, fb);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth >= MAX_DEPTH {
            return Err(Error::NumericFailure(format!(
                "path integral did not converge within {MAX_DEPTH} bisection levels (tolerance {})",
                self.tol
            )));
        }
        Ok(self.recurse(a, fa, lm, flm, m, fm, left, 0.5 * tol, depth + 1)?
            + self.recurse(m, fm, rm, frm, b, fb, right, 0.5 * tol, depth + 1)?)
    }
}

/// Optical depth by adaptive Simpson integration of `k` along the path, with
/// relative tolerance `rel_tol`. An independent check on the closed form.
pub fn optical_depth_quadrature(
    profile: &AbsorptionProfile,
    l: f64,
    d: f64,
    theta: f64,
    f: f64,
    rel_tol: f64,
) -> Result<f64> {
    check_path(l, d, theta)?;
    profile.check_freq(f)?;
    if !(rel_tol > 0.0 && rel_tol <= 1e-4) {
        return Err(Error::range("rel_tol", rel_tol, "(0, 1e-4]"));
    }
    if let ProfileMode::ModelExact(_) = profile.mode {
        return Err(Error::Unsupported("a ModelExact profile has no path integral".into()));
    }
    let layers = profile.layers(f);
    let c = cos_deg(theta);
    let k = move |s: f64| -> f64 {
        let z = l + s * c;
        layers.iter().map(|&(kappa, h)| kappa * (-z / h).exp()).sum()
    };
    let (fa, fm, fb) = (k(0.0), k(0.5 * d), k(d));
    let whole = Simpson::rule(0.0, d, fa, fm, fb);
    // The integrand is positive and convex along the path, so the coarse rule
    // fixes the integral's magnitude well enough to set an absolute tolerance.
    let tol = rel_tol * whole.abs();
    let integrator = Simpson { k: &k, tol: rel_tol };
    integrator.recurse(0.0, fa, 0.5 * d, fm, d, fb, whole, tol, 0)
}

/// `exp(−optical_depth_quadrature(..))`.
pub fn transmittance_quadrature(
    profile: &AbsorptionProfile,
    l: f64,
    d: f64,
    theta: f64,
    f: f64,
    rel_tol: f64,
) -> Result<f64> {
    Ok((-optical_depth_quadrature(profile, l, d, theta, f, rel_tol)?).exp())
}

#[cfg(test)]
mod tests {
    use super::super::{optical_depth, transmittance_along_path, ContinuumTerm, Line};
    use super::*;
    use proptest::prelude::*;

    fn continuum(terms: Vec<(f64, f64, f64)>) -> AbsorptionProfile {
        let terms = terms
            .into_iter()
            .map(|(c0, c2, h)| ContinuumTerm {
                amplitude_poly: vec![c0, 0.0, c2],
                scale_height: h,
            })
            .collect();
        AbsorptionProfile::new("q", ProfileMode::Continuum(terms), 0.1, 1.0).unwrap()
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            (a - b).abs() / b.abs()
        }
    }

    #[test]
    fn empty_profile_is_one() {
        let p = AbsorptionProfile::transparent(0.1, 1.0).unwrap();
        assert_eq!(transmittance_quadrature(&p, 0.0, 5.0, 30.0, 0.3, 1e-10).unwrap(), 1.0);
    }

    #[test]
    fn spec_examples_cross_check() {
        let p = continuum(vec![(0.5, 0.0, 2.0)]);
        for theta in [0.0, 90.0] {
            let q = transmittance_quadrature(&p, 0.0, 1.0, theta, 0.5, 1e-12).unwrap();
            let c = transmittance_along_path(&p, 0.0, 1.0, theta, 0.5).unwrap();
            assert!(rel_err(q.ln(), c.ln()) < 1e-10);
        }
    }

    #[test]
    fn near_line_center() {
        let p = AbsorptionProfile::new(
            "lines",
            ProfileMode::Lines {
                continuum: vec![ContinuumTerm {
                    amplitude_poly: vec![0.05, 0.0, 8.0],
                    scale_height: 2.1,
                }],
                lines: vec![Line {
                    center: 0.183_31,
                    strength: 6.0,
                    half_width: 0.003,
                    scale_height: 2.1,
                }],
            },
            0.1,
            1.0,
        )
        .unwrap();
        for f in [0.1833, 0.18331, 0.1834, 0.19] {
            let q = transmittance_quadrature(&p, 1.0, 3.0, 9.0, f, 1e-10).unwrap();
            let c = transmittance_along_path(&p, 1.0, 3.0, 9.0, f).unwrap();
            assert!((q - c).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_bad_tolerance() {
        let p = continuum(vec![(0.5, 0.0, 2.0)]);
        assert!(transmittance_quadrature(&p, 0.0, 1.0, 0.0, 0.5, 1e-3).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn closed_form_matches_quadrature(
            c0 in 0.0..2.0f64, c2 in 0.0..5.0f64, h1 in 0.5..10.0f64,
            k2 in 0.0..0.5f64, h2 in 0.5..10.0f64,
            l in 0.0..20.0f64, d in 0.01..30.0f64, t in 0.0..=90.0f64, f in 0.1..1.0f64,
        ) {
            let p = continuum(vec![(c0, c2, h1), (k2, 0.0, h2)]);
            let q = optical_depth_quadrature(&p, l, d, t, f, 1e-12).unwrap();
            let c = optical_depth(&p, l, d, t, f).unwrap();
            prop_assert!(rel_err(q, c) <= 1e-10, "q={q} c={c}");
        }
    }
}
