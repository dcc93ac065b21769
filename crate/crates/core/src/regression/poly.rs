use nalgebra::{DMatrix, DVector};

use crate::datagrid::SubBand;
use crate::error::{Error, Result};

/// Affine map from a frequency span `[lo, hi]` in THz onto `u ∈ [-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqMap {
    lo: f64,
    hi: f64,
}

impl FreqMap {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(
                "frequency map",
                format!("need lo < hi, got [{lo}, {hi}]"),
            ));
        }
        Ok(Self { lo, hi })
    }

    pub fn for_band(band: &SubBand) -> Self {
        Self {
            lo: band.f_lo(),
            hi: band.f_hi(),
        }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn apply(&self, f: f64) -> f64 {
        ((f - self.lo) - (self.hi - f)) / (self.hi - self.lo)
    }
}

/// Evaluates `Σ cᵢ·uⁱ` by Horner's rule.
pub fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

/// A least-squares polynomial in normalized frequency.
///
/// Equality compares coefficients and frequency map only.
#[derive(Debug, Clone)]
pub struct PolyFit {
    coeffs: Vec<f64>,
    f_map: FreqMap,
    /// Residual sum of squares of the fit (zero for imported models).
    pub sse: f64,
}

impl PartialEq for PolyFit {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs && self.f_map == other.f_map
    }
}

impl PolyFit {
    /// Wraps known coefficients (lowest order first).
    pub fn from_coeffs(coeffs: Vec<f64>, f_map: FreqMap) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("polynomial", "no coefficients"));
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::invalid("polynomial", format!("non-finite coefficient {c}")));
        }
        Ok(Self {
            coeffs,
            f_map,
            sse: 0.0,
        })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn f_map(&self) -> FreqMap {
        self.f_map
    }

    pub fn eval(&self, f: f64) -> f64 {
        horner(&self.coeffs, self.f_map.apply(f))
    }
}

/// Least-squares polynomial of the given degree through `(f, y)` pairs.
///
/// The Vandermonde system in `u = f_map(f)` is solved through a QR
/// factorization rather than the normal equations.
pub fn fit_polynomial(pairs: &[(f64, f64)], degree: usize, f_map: FreqMap) -> Result<PolyFit> {
    let ncoef = degree + 1;
    let mut distinct: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < ncoef {
        return Err(Error::Underdetermined(format!(
            "degree {degree} needs at least {ncoef} distinct frequencies, got {}",
            distinct.len()
        )));
    }
    if let Some(p) = pairs.iter().find(|p| !(p.0.is_finite() && p.1.is_finite())) {
        return Err(Error::invalid("polynomial data", format!("non-finite pair {p:?}")));
    }

    let m = pairs.len();
    let vander = DMatrix::from_fn(m, ncoef, |i, j| f_map.apply(pairs[i].0).powi(j as i32));
    let y = DVector::from_iterator(m, pairs.iter().map(|p| p.1));
    let qr = vander.clone().qr();
    let r = qr.r();
    let scale = (0..ncoef).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..ncoef).any(|i| r[(i, i)].abs() <= 1e-13 * scale) {
        return Err(Error::SingularFit("Vandermonde matrix is rank deficient".into()));
    }
    let qty = qr.q().transpose() * &y;
    let coeffs = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::SingularFit("triangular solve failed".into()))?;
    let resid = &vander * &coeffs - &y;
    Ok(PolyFit {
        coeffs: coeffs.iter().copied().collect(),
        f_map,
        sse: resid.norm_squared(),
    })
}
