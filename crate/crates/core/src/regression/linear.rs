//! Closed-form least-squares stages of the cascaded fit.
//!
//! Every sum runs in input order so results are reproducible bit for bit.

use crate::error::{Error, Result};

/// Horizontal/vertical exponent fit `ln τ ≈ b_h·d_h + b_v·d_v`.
///
/// Holds the unconstrained least-squares optimum; sign clamping happens in
/// the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSlopeFit {
    pub b1_h: f64,
    pub b1_v: f64,
    /// Sum of squared `ln τ` residuals.
    pub sse: f64,
    pub n_samples: usize,
}

/// Single exponent fit `ln τ ≈ b·d` at a fixed zenith angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub b1: f64,
    pub sse: f64,
    pub n_samples: usize,
}

/// Altitude fit `b₁(l) ≈ a₂·e^{b₂·l}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step2Fit {
    pub a2: f64,
    pub b2: f64,
    /// Coefficient of determination, clamped to `[0, 1]`.
    pub r2: f64,
}

/// Fits `ln τ = b_h·d_h + b_v·d_v` without intercept from
/// `(d_h, d_v, ln τ)` samples via the 2×2 normal equations.
pub fn fit_loglinear_2var(samples: &[(f64, f64, f64)]) -> Result<SplitSlopeFit> {
    if samples.len() < 2 {
        return Err(Error::SingularFit(format!(
            "need at least 2 samples, got {}",
            samples.len()
        )));
    }
    let (mut shh, mut shv, mut svv, mut shy, mut svy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(h, v, y) in samples {
        shh += h * h;
        shv += h * v;
        svv += v * v;
        shy += h * y;
        svy += v * y;
    }
    let det = shh * svv - shv * shv;
    if shh == 0.0 || svv == 0.0 || det <= 1e-12 * shh * svv {
        return Err(Error::SingularFit(
            "horizontal and vertical distance samples are collinear".into(),
        ));
    }
    let b1_h = (svv * shy - shv * svy) / det;
    let b1_v = (shh * svy - shv * shy) / det;
    let sse = samples
        .iter()
        .map(|&(h, v, y)| {
            let r = y - b1_h * h - b1_v * v;
            r * r
        })
        .sum();
    Ok(SplitSlopeFit {
        b1_h,
        b1_v,
        sse,
        n_samples: samples.len(),
    })
}

/// Fits `ln τ = b·d` without intercept from `(d, ln τ)` samples.
pub fn fit_loglinear_1var(samples: &[(f64, f64)]) -> Result<SlopeFit> {
    if samples.is_empty() {
        return Err(Error::SingularFit("no samples".into()));
    }
    let (sdy, sdd) = samples
        .iter()
        .fold((0.0, 0.0), |(sdy, sdd), &(d, y)| (sdy + d * y, sdd + d * d));
    if sdd == 0.0 {
        return Err(Error::SingularFit("all distances are zero".into()));
    }
    let b1 = sdy / sdd;
    Ok(SlopeFit {
        b1,
        sse: sse_for_slope(samples, b1),
        n_samples: samples.len(),
    })
}

/// Residual sum of squares of `ln τ ≈ slope·d` over `(d, ln τ)` samples.
pub fn sse_for_slope(samples: &[(f64, f64)], slope: f64) -> f64 {
    samples
        .iter()
        .map(|&(d, y)| {
            let r = y - slope * d;
            r * r
        })
        .sum()
}

fn check_altitude_pairs(pairs: &[(f64, f64)]) -> Result<()> {
    if let Some(&(l, b)) = pairs.iter().find(|p| !(p.1 < 0.0)) {
        return Err(Error::Sign(format!(
            "distance exponent {b} at l = {l} km is not negative"
        )));
    }
    let first = pairs.first().map(|p| p.0);
    if pairs.len() < 2 || pairs.iter().all(|p| Some(p.0) == first) {
        return Err(Error::SingularFit("need at least 2 distinct altitudes".into()));
    }
    Ok(())
}

/// Fits `b₁(l) = a₂·e^{b₂·l}` by ordinary least squares of `ln(−b₁)` on `l`.
pub fn fit_exponential_altitude(pairs: &[(f64, f64)]) -> Result<Step2Fit> {
    check_altitude_pairs(pairs)?;
    let n = pairs.len() as f64;
    let logs: Vec<(f64, f64)> = pairs.iter().map(|&(l, b)| (l, (-b).ln())).collect();
    let l_mean = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let y_mean = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sly, mut sll) = (0.0, 0.0);
    for &(l, y) in &logs {
        sly += (l - l_mean) * (y - y_mean);
        sll += (l - l_mean) * (l - l_mean);
    }
    let b2 = sly / sll;
    let intercept = y_mean - b2 * l_mean;
    let (mut ss_res, mut ss_tot) = (0.0, 0.0);
    for &(l, y) in &logs {
        let r = y - intercept - b2 * l;
        ss_res += r * r;
        ss_tot += (y - y_mean) * (y - y_mean);
    }
    Ok(Step2Fit {
        a2: -intercept.exp(),
        b2,
        r2: r_squared(ss_res, ss_tot),
    })
}

fn r_squared(ss_res: f64, ss_tot: f64) -> f64 {
    if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else if ss_res <= f64::EPSILON {
        1.0
    } else {
        0.0
    }
}

/// Refits `a₂` with `b₂` held fixed, in the log domain:
/// `ln(−a₂) = mean(ln(−b₁) − b₂·l)`.
pub fn refit_amplitude_log(pairs: &[(f64, f64)], b2: f64) -> Result<f64> {
    check_altitude_pairs(pairs)?;
    let mean = pairs.iter().map(|&(l, b)| (-b).ln() - b2 * l).sum::<f64>() / pairs.len() as f64;
    Ok(-mean.exp())
}

/// Refits `a₂` with `b₂` held fixed, minimizing linear-domain residuals.
pub fn refit_amplitude_linear(pairs: &[(f64, f64)], b2: f64) -> Result<f64> {
    check_altitude_pairs(pairs)?;
    let (num, den) = pairs.iter().fold((0.0, 0.0), |(num, den), &(l, b)| {
        let e = (b2 * l).exp();
        (num + b * e, den + e * e)
    });
    Ok(num / den)
}

fn linear_sse(pairs: &[(f64, f64)], a2: f64, b2: f64) -> f64 {
    pairs
        .iter()
        .map(|&(l, b)| {
            let r = b - a2 * (b2 * l).exp();
            r * r
        })
        .sum()
}

/// Refines a log-linear altitude fit by damped Gauss–Newton on the
/// linear-domain residuals `b₁ − a₂·e^{b₂·l}`.
pub fn refine_exponential_gauss_newton(pairs: &[(f64, f64)], start: Step2Fit, max_iter: usize) -> Result<Step2Fit> {
    check_altitude_pairs(pairs)?;
    let (mut a, mut b) = (start.a2, start.b2);
    let mut sse = linear_sse(pairs, a, b);
    for _ in 0..max_iter {
        let (mut jaa, mut jab, mut jbb, mut ga, mut gb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(l, y) in pairs {
            let e = (b * l).exp();
            let r = y - a * e;
            let (da, db) = (e, a * l * e);
            jaa += da * da;
            jab += da * db;
            jbb += db * db;
            ga += da * r;
            gb += db * r;
        }
        let det = jaa * jbb - jab * jab;
        if !(det > 0.0) {
            break;
        }
        let step_a = (jbb * ga - jab * gb) / det;
        let step_b = (jaa * gb - jab * ga) / det;
        let mut damping = 1.0;
        let mut improved = false;
        while damping > 1e-6 {
            let (na, nb) = (a + damping * step_a, b + damping * step_b);
            let nsse = linear_sse(pairs, na, nb);
            if nsse < sse && na < 0.0 {
                let gain = sse - nsse;
                a = na;
                b = nb;
                sse = nsse;
                improved = gain > 1e-15 * sse.max(f64::MIN_POSITIVE);
                break;
            }
            damping *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let mean = pairs.iter().map(|p| p.1).sum::<f64>() / pairs.len() as f64;
    let ss_tot = pairs.iter().map(|p| (p.1 - mean) * (p.1 - mean)).sum();
    Ok(Step2Fit {
        a2: a,
        b2: b,
        r2: r_squared(sse, ss_tot),
    })
}
