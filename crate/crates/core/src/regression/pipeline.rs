//! The three-stage cascaded fit over a transmittance grid.
//!
//! Step 1 regresses `ln τ` on distance in every `(l, f)` cell, step 2 fits
//! the distance exponents across altitude per frequency, and step 3 fits
//! the altitude amplitudes with a polynomial in frequency.

use rayon::prelude::*;

use super::linear::{
    fit_exponential_altitude, fit_loglinear_1var, fit_loglinear_2var, refine_exponential_gauss_newton,
    refit_amplitude_linear, refit_amplitude_log, sse_for_slope, SlopeFit, SplitSlopeFit, Step2Fit,
};
use super::poly::{fit_polynomial, FreqMap, PolyFit};
use crate::datagrid::TransmittanceGrid;
use crate::error::{Error, FitStage, Result};
use crate::geometry::{cos_deg, sin_deg};
use crate::model::{AdaptiveModel, AgnosticModel, AngleCoefficients, FitMetadata};

/// Estimator used for the altitude stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Step2Estimator {
    /// Ordinary least squares on `ln(−b₁)`.
    #[default]
    LogLinear,
    /// Log-linear start refined by damped Gauss–Newton in the linear domain.
    GaussNewton { max_iter: usize },
}

impl Step2Estimator {
    pub fn name(&self) -> &'static str {
        match self {
            Step2Estimator::LogLinear => "log-linear",
            Step2Estimator::GaussNewton { .. } => "gauss-newton",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Samples with `τ` below this are excluded from step 1.
    pub tau_min: f64,
    /// Non-negative step-1 exponents are replaced by `−clamp_eps`.
    pub clamp_eps: f64,
    pub step2: Step2Estimator,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            tau_min: 1e-12,
            clamp_eps: 1e-15,
            step2: Step2Estimator::LogLinear,
        }
    }
}

impl FitOptions {
    fn validate(&self) -> Result<()> {
        if !(self.tau_min > 0.0 && self.tau_min < 1.0) {
            return Err(Error::range("tau_min", self.tau_min, "(0, 1)"));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps.is_finite()) {
            return Err(Error::range("clamp_eps", self.clamp_eps, "> 0"));
        }
        Ok(())
    }
}

/// Which exponent a clamp event refers to.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    Horizontal,
    Vertical,
    Angle(f64),
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Horizontal => write!(f, "horizontal"),
            Branch::Vertical => write!(f, "vertical"),
            Branch::Angle(t) => write!(f, "theta={t}"),
        }
    }
}

/// A non-negative step-1 exponent that was clamped before step 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampEvent {
    pub branch: Branch,
    pub l: f64,
    pub f: f64,
    pub raw: f64,
}

/// Step-1 fits indexed by `(altitude, frequency)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFits<T> {
    n_f: usize,
    fits: Vec<T>,
}

impl<T> CellFits<T> {
    pub fn get(&self, li: usize, fi: usize) -> &T {
        &self.fits[li * self.n_f + fi]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.fits.iter()
    }
}

/// Summary of steps 2 and 3 for one exponent branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchReport {
    pub b2_mean: f64,
    /// `max − min` of the per-frequency `b₂` before freezing.
    pub b2_spread: f64,
    pub r2_min: f64,
    pub r2_mean: f64,
    /// Residual sum of squares of the frequency polynomial.
    pub step3_sse: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgnosticFitReport {
    pub n_samples: usize,
    pub excluded_samples: usize,
    /// Total step-1 residual sum of squares in `ln τ`.
    pub step1_sse: f64,
    pub clamp_events: Vec<ClampEvent>,
    pub horizontal: BranchReport,
    pub vertical: BranchReport,
    /// Raw (unclamped) step-1 fits.
    pub step1: CellFits<SplitSlopeFit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleReport {
    pub theta: f64,
    pub step1_sse: f64,
    pub branch: BranchReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveFitReport {
    pub n_samples: usize,
    pub excluded_samples: usize,
    pub step1_sse: f64,
    pub clamp_events: Vec<ClampEvent>,
    pub angles: Vec<AngleReport>,
}

#[derive(Debug, Clone)]
pub struct AgnosticFit {
    pub model: AgnosticModel,
    pub report: AgnosticFitReport,
}

#[derive(Debug, Clone)]
pub struct AdaptiveFit {
    pub model: AdaptiveModel,
    pub report: AdaptiveFitReport,
}

/// Collects ordered parallel results, reporting the first error in index order.
fn first_error<T>(items: Vec<Result<T>>) -> Result<Vec<T>> {
    items.into_iter().collect()
}

fn ln_samples(grid: &TransmittanceGrid, li: usize, ti: usize, fi: usize, tau_min: f64) -> (Vec<(f64, f64)>, usize) {
    let ax = grid.axes();
    let v = grid.values();
    let mut out = Vec::with_capacity(ax.distances().len());
    let mut excluded = 0;
    for (di, &d) in ax.distances().iter().enumerate() {
        let tau = v[[li, di, ti, fi]];
        if tau < tau_min {
            excluded += 1;
        } else {
            out.push((d, tau.ln()));
        }
    }
    (out, excluded)
}

/// Raw θ-agnostic step 1: `ln τ = b_h·d_h + b_v·d_v` per `(l, f)` cell.
pub fn agnostic_step1(grid: &TransmittanceGrid, opts: &FitOptions) -> Result<(CellFits<SplitSlopeFit>, usize)> {
    opts.validate()?;
    let ax = grid.axes();
    let (nl, nf) = (ax.altitudes().len(), ax.frequencies().len());
    let trig: Vec<(f64, f64)> = ax.thetas().iter().map(|&t| (sin_deg(t), cos_deg(t))).collect();
    let cells: Vec<Result<(SplitSlopeFit, usize)>> = (0..nl * nf)
        .into_par_iter()
        .map(|i| {
            let (li, fi) = (i / nf, i % nf);
            let mut samples = Vec::new();
            let mut excluded = 0;
            for (ti, &(s, c)) in trig.iter().enumerate() {
                let (pts, ex) = ln_samples(grid, li, ti, fi, opts.tau_min);
                excluded += ex;
                samples.extend(pts.into_iter().map(|(d, y)| (d * s, d * c, y)));
            }
            let fit = fit_loglinear_2var(&samples).map_err(|e| match e {
                Error::SingularFit(m) => Error::SingularFit(format!(
                    "{m} at l = {} km, f = {} THz",
                    ax.altitudes()[li],
                    ax.frequencies()[fi]
                )),
                e => e,
            })?;
            Ok((fit, excluded))
        })
        .collect();
    let cells = first_error(cells).map_err(|e| e.at_stage(FitStage::Distance, None))?;
    let excluded = cells.iter().map(|c| c.1).sum();
    Ok((
        CellFits {
            n_f: nf,
            fits: cells.into_iter().map(|c| c.0).collect(),
        },
        excluded,
    ))
}

/// Raw θ-adaptive step 1 at one angle index: `ln τ = b·d` per `(l, f)` cell.
pub fn adaptive_step1(grid: &TransmittanceGrid, ti: usize, opts: &FitOptions) -> Result<(CellFits<SlopeFit>, usize)> {
    opts.validate()?;
    let ax = grid.axes();
    let theta = ax.thetas()[ti];
    let (nl, nf) = (ax.altitudes().len(), ax.frequencies().len());
    let cells: Vec<Result<(SlopeFit, usize)>> = (0..nl * nf)
        .into_par_iter()
        .map(|i| {
            let (li, fi) = (i / nf, i % nf);
            let (pts, excluded) = ln_samples(grid, li, ti, fi, opts.tau_min);
            Ok((fit_loglinear_1var(&pts)?, excluded))
        })
        .collect();
    let cells = first_error(cells).map_err(|e| e.at_stage(FitStage::Distance, Some(theta)))?;
    let excluded = cells.iter().map(|c| c.1).sum();
    Ok((
        CellFits {
            n_f: nf,
            fits: cells.into_iter().map(|c| c.0).collect(),
        },
        excluded,
    ))
}

/// Step-1 residual sum of squares that the θ-agnostic exponents induce on
/// the samples of one angle, `Σ (ln τ − (b_h·sin θ + b_v·cos θ)·d)²`.
pub fn agnostic_induced_sse(grid: &TransmittanceGrid, step1: &CellFits<SplitSlopeFit>, ti: usize, tau_min: f64) -> f64 {
    let ax = grid.axes();
    let t = ax.thetas()[ti];
    let (s, c) = (sin_deg(t), cos_deg(t));
    let mut total = 0.0;
    for li in 0..ax.altitudes().len() {
        for fi in 0..ax.frequencies().len() {
            let fit = step1.get(li, fi);
            let (pts, _) = ln_samples(grid, li, ti, fi, tau_min);
            total += sse_for_slope(&pts, fit.b1_h * s + fit.b1_v * c);
        }
    }
    total
}

/// Clamps one branch of step-1 exponents, returning `b₁[l][f]`.
fn clamp_branch(
    raw: impl Fn(usize, usize) -> f64,
    grid: &TransmittanceGrid,
    branch: Branch,
    eps: f64,
    events: &mut Vec<ClampEvent>,
) -> Vec<Vec<f64>> {
    let ax = grid.axes();
    ax.altitudes()
        .iter()
        .enumerate()
        .map(|(li, &l)| {
            ax.frequencies()
                .iter()
                .enumerate()
                .map(|(fi, &f)| {
                    let b = raw(li, fi);
                    if b >= 0.0 {
                        events.push(ClampEvent { branch, l, f, raw: b });
                        -eps
                    } else {
                        b
                    }
                })
                .collect()
        })
        .collect()
}

/// Steps 2 and 3 for one branch given clamped `b₁[l][f]`.
fn fit_branch(
    grid: &TransmittanceGrid,
    b1: &[Vec<f64>],
    degree: usize,
    opts: &FitOptions,
    theta: Option<f64>,
) -> Result<(f64, PolyFit, BranchReport)> {
    let ax = grid.axes();
    let freqs = ax.frequencies();
    let pairs_at =
        |fi: usize| -> Vec<(f64, f64)> { ax.altitudes().iter().zip(b1).map(|(&l, row)| (l, row[fi])).collect() };

    let per_f: Vec<Result<Step2Fit>> = (0..freqs.len())
        .into_par_iter()
        .map(|fi| {
            let pairs = pairs_at(fi);
            let start = fit_exponential_altitude(&pairs)?;
            match opts.step2 {
                Step2Estimator::LogLinear => Ok(start),
                Step2Estimator::GaussNewton { max_iter } => refine_exponential_gauss_newton(&pairs, start, max_iter),
            }
        })
        .collect();
    let per_f = first_error(per_f).map_err(|e| e.at_stage(FitStage::Altitude, theta))?;

    let n = per_f.len() as f64;
    let b2_mean = per_f.iter().map(|s| s.b2).sum::<f64>() / n;
    let (b2_min, b2_max) = per_f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        (lo.min(s.b2), hi.max(s.b2))
    });
    let r2_min = per_f.iter().map(|s| s.r2).fold(f64::INFINITY, f64::min);
    let r2_mean = per_f.iter().map(|s| s.r2).sum::<f64>() / n;

    let a2: Vec<Result<(f64, f64)>> = (0..freqs.len())
        .into_par_iter()
        .map(|fi| {
            let pairs = pairs_at(fi);
            let a = match opts.step2 {
                Step2Estimator::LogLinear => refit_amplitude_log(&pairs, b2_mean)?,
                Step2Estimator::GaussNewton { .. } => refit_amplitude_linear(&pairs, b2_mean)?,
            };
            Ok((freqs[fi], a))
        })
        .collect();
    let a2 = first_error(a2).map_err(|e| e.at_stage(FitStage::Altitude, theta))?;

    let poly = fit_polynomial(&a2, degree, FreqMap::for_band(ax.band()))
        .map_err(|e| e.at_stage(FitStage::Frequency, theta))?;
    let report = BranchReport {
        b2_mean,
        b2_spread: b2_max - b2_min,
        r2_min,
        r2_mean,
        step3_sse: poly.sse,
    };
    Ok((b2_mean, poly, report))
}

fn metadata(grid: &TransmittanceGrid, opts: &FitOptions, excluded: usize, clamps: usize) -> FitMetadata {
    FitMetadata {
        training_scenario: grid.scenario().name().to_string(),
        step2_estimator: opts.step2.name().to_string(),
        intercept_refit: true,
        tau_min: opts.tau_min,
        excluded_samples: excluded,
        clamp_events: clamps,
    }
}

/// Fits the θ-agnostic model with polynomial degrees `P_h` and `P_v`.
pub fn fit_agnostic(
    grid: &TransmittanceGrid,
    degree_h: usize,
    degree_v: usize,
    opts: &FitOptions,
) -> Result<AgnosticFit> {
    let (step1, excluded) = agnostic_step1(grid, opts)?;
    let mut clamps = Vec::new();
    let b1_h = clamp_branch(
        |l, f| step1.get(l, f).b1_h,
        grid,
        Branch::Horizontal,
        opts.clamp_eps,
        &mut clamps,
    );
    let b1_v = clamp_branch(
        |l, f| step1.get(l, f).b1_v,
        grid,
        Branch::Vertical,
        opts.clamp_eps,
        &mut clamps,
    );
    let (b2_h, poly_h, horizontal) = fit_branch(grid, &b1_h, degree_h, opts, None)?;
    let (b2_v, poly_v, vertical) = fit_branch(grid, &b1_v, degree_v, opts, None)?;
    let model = AgnosticModel {
        b2_h,
        b2_v,
        poly_h,
        poly_v,
        band: grid.band().clone(),
        metadata: metadata(grid, opts, excluded, clamps.len()),
    };
    let report = AgnosticFitReport {
        n_samples: grid.n_samples(),
        excluded_samples: excluded,
        step1_sse: step1.iter().map(|s| s.sse).sum(),
        clamp_events: clamps,
        horizontal,
        vertical,
        step1,
    };
    Ok(AgnosticFit { model, report })
}

/// Fits the θ-adaptive model with a common polynomial degree `P`.
pub fn fit_adaptive(grid: &TransmittanceGrid, degree: usize, opts: &FitOptions) -> Result<AdaptiveFit> {
    opts.validate()?;
    let thetas = grid.axes().thetas().to_vec();
    type AngleOut = (AngleCoefficients, AngleReport, Vec<ClampEvent>, usize);
    let per_angle: Vec<Result<AngleOut>> = (0..thetas.len())
        .into_par_iter()
        .map(|ti| {
            let theta = thetas[ti];
            let (step1, excluded) = adaptive_step1(grid, ti, opts)?;
            let mut clamps = Vec::new();
            let b1 = clamp_branch(
                |l, f| step1.get(l, f).b1,
                grid,
                Branch::Angle(theta),
                opts.clamp_eps,
                &mut clamps,
            );
            let (b2, poly, branch) = fit_branch(grid, &b1, degree, opts, Some(theta))?;
            let report = AngleReport {
                theta,
                step1_sse: step1.iter().map(|s| s.sse).sum(),
                branch,
            };
            Ok((AngleCoefficients { theta, b2, poly }, report, clamps, excluded))
        })
        .collect();
    let per_angle = first_error(per_angle)?;

    let mut angles = Vec::with_capacity(per_angle.len());
    let mut reports = Vec::with_capacity(per_angle.len());
    let mut clamp_events = Vec::new();
    let mut excluded = 0;
    for (coef, report, clamps, ex) in per_angle {
        angles.push(coef);
        reports.push(report);
        clamp_events.extend(clamps);
        excluded += ex;
    }
    let meta = metadata(grid, opts, excluded, clamp_events.len());
    let model = AdaptiveModel::new(angles, grid.band().clone(), meta)?;
    let report = AdaptiveFitReport {
        n_samples: grid.n_samples(),
        excluded_samples: excluded,
        step1_sse: reports.iter().map(|r| r.step1_sse).sum(),
        clamp_events,
        angles: reports,
    };
    Ok(AdaptiveFit { model, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagrid::{builtin_band, GridAxes, ScenarioSpec};
    use crate::regression::horner;

    fn small_axes() -> GridAxes {
        let scenario = ScenarioSpec::new(
            "test",
            vec![0.0, 0.5, 1.0, 1.5],
            vec![0.1, 0.4, 0.7, 1.0],
            vec![0.0, 30.0, 60.0, 90.0],
        )
        .unwrap();
        let band = builtin_band("Y0").unwrap().with_step(0.003).unwrap();
        GridAxes::new(scenario, band)
    }

    fn exact_grid(ch: &[f64], cv: &[f64], b2h: f64, b2v: f64) -> TransmittanceGrid {
        let axes = small_axes();
        let map = FreqMap::for_band(axes.band());
        TransmittanceGrid::from_fn(axes, |l, d, t, f| {
            let u = map.apply(f);
            let e = horner(ch, u) * (b2h * l).exp() * d * sin_deg(t) + horner(cv, u) * (b2v * l).exp() * d * cos_deg(t);
            Ok(e.exp())
        })
        .unwrap()
    }

    #[test]
    fn agnostic_recovers_exact_model() {
        let (ch, cv) = ([-1.0, 0.2, 0.1], [-0.5, -0.1]);
        let grid = exact_grid(&ch, &cv, -0.4, -0.55);
        let fit = fit_agnostic(&grid, 2, 1, &FitOptions::default()).unwrap();
        let m = &fit.model;
        assert!((m.b2_h + 0.4).abs() < 1e-10);
        assert!((m.b2_v + 0.55).abs() < 1e-10);
        for (a, b) in m.poly_h.coeffs().iter().zip(ch) {
            assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in m.poly_v.coeffs().iter().zip(cv) {
            assert!((a - b).abs() < 1e-10);
        }
        assert!(fit.report.clamp_events.is_empty());
        assert_eq!(fit.report.excluded_samples, 0);
        assert!(fit.report.step1_sse < 1e-20);
    }

    #[test]
    fn gauss_newton_also_recovers() {
        let grid = exact_grid(&[-1.0], &[-0.5], -0.4, -0.55);
        let opts = FitOptions {
            step2: Step2Estimator::GaussNewton { max_iter: 50 },
            ..FitOptions::default()
        };
        let fit = fit_agnostic(&grid, 0, 0, &opts).unwrap();
        assert!((fit.model.b2_h + 0.4).abs() < 1e-9);
        assert_eq!(fit.model.metadata.step2_estimator, "gauss-newton");
    }

    #[test]
    fn transparent_grid_is_clamped() {
        let axes = small_axes();
        let grid = TransmittanceGrid::from_fn(axes, |_, _, _, _| Ok(1.0)).unwrap();
        let fit = fit_agnostic(&grid, 1, 1, &FitOptions::default()).unwrap();
        let n_cells = 4 * grid.axes().frequencies().len();
        assert_eq!(fit.report.clamp_events.len(), 2 * n_cells);
        assert!(fit.model.poly_h.eval(0.35).abs() <= 1e-14);
        let tau = fit.model.predict_tau(0.5, 1.0, 1.0, 0.35).unwrap().tau;
        assert!((tau - 1.0).abs() < 1e-13);
    }

    #[test]
    fn adaptive_dominates_agnostic_step1() {
        let grid = exact_grid(&[-1.0, 0.3], &[-0.6], -0.2, -0.7);
        let opts = FitOptions::default();
        let ag = fit_agnostic(&grid, 1, 0, &opts).unwrap();
        let ad = fit_adaptive(&grid, 1, &opts).unwrap();
        assert_eq!(ad.model.coefficient_count(), 4 * 3);
        for (ti, r) in ad.report.angles.iter().enumerate() {
            let induced = agnostic_induced_sse(&grid, &ag.report.step1, ti, opts.tau_min);
            assert!(r.step1_sse <= induced + 1e-9);
        }
    }

    #[test]
    fn single_altitude_fails_at_step2() {
        let scenario = ScenarioSpec::new("one", vec![0.5], vec![0.2, 0.5], vec![0.0, 90.0]).unwrap();
        let band = builtin_band("Y0").unwrap().with_step(0.01).unwrap();
        let grid = TransmittanceGrid::from_fn(GridAxes::new(scenario, band), |_, d, _, _| Ok((-d).exp())).unwrap();
        let err = fit_agnostic(&grid, 1, 1, &FitOptions::default()).unwrap_err();
        assert!(
            matches!(
                err,
                Error::Stage {
                    stage: FitStage::Altitude,
                    ..
                }
            ),
            "{err}"
        );
    }

    #[test]
    fn too_few_frequencies_fails_at_step3_with_theta() {
        let axes = small_axes();
        let n = axes.frequencies().len();
        let grid = exact_grid(&[-1.0], &[-0.5], -0.4, -0.5);
        let err = fit_adaptive(&grid, n, &FitOptions::default()).unwrap_err();
        match err {
            Error::Stage { stage, theta, .. } => {
                assert_eq!(stage, FitStage::Frequency);
                assert_eq!(theta, Some(0.0));
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn tiny_tau_is_excluded() {
        let axes = small_axes();
        let grid = TransmittanceGrid::from_fn(axes, |l, d, _, _| {
            Ok(if d > 0.9 && l == 0.0 {
                1e-13
            } else {
                (-d * (-l).exp()).exp()
            })
        })
        .unwrap();
        let (_, excluded) = agnostic_step1(&grid, &FitOptions::default()).unwrap();
        assert_eq!(excluded, 4 * grid.axes().frequencies().len());
    }
}
