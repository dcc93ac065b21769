//! Cascaded regression: exponential in distance, exponential in altitude,
//! polynomial in frequency.

mod linear;
mod pipeline;
mod poly;

pub use linear::{
    fit_exponential_altitude, fit_loglinear_1var, fit_loglinear_2var, refine_exponential_gauss_newton,
    refit_amplitude_linear, refit_amplitude_log, sse_for_slope, SlopeFit, SplitSlopeFit, Step2Fit,
};
pub use pipeline::{
    adaptive_step1, agnostic_induced_sse, agnostic_step1, fit_adaptive, fit_agnostic, AdaptiveFit, AdaptiveFitReport,
    AgnosticFit, AgnosticFitReport, AngleReport, Branch, BranchReport, CellFits, ClampEvent, FitOptions,
    Step2Estimator,
};
pub use poly::{fit_polynomial, horner, FreqMap, PolyFit};
