//! Fits one model per zenith angle and interpolates between them.

use skyloss::atmosphere::{builtin_profile, generate_grid};
use skyloss::datagrid::{builtin_band, builtin_scenario};
use skyloss::regression::{fit_adaptive, FitOptions, Step2Estimator};

fn main() -> skyloss::Result<()> {
    let profile = builtin_profile("standard")?;
    let grid = generate_grid(&profile, &builtin_scenario("Dr2Dr")?, &builtin_band("THz0")?)?;
    let opts = FitOptions {
        step2: Step2Estimator::GaussNewton { max_iter: 50 },
        ..FitOptions::default()
    };
    let fit = fit_adaptive(&grid, 6, &opts)?;

    println!("theta   b2 (/km)   step-1 SSE   min R^2");
    for (a, r) in fit.model.angles().iter().zip(&fit.report.angles) {
        println!(
            "{:5.1}  {:9.5}  {:11.3e}  {:.6}",
            a.theta, a.b2, r.step1_sse, r.branch.r2_min
        );
    }
    println!("{} coefficients", fit.model.coefficient_count());

    // Between grid angles the per-angle rates are blended linearly.
    for theta in [45.0, 47.25, 49.5] {
        println!("rate at theta {theta}: {:.5} /km", fit.model.rate(0.2, theta, 0.81)?);
    }
    Ok(())
}
