//! Fits the angle-agnostic model and inspects its coefficients.

use skyloss::atmosphere::{builtin_profile, generate_grid};
use skyloss::datagrid::{builtin_band, builtin_scenario};
use skyloss::model::PathLossModel;
use skyloss::regression::{fit_agnostic, FitOptions};

fn main() -> skyloss::Result<()> {
    let profile = builtin_profile("standard")?;
    let grid = generate_grid(&profile, &builtin_scenario("Dr2Dr")?, &builtin_band("Y1")?)?;
    let fit = fit_agnostic(&grid, 6, 6, &FitOptions::default())?;
    let (m, r) = (&fit.model, &fit.report);

    println!(
        "{} samples, {} excluded, {} clamp events",
        r.n_samples,
        r.excluded_samples,
        r.clamp_events.len()
    );
    println!("step-1 SSE {:.3e}", r.step1_sse);
    println!(
        "b2_h = {:.5} /km (spread {:.2e}), b2_v = {:.5} /km (spread {:.2e})",
        m.b2_h, r.horizontal.b2_spread, m.b2_v, r.vertical.b2_spread
    );
    println!("lambda_h(u) = {:?}", m.poly_h.coeffs());
    println!("lambda_v(u) = {:?}", m.poly_v.coeffs());

    for l in [0.0, 0.25, 0.5] {
        let (h, v) = m.rates(l, 0.4);
        println!("rates at l = {l} km, 0.4 THz: horizontal {h:.5}, vertical {v:.5} /km");
    }
    println!(
        "{} coefficients",
        PathLossModel::Agnostic(fit.model).coefficient_count()
    );
    Ok(())
}
