//! Scores both models and the free-space baseline over several bands.

use skyloss::atmosphere::{builtin_profile, generate_grid};
use skyloss::datagrid::{builtin_band, builtin_scenario};
use skyloss::evaluation::{nrmse_vs_axis_csv, per_band_report, BandInput, SliceAxis};
use skyloss::model::PathLossModel;
use skyloss::regression::{fit_adaptive, fit_agnostic, FitOptions};

fn main() -> skyloss::Result<()> {
    let profile = builtin_profile("standard")?;
    let scenario = builtin_scenario("Dr2Dr")?;
    let opts = FitOptions::default();

    let mut grids = Vec::new();
    for name in ["D-G", "Y0", "WR1", "THz2"] {
        grids.push(generate_grid(
            &profile,
            &scenario,
            &builtin_band(name)?.with_step(0.003)?,
        )?);
    }
    let mut models = Vec::new();
    for g in &grids {
        models.push((
            PathLossModel::Agnostic(fit_agnostic(g, 6, 6, &opts)?.model),
            PathLossModel::Adaptive(fit_adaptive(g, 6, &opts)?.model),
        ));
    }
    let inputs: Vec<BandInput> = grids
        .iter()
        .zip(&models)
        .map(|(g, (ag, ad))| BandInput {
            truth: g,
            agnostic: Some(ag),
            adaptive: Some(ad),
        })
        .collect();
    let report = per_band_report(&inputs)?;

    println!("band   L_abs dB   agnostic    adaptive    fspl");
    for b in &report.per_band {
        let m = &b.metrics;
        println!(
            "{:5} {:8.3}   {:.3e}   {:.3e}   {:.3e}",
            b.band,
            b.mean_absorption_db,
            m.agnostic.unwrap().nrmse,
            m.adaptive.unwrap().nrmse,
            m.fspl.nrmse
        );
    }
    print!("{}", nrmse_vs_axis_csv(&report, SliceAxis::Theta));
    Ok(())
}
