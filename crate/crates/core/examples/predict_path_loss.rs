//! Predicts total path loss between two positions with a fitted model.

use skyloss::atmosphere::{builtin_profile, generate_grid, transmittance_along_path};
use skyloss::datagrid::{builtin_band, builtin_scenario};
use skyloss::geometry::Position3D;
use skyloss::model::{PathLossModel, PathLossQuery};
use skyloss::regression::{fit_adaptive, fit_agnostic, FitOptions};

fn main() -> skyloss::Result<()> {
    let profile = builtin_profile("standard")?;
    let grid = generate_grid(&profile, &builtin_scenario("Dr2Dr")?, &builtin_band("WR2")?)?;
    let opts = FitOptions::default();
    let models = [
        PathLossModel::Agnostic(fit_agnostic(&grid, 6, 6, &opts)?.model),
        PathLossModel::Adaptive(fit_adaptive(&grid, 6, &opts)?.model),
    ];

    let a = Position3D::new(0.0, 0.0, 120.0)?;
    let b = Position3D::new(55.0, 20.0, 160.0)?;
    for f in [0.63, 0.67, 0.70] {
        let q = PathLossQuery::new(a, b, f)?;
        for m in &models {
            let p = m.predict_path_loss(&q)?;
            println!(
                "{f} THz {:8}: fspl {:.3} dB + absorption {:.4} dB = {:.3} dB",
                m.kind(),
                p.fspl_db,
                p.abs_db,
                p.total_db
            );
        }
        let g = models[0].predict_path_loss(&q)?.geometry;
        let tau = transmittance_along_path(&profile, g.l / 1000.0, g.d / 1000.0, g.theta, f)?;
        println!("{f} THz generator: absorption {:.4} dB", -10.0 * tau.log10());
    }
    Ok(())
}
