//! Exports a fitted model, reads it back and predicts from the file alone.

use skyloss::atmosphere::{builtin_profile, generate_grid};
use skyloss::datagrid::{builtin_band, builtin_scenario};
use skyloss::geometry::Position3D;
use skyloss::model::{export_model, import_model, PathLossModel, PathLossQuery};
use skyloss::regression::{fit_adaptive, FitOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = builtin_profile("standard")?;
    let grid = generate_grid(&profile, &builtin_scenario("Dr2Dr")?, &builtin_band("Y2")?)?;
    let model = PathLossModel::Adaptive(fit_adaptive(&grid, 6, &FitOptions::default())?.model);

    let dir = std::env::temp_dir().join("skyloss-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("y2.adaptive.toml");
    export_model(&model, &path)?;
    let text = std::fs::read_to_string(&path)?;
    for line in text.lines().take(24) {
        println!("{line}");
    }
    println!("...");

    let back = import_model(&path)?;
    assert_eq!(back, model);
    let q = PathLossQuery::new(
        Position3D::new(0.0, 0.0, 50.0)?,
        Position3D::new(60.0, 0.0, 90.0)?,
        0.46,
    )?;
    let p = back.predict_path_loss(&q)?;
    println!(
        "{} coefficients; {:.3} dB at 0.46 THz",
        back.coefficient_count(),
        p.total_db
    );
    Ok(())
}
