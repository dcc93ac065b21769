//! Reads a grid whose rows arrive in arbitrary order, as an external
//! radiative-transfer tool might write them, and fits it.

use skyloss::datagrid::{ingest_external_from, GridFilter, GRID_HEADER, GRID_MAGIC};
use skyloss::regression::{fit_agnostic, FitOptions};

fn main() -> skyloss::Result<()> {
    // Frequency-major order, newest first: nothing like the canonical layout.
    let mut text = format!("{GRID_MAGIC}\n{GRID_HEADER}\n");
    let freqs: Vec<f64> = (0..12).rev().map(|k| 0.40 - 0.0003 * k as f64).collect();
    for &f in &freqs {
        for theta in [0.0f64, 30.0, 60.0, 90.0] {
            for d in [0.02f64, 0.05, 0.08] {
                for l in [0.0f64, 0.2, 0.4] {
                    let rate = -(0.3 + f) * (-0.4 * l).exp() * theta.to_radians().sin()
                        - 0.2 * (-0.55 * l).exp() * theta.to_radians().cos();
                    text.push_str(&format!("{l},{d},{theta},{f:.4},{:e}\n", (rate * d).exp()));
                }
            }
        }
    }

    let grid = ingest_external_from(text.as_bytes(), &GridFilter::default())?;
    println!(
        "ingested {:?} grid for band {}",
        grid.axes().shape(),
        grid.band().name()
    );

    let fit = fit_agnostic(&grid, 2, 1, &FitOptions::default())?;
    println!("b2_h = {:.6}, b2_v = {:.6}", fit.model.b2_h, fit.model.b2_v);

    // A duplicated row is reported with both line numbers.
    let dup = format!("{text}0,0.02,0,0.4,0.9\n");
    match ingest_external_from(dup.as_bytes(), &GridFilter::default()) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!("duplicate cell accepted"),
    }
    Ok(())
}
