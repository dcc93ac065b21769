//! Builds a transmittance grid for a scenario and band and writes it as CSV.

use skyloss::atmosphere::{builtin_profile, generate_grid};
use skyloss::datagrid::{builtin_band, builtin_scenario, path_loss_grid, read_grid, write_grid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = builtin_profile("standard")?;
    let scenario = builtin_scenario("MAAC")?;
    let band = builtin_band("WR0")?.with_step(0.002)?;
    let grid = generate_grid(&profile, &scenario, &band)?;
    let [nl, nd, nt, nf] = grid.axes().shape();
    println!(
        "{} x {}: {nl} x {nd} x {nt} x {nf} = {} cells",
        scenario.name(),
        band.name(),
        grid.n_samples()
    );

    let pl = path_loss_grid(&grid);
    let worst = pl.values().iter().copied().fold(f64::MIN, f64::max);
    println!("largest total path loss {worst:.2} dB");

    let dir = std::env::temp_dir().join("skyloss-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("maac_wr0.csv");
    write_grid(&grid, &path)?;
    let back = read_grid(&path)?;
    assert_eq!(back.values(), grid.values());
    println!("wrote and re-read {}", path.display());
    Ok(())
}
