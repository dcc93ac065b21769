//! Link geometry and the free-space term for a pair of positions.

use skyloss::datagrid::fspl_db;
use skyloss::geometry::{decompose, link_geometry_from_positions, Position3D};

fn main() -> skyloss::Result<()> {
    let ground = Position3D::new(0.0, 0.0, 20.0)?;
    let drone = Position3D::new(300.0, 400.0, 520.0)?;
    let g = link_geometry_from_positions(ground, drone)?;
    println!("d = {:.1} m, d_h = {:.1} m, d_v = {:.1} m", g.d, g.d_h, g.d_v);
    println!("zenith angle {:.2} deg, lower end at {} m", g.theta, g.l);

    let (d_h, d_v) = decompose(g.d, g.theta)?;
    println!("from (d, theta): d_h = {d_h:.1} m, d_v = {d_v:.1} m");

    for f in [0.14, 0.3, 0.6, 0.95] {
        println!("FSPL at {f} THz: {:.2} dB", fspl_db(g.d, f));
    }
    Ok(())
}
