//! Absorption along slant paths from the shipped profile and a custom one.

use skyloss::atmosphere::{
    absorption_coefficient, builtin_profile, optical_depth, optical_depth_quadrature, parse_profile,
    transmittance_along_path,
};

const DRY_CONTINUUM: &str = r#"
format = 1
name = "dry"
mode = "continuum"

[band]
f_lo = 0.1
f_hi = 1.0

[[continuum]]
amplitude_poly = [0.0, 0.0, 1.5]
scale_height = 8.0
"#;

fn main() -> skyloss::Result<()> {
    let standard = builtin_profile("standard")?;
    println!("k(z = 0) over the band, 1/km:");
    for f in [0.2, 0.35, 0.5, 0.557, 0.7, 0.9] {
        println!("  {f:5} THz  {:.4}", absorption_coefficient(&standard, 0.0, f)?);
    }

    // 2 km path from 1 km up, level versus straight up.
    for theta in [90.0, 45.0, 0.0] {
        let tau = transmittance_along_path(&standard, 1.0, 2.0, theta, 0.5)?;
        println!("theta {theta:4}: tau = {tau:.6}, {:.3} dB", -10.0 * tau.log10());
    }

    let dry = parse_profile(DRY_CONTINUUM)?;
    let closed = optical_depth(&dry, 0.0, 5.0, 30.0, 0.8)?;
    let quad = optical_depth_quadrature(&dry, 0.0, 5.0, 30.0, 0.8, 1e-12)?;
    println!("dry profile optical depth: closed form {closed:.12}, quadrature {quad:.12}");

    let humid = standard.with_humidity_scale(1.5)?;
    let tau = transmittance_along_path(&humid, 1.0, 2.0, 90.0, 0.5)?;
    println!("50% more humidity, level path: {:.3} dB", -10.0 * tau.log10());
    Ok(())
}
