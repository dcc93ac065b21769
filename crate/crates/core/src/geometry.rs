//! Link geometry between two transceivers.
//!
//! Positions are Cartesian coordinates in meters with `z = 0` at sea level.
//! A link is described by the altitude `l` of the lower transceiver, the
//! separation `d`, its horizontal and vertical projections `d_h`, `d_v`, and
//! the zenith angle `theta` (0° vertical, 90° horizontal). Angles are degrees
//! at every public interface.

use crate::error::{Error, Result};

/// Sine of an angle in degrees, exact at 0° and 90°.
pub fn sin_deg(theta: f64) -> f64 {
    if theta == 0.0 {
        0.0
    } else if theta == 90.0 {
        1.0
    } else {
        theta.to_radians().sin()
    }
}

/// Cosine of an angle in degrees, exact at 0° and 90°.
pub fn cos_deg(theta: f64) -> f64 {
    if theta == 0.0 {
        1.0
    } else if theta == 90.0 {
        0.0
    } else {
        theta.to_radians().cos()
    }
}

pub(crate) fn check_theta(theta: f64) -> Result<()> {
    if (0.0..=90.0).contains(&theta) {
        Ok(())
    } else {
        Err(Error::range("theta", theta, "[0, 90] deg"))
    }
}

/// A transceiver position in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position3D {
    x: f64,
    y: f64,
    z: f64,
}

impl Position3D {
    /// Rejects non-finite coordinates and positions below sea level.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        for (what, v) in [("x", x), ("y", y), ("z", z)] {
            if !v.is_finite() {
                return Err(Error::range(what, v, "finite meters"));
            }
        }
        if z < 0.0 {
            return Err(Error::range("z", z, "z >= 0 m (sea level)"));
        }
        Ok(Self { x, y, z })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }
}

/// Link parameters in meters and degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    /// Altitude of the lower transceiver.
    pub l: f64,
    pub d: f64,
    pub d_h: f64,
    pub d_v: f64,
    /// Zenith angle in degrees, within `[0, 90]`.
    pub theta: f64,
}

impl LinkGeometry {
    /// Builds the geometry of a link of length `d` at zenith angle `theta`
    /// whose lower end sits at altitude `l`.
    pub fn from_polar(l: f64, d: f64, theta: f64) -> Result<Self> {
        if !(l >= 0.0 && l.is_finite()) {
            return Err(Error::range("l", l, "l >= 0 m"));
        }
        let (d_h, d_v) = decompose(d, theta)?;
        Ok(Self { l, d, d_h, d_v, theta })
    }
}

/// Derives the link geometry between two positions.
///
/// The lower transceiver defines `l`, so the result does not depend on the
/// argument order and `theta` never exceeds 90°.
pub fn link_geometry_from_positions(p1: Position3D, p2: Position3D) -> Result<LinkGeometry> {
    let d_h = (p2.x - p1.x).hypot(p2.y - p1.y);
    let d_v = (p2.z - p1.z).abs();
    let d = d_h.hypot(d_v);
    if d == 0.0 {
        return Err(Error::DegenerateGeometry(
            "coincident transceiver positions (d = 0)".into(),
        ));
    }
    let theta = if d_v == 0.0 {
        90.0
    } else if d_h == 0.0 {
        0.0
    } else {
        d_h.atan2(d_v).to_degrees()
    };
    Ok(LinkGeometry {
        l: p1.z.min(p2.z),
        d,
        d_h,
        d_v,
        theta,
    })
}

/// Projects a separation onto its horizontal and vertical components.
pub fn decompose(d: f64, theta: f64) -> Result<(f64, f64)> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::range("d", d, "d > 0"));
    }
    check_theta(theta)?;
    Ok((d * sin_deg(theta), d * cos_deg(theta)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pos(x: f64, y: f64, z: f64) -> Position3D {
        Position3D::new(x, y, z).unwrap()
    }

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn vertical_link() {
        let g = link_geometry_from_positions(pos(0., 0., 1000.), pos(0., 0., 3000.)).unwrap();
        assert_eq!(g.l, 1000.0);
        assert_eq!(g.d, 2000.0);
        assert_eq!(g.d_h, 0.0);
        assert_eq!(g.d_v, 2000.0);
        assert_eq!(g.theta, 0.0);
    }

    #[test]
    fn horizontal_link() {
        let g = link_geometry_from_positions(pos(0., 0., 500.), pos(300., 400., 500.)).unwrap();
        assert_eq!(g.l, 500.0);
        assert_eq!(g.d, 500.0);
        assert_eq!(g.d_h, 500.0);
        assert_eq!(g.d_v, 0.0);
        assert_eq!(g.theta, 90.0);
    }

    #[test]
    fn slant_link() {
        let g = link_geometry_from_positions(pos(0., 0., 100.), pos(0., 300., 500.)).unwrap();
        assert_eq!(g.l, 100.0);
        assert_eq!(g.d_v, 400.0);
        assert_eq!(g.d_h, 300.0);
        assert_eq!(g.d, 500.0);
        // atan2(300, 400) in degrees
        assert!((g.theta - 36.869_897_645_844_02).abs() < 1e-12);
    }

    #[test]
    fn coincident_positions_rejected() {
        let p = pos(1., 2., 3.);
        assert!(matches!(
            link_geometry_from_positions(p, p),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn below_sea_level_rejected() {
        assert!(Position3D::new(0., 0., -1.).is_err());
    }

    #[test]
    fn decompose_examples() {
        assert_eq!(decompose(1000., 0.).unwrap(), (0.0, 1000.0));
        assert_eq!(decompose(1000., 90.).unwrap(), (1000.0, 0.0));
        let (h, v) = decompose(2000., 30.).unwrap();
        assert!((h - 1000.0).abs() < 1e-9);
        assert!((v - 1_732.050_807_568_877).abs() < 1e-9);
    }

    #[test]
    fn decompose_rejects_bad_angles() {
        assert!(matches!(decompose(1.0, 90.5), Err(Error::Range { .. })));
        assert!(matches!(decompose(1.0, -0.1), Err(Error::Range { .. })));
        assert!(decompose(0.0, 10.0).is_err());
    }

    proptest! {
        #[test]
        fn swap_symmetry(
            x1 in -1e4..1e4f64, y1 in -1e4..1e4f64, z1 in 0.0..5e4f64,
            x2 in -1e4..1e4f64, y2 in -1e4..1e4f64, z2 in 0.0..5e4f64,
        ) {
            let (a, b) = (pos(x1, y1, z1), pos(x2, y2, z2));
            prop_assume!(a != b);
            let g1 = link_geometry_from_positions(a, b).unwrap();
            let g2 = link_geometry_from_positions(b, a).unwrap();
            prop_assert_eq!(g1, g2);
        }

        #[test]
        fn pythagoras_and_projection(
            x in -1e4..1e4f64, y in -1e4..1e4f64, z1 in 0.0..5e4f64, z2 in 0.0..5e4f64,
        ) {
            prop_assume!(x != 0.0 || y != 0.0 || z1 != z2);
            let g = link_geometry_from_positions(pos(0., 0., z1), pos(x, y, z2)).unwrap();
            prop_assert!(rel_close(g.d * g.d, g.d_h * g.d_h + g.d_v * g.d_v, 1e-12));
            prop_assert!((0.0..=90.0).contains(&g.theta));
            prop_assert!((g.d * sin_deg(g.theta) - g.d_h).abs() <= 1e-12 * g.d);
            prop_assert!((g.d * cos_deg(g.theta) - g.d_v).abs() <= 1e-12 * g.d);
        }

        #[test]
        fn round_trip_through_positions(l in 0.0..2e4f64, d in 1e-3..1e5f64, theta in 0.0..=90.0f64) {
            let g = LinkGeometry::from_polar(l, d, theta).unwrap();
            let back = link_geometry_from_positions(pos(0., 0., l), pos(g.d_h, 0., l + g.d_v)).unwrap();
            prop_assert!(rel_close(back.l, g.l, 1e-12) || (back.l - g.l).abs() < 1e-12);
            prop_assert!(rel_close(back.d, g.d, 1e-12));
            prop_assert!((back.d_h - g.d_h).abs() <= 1e-12 * g.d);
            prop_assert!((back.d_v - g.d_v).abs() <= 1e-12 * g.d * 4.0);
            prop_assert!((back.theta - g.theta).abs() <= 1e-9);
        }

        #[test]
        fn projections_monotone_in_theta(d in 1e-3..1e5f64, a in 0.001..89.0f64, step in 0.001..1.0f64) {
            let b = a + step;
            let (h1, v1) = decompose(d, a).unwrap();
            let (h2, v2) = decompose(d, b).unwrap();
            prop_assert!(h2 > h1);
            prop_assert!(v2 < v1);
        }
    }
}
