use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Quotients within this much below an integer snap up to it, so values
/// sitting on a bin edge do not flip under floating-point noise.
pub const BIN_EPS: f64 = 1e-9;

/// `min(floor(d / gap), max_bin)`.
pub fn distance_bin(d: f64, gap: f64, max_bin: i32) -> i32 {
    let q = (d / gap + BIN_EPS).floor();
    if q >= max_bin as f64 {
        max_bin
    } else {
        q.max(0.0) as i32
    }
}

/// Speed grade with a 2.5 m/s interval capped at 8.
pub fn speed_bin(v: f64) -> i32 {
    distance_bin(v, 2.5, 8)
}

/// Direction sector of `relative_position` seen from a vehicle facing
/// `ego_heading`. Sector 0 is centered straight ahead and indices grow
/// clockwise (for six areas: front, front-right, back-right, back,
/// back-left, front-left). Each wedge includes its clockwise edge and
/// excludes its counter-clockwise edge, so a bearing of exactly +90 degrees
/// falls in back-left.
pub fn sector_of(relative_position: Vec2, ego_heading: Vec2, areas: usize) -> Result<i32> {
    if relative_position.norm() == 0.0 {
        return Err(Error::Degenerate("zero-length relative position".into()));
    }
    if areas == 0 {
        return Err(Error::InvalidInput("areas must be positive".into()));
    }
    let local = relative_position.in_frame(ego_heading);
    let bearing = local.angle();
    let wedge = TAU / areas as f64;
    let shifted = (bearing + wedge / 2.0).rem_euclid(TAU);
    let ccw = ((shifted / wedge + BIN_EPS).floor() as usize) % areas;
    Ok(((areas - ccw) % areas) as i32)
}

/// Bearing (radians, ego frame, + = left) at the middle of `sector`.
pub fn sector_center_bearing(sector: i32, areas: usize) -> f64 {
    -(sector as f64) * TAU / areas as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_bin_examples() {
        assert_eq!(distance_bin(7.0, 15.0, 3), 0);
        assert_eq!(distance_bin(30.0, 15.0, 3), 2);
        assert_eq!(distance_bin(75.0, 15.0, 3), 3);
        assert_eq!(distance_bin(29.999_999_999_999_996, 15.0, 3), 2);
    }

    #[test]
    fn speed_bin_examples() {
        assert_eq!(speed_bin(20.0), 8);
        assert_eq!(speed_bin(0.0), 0);
        assert_eq!(speed_bin(6.0), 2);
        assert_eq!(speed_bin(9.999_999_999_999_998), 4);
    }

    #[test]
    fn sector_examples() {
        let h = Vec2::UNIT_X;
        assert_eq!(sector_of(Vec2::new(10.0, 0.0), h, 6).unwrap(), 0);
        assert_eq!(sector_of(Vec2::new(-10.0, 0.0), h, 6).unwrap(), 3);
        assert_eq!(sector_of(Vec2::new(0.0, 10.0), h, 6).unwrap(), 4);
        assert_eq!(sector_of(Vec2::new(0.0, -10.0), h, 6).unwrap(), 1);
        assert_eq!(sector_of(Vec2::new(10.0, -10.0), h, 6).unwrap(), 1);
        assert_eq!(sector_of(Vec2::new(10.0, 10.0), h, 6).unwrap(), 5);
        assert!(matches!(sector_of(Vec2::ZERO, h, 6), Err(Error::Degenerate(_))));
    }

    #[test]
    fn sector_respects_heading() {
        let h = Vec2::new(0.0, 1.0);
        assert_eq!(sector_of(Vec2::new(0.0, 5.0), h, 6).unwrap(), 0);
        assert_eq!(sector_of(Vec2::new(5.0, 0.0), h, 6).unwrap(), 1);
        assert_eq!(sector_of(Vec2::new(5.0, 0.0), h, 4).unwrap(), 1);
        assert_eq!(sector_of(Vec2::new(-5.0, 0.0), h, 8).unwrap(), 6);
    }

    #[test]
    fn centers_round_trip() {
        for areas in [4, 6, 8] {
            for s in 0..areas as i32 {
                let b = sector_center_bearing(s, areas);
                assert_eq!(sector_of(Vec2::from_angle(b), Vec2::UNIT_X, areas).unwrap(), s);
            }
        }
    }
}
