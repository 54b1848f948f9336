use super::{CodecConfig, TrajectoryType};
use crate::geom::Vec2;
use crate::scenario::Trajectory;

/// Signed rotation (radians, + = left) from the first to the last heading.
pub fn heading_change(first: Vec2, last: Vec2) -> f64 {
    first.cross(last).atan2(first.dot(last))
}

/// Length of the displacement component perpendicular to `heading`.
pub fn lateral_displacement(start: Vec2, end: Vec2, heading: Vec2) -> f64 {
    let d = end - start;
    (d - heading * d.dot(heading)).norm()
}

pub fn classify_trajectory(traj: &Trajectory, cfg: &CodecConfig) -> TrajectoryType {
    classify_with_flag(traj, cfg).0
}

/// Classifies in priority order stop, turn, lane change, straight. The flag
/// is set when too much of the trajectory is invalid to classify, in which
/// case the result is `Straight`.
pub fn classify_with_flag(traj: &Trajectory, cfg: &CodecConfig) -> (TrajectoryType, bool) {
    let idx: Vec<usize> = (0..traj.len()).filter(|&k| traj.valid.get(k).copied().unwrap_or(false)).collect();
    let invalid = 1.0 - idx.len() as f64 / traj.len().max(1) as f64;
    if idx.len() < 2 || invalid > cfg.max_invalid_fraction {
        return (TrajectoryType::Straight, true);
    }

    let mut max_disp: f64 = 0.0;
    for (a, &i) in idx.iter().enumerate() {
        for &j in &idx[a + 1..] {
            max_disp = max_disp.max(traj.positions[i].distance(traj.positions[j]));
        }
    }
    let (lo, hi) = idx
        .iter()
        .map(|&k| traj.speeds[k])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if max_disp <= cfg.stop_distance && hi - lo <= cfg.stop_speed_spread {
        return (TrajectoryType::Stop, false);
    }

    let (first, last) = (idx[0], idx[idx.len() - 1]);
    let h0 = traj.headings[first];
    let theta = heading_change(h0, traj.headings[last]);
    let lateral = lateral_displacement(traj.positions[first], traj.positions[last], h0);
    let da = cfg.angle_threshold_delta_a;
    let wide = lateral >= cfg.lane_width;

    let kind = if wide && theta >= 2.0 * da {
        TrajectoryType::LeftTurn
    } else if wide && theta <= -2.0 * da {
        TrajectoryType::RightTurn
    } else if wide && theta >= da {
        TrajectoryType::LeftLaneChange
    } else if wide && theta <= -da {
        TrajectoryType::RightLaneChange
    } else {
        TrajectoryType::Straight
    };
    (kind, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{HORIZON, TIMESTEP};

    fn traj(points: Vec<Vec2>) -> Trajectory {
        Trajectory::from_positions(points, TIMESTEP, Vec2::UNIT_X).unwrap()
    }

    #[test]
    fn stationary_is_stop() {
        let t = traj(vec![Vec2::new(2.0, 3.0); HORIZON]);
        assert_eq!(classify_trajectory(&t, &CodecConfig::default()), TrajectoryType::Stop);
    }

    #[test]
    fn straight_line() {
        let t = traj((0..HORIZON).map(|k| Vec2::new(k as f64, 0.0)).collect());
        assert_eq!(classify_trajectory(&t, &CodecConfig::default()), TrajectoryType::Straight);
    }

    #[test]
    fn left_arc_radius_12() {
        // Oracle: a full quarter arc of radius 12 ends heading +90 deg, 12 m to the left.
        let r = 12.0;
        let pts: Vec<Vec2> = (0..HORIZON)
            .map(|k| {
                let a = std::f64::consts::FRAC_PI_2 * k as f64 / (HORIZON - 2) as f64;
                let a = a.min(std::f64::consts::FRAC_PI_2);
                if k == HORIZON - 1 {
                    Vec2::new(r, r + 1.0)
                } else {
                    Vec2::new(r * a.sin(), r * (1.0 - a.cos()))
                }
            })
            .collect();
        let t = traj(pts);
        let theta = heading_change(t.headings[0], t.headings[HORIZON - 1]);
        let lat = lateral_displacement(t.positions[0], t.positions[HORIZON - 1], t.headings[0]);
        assert!(theta >= std::f64::consts::FRAC_PI_6 && lat >= 12.0);
        assert_eq!(classify_trajectory(&t, &CodecConfig::default()), TrajectoryType::LeftTurn);

        let mirrored = traj(t.positions.iter().map(|p| Vec2::new(p.x, -p.y)).collect());
        assert_eq!(classify_trajectory(&mirrored, &CodecConfig::default()), TrajectoryType::RightTurn);
    }

    #[test]
    fn mostly_invalid_is_flagged_straight() {
        let mut t = traj(vec![Vec2::ZERO; HORIZON]);
        for v in t.valid.iter_mut().take(11) {
            *v = false;
        }
        assert_eq!(classify_with_flag(&t, &CodecConfig::default()), (TrajectoryType::Straight, true));
    }
}
