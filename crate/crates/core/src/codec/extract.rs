use super::{
    classify_with_flag, distance_bin, sector_of, CodeBundle, CodecConfig, InteractionCode, MapCode, VehicleCode,
    INTERACTION_LEN, SPEED_LEN, VEHICLE_POS_AREAS,
};
use crate::error::{Error, Result};
use crate::geom::{point_polyline_distance, Vec2};
use crate::scenario::{validate_scenario, LaneDirection, LaneMap, Scenario, Trajectory, VehicleState};

/// Frames sampled for interaction codes: the end of each second.
pub const INTERACTION_FRAMES: [usize; INTERACTION_LEN] = [9, 19, 29, 39, 49];
/// Frames sampled for the speed trend, including the first and last.
pub const SPEED_FRAMES: [usize; SPEED_LEN] = [0, 10, 20, 30, 40, 49];

const PERPENDICULAR_LOW: f64 = std::f64::consts::FRAC_PI_4;
const PERPENDICULAR_HIGH: f64 = 3.0 * std::f64::consts::FRAC_PI_4;

#[derive(Clone, Debug, PartialEq)]
pub struct Extraction {
    pub bundle: CodeBundle,
    /// Vehicles whose trajectory had too many invalid steps to classify.
    pub flagged: Vec<usize>,
}

pub fn extract_codes(s: &Scenario, cfg: &CodecConfig) -> Result<CodeBundle> {
    extract_codes_report(s, cfg).map(|e| e.bundle)
}

pub fn extract_codes_report(s: &Scenario, cfg: &CodecConfig) -> Result<Extraction> {
    cfg.validate()?;
    let violations = validate_scenario(s);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    let ego_state = &s.vehicles[0];
    let ego_traj = &s.trajectories[0];

    let mut vehicle_codes = Vec::with_capacity(s.vehicles.len());
    let mut interaction_codes = Vec::with_capacity(s.vehicles.len());
    let mut flagged = Vec::new();
    for (i, (state, traj)) in s.vehicles.iter().zip(&s.trajectories).enumerate() {
        let (action, flag) = classify_with_flag(traj, cfg);
        if flag {
            flagged.push(i);
        }
        let speed_bins = SPEED_FRAMES.map(|f| {
            let k = nearest_valid(traj, f);
            distance_bin(traj.speeds[k], cfg.speed_gap, cfg.speed_max_bin)
        });
        if i == 0 {
            vehicle_codes.push(VehicleCode { pos_sector: -1, distance_bin: 0, direction_class: 0, speed_bins, action });
            interaction_codes.push(InteractionCode::default());
            continue;
        }
        let rel = state.initial_position - ego_state.initial_position;
        vehicle_codes.push(VehicleCode {
            pos_sector: sector_or_front(rel, ego_state.initial_heading, VEHICLE_POS_AREAS),
            distance_bin: distance_bin(rel.norm(), cfg.vehicle_distance_gap, cfg.vehicle_distance_max_bin),
            direction_class: direction_class(ego_state, state),
            speed_bins,
            action,
        });

        let mut code = InteractionCode::default();
        for (slot, &f) in INTERACTION_FRAMES.iter().enumerate() {
            let k = nearest_valid(traj, f);
            let e = nearest_valid(ego_traj, f);
            let rel = traj.positions[k] - ego_traj.positions[e];
            code.distance_bins[slot] =
                distance_bin(rel.norm(), cfg.interaction_distance_gap, cfg.interaction_distance_max_bin);
            code.direction_sectors[slot] = sector_or_front(rel, ego_traj.headings[e], cfg.interaction_areas);
        }
        interaction_codes.push(code);
    }

    Ok(Extraction {
        bundle: CodeBundle { map_code: map_code(&s.map, ego_state, cfg), vehicle_codes, interaction_codes },
        flagged,
    })
}

fn sector_or_front(rel: Vec2, heading: Vec2, areas: usize) -> i32 {
    sector_of(rel, heading, areas).unwrap_or(0)
}

/// Closest valid frame to `frame`, preferring earlier frames on ties.
fn nearest_valid(traj: &Trajectory, frame: usize) -> usize {
    let frame = frame.min(traj.len() - 1);
    if traj.valid[frame] {
        return frame;
    }
    (1..traj.len())
        .flat_map(|d| [frame.checked_sub(d), Some(frame + d)])
        .flatten()
        .find(|&k| k < traj.len() && traj.valid[k])
        .unwrap_or(frame)
}

/// 0 same, 1 opposite, 2 perpendicular up (to the ego's left), 3 perpendicular down.
fn direction_class(ego: &VehicleState, other: &VehicleState) -> i32 {
    let delta = ego.initial_heading.cross(other.initial_heading).atan2(ego.initial_heading.dot(other.initial_heading));
    if delta.abs() < PERPENDICULAR_LOW {
        0
    } else if delta.abs() > PERPENDICULAR_HIGH {
        1
    } else if delta > 0.0 {
        2
    } else {
        3
    }
}

fn map_code(map: &LaneMap, ego: &VehicleState, cfg: &CodecConfig) -> MapCode {
    let count = |d| map.count(d) as i32;
    let same = count(LaneDirection::Same);
    let ego_lane_id = map
        .lanes
        .iter()
        .filter(|l| l.direction == LaneDirection::Same)
        .map(|l| (point_polyline_distance(ego.initial_position, &l.centerline), l.lane_id))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, id)| id as i32)
        .unwrap_or(1);
    let intersection_bin = map.intersection.map_or(-1, |c| {
        let along = (c - ego.initial_position).in_frame(ego.initial_heading).x.abs();
        distance_bin(along, cfg.intersection_distance_gap, cfg.intersection_distance_max_bin)
    });
    MapCode {
        same_dir_lanes: same.max(1),
        opposite_dir_lanes: count(LaneDirection::Opposite),
        perp_up_lanes: count(LaneDirection::PerpendicularUp),
        perp_down_lanes: count(LaneDirection::PerpendicularDown),
        intersection_bin,
        ego_lane_id: ego_lane_id.clamp(1, same.max(1)),
    }
}
