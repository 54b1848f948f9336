//! Discrete scene codes: interaction, vehicle and map codes, the analyzer
//! that extracts them from trajectories, and their text format.

mod classify;
mod discretize;
mod extract;
mod text;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::MAX_VEHICLES;

pub use classify::{classify_trajectory, classify_with_flag, heading_change, lateral_displacement};
pub use discretize::{distance_bin, sector_center_bearing, sector_of, speed_bin, BIN_EPS};
pub use extract::{extract_codes, extract_codes_report, Extraction, INTERACTION_FRAMES, SPEED_FRAMES};
pub use text::{parse_codes, parse_codes_with, serialize_codes, ParsedCodes};

pub const INTERACTION_LEN: usize = 5;
pub const SPEED_LEN: usize = 6;
pub const VEHICLE_CODE_LEN: usize = 10;
pub const MAP_CODE_LEN: usize = 6;
/// Sector count used by the vehicle code's initial-position dimension.
pub const VEHICLE_POS_AREAS: usize = 6;

/// Discretization granularity and classifier thresholds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CodecConfig {
    pub interaction_distance_gap: f64,
    pub interaction_distance_max_bin: i32,
    pub interaction_areas: usize,
    pub vehicle_distance_gap: f64,
    pub vehicle_distance_max_bin: i32,
    pub speed_gap: f64,
    pub speed_max_bin: i32,
    pub sample_count_interaction: usize,
    pub sample_count_speed: usize,
    pub intersection_distance_gap: f64,
    pub intersection_distance_max_bin: i32,
    pub lane_width: f64,
    /// Lane-change threshold in radians; turns use twice this value.
    pub angle_threshold_delta_a: f64,
    pub stop_distance: f64,
    pub stop_speed_spread: f64,
    /// Trajectories with a larger invalid fraction are classified straight and flagged.
    pub max_invalid_fraction: f64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self {
            interaction_distance_gap: 15.0,
            interaction_distance_max_bin: 5,
            interaction_areas: 6,
            vehicle_distance_gap: 15.0,
            vehicle_distance_max_bin: 3,
            speed_gap: 2.5,
            speed_max_bin: 8,
            sample_count_interaction: INTERACTION_LEN,
            sample_count_speed: SPEED_LEN,
            intersection_distance_gap: 15.0,
            intersection_distance_max_bin: 3,
            lane_width: 3.7,
            angle_threshold_delta_a: std::f64::consts::PI / 12.0,
            stop_distance: 1.0,
            stop_speed_spread: 0.2,
            max_invalid_fraction: 0.2,
        }
    }
}

impl CodecConfig {
    pub fn validate(&self) -> Result<()> {
        let gaps = [
            ("interaction_distance_gap", self.interaction_distance_gap),
            ("vehicle_distance_gap", self.vehicle_distance_gap),
            ("speed_gap", self.speed_gap),
            ("intersection_distance_gap", self.intersection_distance_gap),
            ("lane_width", self.lane_width),
            ("angle_threshold_delta_a", self.angle_threshold_delta_a),
        ];
        for (name, v) in gaps {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if ![4, 6, 8].contains(&self.interaction_areas) {
            return Err(Error::Config(format!("interaction_areas must be 4, 6 or 8, got {}", self.interaction_areas)));
        }
        if self.sample_count_interaction != INTERACTION_LEN {
            return Err(Error::Config(format!("sample_count_interaction must be {INTERACTION_LEN}")));
        }
        if self.sample_count_speed != SPEED_LEN {
            return Err(Error::Config(format!("sample_count_speed must be {SPEED_LEN}")));
        }
        for (name, v) in [
            ("interaction_distance_max_bin", self.interaction_distance_max_bin),
            ("vehicle_distance_max_bin", self.vehicle_distance_max_bin),
            ("speed_max_bin", self.speed_max_bin),
            ("intersection_distance_max_bin", self.intersection_distance_max_bin),
        ] {
            if v < 0 {
                return Err(Error::Config(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Trajectory class, in the order used by the vehicle code's action dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
#[repr(u8)]
pub enum TrajectoryType {
    Stop = 0,
    Straight = 1,
    LeftTurn = 2,
    RightTurn = 3,
    LeftLaneChange = 4,
    RightLaneChange = 5,
}

impl TrajectoryType {
    pub const ALL: [TrajectoryType; 6] = [
        TrajectoryType::Stop,
        TrajectoryType::Straight,
        TrajectoryType::LeftTurn,
        TrajectoryType::RightTurn,
        TrajectoryType::LeftLaneChange,
        TrajectoryType::RightLaneChange,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: i64) -> Option<Self> {
        usize::try_from(i).ok().and_then(|i| Self::ALL.get(i).copied())
    }

    pub fn name(self) -> &'static str {
        match self {
            TrajectoryType::Stop => "stop",
            TrajectoryType::Straight => "straight",
            TrajectoryType::LeftTurn => "left-turn",
            TrajectoryType::RightTurn => "right-turn",
            TrajectoryType::LeftLaneChange => "left-lane-change",
            TrajectoryType::RightLaneChange => "right-lane-change",
        }
    }
}

impl fmt::Display for TrajectoryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Five sampled (distance bin, direction sector) pairs relative to the ego.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InteractionCode {
    pub distance_bins: [i32; INTERACTION_LEN],
    pub direction_sectors: [i32; INTERACTION_LEN],
}

impl InteractionCode {
    pub fn to_row(&self) -> [i32; 2 * INTERACTION_LEN] {
        let mut row = [0; 2 * INTERACTION_LEN];
        row[..INTERACTION_LEN].copy_from_slice(&self.distance_bins);
        row[INTERACTION_LEN..].copy_from_slice(&self.direction_sectors);
        row
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VehicleCode {
    pub pos_sector: i32,
    pub distance_bin: i32,
    pub direction_class: i32,
    pub speed_bins: [i32; SPEED_LEN],
    pub action: TrajectoryType,
}

impl VehicleCode {
    pub fn to_row(&self) -> [i32; VEHICLE_CODE_LEN] {
        let mut row = [0; VEHICLE_CODE_LEN];
        row[0] = self.pos_sector;
        row[1] = self.distance_bin;
        row[2] = self.direction_class;
        row[3..9].copy_from_slice(&self.speed_bins);
        row[9] = self.action as i32;
        row
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MapCode {
    pub same_dir_lanes: i32,
    pub opposite_dir_lanes: i32,
    pub perp_up_lanes: i32,
    pub perp_down_lanes: i32,
    /// `-1` when the map has no intersection.
    pub intersection_bin: i32,
    pub ego_lane_id: i32,
}

impl MapCode {
    pub fn to_array(&self) -> [i32; MAP_CODE_LEN] {
        [
            self.same_dir_lanes,
            self.opposite_dir_lanes,
            self.perp_up_lanes,
            self.perp_down_lanes,
            self.intersection_bin,
            self.ego_lane_id,
        ]
    }

    pub fn from_array(a: [i32; MAP_CODE_LEN]) -> Self {
        Self {
            same_dir_lanes: a[0],
            opposite_dir_lanes: a[1],
            perp_up_lanes: a[2],
            perp_down_lanes: a[3],
            intersection_bin: a[4],
            ego_lane_id: a[5],
        }
    }
}

/// The (map, vehicle, interaction) code triple; index 0 is the ego vehicle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeBundle {
    pub map_code: MapCode,
    pub vehicle_codes: Vec<VehicleCode>,
    pub interaction_codes: Vec<InteractionCode>,
}

impl CodeBundle {
    pub fn len(&self) -> usize {
        self.vehicle_codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vehicle_codes.is_empty()
    }

    /// Checks every range invariant; returns the first violation found.
    pub fn validate(&self, cfg: &CodecConfig) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInput(msg));
        let n = self.vehicle_codes.len();
        if n != self.interaction_codes.len() {
            return bad(format!("{n} vehicle codes but {} interaction codes", self.interaction_codes.len()));
        }
        if n == 0 || n > MAX_VEHICLES {
            return bad(format!("vehicle count {n} outside [1, {MAX_VEHICLES}]"));
        }
        let m = &self.map_code;
        if m.same_dir_lanes < 1 {
            return bad("map: same_dir_lanes < 1".into());
        }
        if m.opposite_dir_lanes < 0 || m.perp_up_lanes < 0 || m.perp_down_lanes < 0 {
            return bad("map: negative lane count".into());
        }
        if m.intersection_bin < -1 || m.intersection_bin > cfg.intersection_distance_max_bin {
            return bad(format!("map: intersection bin {} out of range", m.intersection_bin));
        }
        if m.ego_lane_id < 1 || m.ego_lane_id > m.same_dir_lanes {
            return bad(format!("map: ego lane id {} outside [1, {}]", m.ego_lane_id, m.same_dir_lanes));
        }
        for (i, v) in self.vehicle_codes.iter().enumerate() {
            let ego = i == 0;
            if ego && (v.pos_sector != -1 || v.distance_bin != 0 || v.direction_class != 0) {
                return bad("V1 must have pos -1, distance 0, direction 0".into());
            }
            if !ego && !(0..VEHICLE_POS_AREAS as i32).contains(&v.pos_sector) {
                return bad(format!("V{}: pos {} out of range", i + 1, v.pos_sector));
            }
            if !(0..=cfg.vehicle_distance_max_bin).contains(&v.distance_bin) {
                return bad(format!("V{}: distance {} out of range", i + 1, v.distance_bin));
            }
            if !(0..4).contains(&v.direction_class) {
                return bad(format!("V{}: direction {} out of range", i + 1, v.direction_class));
            }
            if v.speed_bins.iter().any(|s| !(0..=cfg.speed_max_bin).contains(s)) {
                return bad(format!("V{}: speed bin out of range", i + 1));
            }
        }
        for (i, c) in self.interaction_codes.iter().enumerate() {
            if i == 0 && *c != InteractionCode::default() {
                return bad("I1 must be all zeros".into());
            }
            if c.distance_bins.iter().any(|d| !(0..=cfg.interaction_distance_max_bin).contains(d)) {
                return bad(format!("I{}: distance bin out of range", i + 1));
            }
            if c.direction_sectors.iter().any(|s| !(0..cfg.interaction_areas as i32).contains(s)) {
                return bad(format!("I{}: sector out of range", i + 1));
            }
        }
        Ok(())
    }
}
