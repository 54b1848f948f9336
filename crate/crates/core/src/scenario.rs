//! Scenario data types, kinematics and validation.
//!
//! A [`Scenario`] holds a lane map and `N` vehicles (index 0 is the ego
//! vehicle) with trajectories sampled at [`TIMESTEP`] seconds over
//! [`HORIZON`] steps. Headings and speeds are derived from positions.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{RigidTransform, Vec2};

/// Number of timesteps per trajectory.
pub const HORIZON: usize = 50;
/// Seconds between consecutive timesteps.
pub const TIMESTEP: f64 = 0.1;
pub const MAX_VEHICLES: usize = 32;
pub const MAX_LANES: usize = 384;
/// Speeds at or below this are treated as stationary when deriving headings.
pub const MOVING_SPEED: f64 = 1e-3;
pub const DEFAULT_VEHICLE_LENGTH: f64 = 4.8;
pub const DEFAULT_VEHICLE_WIDTH: f64 = 2.0;

const UNIT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub positions: Vec<Vec2>,
    pub headings: Vec<Vec2>,
    pub speeds: Vec<f64>,
    pub valid: Vec<bool>,
}

impl Trajectory {
    /// Builds a fully valid trajectory, deriving headings and speeds.
    /// `fallback_heading` is used while the vehicle never moves.
    pub fn from_positions(positions: Vec<Vec2>, dt: f64, fallback_heading: Vec2) -> Result<Self> {
        let (headings, speeds) = derive_kinematics_with_fallback(&positions, dt, fallback_heading)?;
        let valid = vec![true; positions.len()];
        Ok(Self { positions, headings, speeds, valid })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn valid_fraction(&self) -> f64 {
        if self.valid.is_empty() {
            return 0.0;
        }
        self.valid.iter().filter(|v| **v).count() as f64 / self.valid.len() as f64
    }

    pub fn transformed(&self, tf: &RigidTransform) -> Self {
        Self {
            positions: self.positions.iter().map(|p| tf.apply_point(*p)).collect(),
            headings: self.headings.iter().map(|h| tf.apply_direction(*h)).collect(),
            speeds: self.speeds.clone(),
            valid: self.valid.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    #[serde(rename = "pos")]
    pub initial_position: Vec2,
    #[serde(rename = "heading")]
    pub initial_heading: Vec2,
    #[serde(rename = "speed")]
    pub initial_speed: f64,
    pub length: f64,
    pub width: f64,
}

/// Travel direction of a lane relative to the ego vehicle's initial heading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaneDirection {
    Same,
    Opposite,
    PerpendicularUp,
    PerpendicularDown,
}

impl LaneDirection {
    pub const ALL: [LaneDirection; 4] = [
        LaneDirection::Same,
        LaneDirection::Opposite,
        LaneDirection::PerpendicularUp,
        LaneDirection::PerpendicularDown,
    ];

    pub fn index(self) -> usize {
        match self {
            LaneDirection::Same => 0,
            LaneDirection::Opposite => 1,
            LaneDirection::PerpendicularUp => 2,
            LaneDirection::PerpendicularDown => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Unit travel vector in the ego frame.
    pub fn unit(self) -> Vec2 {
        match self {
            LaneDirection::Same => Vec2::new(1.0, 0.0),
            LaneDirection::Opposite => Vec2::new(-1.0, 0.0),
            LaneDirection::PerpendicularUp => Vec2::new(0.0, 1.0),
            LaneDirection::PerpendicularDown => Vec2::new(0.0, -1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lane {
    pub centerline: Vec<Vec2>,
    pub direction: LaneDirection,
    /// Position counted from the rightmost lane of its direction group, starting at 1.
    pub lane_id: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LaneMap {
    pub lanes: Vec<Lane>,
    pub intersection: Option<Vec2>,
}

impl LaneMap {
    pub fn count(&self, dir: LaneDirection) -> usize {
        self.lanes.iter().filter(|l| l.direction == dir).count()
    }

    pub fn transformed(&self, tf: &RigidTransform) -> Self {
        Self {
            lanes: self
                .lanes
                .iter()
                .map(|l| Lane {
                    centerline: l.centerline.iter().map(|p| tf.apply_point(*p)).collect(),
                    direction: l.direction,
                    lane_id: l.lane_id,
                })
                .collect(),
            intersection: self.intersection.map(|c| tf.apply_point(c)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub map: LaneMap,
    pub vehicles: Vec<VehicleState>,
    pub trajectories: Vec<Trajectory>,
}

impl Scenario {
    pub fn timestep_seconds(&self) -> f64 {
        TIMESTEP
    }

    pub fn num_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    pub fn transformed(&self, tf: &RigidTransform) -> Self {
        Self {
            map: self.map.transformed(tf),
            vehicles: self
                .vehicles
                .iter()
                .map(|v| VehicleState {
                    initial_position: tf.apply_point(v.initial_position),
                    initial_heading: tf.apply_direction(v.initial_heading),
                    ..v.clone()
                })
                .collect(),
            trajectories: self.trajectories.iter().map(|t| t.transformed(tf)).collect(),
        }
    }

    /// Transform that moves the ego's initial pose to the origin facing +x.
    pub fn ego_frame_transform(&self) -> RigidTransform {
        let ego = &self.vehicles[0];
        let rot = -ego.initial_heading.angle();
        RigidTransform::new(rot, -ego.initial_position.rotate(rot))
    }

    pub fn to_ego_frame(&self) -> Self {
        self.transformed(&self.ego_frame_transform())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        file.into_scenario()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ScenarioFile::from_scenario(self)).expect("scenario serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

/// On-disk scenario layout. Only positions are stored per timestep;
/// headings and speeds are re-derived on load.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    map: LaneMap,
    vehicles: Vec<VehicleState>,
    trajectories: Vec<Vec<Vec2>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    valid: Option<Vec<Vec<bool>>>,
}

impl ScenarioFile {
    fn from_scenario(s: &Scenario) -> Self {
        let all_valid = s.trajectories.iter().all(|t| t.valid.iter().all(|v| *v));
        Self {
            map: s.map.clone(),
            vehicles: s.vehicles.clone(),
            trajectories: s.trajectories.iter().map(|t| t.positions.clone()).collect(),
            valid: (!all_valid).then(|| s.trajectories.iter().map(|t| t.valid.clone()).collect()),
        }
    }

    fn into_scenario(self) -> Result<Scenario> {
        if self.trajectories.len() != self.vehicles.len() {
            return Err(Error::Format(format!(
                "{} trajectories for {} vehicles",
                self.trajectories.len(),
                self.vehicles.len()
            )));
        }
        let mut trajectories = Vec::with_capacity(self.trajectories.len());
        for (i, (positions, vehicle)) in self.trajectories.into_iter().zip(&self.vehicles).enumerate() {
            let (headings, speeds) = derive_kinematics_with_fallback(&positions, TIMESTEP, vehicle.initial_heading)
                .map_err(|e| Error::Format(format!("trajectory {i}: {e}")))?;
            let valid = match &self.valid {
                Some(masks) => masks
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::Format(format!("missing valid mask for trajectory {i}")))?,
                None => vec![true; positions.len()],
            };
            trajectories.push(Trajectory { positions, headings, speeds, valid });
        }
        Ok(Scenario { map: self.map, vehicles: self.vehicles, trajectories })
    }
}

/// Chord speeds and headings. See [`derive_kinematics_with_fallback`].
pub fn derive_kinematics(positions: &[Vec2], dt: f64) -> Result<(Vec<Vec2>, Vec<f64>)> {
    derive_kinematics_with_fallback(positions, dt, Vec2::UNIT_X)
}

/// `speed[t] = |p[t+1] - p[t]| / dt` with the last value copied from the
/// previous step. Headings follow the displacement while moving and are
/// carried forward through stationary steps; stationary steps before the
/// first motion take the first moving heading, and a trajectory that never
/// moves uses `fallback`.
pub fn derive_kinematics_with_fallback(positions: &[Vec2], dt: f64, fallback: Vec2) -> Result<(Vec<Vec2>, Vec<f64>)> {
    if positions.len() < 2 {
        return Err(Error::InvalidInput(format!("kinematics need at least 2 positions, got {}", positions.len())));
    }
    if !(dt > 0.0) {
        return Err(Error::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    let n = positions.len();
    let mut speeds = Vec::with_capacity(n);
    let mut raw: Vec<Option<Vec2>> = Vec::with_capacity(n);
    for w in positions.windows(2) {
        let d = w[1] - w[0];
        let v = d.norm() / dt;
        speeds.push(v);
        raw.push(if v > MOVING_SPEED { d.normalized() } else { None });
    }
    speeds.push(speeds[n - 2]);
    raw.push(None);

    let first_moving = raw.iter().flatten().next().copied();
    let mut current = first_moving.unwrap_or(fallback.normalized().unwrap_or(Vec2::UNIT_X));
    let headings = raw
        .into_iter()
        .map(|h| {
            if let Some(h) = h {
                current = h;
            }
            current
        })
        .collect();
    Ok((headings, speeds))
}

/// A broken scenario invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self { field: field.into(), rule: rule.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

pub fn validate_scenario(s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = s.vehicles.len();
    if n == 0 {
        out.push(Violation::new("vehicles", "vehicle count < 1"));
    }
    if n > MAX_VEHICLES {
        out.push(Violation::new("vehicles", "vehicle count > 32"));
    }
    if s.trajectories.len() != n {
        out.push(Violation::new("trajectories", "trajectory count != vehicle count"));
    }
    if s.map.lanes.len() > MAX_LANES {
        out.push(Violation::new("map.lanes", "lane count > 384"));
    }
    for (i, lane) in s.map.lanes.iter().enumerate() {
        let field = format!("map.lanes[{i}]");
        if lane.centerline.len() < 2 {
            out.push(Violation::new(&field, "centerline has < 2 points"));
        }
        if lane.centerline.iter().any(|p| !p.is_finite()) {
            out.push(Violation::new(&field, "non-finite centerline point"));
        }
        if lane.centerline.windows(2).any(|w| w[0] == w[1]) {
            out.push(Violation::new(&field, "consecutive centerline points coincide"));
        }
        if lane.lane_id < 1 {
            out.push(Violation::new(&field, "lane_id < 1"));
        }
    }
    if let Some(c) = s.map.intersection {
        if !c.is_finite() {
            out.push(Violation::new("map.intersection", "non-finite position"));
        }
    }
    for (i, v) in s.vehicles.iter().enumerate() {
        let field = format!("vehicles[{i}]");
        if !(v.length > 0.0) {
            out.push(Violation::new(&field, "length <= 0"));
        }
        if !(v.width > 0.0) {
            out.push(Violation::new(&field, "width <= 0"));
        }
        if !v.initial_position.is_finite() {
            out.push(Violation::new(&field, "non-finite initial position"));
        }
        if (v.initial_heading.norm() - 1.0).abs() > UNIT_TOLERANCE {
            out.push(Violation::new(&field, "initial heading is not a unit vector"));
        }
        if !(v.initial_speed >= 0.0) {
            out.push(Violation::new(&field, "initial speed < 0"));
        }
    }
    for (i, t) in s.trajectories.iter().enumerate() {
        let field = format!("trajectories[{i}]");
        if t.positions.len() != HORIZON {
            out.push(Violation::new(&field, "T != 50"));
        }
        if t.headings.len() != t.positions.len()
            || t.speeds.len() != t.positions.len()
            || t.valid.len() != t.positions.len()
        {
            out.push(Violation::new(&field, "sequence lengths differ"));
        }
        let valid = |k: usize| t.valid.get(k).copied().unwrap_or(false);
        if t.positions.iter().enumerate().any(|(k, p)| valid(k) && !p.is_finite()) {
            out.push(Violation::new(&field, "non-finite position"));
        }
        if t.headings.iter().enumerate().any(|(k, h)| valid(k) && !((h.norm() - 1.0).abs() <= UNIT_TOLERANCE)) {
            out.push(Violation::new(&field, "heading is not a unit vector"));
        }
        if t.speeds.iter().any(|v| !(*v >= 0.0)) {
            out.push(Violation::new(&field, "speed < 0"));
        }
    }
    out
}
