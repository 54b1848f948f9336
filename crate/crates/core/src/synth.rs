//! Deterministic synthetic scenarios on straight roads and four-way
//! intersections.
//!
//! Every maneuver is built as a lead-in straight, a circular arc and a
//! straight run-out, parameterized by arc length along a linear speed
//! profile. Geometry is checked against the trajectory classifier before a
//! scenario is returned, so a synthesized vehicle always classifies as the
//! type that was requested.

use std::f64::consts::FRAC_PI_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codec::{classify_trajectory, CodecConfig, TrajectoryType};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scenario::{
    Lane, LaneDirection, LaneMap, Scenario, Trajectory, VehicleState, HORIZON, MAX_VEHICLES, TIMESTEP,
};

pub const DEFAULT_LANE_WIDTH: f64 = 3.7;
/// Heading swept by a synthesized lane change: midway between one and two
/// times the default classifier angle threshold.
pub const LANE_CHANGE_SWEEP: f64 = 22.5 * std::f64::consts::PI / 180.0;
const MAX_SPEED: f64 = 20.0;
const LEAD_FRACTION: f64 = 0.15;
const ARC_FRACTION: f64 = 0.35;
/// Required lateral displacement as a multiple of the lane width.
const LATERAL_MARGIN: f64 = 1.05;
const MIN_STRAIGHT_LENGTH: f64 = 2.0;
const ROAD_BEHIND: f64 = 120.0;
const ROAD_AHEAD: f64 = 180.0;
const CROSS_ROAD_HALF: f64 = 120.0;
const CENTERLINE_STEP: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "template", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapTemplate {
    StraightRoad {
        same_lanes: u32,
        opposite_lanes: u32,
        ego_lane: u32,
    },
    FourWay {
        same_lanes: u32,
        opposite_lanes: u32,
        perp_up_lanes: u32,
        perp_down_lanes: u32,
        ego_lane: u32,
        /// Distance along +x from the ego to the crossing road's center.
        intersection_distance: f64,
    },
}

impl MapTemplate {
    fn ego_lane(&self) -> u32 {
        match self {
            MapTemplate::StraightRoad { ego_lane, .. } | MapTemplate::FourWay { ego_lane, .. } => *ego_lane,
        }
    }

    fn lane_count(&self, dir: LaneDirection) -> u32 {
        match (self, dir) {
            (MapTemplate::StraightRoad { same_lanes, .. }, LaneDirection::Same) => *same_lanes,
            (MapTemplate::StraightRoad { opposite_lanes, .. }, LaneDirection::Opposite) => *opposite_lanes,
            (MapTemplate::StraightRoad { .. }, _) => 0,
            (MapTemplate::FourWay { same_lanes, .. }, LaneDirection::Same) => *same_lanes,
            (MapTemplate::FourWay { opposite_lanes, .. }, LaneDirection::Opposite) => *opposite_lanes,
            (MapTemplate::FourWay { perp_up_lanes, .. }, LaneDirection::PerpendicularUp) => *perp_up_lanes,
            (MapTemplate::FourWay { perp_down_lanes, .. }, LaneDirection::PerpendicularDown) => *perp_down_lanes,
        }
    }

    fn intersection_distance(&self) -> Option<f64> {
        match self {
            MapTemplate::StraightRoad { .. } => None,
            MapTemplate::FourWay { intersection_distance, .. } => Some(*intersection_distance),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneRef {
    pub direction: LaneDirection,
    pub lane_id: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSpec {
    pub kind: TrajectoryType,
    /// m/s at the first step; ignored for `stop`.
    #[serde(default)]
    pub start_speed: f64,
    /// m/s at the last step; speed varies linearly in between.
    #[serde(default)]
    pub end_speed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub lane: LaneRef,
    /// Initial coordinate along the lane's road axis (x for horizontal
    /// lanes, y for vertical ones), in the ego frame.
    pub station: f64,
    pub motion: MotionSpec,
}

/// A scene to synthesize. Vehicle 0 is the ego and must start at station 0
/// in the template's ego lane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub map: MapTemplate,
    pub vehicles: Vec<VehicleSpec>,
    #[serde(default = "default_lane_width")]
    pub lane_width: f64,
}

fn default_lane_width() -> f64 {
    DEFAULT_LANE_WIDTH
}

struct Layout<'a> {
    template: &'a MapTemplate,
    width: f64,
}

impl Layout<'_> {
    fn divider_y(&self) -> f64 {
        let s = self.template.lane_count(LaneDirection::Same) as f64;
        (s + 0.5 - self.template.ego_lane() as f64) * self.width
    }

    /// Lateral offset of a lane's centerline from its road's divider.
    fn offset(&self, dir: LaneDirection, id: u32) -> f64 {
        (self.template.lane_count(dir) as f64 + 0.5 - id as f64) * self.width
    }

    /// Point on the lane's centerline at `station`.
    fn point(&self, lane: LaneRef, station: f64) -> Vec2 {
        let d = self.template.intersection_distance().unwrap_or(0.0);
        let off = self.offset(lane.direction, lane.lane_id);
        match lane.direction {
            LaneDirection::Same => Vec2::new(station, self.divider_y() - off),
            LaneDirection::Opposite => Vec2::new(station, self.divider_y() + off),
            LaneDirection::PerpendicularUp => Vec2::new(d + off, station),
            LaneDirection::PerpendicularDown => Vec2::new(d - off, station),
        }
    }

    fn lane(&self, dir: LaneDirection, id: u32) -> Lane {
        let r = LaneRef { direction: dir, lane_id: id };
        let (from, to) = match dir {
            LaneDirection::Same => (-ROAD_BEHIND, ROAD_AHEAD),
            LaneDirection::Opposite => (ROAD_AHEAD, -ROAD_BEHIND),
            LaneDirection::PerpendicularUp => (-CROSS_ROAD_HALF, CROSS_ROAD_HALF),
            LaneDirection::PerpendicularDown => (CROSS_ROAD_HALF, -CROSS_ROAD_HALF),
        };
        let steps = (to - from).abs() / CENTERLINE_STEP;
        let n = steps.round() as usize;
        let centerline = (0..=n).map(|k| self.point(r, from + (to - from) * k as f64 / n as f64)).collect();
        Lane { centerline, direction: dir, lane_id: id }
    }

    fn map(&self) -> LaneMap {
        let mut lanes = Vec::new();
        for dir in LaneDirection::ALL {
            for id in 1..=self.template.lane_count(dir) {
                lanes.push(self.lane(dir, id));
            }
        }
        let intersection = self.template.intersection_distance().map(|d| Vec2::new(d, self.divider_y()));
        LaneMap { lanes, intersection }
    }
}

fn check_template(t: &MapTemplate) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidSpec(m));
    let same = t.lane_count(LaneDirection::Same);
    if same < 1 {
        return bad("map needs at least one same-direction lane".into());
    }
    if t.ego_lane() < 1 || t.ego_lane() > same {
        return bad(format!("ego lane {} outside [1, {same}]", t.ego_lane()));
    }
    if let MapTemplate::FourWay { perp_up_lanes, perp_down_lanes, intersection_distance, .. } = t {
        if perp_up_lanes + perp_down_lanes == 0 {
            return bad("an intersection needs at least one perpendicular lane".into());
        }
        if !(intersection_distance.is_finite() && *intersection_distance >= 0.0) {
            return bad(format!("intersection distance must be >= 0, got {intersection_distance}"));
        }
    }
    let total: u32 = LaneDirection::ALL.iter().map(|d| t.lane_count(*d)).sum();
    if total as usize > crate::scenario::MAX_LANES {
        return bad(format!("{total} lanes exceed the maximum"));
    }
    Ok(())
}

/// Signed heading swept by a maneuver; `None` for stop.
fn sweep(kind: TrajectoryType) -> Option<f64> {
    match kind {
        TrajectoryType::Stop => None,
        TrajectoryType::Straight => Some(0.0),
        TrajectoryType::LeftTurn => Some(FRAC_PI_2),
        TrajectoryType::RightTurn => Some(-FRAC_PI_2),
        TrajectoryType::LeftLaneChange => Some(LANE_CHANGE_SWEEP),
        TrajectoryType::RightLaneChange => Some(-LANE_CHANGE_SWEEP),
    }
}

/// Arc length travelled after `t` seconds under the linear speed profile.
fn arc_length(m: &MotionSpec, t: f64) -> f64 {
    let end = (HORIZON - 1) as f64 * TIMESTEP;
    m.start_speed * t + 0.5 * (m.end_speed - m.start_speed) / end * t * t
}

/// Point at arc length `s` along a path that starts at the origin heading
/// +x and sweeps `phi` over an arc.
fn path_point(s: f64, phi: f64, total: f64) -> Vec2 {
    if phi == 0.0 {
        return Vec2::new(s, 0.0);
    }
    let lead = LEAD_FRACTION * total;
    let arc = ARC_FRACTION * total;
    let radius = arc / phi.abs();
    let side = phi.signum();
    let on_arc = |u: f64| {
        let a = u / radius;
        Vec2::new(lead + radius * a.sin(), side * radius * (1.0 - a.cos()))
    };
    if s <= lead {
        Vec2::new(s, 0.0)
    } else if s <= lead + arc {
        on_arc(s - lead)
    } else {
        on_arc(arc) + Vec2::from_angle(phi) * (s - lead - arc)
    }
}

/// Lateral offset reached at the end of a maneuver of length `total`.
fn maneuver_lateral(phi: f64, total: f64) -> f64 {
    if phi == 0.0 {
        return 0.0;
    }
    let radius = ARC_FRACTION * total / phi.abs();
    let run_out = (1.0 - LEAD_FRACTION - ARC_FRACTION) * total;
    radius * (1.0 - phi.cos()) + run_out * phi.abs().sin()
}

fn vehicle_positions(spec: &VehicleSpec, origin: Vec2, heading: Vec2, lane_width: f64) -> Result<Vec<Vec2>> {
    let m = &spec.motion;
    let Some(phi) = sweep(m.kind) else {
        return Ok(vec![origin; HORIZON]);
    };
    for v in [m.start_speed, m.end_speed] {
        if !(0.0..=MAX_SPEED).contains(&v) {
            return Err(Error::InvalidSpec(format!("speed {v} outside [0, {MAX_SPEED}] m/s")));
        }
    }
    let total = arc_length(m, (HORIZON - 1) as f64 * TIMESTEP);
    if total < MIN_STRAIGHT_LENGTH {
        return Err(Error::InvalidSpec(format!("{} covers only {total:.2} m", m.kind)));
    }
    if phi != 0.0 && maneuver_lateral(phi, total) < LATERAL_MARGIN * lane_width {
        return Err(Error::InvalidSpec(format!(
            "{} over {total:.2} m cannot clear one lane width; raise the speed",
            m.kind
        )));
    }
    let rot = heading.angle();
    Ok((0..HORIZON).map(|k| origin + path_point(arc_length(m, k as f64 * TIMESTEP), phi, total).rotate(rot)).collect())
}

fn check_vehicle(i: usize, v: &VehicleSpec, t: &MapTemplate) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidSpec(format!("vehicle {i}: {m}")));
    let count = t.lane_count(v.lane.direction);
    if v.lane.lane_id < 1 || v.lane.lane_id > count {
        return bad(format!("lane {} does not exist among {count} {:?} lanes", v.lane.lane_id, v.lane.direction));
    }
    if !v.station.is_finite() {
        return bad("non-finite station".into());
    }
    match v.motion.kind {
        TrajectoryType::LeftLaneChange if v.lane.lane_id == count => {
            bad("cannot change lanes to the left from the leftmost lane".into())
        }
        TrajectoryType::RightLaneChange if v.lane.lane_id == 1 => {
            bad("cannot change lanes to the right from the rightmost lane".into())
        }
        _ => Ok(()),
    }
}

/// Builds the scenario described by `spec`. The seed only perturbs vehicle
/// box dimensions; geometry is fully determined by the spec.
pub fn synth_scenario(spec: &SynthSpec, seed: u64) -> Result<Scenario> {
    check_template(&spec.map)?;
    if !(spec.lane_width > 0.0) {
        return Err(Error::InvalidSpec("lane width must be positive".into()));
    }
    if spec.vehicles.is_empty() || spec.vehicles.len() > MAX_VEHICLES {
        return Err(Error::InvalidSpec(format!("vehicle count {} outside [1, {MAX_VEHICLES}]", spec.vehicles.len())));
    }
    let ego = &spec.vehicles[0];
    if ego.lane != (LaneRef { direction: LaneDirection::Same, lane_id: spec.map.ego_lane() }) || ego.station != 0.0 {
        return Err(Error::InvalidSpec("vehicle 0 must start at station 0 in the ego lane".into()));
    }
    let layout = Layout { template: &spec.map, width: spec.lane_width };
    let classifier = CodecConfig { lane_width: spec.lane_width, ..CodecConfig::default() };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut vehicles = Vec::with_capacity(spec.vehicles.len());
    let mut trajectories = Vec::with_capacity(spec.vehicles.len());
    for (i, v) in spec.vehicles.iter().enumerate() {
        check_vehicle(i, v, &spec.map)?;
        let heading = v.lane.direction.unit();
        let origin = layout.point(v.lane, v.station);
        let positions = vehicle_positions(v, origin, heading, spec.lane_width)
            .map_err(|e| Error::InvalidSpec(format!("vehicle {i}: {e}")))?;
        let traj = Trajectory::from_positions(positions, TIMESTEP, heading)?;
        let got = classify_trajectory(&traj, &classifier);
        if got != v.motion.kind {
            return Err(Error::InvalidSpec(format!("vehicle {i}: built {} but it classifies as {got}", v.motion.kind)));
        }
        let initial_speed = if v.motion.kind == TrajectoryType::Stop { 0.0 } else { v.motion.start_speed };
        vehicles.push(VehicleState {
            initial_position: origin,
            initial_heading: heading,
            initial_speed,
            length: rng.gen_range(4.3..5.2),
            width: rng.gen_range(1.8..2.1),
        });
        trajectories.push(traj);
    }
    Ok(Scenario { map: layout.map(), vehicles, trajectories })
}

/// Samples a random valid spec: a straight road or four-way intersection
/// with the ego and up to `max_others` surrounding vehicles.
pub fn random_spec<R: Rng>(rng: &mut R, max_others: usize) -> SynthSpec {
    sample_spec(rng, max_others, None)
}

/// Like [`random_spec`], but the ego performs `ego_kind` and the map is
/// chosen so that the maneuver is feasible.
pub fn random_spec_with_ego<R: Rng>(rng: &mut R, ego_kind: TrajectoryType, max_others: usize) -> SynthSpec {
    sample_spec(rng, max_others, Some(ego_kind))
}

fn sample_spec<R: Rng>(rng: &mut R, max_others: usize, ego_kind: Option<TrajectoryType>) -> SynthSpec {
    use TrajectoryType::*;
    let intersection = match ego_kind {
        Some(LeftTurn | RightTurn) => true,
        _ => rng.gen_bool(0.4),
    };
    let max_same = if intersection { 3 } else { 4 };
    let min_same = if matches!(ego_kind, Some(LeftLaneChange | RightLaneChange)) { 2 } else { 1 };
    let same = rng.gen_range(min_same..=max_same);
    let ego_lane = match ego_kind {
        Some(LeftLaneChange) => rng.gen_range(1..same),
        Some(RightLaneChange) => rng.gen_range(2..=same),
        _ => rng.gen_range(1..=same),
    };
    let map = if intersection {
        MapTemplate::FourWay {
            same_lanes: same,
            opposite_lanes: rng.gen_range(1..=2),
            perp_up_lanes: rng.gen_range(1..=2),
            perp_down_lanes: rng.gen_range(1..=2),
            ego_lane,
            intersection_distance: rng.gen_range(8.0..55.0),
        }
    } else {
        MapTemplate::StraightRoad { same_lanes: same, opposite_lanes: rng.gen_range(0..=2), ego_lane }
    };

    let ego_ref = LaneRef { direction: LaneDirection::Same, lane_id: ego_lane };
    let ego_motion = match ego_kind {
        Some(kind) => motion_of(rng, kind),
        None => random_motion(rng, &map, ego_ref),
    };
    let mut vehicles = vec![VehicleSpec { lane: ego_ref, station: 0.0, motion: ego_motion }];
    let others = rng.gen_range(0..=max_others.min(MAX_VEHICLES - 1));
    let dirs: Vec<LaneDirection> = LaneDirection::ALL.into_iter().filter(|d| map.lane_count(*d) > 0).collect();
    let mut attempts = 0;
    while vehicles.len() < others + 1 && attempts < 200 {
        attempts += 1;
        let direction = dirs[rng.gen_range(0..dirs.len())];
        let lane = LaneRef { direction, lane_id: rng.gen_range(1..=map.lane_count(direction)) };
        let station = match direction {
            LaneDirection::Same | LaneDirection::Opposite => rng.gen_range(-45.0..60.0),
            _ => rng.gen_range(-50.0..50.0),
        };
        let clear = vehicles.iter().all(|v| v.lane != lane || (v.station - station).abs() >= 10.0);
        if clear {
            vehicles.push(VehicleSpec { lane, station, motion: random_motion(rng, &map, lane) });
        }
    }
    SynthSpec { map, vehicles, lane_width: DEFAULT_LANE_WIDTH }
}

fn motion_of<R: Rng>(rng: &mut R, kind: TrajectoryType) -> MotionSpec {
    if kind == TrajectoryType::Stop {
        return MotionSpec { kind, start_speed: 0.0, end_speed: 0.0 };
    }
    let start_speed: f64 = rng.gen_range(4.0..15.0);
    let end_speed = (start_speed + rng.gen_range(-3.0..3.0)).clamp(4.0, 18.0);
    MotionSpec { kind, start_speed, end_speed }
}

fn random_motion<R: Rng>(rng: &mut R, map: &MapTemplate, lane: LaneRef) -> MotionSpec {
    let count = map.lane_count(lane.direction);
    let mut kinds = vec![TrajectoryType::Stop, TrajectoryType::Straight, TrajectoryType::Straight];
    if lane.lane_id < count {
        kinds.push(TrajectoryType::LeftLaneChange);
    }
    if lane.lane_id > 1 {
        kinds.push(TrajectoryType::RightLaneChange);
    }
    if map.intersection_distance().is_some() {
        kinds.extend([TrajectoryType::LeftTurn, TrajectoryType::RightTurn]);
    }
    let kind = kinds[rng.gen_range(0..kinds.len())];
    motion_of(rng, kind)
}

/// `count` random scenarios; scenario `i` uses seed `seed + i`.
pub fn random_dataset(count: usize, seed: u64, max_others: usize) -> Vec<Scenario> {
    (0..count as u64)
        .map(|i| {
            let s = seed.wrapping_add(i);
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let spec = random_spec(&mut rng, max_others);
            synth_scenario(&spec, s).expect("sampled specs are valid")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::validate_scenario;

    fn road(same: u32, ego_lane: u32) -> MapTemplate {
        MapTemplate::StraightRoad { same_lanes: same, opposite_lanes: 0, ego_lane }
    }

    fn moving(kind: TrajectoryType, speed: f64) -> MotionSpec {
        MotionSpec { kind, start_speed: speed, end_speed: speed }
    }

    fn ego(lane: u32, motion: MotionSpec) -> VehicleSpec {
        VehicleSpec { lane: LaneRef { direction: LaneDirection::Same, lane_id: lane }, station: 0.0, motion }
    }

    #[test]
    fn straight_ten_mps_is_one_meter_per_step() {
        let spec = SynthSpec {
            map: road(1, 1),
            vehicles: vec![ego(1, moving(TrajectoryType::Straight, 10.0))],
            lane_width: DEFAULT_LANE_WIDTH,
        };
        let s = synth_scenario(&spec, 0).unwrap();
        let p = &s.trajectories[0].positions;
        assert_eq!(p.len(), 50);
        for w in p.windows(2) {
            assert!((w[1].distance(w[0]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stop_stays_put() {
        let spec = SynthSpec {
            map: road(1, 1),
            vehicles: vec![ego(1, MotionSpec { kind: TrajectoryType::Stop, start_speed: 0.0, end_speed: 0.0 })],
            lane_width: DEFAULT_LANE_WIDTH,
        };
        let s = synth_scenario(&spec, 0).unwrap();
        let t = &s.trajectories[0];
        assert!(t.positions.iter().all(|p| p.distance(t.positions[0]) < 1.0));
        let spread =
            t.speeds.iter().cloned().fold(f64::MIN, f64::max) - t.speeds.iter().cloned().fold(f64::MAX, f64::min);
        assert!(spread <= 0.2);
    }

    #[test]
    fn follower_keeps_constant_gap() {
        let spec = SynthSpec {
            map: road(1, 1),
            vehicles: vec![
                ego(1, moving(TrajectoryType::Straight, 10.0)),
                VehicleSpec {
                    lane: LaneRef { direction: LaneDirection::Same, lane_id: 1 },
                    station: -20.0,
                    motion: moving(TrajectoryType::Straight, 10.0),
                },
            ],
            lane_width: DEFAULT_LANE_WIDTH,
        };
        let s = synth_scenario(&spec, 3).unwrap();
        for (a, b) in s.trajectories[0].positions.iter().zip(&s.trajectories[1].positions) {
            assert!((a.distance(*b) - 20.0).abs() < 1e-9);
        }
    }

    #[test]
    fn left_change_from_leftmost_lane_is_rejected() {
        let spec = SynthSpec {
            map: road(2, 2),
            vehicles: vec![ego(2, moving(TrajectoryType::LeftLaneChange, 10.0))],
            lane_width: DEFAULT_LANE_WIDTH,
        };
        assert!(matches!(synth_scenario(&spec, 0), Err(Error::InvalidSpec(m)) if m.contains("leftmost")));
        let spec = SynthSpec {
            map: road(2, 1),
            vehicles: vec![ego(1, moving(TrajectoryType::RightLaneChange, 10.0))],
            lane_width: DEFAULT_LANE_WIDTH,
        };
        assert!(synth_scenario(&spec, 0).is_err());
    }

    #[test]
    fn too_slow_lane_change_is_rejected() {
        let spec = SynthSpec {
            map: road(2, 1),
            vehicles: vec![ego(1, moving(TrajectoryType::LeftLaneChange, 2.0))],
            lane_width: DEFAULT_LANE_WIDTH,
        };
        assert!(matches!(synth_scenario(&spec, 0), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn random_specs_validate_and_are_deterministic() {
        for seed in 0..40 {
            let a = random_dataset(1, seed, 5).remove(0);
            let b = random_dataset(1, seed, 5).remove(0);
            assert_eq!(a, b);
            assert!(validate_scenario(&a).is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn every_requested_ego_type_is_built() {
        for kind in TrajectoryType::ALL {
            for seed in 0..10 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let spec = random_spec_with_ego(&mut rng, kind, 3);
                let s = synth_scenario(&spec, seed).unwrap();
                assert_eq!(classify_trajectory(&s.trajectories[0], &CodecConfig::default()), kind);
            }
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let spec = random_spec(&mut rng, 4);
        let text = serde_json::to_string(&spec).unwrap();
        let back: SynthSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }
}
