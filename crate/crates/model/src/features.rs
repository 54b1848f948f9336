use ndarray::Array2;
use trajgen_core::codec::{
    sector_center_bearing, CodeBundle, CodecConfig, TrajectoryType, VehicleCode, VEHICLE_POS_AREAS,
};
use trajgen_core::scenario::{DEFAULT_VEHICLE_LENGTH, DEFAULT_VEHICLE_WIDTH};
use trajgen_core::{LaneDirection, LaneMap, Vec2, VehicleState};
use trajgen_nn::{positional_encode, Matrix};

use crate::config::DecoderConfig;
use crate::error::Result;

/// Lane ids are divided by this before encoding.
const LANE_ID_SCALE: f64 = 8.0;

/// Evenly spaced points along a polyline by arc length.
fn resample(points: &[Vec2], count: usize) -> Vec<Vec2> {
    if points.len() < 2 {
        return vec![points.first().copied().unwrap_or(Vec2::ZERO); count];
    }
    let mut cumulative = vec![0.0];
    for w in points.windows(2) {
        cumulative.push(cumulative.last().unwrap() + w[0].distance(w[1]));
    }
    let total = *cumulative.last().unwrap();
    let mut seg = 0;
    (0..count)
        .map(|j| {
            let s = total * j as f64 / (count - 1) as f64;
            while seg + 2 < cumulative.len() && cumulative[seg + 1] < s {
                seg += 1;
            }
            let len = cumulative[seg + 1] - cumulative[seg];
            let u = if len > 0.0 { ((s - cumulative[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
            points[seg] + (points[seg + 1] - points[seg]) * u
        })
        .collect()
}

/// One row per lane: resampled centerline points (scaled), one-hot
/// direction and normalized lane id. Rows beyond the map's lanes up to
/// `slots` are zero and marked invalid. When the map has more lanes than
/// `cfg.max_lanes`, the lanes nearest the origin are kept.
pub fn lane_attributes(map: &LaneMap, cfg: &DecoderConfig, slots: Option<usize>) -> (Matrix, Vec<bool>) {
    let mut lanes: Vec<_> = map.lanes.iter().collect();
    if lanes.len() > cfg.max_lanes {
        let dist = |l: &&trajgen_core::Lane| trajgen_core::geom::point_polyline_distance(Vec2::ZERO, &l.centerline);
        lanes.sort_by(|a, b| dist(a).total_cmp(&dist(b)));
        lanes.truncate(cfg.max_lanes);
    }
    let rows = slots.unwrap_or(lanes.len()).max(lanes.len()).max(1);
    let mut out = Array2::zeros((rows, cfg.lane_attr_dim()));
    let mut mask = vec![false; rows];
    for (r, lane) in lanes.iter().enumerate() {
        for (j, p) in resample(&lane.centerline, cfg.lane_points).into_iter().enumerate() {
            out[[r, 2 * j]] = p.x * cfg.coord_scale;
            out[[r, 2 * j + 1]] = p.y * cfg.coord_scale;
        }
        let base = 2 * cfg.lane_points;
        out[[r, base + lane.direction.index()]] = 1.0;
        out[[r, base + LaneDirection::ALL.len()]] = lane.lane_id as f64 / LANE_ID_SCALE;
        mask[r] = true;
    }
    (out, mask)
}

/// Initial state implied by a vehicle code: bin-center distance along the
/// sector-center bearing, heading from the direction class, speed from the
/// first speed bin center.
pub fn decode_initial_state(code: &VehicleCode, codec: &CodecConfig) -> VehicleState {
    let speed = (code.speed_bins[0] as f64 + 0.5) * codec.speed_gap;
    if code.pos_sector < 0 {
        return VehicleState {
            initial_position: Vec2::ZERO,
            initial_heading: Vec2::UNIT_X,
            initial_speed: speed,
            length: DEFAULT_VEHICLE_LENGTH,
            width: DEFAULT_VEHICLE_WIDTH,
        };
    }
    let distance = (code.distance_bin as f64 + 0.5) * codec.vehicle_distance_gap;
    let bearing = sector_center_bearing(code.pos_sector, VEHICLE_POS_AREAS);
    let heading =
        LaneDirection::from_index(code.direction_class.clamp(0, 3) as usize).map_or(Vec2::UNIT_X, LaneDirection::unit);
    VehicleState {
        initial_position: Vec2::from_angle(bearing) * distance,
        initial_heading: heading,
        initial_speed: speed,
        length: DEFAULT_VEHICLE_LENGTH,
        width: DEFAULT_VEHICLE_WIDTH,
    }
}

/// Everything the network consumes for one scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoderInput {
    pub lane_features: Matrix,
    pub lane_mask: Vec<bool>,
    pub vehicle_encoding: Matrix,
    pub interaction_encoding: Matrix,
    pub actions: Vec<TrajectoryType>,
    pub initial_states: Vec<VehicleState>,
}

impl DecoderInput {
    pub fn new(bundle: &CodeBundle, map: &LaneMap, cfg: &DecoderConfig, codec: &CodecConfig) -> Result<Self> {
        bundle.validate(codec)?;
        let vehicle_rows: Vec<Vec<i32>> = bundle.vehicle_codes.iter().map(|c| c.to_row().to_vec()).collect();
        let interaction_rows: Vec<Vec<i32>> = bundle.interaction_codes.iter().map(|c| c.to_row().to_vec()).collect();
        let (lane_features, lane_mask) = lane_attributes(map, cfg, None);
        Ok(Self {
            lane_features,
            lane_mask,
            vehicle_encoding: positional_encode(&vehicle_rows, cfg.pe_frequencies),
            interaction_encoding: positional_encode(&interaction_rows, cfg.pe_frequencies),
            actions: bundle.vehicle_codes.iter().map(|c| c.action).collect(),
            initial_states: bundle.vehicle_codes.iter().map(|c| decode_initial_state(c, codec)).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Reorders vehicles 1.. by `order` (a permutation of `1..n`), keeping
    /// the ego first.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let idx: Vec<usize> = std::iter::once(0).chain(order.iter().copied()).collect();
        let pick = |m: &Matrix| m.select(ndarray::Axis(0), &idx);
        Self {
            lane_features: self.lane_features.clone(),
            lane_mask: self.lane_mask.clone(),
            vehicle_encoding: pick(&self.vehicle_encoding),
            interaction_encoding: pick(&self.interaction_encoding),
            actions: idx.iter().map(|&i| self.actions[i]).collect(),
            initial_states: idx.iter().map(|&i| self.initial_states[i].clone()).collect(),
        }
    }
}
