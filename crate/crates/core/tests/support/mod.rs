//! Reference implementations used to cross-check the library. Each one is
//! written from the definitions directly and avoids the library's helpers.
#![allow(dead_code)]

use rand::Rng;
use trajgen_core::codec::{CodeBundle, InteractionCode, MapCode, TrajectoryType, VehicleCode};
use trajgen_core::{Trajectory, Vec2};

/// Counts how many whole gaps fit below `d`, up to `max_bin`.
pub fn distance_bin(d: f64, gap: f64, max_bin: i32) -> i32 {
    let mut k = 0;
    while k < max_bin && (k + 1) as f64 * gap <= d + 1e-9 * gap {
        k += 1;
    }
    k
}

/// Sector from an explicit degree table: sector `s` of `areas` covers the
/// half-open bearing interval `[-(s + 1/2) w, -(s - 1/2) w)` with `w = 360 / areas`.
pub fn sector_from_degrees(bearing_deg: f64, areas: usize) -> i32 {
    let w = 360.0 / areas as f64;
    let mut hits = Vec::new();
    for s in 0..areas {
        let lower = -(s as f64 + 0.5) * w;
        let offset = (bearing_deg - lower).rem_euclid(360.0);
        if offset < w - 1e-9 || offset > 360.0 - 1e-9 {
            hits.push(s as i32);
        }
    }
    assert_eq!(hits.len(), 1, "bearing {bearing_deg} fell in sectors {hits:?}");
    hits[0]
}

pub fn bearing_deg(rel: Vec2, heading: Vec2) -> f64 {
    let h = heading.angle();
    let local = (rel.y.atan2(rel.x) - h).to_degrees();
    (local + 180.0).rem_euclid(360.0) - 180.0
}

/// The five trajectory predicates evaluated independently, then resolved
/// stop, turns, lane changes, straight.
pub fn classify(t: &Trajectory, lane_width: f64, delta_a: f64) -> TrajectoryType {
    let n = t.positions.len();
    let mut stop_pos = true;
    let mut stop_speed = true;
    for i in 0..n {
        for j in 0..n {
            let dx = t.positions[i].x - t.positions[j].x;
            let dy = t.positions[i].y - t.positions[j].y;
            if (dx * dx + dy * dy).sqrt() > 1.0 {
                stop_pos = false;
            }
            if (t.speeds[i] - t.speeds[j]).abs() > 0.2 {
                stop_speed = false;
            }
        }
    }
    if stop_pos && stop_speed {
        return TrajectoryType::Stop;
    }
    let a0 = t.headings[0].y.atan2(t.headings[0].x);
    let a1 = t.headings[n - 1].y.atan2(t.headings[n - 1].x);
    let mut theta = a1 - a0;
    while theta > std::f64::consts::PI {
        theta -= std::f64::consts::TAU;
    }
    while theta <= -std::f64::consts::PI {
        theta += std::f64::consts::TAU;
    }
    let (dx, dy) = (t.positions[n - 1].x - t.positions[0].x, t.positions[n - 1].y - t.positions[0].y);
    let lateral = (-dx * a0.sin() + dy * a0.cos()).abs();
    let wide = lateral >= lane_width;

    let left_turn = wide && theta >= 2.0 * delta_a;
    let right_turn = wide && theta <= -2.0 * delta_a;
    let left_change = wide && theta >= delta_a && theta < 2.0 * delta_a;
    let right_change = wide && theta <= -delta_a && theta > -2.0 * delta_a;
    if left_turn {
        TrajectoryType::LeftTurn
    } else if right_turn {
        TrajectoryType::RightTurn
    } else if left_change {
        TrajectoryType::LeftLaneChange
    } else if right_change {
        TrajectoryType::RightLaneChange
    } else {
        TrajectoryType::Straight
    }
}

/// Naive all-pairs symmetric Hausdorff distance.
pub fn hausdorff(a: &[Vec2], b: &[Vec2]) -> f64 {
    let directed = |p: &[Vec2], q: &[Vec2]| {
        let mut worst = 0.0f64;
        for x in p {
            let mut best = f64::INFINITY;
            for y in q {
                best = best.min((x.x - y.x).hypot(x.y - y.y));
            }
            worst = worst.max(best);
        }
        worst
    };
    directed(a, b).max(directed(b, a))
}

pub struct Rect {
    pub center: Vec2,
    pub angle: f64,
    pub length: f64,
    pub width: f64,
}

impl Rect {
    pub fn contains(&self, p: Vec2) -> bool {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (p.x - self.center.x, p.y - self.center.y);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        u.abs() <= self.length / 2.0 && v.abs() <= self.width / 2.0
    }

    fn radius(&self) -> f64 {
        (self.length * self.length + self.width * self.width).sqrt() / 2.0
    }
}

/// Monte-Carlo IoU from uniform samples over a square covering both boxes.
pub fn monte_carlo_iou<R: Rng>(a: &Rect, b: &Rect, samples: usize, rng: &mut R) -> f64 {
    let lo_x = (a.center.x - a.radius()).min(b.center.x - b.radius());
    let hi_x = (a.center.x + a.radius()).max(b.center.x + b.radius());
    let lo_y = (a.center.y - a.radius()).min(b.center.y - b.radius());
    let hi_y = (a.center.y + a.radius()).max(b.center.y + b.radius());
    let (mut both, mut either) = (0usize, 0usize);
    for _ in 0..samples {
        let p = Vec2::new(rng.gen_range(lo_x..hi_x), rng.gen_range(lo_y..hi_y));
        let (ia, ib) = (a.contains(p), b.contains(p));
        if ia && ib {
            both += 1;
        }
        if ia || ib {
            either += 1;
        }
    }
    if either == 0 {
        0.0
    } else {
        both as f64 / either as f64
    }
}

/// A random bundle satisfying every range invariant under the default config.
pub fn random_bundle<R: Rng>(rng: &mut R) -> CodeBundle {
    let n = rng.gen_range(1..=32);
    let same = rng.gen_range(1..=6);
    let map_code = MapCode {
        same_dir_lanes: same,
        opposite_dir_lanes: rng.gen_range(0..=6),
        perp_up_lanes: rng.gen_range(0..=6),
        perp_down_lanes: rng.gen_range(0..=6),
        intersection_bin: rng.gen_range(-1..=3),
        ego_lane_id: rng.gen_range(1..=same),
    };
    let mut vehicle_codes = Vec::new();
    let mut interaction_codes = Vec::new();
    for i in 0..n {
        let speed_bins = [0; 6].map(|_| rng.gen_range(0..=8));
        let action = TrajectoryType::ALL[rng.gen_range(0..6)];
        if i == 0 {
            vehicle_codes.push(VehicleCode { pos_sector: -1, distance_bin: 0, direction_class: 0, speed_bins, action });
            interaction_codes.push(InteractionCode::default());
        } else {
            vehicle_codes.push(VehicleCode {
                pos_sector: rng.gen_range(0..6),
                distance_bin: rng.gen_range(0..=3),
                direction_class: rng.gen_range(0..4),
                speed_bins,
                action,
            });
            interaction_codes.push(InteractionCode {
                distance_bins: [0; 5].map(|_| rng.gen_range(0..=5)),
                direction_sectors: [0; 5].map(|_| rng.gen_range(0..6)),
            });
        }
    }
    CodeBundle { map_code, vehicle_codes, interaction_codes }
}
