//! Displacement, shape and collision metrics for generated scenarios.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::scenario::{Scenario, Trajectory, DEFAULT_VEHICLE_LENGTH, DEFAULT_VEHICLE_WIDTH};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricConfig {
    /// Minimum IoU at some timestep for a pair to count as colliding.
    pub iou_threshold_delta: f64,
    pub box_default_length: f64,
    pub box_default_width: f64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            iou_threshold_delta: 0.05,
            box_default_length: DEFAULT_VEHICLE_LENGTH,
            box_default_width: DEFAULT_VEHICLE_WIDTH,
        }
    }
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.iou_threshold_delta) {
            return Err(Error::Config(format!("iou_threshold_delta {} outside [0, 1)", self.iou_threshold_delta)));
        }
        if !(self.box_default_length > 0.0 && self.box_default_width > 0.0) {
            return Err(Error::Config("default box extents must be positive".into()));
        }
        Ok(())
    }
}

fn check_lengths(a: &Trajectory, b: &Trajectory) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidInput(format!("trajectory lengths differ: {} vs {}", a.len(), b.len())));
    }
    Ok(())
}

/// Mean Euclidean distance over steps valid in both trajectories.
pub fn ade(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_lengths(a, b)?;
    let (mut sum, mut n) = (0.0, 0usize);
    for t in 0..a.len() {
        if a.valid[t] && b.valid[t] {
            sum += a.positions[t].distance(b.positions[t]);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidInput("no step is valid in both trajectories".into()));
    }
    Ok(sum / n as f64)
}

/// Euclidean distance at the final step.
pub fn fde(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    check_lengths(a, b)?;
    let last = a.len().checked_sub(1).ok_or_else(|| Error::InvalidInput("empty trajectory".into()))?;
    if !(a.valid[last] && b.valid[last]) {
        return Err(Error::InvalidInput("final step is invalid".into()));
    }
    Ok(a.positions[last].distance(b.positions[last]))
}

/// Symmetric discrete Hausdorff distance between two point sets.
pub fn hausdorff(a: &[Vec2], b: &[Vec2]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput("empty point set".into()));
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

/// Outer max of inner min, skipping a point once it is known not to raise
/// the running maximum.
fn directed_hausdorff(from: &[Vec2], to: &[Vec2]) -> f64 {
    let mut cmax = 0.0f64;
    for p in from {
        let mut cmin = f64::INFINITY;
        for q in to {
            let d = p.distance(*q);
            if d < cmin {
                cmin = d;
                if cmin <= cmax {
                    break;
                }
            }
        }
        cmax = cmax.max(cmin);
    }
    cmax
}

fn valid_points(t: &Trajectory) -> Vec<Vec2> {
    t.positions.iter().zip(&t.valid).filter(|(_, v)| **v).map(|(p, _)| *p).collect()
}

pub fn trajectory_hausdorff(a: &Trajectory, b: &Trajectory) -> Result<f64> {
    hausdorff(&valid_points(a), &valid_points(b))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrientedBox {
    pub center: Vec2,
    pub heading: Vec2,
    pub length: f64,
    pub width: f64,
}

impl OrientedBox {
    pub fn new(center: Vec2, heading: Vec2, length: f64, width: f64) -> Self {
        Self { center, heading, length, width }
    }

    /// Corners in counter-clockwise order.
    pub fn corners(&self) -> [Vec2; 4] {
        let f = self.heading.normalized().unwrap_or(Vec2::UNIT_X);
        let l = Vec2::new(-f.y, f.x);
        let (hl, hw) = (self.length / 2.0, self.width / 2.0);
        let c = self.center;
        [c + f * hl + l * -hw, c + f * hl + l * hw, c + f * -hl + l * hw, c + f * -hl + l * -hw]
    }

    pub fn area(&self) -> f64 {
        self.length * self.width
    }
}

fn polygon_area(poly: &[Vec2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Clips `subject` against every edge of the convex, counter-clockwise `clip`.
fn clip_convex(subject: &[Vec2], clip: &[Vec2]) -> Vec<Vec2> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.is_empty() {
            break;
        }
        let (a, b) = (clip[i], clip[(i + 1) % clip.len()]);
        let edge = b - a;
        let side = |p: Vec2| edge.cross(p - a);
        let input = std::mem::take(&mut out);
        for j in 0..input.len() {
            let cur = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            let (sc, sp) = (side(cur), side(prev));
            if sc >= 0.0 {
                if sp < 0.0 {
                    out.push(prev + (cur - prev) * (sp / (sp - sc)));
                }
                out.push(cur);
            } else if sp >= 0.0 {
                out.push(prev + (cur - prev) * (sp / (sp - sc)));
            }
        }
    }
    out
}

/// Intersection over union of two oriented rectangles.
pub fn obb_iou(a: &OrientedBox, b: &OrientedBox) -> Result<f64> {
    for bx in [a, b] {
        if !(bx.length > 0.0 && bx.width > 0.0) || !bx.center.is_finite() || bx.heading.normalized().is_none() {
            return Err(Error::Degenerate(format!("box {bx:?} has no area or no heading")));
        }
    }
    let inter = polygon_area(&clip_convex(&a.corners(), &b.corners())).max(0.0);
    let union = a.area() + b.area() - inter;
    Ok((inter / union).clamp(0.0, 1.0))
}

fn box_extent(v: f64, fallback: f64) -> f64 {
    if v.is_finite() && v > 0.0 {
        v
    } else {
        fallback
    }
}

fn boxes_at(s: &Scenario, t: usize, cfg: &MetricConfig) -> Vec<Option<OrientedBox>> {
    s.vehicles
        .iter()
        .zip(&s.trajectories)
        .map(|(v, tr)| {
            tr.valid[t].then(|| {
                OrientedBox::new(
                    tr.positions[t],
                    tr.headings[t],
                    box_extent(v.length, cfg.box_default_length),
                    box_extent(v.width, cfg.box_default_width),
                )
            })
        })
        .collect()
}

/// Fraction of vehicle pairs whose boxes overlap by more than the IoU
/// threshold at some step; 0 with fewer than two vehicles.
pub fn scenario_collision_rate(s: &Scenario, cfg: &MetricConfig) -> Result<f64> {
    let n = s.vehicles.len();
    if n < 2 {
        return Ok(0.0);
    }
    let steps = s.trajectories.iter().map(|t| t.len()).min().unwrap_or(0);
    let mut hit = vec![false; n * n];
    for t in 0..steps {
        let boxes = boxes_at(s, t, cfg);
        for i in 0..n {
            for j in i + 1..n {
                if hit[i * n + j] {
                    continue;
                }
                if let (Some(a), Some(b)) = (&boxes[i], &boxes[j]) {
                    let reach = (a.length.hypot(a.width) + b.length.hypot(b.width)) / 2.0;
                    if a.center.distance(b.center) < reach && obb_iou(a, b)? > cfg.iou_threshold_delta {
                        hit[i * n + j] = true;
                    }
                }
            }
        }
    }
    let pairs = n * (n - 1) / 2;
    Ok(hit.iter().filter(|h| **h).count() as f64 / pairs as f64)
}

/// Mean collision rate over a set of scenarios.
pub fn scr(scenarios: &[Scenario], cfg: &MetricConfig) -> Result<f64> {
    if scenarios.is_empty() {
        return Ok(0.0);
    }
    let rates = scenarios.par_iter().map(|s| scenario_collision_rate(s, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(rates.iter().sum::<f64>() / rates.len() as f64)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMetrics {
    pub made: f64,
    pub min_ade: f64,
    pub mfde: f64,
    pub min_fde: f64,
    pub scr: f64,
    pub hd: f64,
}

/// Per-scenario metrics; vehicles correspond by index and SCR is taken on
/// the prediction.
pub fn scenario_metrics(gt: &Scenario, pred: &Scenario, cfg: &MetricConfig) -> Result<ScenarioMetrics> {
    if gt.trajectories.len() != pred.trajectories.len() {
        return Err(Error::InvalidInput(format!(
            "vehicle count mismatch: {} ground truth vs {} predicted",
            gt.trajectories.len(),
            pred.trajectories.len()
        )));
    }
    if gt.trajectories.is_empty() {
        return Err(Error::InvalidInput("scenario has no vehicles".into()));
    }
    let mut ades = Vec::new();
    let mut fdes = Vec::new();
    let mut hds = Vec::new();
    for (g, p) in gt.trajectories.iter().zip(&pred.trajectories) {
        ades.push(ade(g, p)?);
        fdes.push(fde(g, p)?);
        hds.push(trajectory_hausdorff(g, p)?);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(ScenarioMetrics {
        made: mean(&ades),
        min_ade: min(&ades),
        mfde: mean(&fdes),
        min_fde: min(&fdes),
        scr: scenario_collision_rate(pred, cfg)?,
        hd: mean(&hds),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioRow {
    pub id: String,
    #[serde(flatten)]
    pub metrics: ScenarioMetrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub aggregate: ScenarioMetrics,
    pub scenarios: Vec<ScenarioRow>,
}

impl MetricReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("scenario,made,min_ade,mfde,min_fde,scr,hd\n");
        let mut row = |id: &str, m: &ScenarioMetrics| {
            out.push_str(&format!(
                "{id},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                m.made, m.min_ade, m.mfde, m.min_fde, m.scr, m.hd
            ));
        };
        for r in &self.scenarios {
            row(&r.id, &r.metrics);
        }
        row("aggregate", &self.aggregate);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Evaluates `(id, ground truth, prediction)` triples in parallel and
/// averages every metric over scenarios.
pub fn evaluate(pairs: &[(String, Scenario, Scenario)], cfg: &MetricConfig) -> Result<MetricReport> {
    cfg.validate()?;
    if pairs.is_empty() {
        return Err(Error::InvalidInput("no scenarios to evaluate".into()));
    }
    let scenarios = pairs
        .par_iter()
        .map(|(id, gt, pred)| {
            scenario_metrics(gt, pred, cfg)
                .map(|metrics| ScenarioRow { id: id.clone(), metrics })
                .map_err(|e| Error::InvalidInput(format!("scenario {id}: {e}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let n = scenarios.len() as f64;
    let mut a = ScenarioMetrics::default();
    for r in &scenarios {
        let m = &r.metrics;
        a.made += m.made / n;
        a.min_ade += m.min_ade / n;
        a.mfde += m.mfde / n;
        a.min_fde += m.min_fde / n;
        a.scr += m.scr / n;
        a.hd += m.hd / n;
    }
    Ok(MetricReport { aggregate: a, scenarios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{HORIZON, TIMESTEP};

    fn line(offset: Vec2) -> Trajectory {
        let pts = (0..HORIZON).map(|k| Vec2::new(k as f64, 0.0) + offset).collect();
        Trajectory::from_positions(pts, TIMESTEP, Vec2::UNIT_X).unwrap()
    }

    #[test]
    fn ade_fde_examples() {
        let a = line(Vec2::ZERO);
        assert_eq!(ade(&a, &a).unwrap(), 0.0);
        let b = line(Vec2::new(3.0, 4.0));
        assert!((ade(&a, &b).unwrap() - 5.0).abs() < 1e-12);
        assert!((fde(&a, &b).unwrap() - 5.0).abs() < 1e-12);
        let mut c = a.clone();
        c.positions[HORIZON - 1] += Vec2::new(3.0, 4.0);
        assert!((ade(&a, &c).unwrap() - 0.1).abs() < 1e-12);
        let mut d = a.clone();
        d.positions[20] += Vec2::new(3.0, 4.0);
        assert_eq!(fde(&a, &d).unwrap(), 0.0);
    }

    #[test]
    fn ade_without_common_valid_steps_errors() {
        let a = line(Vec2::ZERO);
        let mut b = a.clone();
        b.valid = vec![false; HORIZON];
        assert!(ade(&a, &b).is_err());
        assert!(fde(&a, &b).is_err());
    }

    #[test]
    fn hausdorff_of_shifted_line() {
        let a = line(Vec2::ZERO);
        let b = line(Vec2::new(0.0, 1.0));
        assert!((trajectory_hausdorff(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iou_examples() {
        let a = OrientedBox::new(Vec2::ZERO, Vec2::UNIT_X, 1.0, 1.0);
        let b = OrientedBox::new(Vec2::new(0.5, 0.0), Vec2::UNIT_X, 1.0, 1.0);
        assert!((obb_iou(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((obb_iou(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let far = OrientedBox::new(Vec2::new(5.0, 0.0), Vec2::UNIT_X, 1.0, 1.0);
        assert_eq!(obb_iou(&a, &far).unwrap(), 0.0);
        let flat = OrientedBox::new(Vec2::ZERO, Vec2::UNIT_X, 0.0, 1.0);
        assert!(obb_iou(&a, &flat).is_err());
    }

    #[test]
    fn rotated_square_inside_larger_square() {
        let big = OrientedBox::new(Vec2::ZERO, Vec2::UNIT_X, 4.0, 4.0);
        let small = OrientedBox::new(Vec2::ZERO, Vec2::from_angle(0.3), 1.0, 1.0);
        assert!((obb_iou(&big, &small).unwrap() - 1.0 / 16.0).abs() < 1e-12);
    }
}
