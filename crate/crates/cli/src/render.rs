//! SVG plots of a scenario: lane centerlines, trajectories fading in over
//! time and the vehicles' initial boxes.

use std::fmt::Write as _;

use serde::Deserialize;
use trajgen_core::{Scenario, Vec2};

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenderStyle {
    pub width: u32,
    pub height: u32,
    pub margin: f64,
    pub background: String,
    pub lane_color: String,
    pub vehicle_colors: Vec<String>,
    /// Opacity of the first trajectory segment; the last one is opaque.
    pub start_alpha: f64,
    pub stroke_width: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            width: 800,
            height: 800,
            margin: 20.0,
            background: "#ffffff".into(),
            lane_color: "#b0b0b0".into(),
            vehicle_colors: ["#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"]
                .map(String::from)
                .to_vec(),
            start_alpha: 0.15,
            stroke_width: 2.0,
        }
    }
}

impl RenderStyle {
    pub fn validate(&self) -> anyhow::Result<()> {
        anyhow::ensure!(self.width > 0 && self.height > 0, "render width and height must be positive");
        anyhow::ensure!(!self.vehicle_colors.is_empty(), "render vehicle_colors must not be empty");
        anyhow::ensure!((0.0..=1.0).contains(&self.start_alpha), "render start_alpha must lie in [0, 1]");
        anyhow::ensure!(
            self.margin >= 0.0 && 2.0 * self.margin < self.width.min(self.height) as f64,
            "render margin too large"
        );
        Ok(())
    }
}

struct View {
    min: Vec2,
    scale: f64,
    height: f64,
    margin: f64,
}

impl View {
    fn fit(points: impl Iterator<Item = Vec2>, style: &RenderStyle) -> Self {
        let (mut lo, mut hi) =
            (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in points.filter(|p| p.is_finite()) {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.is_finite() {
            lo = Vec2::new(-1.0, -1.0);
            hi = Vec2::new(1.0, 1.0);
        }
        let span_x = (hi.x - lo.x).max(1.0);
        let span_y = (hi.y - lo.y).max(1.0);
        let avail_w = style.width as f64 - 2.0 * style.margin;
        let avail_h = style.height as f64 - 2.0 * style.margin;
        View {
            min: lo,
            scale: (avail_w / span_x).min(avail_h / span_y),
            height: style.height as f64,
            margin: style.margin,
        }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        let x = self.margin + (p.x - self.min.x) * self.scale;
        let y = self.height - self.margin - (p.y - self.min.y) * self.scale;
        (x, y)
    }
}

pub fn render_svg(s: &Scenario, style: &RenderStyle) -> String {
    let lane_points = s.map.lanes.iter().flat_map(|l| l.centerline.iter().copied());
    let traj_points = s.trajectories.iter().flat_map(|t| t.positions.iter().copied());
    let view = View::fit(lane_points.chain(traj_points), style);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = style.width,
        h = style.height
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="{}"/>"#, style.background);
    for lane in &s.map.lanes {
        let pts: Vec<String> = lane
            .centerline
            .iter()
            .map(|&p| {
                let (x, y) = view.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1" stroke-dasharray="6,4"/>"#,
            pts.join(" "),
            style.lane_color
        );
    }
    for (i, (traj, state)) in s.trajectories.iter().zip(&s.vehicles).enumerate() {
        let color = &style.vehicle_colors[i % style.vehicle_colors.len()];
        let steps = traj.len().saturating_sub(1).max(1) as f64;
        for t in 1..traj.len() {
            if !(traj.valid[t - 1] && traj.valid[t]) {
                continue;
            }
            let alpha = style.start_alpha + (1.0 - style.start_alpha) * t as f64 / steps;
            let (x1, y1) = view.map(traj.positions[t - 1]);
            let (x2, y2) = view.map(traj.positions[t]);
            let _ = writeln!(
                out,
                r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" stroke="{color}" stroke-opacity="{alpha:.3}" stroke-width="{}" stroke-linecap="round"/>"#,
                style.stroke_width
            );
        }
        let (cx, cy) = view.map(state.initial_position);
        let (l, w) = (state.length * view.scale, state.width * view.scale);
        let angle = -state.initial_heading.angle().to_degrees();
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{l:.2}" height="{w:.2}" fill="{color}" fill-opacity="0.6" transform="rotate({angle:.2} {cx:.2} {cy:.2})"><title>V{}</title></rect>"#,
            cx - l / 2.0,
            cy - w / 2.0,
            i + 1
        );
    }
    out.push_str("</svg>\n");
    out
}
