use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};

/// Floats per resampled lane point.
const POINT_DIMS: usize = 2;
/// One-hot direction plus normalized lane id.
const LANE_EXTRA_DIMS: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecoderConfig {
    pub lane_dim: usize,
    pub vehicle_dim: usize,
    pub interaction_dim: usize,
    pub mcg_layers: usize,
    pub agg_heads_map: usize,
    pub agg_heads_interaction: usize,
    /// Transformer layers in each aggregation step.
    pub agg_layers: usize,
    pub head_hidden: usize,
    /// Sine/cosine pairs per code value.
    pub pe_frequencies: usize,
    pub lane_points: usize,
    pub max_lanes: usize,
    pub horizon: usize,
    /// Meters per unit of raw head output.
    pub output_scale: f64,
    /// Multiplier applied to lane coordinates before encoding.
    pub coord_scale: f64,
    pub seed: u64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        Self {
            lane_dim: 256,
            vehicle_dim: 256,
            interaction_dim: 256,
            mcg_layers: 5,
            agg_heads_map: 4,
            agg_heads_interaction: 8,
            agg_layers: 2,
            head_hidden: 512,
            pe_frequencies: 8,
            lane_points: 10,
            max_lanes: 384,
            horizon: trajgen_core::HORIZON,
            output_scale: 10.0,
            coord_scale: 0.02,
            seed: 0,
        }
    }
}

impl DecoderConfig {
    /// Small model for desk-scale training runs.
    pub fn shrink() -> Self {
        Self::default().with_shrunk_dims()
    }

    /// Replaces the width settings with the small preset, keeping the rest.
    pub fn with_shrunk_dims(self) -> Self {
        Self { lane_dim: 32, vehicle_dim: 32, interaction_dim: 32, head_hidden: 64, pe_frequencies: 4, ..self }
    }

    /// Minimal model with a short horizon for finite-difference checks.
    pub fn tiny() -> Self {
        Self {
            lane_dim: 16,
            vehicle_dim: 16,
            interaction_dim: 16,
            head_hidden: 16,
            pe_frequencies: 2,
            horizon: 5,
            ..Self::default()
        }
    }

    pub fn model_dim(&self) -> usize {
        self.vehicle_dim
    }

    /// Width of one lane feature row.
    pub fn lane_attr_dim(&self) -> usize {
        self.lane_points * POINT_DIMS + LANE_EXTRA_DIMS
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(ModelError::Config(m));
        if self.lane_dim != self.vehicle_dim || self.interaction_dim != self.vehicle_dim {
            return bad(format!(
                "lane_dim, vehicle_dim and interaction_dim must be equal (got {}, {}, {})",
                self.lane_dim, self.vehicle_dim, self.interaction_dim
            ));
        }
        for (name, v) in [
            ("vehicle_dim", self.vehicle_dim),
            ("mcg_layers", self.mcg_layers),
            ("agg_heads_map", self.agg_heads_map),
            ("agg_heads_interaction", self.agg_heads_interaction),
            ("agg_layers", self.agg_layers),
            ("head_hidden", self.head_hidden),
            ("pe_frequencies", self.pe_frequencies),
            ("max_lanes", self.max_lanes),
            ("horizon", self.horizon),
        ] {
            if v == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.lane_points < 2 {
            return bad("lane_points must be at least 2".into());
        }
        for (name, heads) in
            [("agg_heads_map", self.agg_heads_map), ("agg_heads_interaction", self.agg_heads_interaction)]
        {
            if !self.vehicle_dim.is_multiple_of(heads) {
                return bad(format!("{name} = {heads} does not divide the feature width {}", self.vehicle_dim));
            }
        }
        if !(self.output_scale > 0.0 && self.coord_scale > 0.0) {
            return bad("output_scale and coord_scale must be positive".into());
        }
        Ok(())
    }
}
