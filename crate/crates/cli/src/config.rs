use std::path::Path;

use serde::Deserialize;
use trajgen_core::metrics::MetricConfig;
use trajgen_core::CodecConfig;
use trajgen_llm::ProviderConfig;
use trajgen_model::{DecoderConfig, TrainConfig};

use crate::render::RenderStyle;

/// Settings file layout; every section is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub codec: CodecConfig,
    /// Absent means "use the checkpoint's config" when one is loaded.
    pub decoder: Option<DecoderConfig>,
    pub train: TrainConfig,
    pub metrics: MetricConfig,
    pub llm: ProviderConfig,
    pub render: RenderStyle,
}

impl AppConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: AppConfig = toml::from_str(text)?;
        cfg.codec.validate()?;
        cfg.metrics.validate()?;
        cfg.train.validate()?;
        cfg.llm.validate()?;
        cfg.render.validate()?;
        if let Some(d) = &cfg.decoder {
            d.validate()?;
        }
        Ok(cfg)
    }

    /// Applies a global `--seed` to every seeded component.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(seed) = seed {
            self.train.seed = seed;
            if let Some(d) = &mut self.decoder {
                d.seed = seed;
            }
        }
        self
    }

    /// Decoder settings for a fresh model.
    pub fn fresh_decoder(&self, seed: Option<u64>) -> DecoderConfig {
        let mut cfg = self.decoder.clone().unwrap_or_default();
        if self.train.shrink_dims {
            cfg = cfg.with_shrunk_dims();
        }
        if let Some(seed) = seed {
            cfg.seed = seed;
        }
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sections_parse() {
        let cfg = AppConfig::parse(
            "[train]\nlearning_rate = 0.001\nshrink_dims = true\n[metrics]\niou_threshold_delta = 0.1\n[codec]\ninteraction_areas = 8\n",
        )
        .unwrap();
        assert_eq!(cfg.train.learning_rate, 0.001);
        assert_eq!(cfg.metrics.iou_threshold_delta, 0.1);
        assert_eq!(cfg.codec.interaction_areas, 8);
        assert_eq!(cfg.fresh_decoder(None).lane_dim, 32);
    }

    #[test]
    fn unknown_fields_are_named() {
        let err = AppConfig::parse("[train]\nlearning_rat = 0.1\n").unwrap_err().to_string();
        assert!(err.contains("learning_rat"), "{err}");
        let err = AppConfig::parse("[decoder]\nhorizon = 0\n").unwrap_err().to_string();
        assert!(err.contains("horizon"), "{err}");
    }
}
