use ndarray::{Array2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use trajgen_core::codec::{CodeBundle, CodecConfig, TrajectoryType};
use trajgen_core::scenario::{Scenario, Trajectory, TIMESTEP};
use trajgen_core::{LaneMap, Vec2};
use trajgen_nn::{
    AttentionCache, LayerNorm, LayerNormCache, Matrix, McgStack, McgStackCache, Mlp, MlpCache, MultiHeadAttention,
    ParamStore,
};

use crate::config::DecoderConfig;
use crate::error::{ModelError, Result};
use crate::features::DecoderInput;

/// `LN(x + MHA(x, kv, kv))`.
#[derive(Clone, Debug)]
struct AttentionLayer {
    attention: MultiHeadAttention,
    norm: LayerNorm,
}

#[derive(Clone, Debug)]
struct AttentionLayerCache {
    attention: AttentionCache,
    norm: LayerNormCache,
}

impl AttentionLayer {
    fn new(store: &mut ParamStore, name: &str, dim: usize, heads: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        Ok(Self {
            attention: MultiHeadAttention::new(store, &format!("{name}.attention"), dim, heads, rng)?,
            norm: LayerNorm::new(store, &format!("{name}.norm"), dim)?,
        })
    }

    fn forward(
        &self,
        store: &ParamStore,
        x: &Matrix,
        kv: &Matrix,
        mask: Option<&[bool]>,
    ) -> Result<(Matrix, AttentionLayerCache)> {
        let (a, attention) = self.attention.forward(store, x, kv, kv, mask)?;
        let (y, norm) = self.norm.forward(store, &(x + &a))?;
        Ok((y, AttentionLayerCache { attention, norm }))
    }

    /// Returns gradients for the query stream and for the key/value stream.
    fn backward(&self, store: &mut ParamStore, cache: &AttentionLayerCache, dy: &Matrix) -> (Matrix, Matrix) {
        let ds = self.norm.backward(store, &cache.norm, dy);
        let (dq, dk, dv) = self.attention.backward(store, &cache.attention, &ds);
        (ds + dq, dk + dv)
    }
}

/// Network layers; parameters live in a separate [`ParamStore`].
#[derive(Clone, Debug)]
pub struct DecoderNet {
    map_encoder: McgStack,
    vehicle_embed: Mlp,
    interaction_embed: Mlp,
    map_to_interaction: Vec<AttentionLayer>,
    map_to_vehicle: Vec<AttentionLayer>,
    interaction_to_vehicle: Vec<AttentionLayer>,
    heads: Vec<Mlp>,
    horizon: usize,
    output_scale: f64,
}

#[derive(Clone, Debug)]
pub struct NetCache {
    map: McgStackCache,
    vehicle: MlpCache,
    interaction: MlpCache,
    map_to_interaction: Vec<AttentionLayerCache>,
    map_to_vehicle: Vec<AttentionLayerCache>,
    interaction_to_vehicle: Vec<AttentionLayerCache>,
    heads: Vec<Option<(Vec<usize>, MlpCache)>>,
    vehicles: usize,
    lanes: usize,
}

impl DecoderNet {
    pub fn new(store: &mut ParamStore, cfg: &DecoderConfig) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let d = cfg.model_dim();
        let code_width = trajgen_core::codec::VEHICLE_CODE_LEN * 2 * cfg.pe_frequencies;
        let map_encoder = McgStack::new(store, "map_encoder", cfg.lane_attr_dim(), d, cfg.mcg_layers, &mut rng)?;
        let vehicle_embed = Mlp::new(store, "vehicle_embed", &[code_width, d, d], &mut rng)?;
        let interaction_embed = Mlp::new(store, "interaction_embed", &[code_width, d, d], &mut rng)?;
        let stack = |store: &mut ParamStore, name: &str, heads: usize, rng: &mut ChaCha8Rng| {
            (0..cfg.agg_layers)
                .map(|l| AttentionLayer::new(store, &format!("{name}.{l}"), d, heads, rng))
                .collect::<Result<Vec<_>>>()
        };
        let map_to_interaction = stack(store, "map_to_interaction", cfg.agg_heads_map, &mut rng)?;
        let map_to_vehicle = stack(store, "map_to_vehicle", cfg.agg_heads_map, &mut rng)?;
        let interaction_to_vehicle = stack(store, "interaction_to_vehicle", cfg.agg_heads_interaction, &mut rng)?;
        let heads = TrajectoryType::ALL
            .iter()
            .map(|t| Mlp::new(store, &format!("head.{}", t.name()), &[d, cfg.head_hidden, 2 * cfg.horizon], &mut rng))
            .collect::<trajgen_nn::Result<Vec<_>>>()?;
        Ok(Self {
            map_encoder,
            vehicle_embed,
            interaction_embed,
            map_to_interaction,
            map_to_vehicle,
            interaction_to_vehicle,
            heads,
            horizon: cfg.horizon,
            output_scale: cfg.output_scale,
        })
    }

    /// Ego-frame offsets from each vehicle's initial position, one row per
    /// vehicle laid out as `x0, y0, x1, y1, ...`.
    pub fn forward(&self, store: &ParamStore, input: &DecoderInput) -> Result<(Matrix, NetCache)> {
        let n = input.len();
        let lane_mask = Some(&input.lane_mask[..]);
        let (lanes, _, map) = self.map_encoder.forward(store, &input.lane_features, lane_mask)?;
        let (mut v, vehicle) = self.vehicle_embed.forward(store, &input.vehicle_encoding)?;
        let (mut i, interaction) = self.interaction_embed.forward(store, &input.interaction_encoding)?;

        let mut map_to_interaction = Vec::new();
        for layer in &self.map_to_interaction {
            let (y, c) = layer.forward(store, &i, &lanes, lane_mask)?;
            i = y;
            map_to_interaction.push(c);
        }
        let mut map_to_vehicle = Vec::new();
        for layer in &self.map_to_vehicle {
            let (y, c) = layer.forward(store, &v, &lanes, lane_mask)?;
            v = y;
            map_to_vehicle.push(c);
        }
        let mut interaction_to_vehicle = Vec::new();
        for layer in &self.interaction_to_vehicle {
            let (y, c) = layer.forward(store, &v, &i, None)?;
            v = y;
            interaction_to_vehicle.push(c);
        }

        let mut out = Array2::zeros((n, 2 * self.horizon));
        let mut heads = Vec::with_capacity(self.heads.len());
        for (h, head) in self.heads.iter().enumerate() {
            let rows: Vec<usize> = (0..n).filter(|&r| input.actions[r].index() == h).collect();
            if rows.is_empty() {
                heads.push(None);
                continue;
            }
            let (y, c) = head.forward(store, &v.select(Axis(0), &rows))?;
            for (k, &r) in rows.iter().enumerate() {
                out.row_mut(r).assign(&(&y.row(k) * self.output_scale));
            }
            heads.push(Some((rows, c)));
        }
        let cache = NetCache {
            map,
            vehicle,
            interaction,
            map_to_interaction,
            map_to_vehicle,
            interaction_to_vehicle,
            heads,
            vehicles: n,
            lanes: input.lane_features.nrows(),
        };
        Ok((out, cache))
    }

    /// Accumulates parameter gradients for upstream gradient `d_out` on the offsets.
    pub fn backward(&self, store: &mut ParamStore, cache: &NetCache, d_out: &Matrix) {
        let d = self.vehicle_embed.out_dim();
        let mut dv = Array2::zeros((cache.vehicles, d));
        for (head, entry) in self.heads.iter().zip(&cache.heads) {
            if let Some((rows, c)) = entry {
                let dy = d_out.select(Axis(0), rows) * self.output_scale;
                let dx = head.backward(store, c, &dy);
                for (k, &r) in rows.iter().enumerate() {
                    dv.row_mut(r).assign(&dx.row(k));
                }
            }
        }
        let mut di = Array2::zeros((cache.vehicles, d));
        for (layer, c) in self.interaction_to_vehicle.iter().zip(&cache.interaction_to_vehicle).rev() {
            let (dq, dkv) = layer.backward(store, c, &dv);
            dv = dq;
            di += &dkv;
        }
        let mut dm = Array2::zeros((cache.lanes, d));
        for (layer, c) in self.map_to_vehicle.iter().zip(&cache.map_to_vehicle).rev() {
            let (dq, dkv) = layer.backward(store, c, &dv);
            dv = dq;
            dm += &dkv;
        }
        for (layer, c) in self.map_to_interaction.iter().zip(&cache.map_to_interaction).rev() {
            let (dq, dkv) = layer.backward(store, c, &di);
            di = dq;
            dm += &dkv;
        }
        self.vehicle_embed.backward(store, &cache.vehicle, &dv);
        self.interaction_embed.backward(store, &cache.interaction, &di);
        self.map_encoder.backward(store, &cache.map, &dm, &Array2::zeros((1, d)));
    }

    /// Absolute ego-frame positions: initial positions plus offsets.
    pub fn positions(&self, input: &DecoderInput, offsets: &Matrix) -> Matrix {
        let mut p = offsets.clone();
        for (r, s) in input.initial_states.iter().enumerate() {
            for t in 0..self.horizon {
                p[[r, 2 * t]] += s.initial_position.x;
                p[[r, 2 * t + 1]] += s.initial_position.y;
            }
        }
        p
    }
}

/// A decoder with its parameters.
#[derive(Clone, Debug)]
pub struct Decoder {
    pub config: DecoderConfig,
    pub net: DecoderNet,
    pub store: ParamStore,
}

impl Decoder {
    pub fn new(config: DecoderConfig) -> Result<Self> {
        let mut store = ParamStore::new();
        let net = DecoderNet::new(&mut store, &config)?;
        Ok(Self { config, net, store })
    }

    /// Predicted ego-frame positions, one row per vehicle.
    pub fn predict(&self, input: &DecoderInput) -> Result<Matrix> {
        let (offsets, _) = self.net.forward(&self.store, input)?;
        Ok(self.net.positions(input, &offsets))
    }

    /// Decodes codes into a scenario on `map`, in the ego frame.
    pub fn decode(&self, bundle: &CodeBundle, map: &LaneMap, codec: &CodecConfig) -> Result<Scenario> {
        if self.config.horizon != trajgen_core::HORIZON {
            return Err(ModelError::Config(format!(
                "scenarios need a horizon of {}, this decoder produces {}",
                trajgen_core::HORIZON,
                self.config.horizon
            )));
        }
        let input = DecoderInput::new(bundle, map, &self.config, codec)?;
        let p = self.predict(&input)?;
        let mut trajectories = Vec::with_capacity(input.len());
        for (r, state) in input.initial_states.iter().enumerate() {
            let pts: Vec<Vec2> =
                (0..self.config.horizon).map(|t| Vec2::new(p[[r, 2 * t]], p[[r, 2 * t + 1]])).collect();
            if pts.iter().any(|q| !q.is_finite()) {
                return Err(ModelError::NonFinite(format!("vehicle {r} has non-finite coordinates")));
            }
            trajectories.push(Trajectory::from_positions(pts, TIMESTEP, state.initial_heading)?);
        }
        Ok(Scenario { map: map.clone(), vehicles: input.initial_states, trajectories })
    }
}
