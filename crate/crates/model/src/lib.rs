//! Code-conditioned trajectory decoder: lane and code feature extraction,
//! two-step attention aggregation, per-type generation heads, the training
//! loss and loop, and the checkpoint container.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checkpoint;
pub mod config;
pub mod decoder;
pub mod error;
pub mod features;
pub mod loss;
pub mod train;

pub use checkpoint::{
    check_config, load_checkpoint, load_checkpoint_expecting, save_checkpoint, Checkpoint, FORMAT_VERSION,
};
pub use config::DecoderConfig;
pub use decoder::{Decoder, DecoderNet, NetCache};
pub use error::{ModelError, Result};
pub use features::{decode_initial_state, lane_attributes, DecoderInput};
pub use loss::{relative_displacements, scenario_loss, LossBreakdown, Target};
pub use train::{prepare_examples, TrainConfig, TrainExample, TrainRecord, Trainer};
