//! Dense layers with explicit forward caches and hand-written backward
//! passes, plus a finite-difference gradient checker and AdamW.
//!
//! Parameters live in a [`ParamStore`]; layers hold [`ParamId`]s into it.
//! A forward pass returns the output together with a cache, and the
//! matching backward pass consumes the cache, accumulates parameter
//! gradients into the store and returns the input gradient.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod attention;
mod encoding;
mod error;
mod gradcheck;
mod linear;
mod mcg;
mod norm;
mod optim;
mod params;

pub use attention::{AttentionCache, MultiHeadAttention};
pub use encoding::positional_encode;
pub use error::{Error, Result};
pub use gradcheck::{gradcheck, GradcheckOptions, GradcheckReport};
pub use linear::{sigmoid, silu, silu_grad, Linear, LinearCache, Mlp, MlpCache};
pub use mcg::{McgBlock, McgBlockCache, McgStack, McgStackCache};
pub use norm::{LayerNorm, LayerNormCache};
pub use optim::{AdamW, AdamWConfig};
pub use params::{Param, ParamId, ParamStore};

pub type Matrix = ndarray::Array2<f64>;
