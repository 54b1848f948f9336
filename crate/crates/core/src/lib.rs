//! Scene codes, synthetic scenarios, map retrieval and metrics for
//! code-conditioned traffic trajectory generation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod codec;
pub mod error;
pub mod geom;
pub mod maplib;
pub mod metrics;
pub mod scenario;
pub mod synth;

pub use codec::{CodeBundle, CodecConfig, InteractionCode, MapCode, TrajectoryType, VehicleCode};
pub use error::{Error, Result};
pub use geom::{RigidTransform, Vec2};
pub use scenario::{Lane, LaneDirection, LaneMap, Scenario, Trajectory, VehicleState, HORIZON, TIMESTEP};
