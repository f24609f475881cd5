//! Networked control of a linear plant over a coded noisy link.
//!
//! The observer quantizes each scalar measurement, encodes it with a tree
//! code and sends it over the channel; the controller sequentially decodes
//! the whole received prefix every step, rebuilds the state with a deadbeat
//! observer and applies linear state feedback.

mod closed_loop;
mod noise;
mod observer;
mod plant;
mod quantizer;

pub use closed_loop::{
    lqr_cost, run_closed_loop, run_open_loop, ControlTrace, DecoderKind, DecoderSpec, LoopCode,
    LoopSettings, StepRecord,
};
pub use noise::{sample_truncated_gaussian, TruncatedGaussian};
pub use observer::{reconstruct_state, ConsistencyGuard, DeadbeatObserver};
pub use plant::PlantModel;
pub use quantizer::QuantizerConfig;
