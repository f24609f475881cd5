//! GF(2) block arithmetic and the linear time-invariant tree-code ensemble.
//!
//! A code maps message blocks `b_t ∈ Z_2^k` to code blocks `c_t ∈ Z_2^n`
//! through a block-lower-triangular Toeplitz generator,
//! `c_t = Σ_{i≤t} G_{t−i+1} b_i`, optionally translated by a fixed random
//! sequence `v_t`. Blocks are packed into a single `u64`, so `n, k ≤ 64`.

mod bits;
mod code;
mod serialize;

pub use bits::{mask, BitBlock, GeneratorBlock, MAX_BLOCK_BITS};
pub use code::{
    join_subblocks, sample_lti, split_subblocks, subblock_expand, BranchCache, EncoderState,
    LtiCode,
};
pub use serialize::{code_digest, read_code, write_code};
