//! Sequential decoding of tree codes.
//!
//! Both decoders explore the code tree with the biased Fano metric and are
//! resumable: a decoder that finished on `z_1..z_{t-1}` and is then handed
//! `z_t` continues exactly as a fresh run on `z_1..z_t` would, because
//! neither algorithm looks at `z_t` before it first reaches depth `t−1`.
//! The closed-loop simulator relies on this to re-decode the whole prefix
//! every step at incremental cost.
//!
//! `DecodeResult::work[t−1]` counts how many times a node at depth `t−1`
//! had its `2^k` children computed. Given the transmitted path, a decoder
//! can also report the per-node work `W_t`: the children computations at
//! the correct node of depth `t−1` plus all those in the incorrect subtree
//! hanging off it. Metric evaluations are reported separately.

mod fano;
mod metric;
mod ml;
mod stack;

pub use fano::{fano_decode, FanoDecoder};
pub use metric::{branch_metric, MetricConfig};
pub use ml::ml_decode_bruteforce;
pub use stack::{stack_decode, StackDecoder};

use crate::channel::{ChannelModel, Symbol};
use crate::treecode::{BitBlock, LtiCode};
use crate::{Error, Result};

/// Work and memory caps for one decode call.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecoderLimits {
    /// Node expansions allowed per call.
    pub max_nodes: u64,
    /// Largest frontier the stack decoder may hold.
    pub max_stack: usize,
    /// How far below the deepest explored depth the search may return;
    /// `None` means unlimited.
    pub backtrack_window: Option<usize>,
}

impl DecoderLimits {
    pub fn unbounded() -> Self {
        Self { max_nodes: u64::MAX, max_stack: usize::MAX, backtrack_window: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_nodes == 0 || self.max_stack == 0 || self.backtrack_window == Some(0) {
            return Err(Error::invalid("decoder limits must be positive"));
        }
        Ok(())
    }
}

impl Default for DecoderLimits {
    fn default() -> Self {
        Self { max_nodes: 1_000_000, max_stack: 1 << 22, backtrack_window: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecodeStatus {
    Completed,
    BudgetExhausted,
    FrontierOverflow,
}

impl DecodeStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecodeStatus::Completed => "completed",
            DecodeStatus::BudgetExhausted => "budget-exhausted",
            DecodeStatus::FrontierOverflow => "frontier-overflow",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    /// Decoded message blocks; shorter than the received sequence unless
    /// `status` is `Completed`.
    pub decoded: Vec<BitBlock>,
    /// `W_1..W_t`, one entry per received block.
    pub work: Vec<u64>,
    /// Branch metrics evaluated over the decoder's lifetime.
    pub metric_evaluations: u64,
    /// Accumulated Fano metric of `decoded`.
    pub metric: f64,
    pub status: DecodeStatus,
}

impl DecodeResult {
    pub fn total_work(&self) -> u64 {
        self.work.iter().sum()
    }
}

/// Common driver interface of the resumable decoders.
pub trait SequentialDecoder {
    /// Appends the channel output for the next time step.
    fn push_received(&mut self, block: &[Symbol]) -> Result<()>;
    /// Searches until the path reaches the current received depth or a
    /// limit trips.
    fn run(&mut self) -> DecodeResult;
    /// Collapses the search onto the deepest best-metric path found so
    /// far, so the next call continues from it.
    fn commit_best(&mut self);
    fn received_depth(&self) -> usize;
    /// Starts attributing work to the nodes of `truth`; see
    /// [`SequentialDecoder::reference_work`].
    fn set_reference(&mut self, truth: &[BitBlock]);
    /// `W_1, W_2, ...` against the reference path, if one was set.
    fn reference_work(&self) -> Option<&[u64]>;
}

/// Work attributed to the nodes of a known path: an expansion of a node
/// whose first `a` blocks agree with the path counts toward entry `a`.
#[derive(Debug, Clone, Default)]
pub(crate) struct ReferenceWork {
    truth: Vec<u64>,
    counts: Vec<u64>,
}

impl ReferenceWork {
    pub(crate) fn new(truth: &[BitBlock]) -> Self {
        Self { truth: truth.iter().map(BitBlock::bits).collect(), counts: vec![0; truth.len() + 1] }
    }

    /// Agreement of a child with the path, from its parent's agreement.
    pub(crate) fn child_agreement(&self, parent_depth: usize, parent_agree: usize, block: u64) -> usize {
        if parent_agree == parent_depth && self.truth.get(parent_depth) == Some(&block) {
            parent_depth + 1
        } else {
            parent_agree
        }
    }

    pub(crate) fn record(&mut self, agree: usize) {
        self.counts[agree] += 1;
    }

    pub(crate) fn counts(&self) -> &[u64] {
        &self.counts
    }
}

/// Delay of the first error event: `t` minus the (1-based) position of the
/// oldest wrong block, or `None` if every block is right.
pub fn first_error_delay(truth: &[BitBlock], decoded: &[BitBlock]) -> Result<Option<usize>> {
    if truth.len() != decoded.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), actual: decoded.len() });
    }
    let t = truth.len();
    Ok(truth
        .iter()
        .zip(decoded)
        .position(|(a, b)| a != b)
        .map(|i| t - (i + 1)))
}

pub(crate) fn check_received(code: &LtiCode, ch: &ChannelModel, block: &[Symbol]) -> Result<()> {
    if block.len() != code.n() {
        return Err(Error::DimensionMismatch { expected: code.n(), actual: block.len() });
    }
    if let Some(&z) = block.iter().find(|&&z| z >= ch.alphabet_size()) {
        return Err(Error::UnknownSymbol(z));
    }
    Ok(())
}

pub(crate) fn to_blocks(words: impl IntoIterator<Item = u64>, k: usize) -> Vec<BitBlock> {
    words
        .into_iter()
        .map(|w| BitBlock::new(w, k).expect("decoded word fits the message width"))
        .collect()
}
