use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::metric::MetricTable;
use super::{
    check_received, to_blocks, DecodeResult, DecodeStatus, DecoderLimits, MetricConfig,
    ReferenceWork, SequentialDecoder,
};
use crate::channel::{ChannelModel, Symbol};
use crate::treecode::{BitBlock, LtiCode};
use crate::{Error, Result};

const NO_PARENT: u32 = u32::MAX;

/// A frontier path: its last block plus a pointer to the expanded parent.
#[derive(Debug, Clone, Copy)]
struct Entry {
    metric: f64,
    depth: u32,
    block: u64,
    parent: u32,
    seq: u64,
}

impl Entry {
    /// Priority order: higher metric, then deeper, then smaller last block,
    /// then earlier creation.
    fn priority(&self, other: &Self) -> Ordering {
        self.metric
            .total_cmp(&other.metric)
            .then(self.depth.cmp(&other.depth))
            .then(other.block.cmp(&self.block))
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.priority(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority(other)
    }
}

#[derive(Debug, Clone, Copy)]
struct Expanded {
    parent: u32,
    block: u64,
    agree: u32,
}

/// Resumable stack-algorithm decoder.
pub struct StackDecoder<'a> {
    code: &'a LtiCode,
    ch: &'a ChannelModel,
    cfg: MetricConfig,
    limits: DecoderLimits,
    tables: Vec<MetricTable>,
    arena: Vec<Expanded>,
    heap: BinaryHeap<Entry>,
    // target-depth node popped by the last completed run; expanded first
    // when the search resumes
    pending: Option<Entry>,
    work: Vec<u64>,
    metric_evaluations: u64,
    next_seq: u64,
    deepest_expanded: usize,
    best_deep: Entry,
    reference: Option<ReferenceWork>,
}

impl<'a> StackDecoder<'a> {
    pub fn new(
        code: &'a LtiCode,
        ch: &'a ChannelModel,
        cfg: MetricConfig,
        limits: DecoderLimits,
    ) -> Result<Self> {
        cfg.validate()?;
        limits.validate()?;
        let root = Entry { metric: 0.0, depth: 0, block: 0, parent: NO_PARENT, seq: 0 };
        let mut heap = BinaryHeap::new();
        heap.push(root);
        Ok(Self {
            code,
            ch,
            cfg,
            limits,
            tables: Vec::new(),
            arena: Vec::new(),
            heap,
            pending: None,
            work: Vec::new(),
            metric_evaluations: 0,
            next_seq: 1,
            deepest_expanded: 0,
            best_deep: root,
            reference: None,
        })
    }

    fn is_stale(&self, e: &Entry) -> bool {
        match self.limits.backtrack_window {
            Some(w) => (e.depth as usize) + w < self.deepest_expanded,
            None => false,
        }
    }

    fn path_words(&self, e: &Entry) -> Vec<u64> {
        let mut words = Vec::with_capacity(e.depth as usize);
        if e.depth == 0 {
            return words;
        }
        words.push(e.block);
        let mut p = e.parent;
        while p != NO_PARENT {
            let node = self.arena[p as usize];
            if node.parent == NO_PARENT {
                break; // root carries no block
            }
            words.push(node.block);
            p = node.parent;
        }
        words.reverse();
        words
    }

    fn expand(&mut self, e: Entry) {
        let depth = e.depth as usize;
        let idx = self.arena.len() as u32;
        let agree = match &mut self.reference {
            Some(r) => {
                let agree = if e.parent == NO_PARENT {
                    0
                } else {
                    let p = self.arena[e.parent as usize];
                    r.child_agreement(depth - 1, p.agree as usize, e.block)
                };
                r.record(agree);
                agree as u32
            }
            None => 0,
        };
        self.arena.push(Expanded { parent: e.parent, block: e.block, agree });
        self.deepest_expanded = self.deepest_expanded.max(depth);
        self.work[depth] += 1;

        let code = self.code;
        let partial = {
            let arena = &self.arena;
            let mut cursor = idx;
            let chain = std::iter::from_fn(|| {
                let node = arena[cursor as usize];
                if node.parent == NO_PARENT {
                    return None;
                }
                cursor = node.parent;
                Some(node.block)
            });
            code.partial_newest_first(depth + 1, chain)
        };
        let table = &self.tables[depth];
        let fan_out = 1u64 << code.k();
        self.metric_evaluations += fan_out;
        for b in 0..fan_out {
            let m = e.metric + table.metric(partial ^ code.mul(1, b));
            if m == f64::NEG_INFINITY {
                continue;
            }
            let child = Entry { metric: m, depth: e.depth + 1, block: b, parent: idx, seq: self.next_seq };
            self.next_seq += 1;
            if child.depth > self.best_deep.depth
                || (child.depth == self.best_deep.depth && child > self.best_deep)
            {
                self.best_deep = child;
            }
            self.heap.push(child);
        }
    }

    fn result(&self, e: &Entry, status: DecodeStatus) -> DecodeResult {
        DecodeResult {
            decoded: to_blocks(self.path_words(e), self.code.k()),
            work: self.work.clone(),
            metric_evaluations: self.metric_evaluations,
            metric: e.metric,
            status,
        }
    }

    fn purge_stale(&mut self) {
        if let Some(w) = self.limits.backtrack_window {
            let floor = self.deepest_expanded.saturating_sub(w) as u32;
            self.heap.retain(|e| e.depth >= floor);
        }
    }
}

impl SequentialDecoder for StackDecoder<'_> {
    fn push_received(&mut self, block: &[Symbol]) -> Result<()> {
        if self.tables.len() >= self.code.horizon() {
            return Err(Error::HorizonExceeded {
                depth: self.tables.len() + 1,
                horizon: self.code.horizon(),
            });
        }
        check_received(self.code, self.ch, block)?;
        self.tables.push(MetricTable::new(self.ch, block, self.cfg.bias)?);
        self.work.push(0);
        Ok(())
    }

    fn run(&mut self) -> DecodeResult {
        let target = self.tables.len() as u32;
        let mut expanded = 0u64;
        loop {
            let next = match self.pending.take() {
                Some(e) => Some(e),
                None => self.heap.pop(),
            };
            let Some(e) = next else {
                // every remaining path has zero likelihood
                return self.result(&{ self.best_deep }, DecodeStatus::BudgetExhausted);
            };
            if self.is_stale(&e) {
                continue;
            }
            if e.depth == target {
                self.pending = Some(e);
                return self.result(&e, DecodeStatus::Completed);
            }
            if expanded >= self.limits.max_nodes {
                self.heap.push(e);
                return self.result(&{ self.best_deep }, DecodeStatus::BudgetExhausted);
            }
            self.expand(e);
            expanded += 1;
            if self.heap.len() > self.limits.max_stack {
                self.purge_stale();
                if self.heap.len() > self.limits.max_stack {
                    return self.result(&{ self.best_deep }, DecodeStatus::FrontierOverflow);
                }
            }
        }
    }

    fn commit_best(&mut self) {
        self.heap.clear();
        self.pending = None;
        let best = self.best_deep;
        self.deepest_expanded = self.deepest_expanded.max(best.depth as usize);
        self.heap.push(best);
    }

    fn received_depth(&self) -> usize {
        self.tables.len()
    }

    fn set_reference(&mut self, truth: &[BitBlock]) {
        self.reference = Some(ReferenceWork::new(truth));
    }

    fn reference_work(&self) -> Option<&[u64]> {
        self.reference.as_ref().map(ReferenceWork::counts)
    }
}

/// Decodes `received` (one `n`-symbol block per depth) from scratch.
pub fn stack_decode(
    code: &LtiCode,
    ch: &ChannelModel,
    received: &[Vec<Symbol>],
    cfg: &MetricConfig,
    limits: &DecoderLimits,
) -> Result<DecodeResult> {
    let mut dec = StackDecoder::new(code, ch, *cfg, *limits)?;
    for z in received {
        dec.push_received(z)?;
    }
    Ok(dec.run())
}
