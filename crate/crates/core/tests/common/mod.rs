//! Shared test oracles.
#![allow(dead_code)]

use std::cmp::Ordering;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use treecodes::channel::{ChannelModel, Symbol};
use treecodes::seqdec::{branch_metric, MetricConfig};
use treecodes::treecode::{sample_lti, BitBlock, LtiCode};

/// Priority-list stack decoder written for clarity: every frontier entry
/// keeps its full path and its metric is recomputed from the root.
pub struct NaiveStack<'a> {
    pub code: &'a LtiCode,
    pub ch: &'a ChannelModel,
    pub received: &'a [Vec<Symbol>],
    pub cfg: MetricConfig,
}

struct Path {
    words: Vec<u64>,
    metric: f64,
    seq: u64,
}

impl NaiveStack<'_> {
    fn metric(&self, words: &[u64]) -> f64 {
        let msgs: Vec<BitBlock> = words.iter().map(|&w| BitBlock::new(w, self.code.k()).unwrap()).collect();
        let cws = self.code.encode_prefix(&msgs).unwrap();
        let mut m = 0.0;
        for (c, z) in cws.iter().zip(self.received) {
            m += branch_metric(self.ch, c, z, &self.cfg).unwrap();
        }
        m
    }

    // higher metric, then deeper, then smaller last block, then older
    fn better(a: &Path, b: &Path) -> bool {
        let ord = a
            .metric
            .total_cmp(&b.metric)
            .then(a.words.len().cmp(&b.words.len()))
            .then(b.words.last().cmp(&a.words.last()))
            .then(b.seq.cmp(&a.seq));
        ord == Ordering::Greater
    }

    /// Decoded words and per-depth work.
    pub fn run(&self) -> (Vec<u64>, Vec<u64>) {
        let t = self.received.len();
        let mut work = vec![0u64; t];
        let mut frontier = vec![Path { words: vec![], metric: 0.0, seq: 0 }];
        let mut seq = 1;
        loop {
            let mut best = 0;
            for i in 1..frontier.len() {
                if Self::better(&frontier[i], &frontier[best]) {
                    best = i;
                }
            }
            let top = frontier.swap_remove(best);
            if top.words.len() == t {
                return (top.words, work);
            }
            work[top.words.len()] += 1;
            for b in 0..1u64 << self.code.k() {
                let mut words = top.words.clone();
                words.push(b);
                let metric = self.metric(&words);
                if metric == f64::NEG_INFINITY {
                    continue;
                }
                frontier.push(Path { words, metric, seq });
                seq += 1;
            }
        }
    }
}

/// Random code, channel, message, channel output and bias with `k·t ≤ max_bits`.
pub fn random_instance(rng: &mut ChaCha8Rng, max_bits: usize) -> (LtiCode, ChannelModel, Vec<BitBlock>, Vec<Vec<Symbol>>, f64) {
    let n = rng.random_range(2..=6);
    let k = rng.random_range(1..n.min(4));
    let t = rng.random_range(1..=max_bits / k);
    let affine = rng.random_bool(0.3);
    let code = sample_lti(n, k, t, affine, rng).unwrap();
    let ch = if rng.random_bool(0.2) {
        ChannelModel::bec(rng.random_range(0.05..0.3)).unwrap()
    } else {
        ChannelModel::bsc(rng.random_range(0.01..0.2)).unwrap()
    };
    let msgs: Vec<BitBlock> = (0..t).map(|_| BitBlock::new(rng.random::<u64>() & ((1 << k) - 1), k).unwrap()).collect();
    let received: Vec<Vec<Symbol>> =
        code.encode_prefix(&msgs).unwrap().iter().map(|c| ch.simulate(c.iter(), rng)).collect();
    let bias = rng.random_range(0.0..1.0);
    (code, ch, msgs, received, bias)
}

