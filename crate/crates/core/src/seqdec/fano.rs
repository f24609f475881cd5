use super::metric::MetricTable;
use super::{
    check_received, to_blocks, DecodeResult, DecodeStatus, DecoderLimits, MetricConfig,
    ReferenceWork, SequentialDecoder,
};
use crate::channel::{ChannelModel, Symbol};
use crate::treecode::{BitBlock, LtiCode};
use crate::{Error, Result};

#[derive(Debug, Clone)]
struct PathNode {
    block: u64,
    metric: f64,
    /// Children sorted best first, computed on first look-forward.
    children: Option<Vec<(f64, u64)>>,
    /// Index of the child currently being looked at (or last taken).
    cursor: usize,
}

impl PathNode {
    fn new(block: u64, metric: f64) -> Self {
        Self { block, metric, children: None, cursor: 0 }
    }
}

/// Resumable Fano-algorithm decoder (threshold search with spacing `Δ`).
///
/// Follows the textbook flow: move forward to the best untried child while
/// its metric clears the threshold `T`, tightening `T` in steps of `Δ` on
/// first visits; otherwise back up while the parent clears `T`, trying the
/// next-best sibling, and lower `T` by `Δ` when stuck. Only the current
/// path is stored.
pub struct FanoDecoder<'a> {
    code: &'a LtiCode,
    ch: &'a ChannelModel,
    cfg: MetricConfig,
    limits: DecoderLimits,
    tables: Vec<MetricTable>,
    path: Vec<PathNode>,
    threshold: f64,
    work: Vec<u64>,
    metric_evaluations: u64,
    deepest: usize,
    // deepest path reached, for reporting on failure
    best_words: Vec<u64>,
    best_metric: f64,
    reference: Option<ReferenceWork>,
}

impl<'a> FanoDecoder<'a> {
    pub fn new(
        code: &'a LtiCode,
        ch: &'a ChannelModel,
        cfg: MetricConfig,
        limits: DecoderLimits,
    ) -> Result<Self> {
        cfg.validate()?;
        limits.validate()?;
        if cfg.delta <= 0.0 {
            return Err(Error::invalid("the Fano decoder needs delta > 0"));
        }
        Ok(Self {
            code,
            ch,
            cfg,
            limits,
            tables: Vec::new(),
            path: vec![PathNode::new(0, 0.0)],
            threshold: 0.0,
            work: Vec::new(),
            metric_evaluations: 0,
            deepest: 0,
            best_words: Vec::new(),
            best_metric: 0.0,
            reference: None,
        })
    }

    fn depth(&self) -> usize {
        self.path.len() - 1
    }

    /// Whether the search may back up from the current node.
    fn can_back_up(&self) -> bool {
        let depth = self.depth();
        if depth == 0 {
            return false;
        }
        match self.limits.backtrack_window {
            Some(w) => depth - 1 + w >= self.deepest,
            None => true,
        }
    }

    fn compute_children(&mut self) {
        let depth = self.depth();
        let code = self.code;
        let partial =
            code.partial_newest_first(depth + 1, self.path[1..].iter().rev().map(|p| p.block));
        let table = &self.tables[depth];
        let base = self.path[depth].metric;
        let fan_out = 1u64 << code.k();
        let mut children: Vec<(f64, u64)> = (0..fan_out)
            .map(|b| (base + table.metric(partial ^ code.mul(1, b)), b))
            .filter(|(m, _)| *m != f64::NEG_INFINITY)
            .collect();
        children.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        self.work[depth] += 1;
        self.metric_evaluations += fan_out;
        if let Some(r) = &mut self.reference {
            let agree = self.path[1..]
                .iter()
                .enumerate()
                .fold(0, |a, (i, p)| r.child_agreement(i, a, p.block));
            r.record(agree);
        }
        let node = &mut self.path[depth];
        node.children = Some(children);
        node.cursor = 0;
    }

    fn record_progress(&mut self) {
        let depth = self.depth();
        let metric = self.path[depth].metric;
        self.deepest = self.deepest.max(depth);
        if depth > self.best_words.len() || (depth == self.best_words.len() && metric > self.best_metric) {
            self.best_words = self.path[1..].iter().map(|p| p.block).collect();
            self.best_metric = metric;
        }
    }

    fn current_result(&self, status: DecodeStatus) -> DecodeResult {
        let (words, metric): (Vec<u64>, f64) = match status {
            DecodeStatus::Completed => {
                (self.path[1..].iter().map(|p| p.block).collect(), self.path[self.depth()].metric)
            }
            _ => (self.best_words.clone(), self.best_metric),
        };
        DecodeResult {
            decoded: to_blocks(words, self.code.k()),
            work: self.work.clone(),
            metric_evaluations: self.metric_evaluations,
            metric,
            status,
        }
    }
}

impl SequentialDecoder for FanoDecoder<'_> {
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
        let target = self.tables.len();
        let delta = self.cfg.delta;
        let mut computed = 0u64;
        loop {
            let depth = self.depth();
            if depth == target {
                return self.current_result(DecodeStatus::Completed);
            }
            if self.path[depth].children.is_none() {
                if computed >= self.limits.max_nodes {
                    return self.current_result(DecodeStatus::BudgetExhausted);
                }
                self.compute_children();
                computed += 1;
            }
            let node = &self.path[depth];
            let children = node.children.as_ref().expect("children computed above");
            if let Some(&(m_fwd, block)) = children.get(node.cursor) {
                if m_fwd >= self.threshold {
                    // move forward; a first visit tightens the threshold
                    let m_back = node.metric;
                    if m_back < self.threshold + delta {
                        self.threshold += ((m_fwd - self.threshold) / delta).floor() * delta;
                    }
                    self.path.push(PathNode::new(block, m_fwd));
                    self.record_progress();
                    continue;
                }
            } else if children.is_empty() && !self.can_back_up() {
                // no path with positive likelihood continues from here
                return self.current_result(DecodeStatus::BudgetExhausted);
            }

            // look back, trying next-best siblings along the way
            loop {
                if !self.can_back_up() || self.path[self.depth() - 1].metric < self.threshold {
                    self.threshold -= delta;
                    let d = self.depth();
                    self.path[d].cursor = 0;
                    break;
                }
                self.path.pop();
                let d = self.depth();
                let parent = &mut self.path[d];
                parent.cursor += 1;
                let n_children = parent.children.as_ref().map_or(0, Vec::len);
                if parent.cursor < n_children {
                    break;
                }
            }
        }
    }

    fn commit_best(&mut self) {
        let mut path = vec![PathNode::new(0, 0.0)];
        let code = self.code;
        let mut metric = 0.0;
        for (i, &b) in self.best_words.iter().enumerate() {
            let partial = code.partial_newest_first(i + 1, path[1..].iter().rev().map(|p: &PathNode| p.block));
            metric += self.tables[i].metric(partial ^ code.mul(1, b));
            path.push(PathNode::new(b, metric));
        }
        self.path = path;
        self.threshold = self.threshold.min(metric);
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

/// Decodes `received` from scratch with the Fano algorithm; `cfg.delta`
/// must be positive.
pub fn fano_decode(
    code: &LtiCode,
    ch: &ChannelModel,
    received: &[Vec<Symbol>],
    cfg: &MetricConfig,
    limits: &DecoderLimits,
) -> Result<DecodeResult> {
    let mut dec = FanoDecoder::new(code, ch, *cfg, *limits)?;
    for z in received {
        dec.push_received(z)?;
    }
    Ok(dec.run())
}
