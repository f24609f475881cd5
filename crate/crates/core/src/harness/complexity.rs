use serde::{Deserialize, Serialize};

use super::anytime::{sample_codes, transmit_random};
use super::stats::least_squares;
use super::{base_metadata, run_indexed, stream, CampaignConfig, Metadata};
use crate::channel::pareto_exponent;
use crate::seqdec::DecodeStatus;
use crate::treecode::code_digest;
use crate::{Error, Result};

/// Largest `m = 2^j` reported.
pub const MAX_LOG2_M: u32 = 12;
/// Minimum number of tail events for a point to enter the slope fit.
pub const MIN_TAIL_EVENTS: u64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub m: u64,
    pub count: u64,
    pub ccdf: f64,
    pub in_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexitySummary {
    pub rate: f64,
    pub bias: f64,
    pub work_depth: usize,
    pub rho_theory: Option<f64>,
    /// Negated log-log slope of the tail.
    pub rho_hat: Option<f64>,
    pub mean_work: f64,
    pub max_work: u64,
    pub decoder_failures: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexityReport {
    pub rows: Vec<ComplexityRow>,
    pub summary: ComplexitySummary,
    /// Raw per-trial samples, in trial order.
    pub samples: Vec<u64>,
}

/// Points of the empirical `Pr(W ≥ m)` used for the tail fit: every
/// reported `m` within a decade below the largest `m` that still has
/// [`MIN_TAIL_EVENTS`] samples at or above it.
pub fn tail_fit_mask(rows: &[(u64, u64)]) -> Vec<bool> {
    let top = rows.iter().filter(|(m, c)| *c >= MIN_TAIL_EVENTS && *m > 1).map(|(m, _)| *m).max();
    rows.iter()
        .map(|(m, c)| match top {
            Some(top) => *m > 1 && *c >= MIN_TAIL_EVENTS && *m * 10 >= top,
            None => false,
        })
        .collect()
}

/// Distribution of the work `W_d` charged to the transmitted node at depth
/// `d − 1` (its own expansion plus its incorrect subtree), with `d` fixed
/// mid-tree, and its Pareto tail exponent.
pub fn run_complexity(cfg: &CampaignConfig, seed: u64, workers: usize) -> Result<(Metadata, ComplexityReport)> {
    let ch = cfg.channel()?;
    let codes = sample_codes(cfg, seed)?;
    let rate = codes[0].rate();
    let spec = cfg.decoder_spec(&ch, rate)?;
    let depth = cfg.work_depth();
    if depth == 0 {
        return Err(Error::Config("work depth must be at least 1".into()));
    }

    let total = cfg.codes * cfg.trials;
    let trials = run_indexed(workers, total, |i| {
        let (c, j) = (i / cfg.trials, i % cfg.trials);
        let mut rng = stream(seed, &format!("complexity/code/{c}/trial/{j}"));
        let (msgs, z) = transmit_random(&codes[c], &ch, &mut rng)?;
        let (res, work) = spec.decode_with_reference(&codes[c], &ch, &z, &msgs)?;
        Ok((work[depth - 1], res.status != DecodeStatus::Completed))
    })?;
    let samples: Vec<u64> = trials.iter().map(|t| t.0).collect();

    let n = samples.len() as f64;
    let counts: Vec<(u64, u64)> = (0..=MAX_LOG2_M)
        .map(|j| {
            let m = 1u64 << j;
            (m, samples.iter().filter(|&&w| w >= m).count() as u64)
        })
        .collect();
    let mask = tail_fit_mask(&counts);
    let rows: Vec<ComplexityRow> = counts
        .iter()
        .zip(&mask)
        .map(|(&(m, count), &in_fit)| ComplexityRow { m, count, ccdf: count as f64 / n, in_fit })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.in_fit).map(|r| ((r.m as f64).log2(), r.ccdf.log2())).unzip();

    let summary = ComplexitySummary {
        rate,
        bias: spec.metric.bias,
        work_depth: depth,
        rho_theory: pareto_exponent(&ch, rate).ok(),
        rho_hat: least_squares(&xs, &ys).map(|(s, _)| -s),
        mean_work: samples.iter().sum::<u64>() as f64 / n,
        max_work: samples.iter().copied().max().unwrap_or(0),
        decoder_failures: trials.iter().filter(|t| t.1).count() as u64,
    };
    let mut meta = base_metadata(cfg, "complexity", seed);
    for c in &codes {
        meta.push("code", code_digest(c));
    }
    for l in toml::to_string(&summary).expect("summary serializes").lines() {
        meta.push("summary", l);
    }
    Ok((meta, ComplexityReport { rows, summary, samples }))
}

impl ComplexityReport {
    pub fn summary_from_csv(meta: &Metadata) -> Result<ComplexitySummary> {
        let text: String = meta.get_all("summary").map(|l| format!("{l}\n")).collect();
        toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))
    }
}
