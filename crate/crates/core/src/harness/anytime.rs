use rand::Rng;
use serde::{Deserialize, Serialize};

use super::stats::{clopper_pearson, least_squares};
use super::{base_metadata, run_indexed, stream, CampaignConfig, Metadata};
use crate::channel::{cutoff_rate, gallager_exponent, jelinek_exponent, Symbol};
use crate::seqdec::{first_error_delay, DecodeStatus};
use crate::treecode::{code_digest, sample_lti, BitBlock, LtiCode};
use crate::Result;

/// One delay of the error profile. `errors` counts trials whose first
/// error event has delay at least `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayRow {
    pub d: usize,
    pub trials: u64,
    pub errors: u64,
    pub p_e: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub in_fit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnytimeSummary {
    pub rate: f64,
    pub bias: f64,
    pub d0: usize,
    /// Fitted exponent; absent with fewer than two non-zero delays.
    pub beta_hat: Option<f64>,
    pub e_j_bias: f64,
    pub e_g: f64,
    pub error_free_trials: u64,
    pub decoder_failures: u64,
    pub mean_work: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnytimeProfile {
    pub rows: Vec<DelayRow>,
    pub summary: AnytimeSummary,
}

struct Trial {
    delay: Option<usize>,
    work: u64,
    failed: bool,
}

pub(super) fn sample_codes(cfg: &CampaignConfig, seed: u64) -> Result<Vec<LtiCode>> {
    (0..cfg.codes)
        .map(|c| sample_lti(cfg.n, cfg.k, cfg.horizon, cfg.affine, &mut stream(seed, &format!("code/{c}"))))
        .collect()
}

/// Random message prefix, sent over the channel and decoded at depth `T`.
pub(super) fn transmit_random<R: Rng>(
    code: &LtiCode,
    ch: &crate::channel::ChannelModel,
    rng: &mut R,
) -> Result<(Vec<BitBlock>, Vec<Vec<Symbol>>)> {
    let k = code.k();
    let msgs = (0..code.horizon())
        .map(|_| BitBlock::new(rng.random::<u64>() & crate::treecode::mask(k), k))
        .collect::<Result<Vec<_>>>()?;
    let cw = code.encode_prefix(&msgs)?;
    let z = cw.iter().map(|c| ch.simulate(c.iter(), rng)).collect();
    Ok((msgs, z))
}

/// Monte Carlo estimate of `P_e(d)`, the probability that the oldest wrong
/// block after decoding at depth `T` lies at least `d` blocks back, and the
/// exponent fitted to `log2 P_e(d)` against `n·d` for `d ≥ d0`.
pub fn run_anytime(cfg: &CampaignConfig, seed: u64, workers: usize) -> Result<(Metadata, AnytimeProfile)> {
    let ch = cfg.channel()?;
    let codes = sample_codes(cfg, seed)?;
    let rate = codes[0].rate();
    let spec = cfg.decoder_spec(&ch, rate)?;
    let r0 = cutoff_rate(&ch);
    if rate >= r0 {
        log::warn!("rate {rate} is not below the cutoff rate {r0}; sequential decoding bounds do not apply");
    }

    let total = cfg.codes * cfg.trials;
    let trials = run_indexed(workers, total, |i| {
        let (c, j) = (i / cfg.trials, i % cfg.trials);
        let mut rng = stream(seed, &format!("anytime/code/{c}/trial/{j}"));
        let (msgs, z) = transmit_random(&codes[c], &ch, &mut rng)?;
        let res = spec.decode(&codes[c], &ch, &z)?;
        let failed = res.status != DecodeStatus::Completed;
        let delay = if res.decoded.len() == msgs.len() {
            first_error_delay(&msgs, &res.decoded)?
        } else {
            // an incomplete path is wrong from its end onwards at the latest
            let n = res.decoded.len();
            let first = msgs[..n].iter().zip(&res.decoded).position(|(a, b)| a != b).unwrap_or(n);
            Some(msgs.len() - (first + 1))
        };
        Ok(Trial { delay, work: res.total_work(), failed })
    })?;

    let n_trials = total as u64;
    let mut rows = Vec::new();
    for d in 0..=cfg.d_max {
        let errors = trials.iter().filter(|t| t.delay.is_some_and(|x| x >= d)).count() as u64;
        let (ci_low, ci_high) = clopper_pearson(errors, n_trials, 0.05);
        rows.push(DelayRow {
            d,
            trials: n_trials,
            errors,
            p_e: errors as f64 / n_trials as f64,
            ci_low,
            ci_high,
            in_fit: d >= cfg.d0 && errors > 0,
        });
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.in_fit)
        .map(|r| ((cfg.n * r.d) as f64, r.p_e.log2()))
        .unzip();
    let beta_hat = least_squares(&xs, &ys).map(|(slope, _)| -slope);

    let bias = spec.metric.bias;
    let summary = AnytimeSummary {
        rate,
        bias,
        d0: cfg.d0,
        beta_hat,
        e_j_bias: jelinek_exponent(&ch, bias, rate).value,
        e_g: gallager_exponent(&ch, rate).value,
        error_free_trials: trials.iter().filter(|t| t.delay.is_none()).count() as u64,
        decoder_failures: trials.iter().filter(|t| t.failed).count() as u64,
        mean_work: trials.iter().map(|t| t.work as f64).sum::<f64>() / n_trials as f64,
    };

    let mut meta = base_metadata(cfg, "anytime", seed);
    for c in &codes {
        meta.push("code", code_digest(c));
    }
    push_summary(&mut meta, &summary);
    Ok((meta, AnytimeProfile { rows, summary }))
}

fn push_summary(meta: &mut Metadata, s: &AnytimeSummary) {
    let line = toml::to_string(s).expect("summary serializes");
    for l in line.lines() {
        meta.push("summary", l);
    }
}

impl AnytimeProfile {
    /// Rebuilds the profile from parsed CSV output.
    pub fn from_csv(meta: &Metadata, rows: Vec<DelayRow>) -> Result<Self> {
        let text: String = meta.get_all("summary").map(|l| format!("{l}\n")).collect();
        let summary = toml::from_str(&text).map_err(|e| crate::Error::Config(e.to_string()))?;
        Ok(Self { rows, summary })
    }
}
