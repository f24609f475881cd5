use serde::{Deserialize, Serialize};

use super::{base_metadata, run_indexed, stream, CampaignConfig, Metadata};
use crate::control::{lqr_cost, run_closed_loop, LoopCode, LoopSettings, QuantizerConfig};
use crate::treecode::{code_digest, sample_lti, subblock_expand};
use crate::{Error, Result};

/// LQR costs reported for the cart-stick plant with `n = 20`, by `k`.
pub const REFERENCE_LQR: [(usize, f64); 3] = [(4, 206.0), (5, 86.4), (10, 873.0)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlTrialRow {
    pub k: usize,
    pub code: usize,
    pub trial: usize,
    pub lqr_cost: f64,
    pub peak_norm: f64,
    pub saturations: usize,
    pub decoder_failures: usize,
    pub wrong_estimate_steps: usize,
    pub fallbacks: usize,
    pub work: u64,
}

/// Per-step state norms across the trials of one `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlStepRow {
    pub k: usize,
    pub t: usize,
    pub median_norm: f64,
    pub max_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlSummary {
    pub k: usize,
    pub rate: f64,
    pub delta: f64,
    pub mean_lqr: f64,
    pub median_peak: f64,
    pub reference_lqr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlReport {
    pub trials: Vec<ControlTrialRow>,
    pub steps: Vec<ControlStepRow>,
    pub summary: Vec<ControlSummary>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Closed loops for every `k` in `cfg.ks`, `codes × trials` each, with
/// `n` channel uses per step.
pub fn run_control(cfg: &CampaignConfig, seed: u64, workers: usize) -> Result<(Metadata, ControlReport)> {
    let ch = cfg.channel()?;
    let plant = cfg.plant()?;
    let x0 = cfg.initial_state(plant.dim())?;
    if cfg.ks.is_empty() {
        return Err(Error::Config("ks must list at least one quantizer width".into()));
    }

    let mut loop_codes = Vec::new();
    for &k in &cfg.ks {
        let (nc, kc, group) = if cfg.subblocks { subblock_expand(cfg.n, k)? } else { (cfg.n, k, 1) };
        let mut per_k = Vec::new();
        for c in 0..cfg.codes {
            let mut rng = stream(seed, &format!("control/k/{k}/code/{c}"));
            let code = sample_lti(nc, kc, cfg.steps * group, cfg.affine, &mut rng)?;
            per_k.push(LoopCode::grouped(code, group)?);
        }
        loop_codes.push(per_k);
    }

    let per_k = cfg.codes * cfg.trials;
    let traces = run_indexed(workers, cfg.ks.len() * per_k, |i| {
        let (ki, rest) = (i / per_k, i % per_k);
        let (c, j) = (rest / cfg.trials, rest % cfg.trials);
        let k = cfg.ks[ki];
        let qc = QuantizerConfig::new(k, cfg.quantizer_delta_for(ki))?;
        let lc = &loop_codes[ki][c];
        let settings = LoopSettings { decoder: cfg.decoder_spec(&ch, lc.rate())?, guard: cfg.guard(), estimate_delay: cfg.estimate_delay };
        let mut rng = stream(seed, &format!("control/k/{k}/code/{c}/trial/{j}"));
        let trace = run_closed_loop(&plant, &qc, lc, &ch, &settings, cfg.steps, &x0, &mut rng)?;
        if trace.decoder_failures() > 0 {
            log::info!("k={k} code={c} trial={j}: {} decoder failures", trace.decoder_failures());
        }
        let row = ControlTrialRow {
            k,
            code: c,
            trial: j,
            lqr_cost: lqr_cost(&trace, cfg.steps)?,
            peak_norm: trace.peak_state_norm(),
            saturations: trace.saturations(),
            decoder_failures: trace.decoder_failures(),
            wrong_estimate_steps: trace.steps_with_wrong_estimates(),
            fallbacks: trace.fallbacks(),
            work: trace.total_work(),
        };
        let norms: Vec<f64> = trace.steps.iter().map(|s| s.x.amax()).collect();
        Ok((row, norms))
    })?;

    let mut trials = Vec::with_capacity(traces.len());
    let mut steps = Vec::new();
    let mut summary = Vec::new();
    for (ki, &k) in cfg.ks.iter().enumerate() {
        let chunk = &traces[ki * per_k..(ki + 1) * per_k];
        for t in 0..cfg.steps {
            let at_t: Vec<f64> = chunk.iter().map(|(_, n)| n[t]).collect();
            steps.push(ControlStepRow {
                k,
                t: t + 1,
                max_norm: at_t.iter().copied().fold(0.0, f64::max),
                median_norm: median(at_t),
            });
        }
        summary.push(ControlSummary {
            k,
            rate: loop_codes[ki][0].rate(),
            delta: cfg.quantizer_delta_for(ki),
            mean_lqr: chunk.iter().map(|(r, _)| r.lqr_cost).sum::<f64>() / per_k as f64,
            median_peak: median(chunk.iter().map(|(r, _)| r.peak_norm).collect()),
            reference_lqr: REFERENCE_LQR.iter().find(|(rk, _)| *rk == k && cfg.n == 20).map(|(_, v)| *v),
        });
        trials.extend(chunk.iter().map(|(r, _)| r.clone()));
    }

    let mut meta = base_metadata(cfg, "control", seed);
    for per_k in &loop_codes {
        for lc in per_k {
            meta.push("code", code_digest(&lc.code));
        }
    }
    for s in &summary {
        meta.push("summary", summary_line(s));
    }
    Ok((meta, ControlReport { trials, steps, summary }))
}

fn summary_line(s: &ControlSummary) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.serialize(s).expect("summary serializes");
    let bytes = w.into_inner().expect("in-memory writer");
    String::from_utf8(bytes).expect("utf-8").trim_end().to_owned()
}

impl ControlReport {
    pub fn summary_from_csv(meta: &Metadata) -> Result<Vec<ControlSummary>> {
        meta.get_all("summary")
            .map(|l| {
                let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(l.as_bytes());
                r.deserialize().next().ok_or_else(|| Error::Config("empty summary".into()))?.map_err(Error::from)
            })
            .collect()
    }
}
