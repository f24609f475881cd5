use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::{cutoff_rate, ChannelModel};
use crate::control::{ConsistencyGuard, DecoderKind, DecoderSpec, PlantModel};
use crate::seqdec::{DecoderLimits, MetricConfig};
use crate::{Error, Result};

/// Metric bias: a number, `"cutoff"` for `R_0` or `"rate"` for the code rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BiasSetting {
    Value(f64),
    Named(String),
}

impl BiasSetting {
    pub fn resolve(&self, ch: &ChannelModel, rate: f64) -> Result<f64> {
        match self {
            BiasSetting::Value(v) => Ok(*v),
            BiasSetting::Named(s) => match s.as_str() {
                "cutoff" | "r0" => Ok(cutoff_rate(ch)),
                "rate" => Ok(rate),
                other => Err(Error::Config(format!("unknown bias '{other}'"))),
            },
        }
    }
}

/// Flat key-value campaign configuration. Every key is optional; each
/// subcommand reads the ones it needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    /// `"bsc"` or `"bec"`.
    pub channel: String,
    /// Crossover or erasure probability.
    pub p: f64,
    pub n: usize,
    pub k: usize,
    /// Code horizon, which is also the decoded depth per trial.
    pub horizon: usize,
    pub affine: bool,
    pub decoder: String,
    pub bias: BiasSetting,
    pub fano_delta: f64,
    pub max_nodes: u64,
    pub max_stack: usize,
    /// 0 disables the window.
    pub backtrack_window: usize,
    pub codes: usize,
    pub trials: usize,
    pub d0: usize,
    pub d_max: usize,
    pub rate_step: f64,
    /// Depth whose work count is sampled; 0 means `horizon / 2`.
    pub work_depth: usize,
    pub ks: Vec<usize>,
    /// Quantizer bin width per entry of `ks`, or a single shared value.
    pub quantizer_delta: Vec<f64>,
    pub steps: usize,
    /// Use `gcd(n, k)` sub-blocks for the control codes.
    pub subblocks: bool,
    pub x0: Vec<f64>,
    /// Decoded measurements younger than this many steps are not used.
    pub estimate_delay: usize,
    /// Observer consistency check over the newest `guard_lag` decoded
    /// measurements; 0 disables it.
    pub guard_lag: usize,
    /// Gate as a multiple of the worst-case innovation of correct data.
    pub guard_slack: f64,
    /// Row-major plant matrices.
    pub plant_a: Vec<f64>,
    pub plant_b: Vec<f64>,
    pub plant_c: Vec<f64>,
    pub plant_gain: Vec<f64>,
    pub noise_sigma: f64,
    pub noise_trunc: f64,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        let plant = PlantModel::cart_stick();
        Self {
            channel: "bsc".into(),
            p: 0.05,
            n: 4,
            k: 1,
            horizon: 40,
            affine: false,
            decoder: "stack".into(),
            bias: BiasSetting::Named("cutoff".into()),
            fano_delta: 1.0,
            max_nodes: 1_000_000,
            max_stack: 1 << 22,
            backtrack_window: 0,
            codes: 1,
            trials: 1000,
            d0: 3,
            d_max: 10,
            rate_step: 0.005,
            work_depth: 0,
            ks: vec![4, 5, 10],
            quantizer_delta: vec![0.1],
            steps: 500,
            subblocks: false,
            x0: vec![],
            estimate_delay: 0,
            guard_lag: 0,
            guard_slack: 1.0,
            plant_a: plant.a.transpose().as_slice().to_vec(),
            plant_b: plant.b.as_slice().to_vec(),
            plant_c: plant.c.as_slice().to_vec(),
            plant_gain: plant.gain.as_slice().to_vec(),
            noise_sigma: plant.noise_sigma,
            noise_trunc: plant.noise_trunc,
        }
    }
}

impl CampaignConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// The configuration as `key = value` lines, in field order.
    pub fn echo(&self) -> Vec<String> {
        toml::to_string(self)
            .expect("config serializes")
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::to_owned)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 || self.codes == 0 {
            return Err(Error::Config("trials and codes must be at least 1".into()));
        }
        if self.n == 0 || self.k == 0 || self.horizon == 0 {
            return Err(Error::Config("n, k and horizon must be positive".into()));
        }
        if self.d0 > self.d_max || self.d_max >= self.horizon {
            return Err(Error::Config(format!(
                "delay grid [{}, {}] must lie within the horizon {}",
                self.d0, self.d_max, self.horizon
            )));
        }
        if !(self.guard_slack > 0.0) {
            return Err(Error::Config("guard_slack must be positive".into()));
        }
        if !(self.rate_step > 0.0) {
            return Err(Error::Config("rate_step must be positive".into()));
        }
        if self.work_depth > self.horizon {
            return Err(Error::Config("work_depth exceeds the horizon".into()));
        }
        if self.quantizer_delta.len() != 1 && self.quantizer_delta.len() != self.ks.len() {
            return Err(Error::Config("quantizer_delta needs one value or one per entry of ks".into()));
        }
        self.channel()?;
        self.decoder_kind()?;
        Ok(())
    }

    pub fn channel(&self) -> Result<ChannelModel> {
        match self.channel.as_str() {
            "bsc" => ChannelModel::bsc(self.p),
            "bec" => ChannelModel::bec(self.p),
            other => Err(Error::Config(format!("unknown channel '{other}'"))),
        }
    }

    pub fn decoder_kind(&self) -> Result<DecoderKind> {
        self.decoder.parse()
    }

    pub fn limits(&self) -> DecoderLimits {
        DecoderLimits {
            max_nodes: self.max_nodes,
            max_stack: self.max_stack,
            backtrack_window: (self.backtrack_window > 0).then_some(self.backtrack_window),
        }
    }

    /// Decoder settings for a code of the given rate.
    pub fn decoder_spec(&self, ch: &ChannelModel, rate: f64) -> Result<DecoderSpec> {
        let bias = self.bias.resolve(ch, rate)?;
        Ok(DecoderSpec {
            kind: self.decoder_kind()?,
            metric: MetricConfig::new(bias, self.fano_delta)?,
            limits: self.limits(),
        })
    }

    pub fn guard(&self) -> Option<ConsistencyGuard> {
        (self.guard_lag > 0).then_some(ConsistencyGuard { lag: self.guard_lag, slack: self.guard_slack })
    }

    pub fn work_depth(&self) -> usize {
        if self.work_depth == 0 {
            (self.horizon / 2).max(1)
        } else {
            self.work_depth
        }
    }

    pub fn quantizer_delta_for(&self, idx: usize) -> f64 {
        if self.quantizer_delta.len() == 1 {
            self.quantizer_delta[0]
        } else {
            self.quantizer_delta[idx]
        }
    }

    pub fn plant(&self) -> Result<PlantModel> {
        let m = self.plant_b.len();
        if self.plant_a.len() != m * m {
            return Err(Error::Config(format!("plant_a needs {} entries", m * m)));
        }
        PlantModel::new(
            DMatrix::from_row_slice(m, m, &self.plant_a),
            DVector::from_column_slice(&self.plant_b),
            DVector::from_column_slice(&self.plant_c),
            DVector::from_column_slice(&self.plant_gain),
            self.noise_sigma,
            self.noise_trunc,
        )
    }

    pub fn initial_state(&self, dim: usize) -> Result<DVector<f64>> {
        match self.x0.len() {
            0 => Ok(DVector::zeros(dim)),
            l if l == dim => Ok(DVector::from_column_slice(&self.x0)),
            l => Err(Error::DimensionMismatch { expected: dim, actual: l }),
        }
    }
}
