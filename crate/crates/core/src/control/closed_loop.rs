use nalgebra::DVector;
use rand::Rng;

use super::observer::{ConsistencyGuard, DeadbeatObserver};
use super::plant::PlantModel;
use super::quantizer::QuantizerConfig;
use crate::channel::{ChannelModel, Symbol};
use crate::seqdec::{
    DecodeResult, DecodeStatus, DecoderLimits, FanoDecoder, MetricConfig, SequentialDecoder, StackDecoder,
};
use crate::treecode::{join_subblocks, split_subblocks, BitBlock, EncoderState, LtiCode};
use crate::{Error, Result};

/// Backtrack window used by [`DecoderSpec::new`].
pub const DEFAULT_BACKTRACK_WINDOW: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Stack,
    Fano,
}

impl DecoderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecoderKind::Stack => "stack",
            DecoderKind::Fano => "fano",
        }
    }
}

impl std::str::FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stack" => Ok(DecoderKind::Stack),
            "fano" => Ok(DecoderKind::Fano),
            other => Err(Error::Config(format!("unknown decoder '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderSpec {
    pub kind: DecoderKind,
    pub metric: MetricConfig,
    pub limits: DecoderLimits,
}

impl DecoderSpec {
    pub fn new(kind: DecoderKind, metric: MetricConfig) -> Self {
        let limits = DecoderLimits {
            max_nodes: 100_000,
            backtrack_window: Some(DEFAULT_BACKTRACK_WINDOW),
            ..DecoderLimits::default()
        };
        Self { kind, metric, limits }
    }

    /// Decodes a full received sequence from scratch.
    pub fn decode(&self, code: &LtiCode, ch: &ChannelModel, received: &[Vec<Symbol>]) -> Result<DecodeResult> {
        let mut dec = self.build(code, ch)?;
        for z in received {
            dec.push_received(z)?;
        }
        Ok(dec.run())
    }

    /// Like [`DecoderSpec::decode`], also returning the per-node work
    /// `W_1, W_2, ...` measured against the transmitted messages.
    pub fn decode_with_reference(
        &self,
        code: &LtiCode,
        ch: &ChannelModel,
        received: &[Vec<Symbol>],
        truth: &[BitBlock],
    ) -> Result<(DecodeResult, Vec<u64>)> {
        let mut dec = self.build(code, ch)?;
        dec.set_reference(truth);
        for z in received {
            dec.push_received(z)?;
        }
        let res = dec.run();
        let work = dec.reference_work().expect("reference was set").to_vec();
        Ok((res, work))
    }

    fn build<'a>(&self, code: &'a LtiCode, ch: &'a ChannelModel) -> Result<Box<dyn SequentialDecoder + 'a>> {
        Ok(match self.kind {
            DecoderKind::Stack => Box::new(StackDecoder::new(code, ch, self.metric, self.limits)?),
            DecoderKind::Fano => Box::new(FanoDecoder::new(code, ch, self.metric, self.limits)?),
        })
    }
}

/// Controller-side settings of the closed loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopSettings {
    pub decoder: DecoderSpec,
    /// `None` uses the plain deadbeat estimate.
    pub guard: Option<ConsistencyGuard>,
    /// The newest `estimate_delay` decoded measurements are ignored by the observer,
    /// which predicts across them instead.
    pub estimate_delay: usize,
}

impl From<DecoderSpec> for LoopSettings {
    fn from(decoder: DecoderSpec) -> Self {
        Self { decoder, guard: None, estimate_delay: 0 }
    }
}

/// A tree code carrying one quantized measurement per `group` code blocks.
///
/// With `group = 1` each measurement is one `k`-bit block. Larger groups
/// split the measurement into `group` sub-blocks of `code.k()` bits each.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopCode {
    pub code: LtiCode,
    pub group: usize,
}

impl LoopCode {
    pub fn plain(code: LtiCode) -> Self {
        Self { code, group: 1 }
    }

    pub fn grouped(code: LtiCode, group: usize) -> Result<Self> {
        if group == 0 {
            return Err(Error::invalid("group must be at least 1"));
        }
        Ok(Self { code, group })
    }

    /// Bits per measurement.
    pub fn measurement_bits(&self) -> usize {
        self.code.k() * self.group
    }

    /// Channel uses per measurement.
    pub fn channel_uses(&self) -> usize {
        self.code.n() * self.group
    }

    pub fn rate(&self) -> f64 {
        self.code.rate()
    }

    /// Number of control steps the code horizon can carry.
    pub fn max_steps(&self) -> usize {
        self.code.horizon() / self.group
    }
}

/// One control step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub x: DVector<f64>,
    pub y: f64,
    pub bits: u64,
    pub saturated: bool,
    /// Channel outputs for this step, `channel_uses` symbols.
    pub z: Vec<Symbol>,
    /// Decoded measurements `ŷ_{i|t}` for the most recent `dim(A)` steps,
    /// oldest first. Shorter when the decoder has not reached them.
    pub y_hat_recent: Vec<f64>,
    /// Number of measurements the decoder returned this step.
    pub decoded_steps: usize,
    /// Steps whose decoded bits differ from the transmitted ones.
    pub wrong_steps: usize,
    pub x_hat: DVector<f64>,
    /// Whether the observer's consistency guard replaced the estimate.
    pub fallback: bool,
    pub u: f64,
    pub status: DecodeStatus,
    /// Node expansions spent at this step.
    pub work: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrace {
    pub steps: Vec<StepRecord>,
}

impl ControlTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `max_t ‖x_t‖_∞`.
    pub fn peak_state_norm(&self) -> f64 {
        self.steps.iter().map(|s| s.x.amax()).fold(0.0, f64::max)
    }

    pub fn state_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.x.norm())
    }

    pub fn saturations(&self) -> usize {
        self.steps.iter().filter(|s| s.saturated).count()
    }

    pub fn decoder_failures(&self) -> usize {
        self.steps.iter().filter(|s| s.status != DecodeStatus::Completed).count()
    }

    pub fn fallbacks(&self) -> usize {
        self.steps.iter().filter(|s| s.fallback).count()
    }

    /// Steps at which some already-decoded measurement was wrong.
    pub fn steps_with_wrong_estimates(&self) -> usize {
        self.steps.iter().filter(|s| s.wrong_steps > 0).count()
    }

    pub fn total_work(&self) -> u64 {
        self.steps.iter().map(|s| s.work).sum()
    }
}

/// `(1/2T) Σ_{t=1..T} (‖x_t‖² + u_t²)`.
pub fn lqr_cost(trace: &ControlTrace, horizon: usize) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::invalid("LQR horizon must be positive"));
    }
    if trace.len() < horizon {
        return Err(Error::DimensionMismatch { expected: horizon, actual: trace.len() });
    }
    let sum: f64 = trace.steps[..horizon].iter().map(|s| s.x.norm_squared() + s.u * s.u).sum();
    Ok(sum / (2.0 * horizon as f64))
}

/// States `x_1..x_T` with `u ≡ 0`.
pub fn run_open_loop<R: Rng + ?Sized>(
    plant: &PlantModel,
    x0: &DVector<f64>,
    steps: usize,
    rng: &mut R,
) -> Result<Vec<DVector<f64>>> {
    if x0.len() != plant.dim() {
        return Err(Error::DimensionMismatch { expected: plant.dim(), actual: x0.len() });
    }
    let mut xs = Vec::with_capacity(steps);
    let mut x = x0.clone();
    for _ in 0..steps {
        let (next, _) = plant.step(&x, 0.0, rng);
        xs.push(std::mem::replace(&mut x, next));
    }
    Ok(xs)
}

/// Runs `steps` rounds of measure, quantize, encode, transmit, decode the
/// whole received prefix, reconstruct and apply feedback.
///
/// Decoder failures are recorded and the loop carries on with the deepest
/// best path the decoder found.
#[allow(clippy::too_many_arguments)]
pub fn run_closed_loop<R: Rng + ?Sized>(
    plant: &PlantModel,
    qc: &QuantizerConfig,
    loop_code: &LoopCode,
    ch: &ChannelModel,
    settings: &LoopSettings,
    steps: usize,
    x0: &DVector<f64>,
    rng: &mut R,
) -> Result<ControlTrace> {
    let code = &loop_code.code;
    let group = loop_code.group;
    if loop_code.measurement_bits() != qc.k {
        return Err(Error::DimensionMismatch { expected: qc.k, actual: loop_code.measurement_bits() });
    }
    if steps > loop_code.max_steps() {
        return Err(Error::HorizonExceeded { depth: steps * group, horizon: code.horizon() });
    }
    if x0.len() != plant.dim() {
        return Err(Error::DimensionMismatch { expected: plant.dim(), actual: x0.len() });
    }
    if ch.alphabet_size() < 2 {
        return Err(Error::invalid("channel must have at least two outputs"));
    }

    let observer = DeadbeatObserver::new(plant)?;
    let gates = settings.guard.map_or_else(Vec::new, |g| g.gates(&observer, plant, qc.delta));
    let m = plant.dim();
    let width = code.k();
    let mut decoder = settings.decoder.build(code, ch)?;
    let mut enc = EncoderState::default();

    let mut trace = ControlTrace { steps: Vec::with_capacity(steps) };
    let mut sent: Vec<u64> = Vec::with_capacity(steps);
    let mut inputs: Vec<f64> = Vec::with_capacity(steps);
    let mut x = x0.clone();
    let mut y = plant.measure(&x, rng);
    let mut work_before = 0u64;

    for _ in 0..steps {
        let block = qc.quantize(y);
        let saturated = qc.is_saturated(y);
        sent.push(block.bits());

        let mut z = Vec::with_capacity(loop_code.channel_uses());
        for part in split_subblocks(block.bits(), width, group) {
            let cw = code.encode_step(&mut enc, &BitBlock::new(part, width)?)?;
            let out = ch.simulate(cw.iter(), rng);
            decoder.push_received(&out)?;
            z.extend(out);
        }

        let mut res = decoder.run();
        if res.status != DecodeStatus::Completed {
            decoder.commit_best();
        }
        let total = res.total_work();
        let work = total - work_before;
        work_before = total;

        let words: Vec<u64> = std::mem::take(&mut res.decoded).iter().map(|b| b.bits()).collect();
        let decoded_steps = words.len() / group;
        let decoded: Vec<u64> =
            words.chunks_exact(group).map(|c| join_subblocks(c.iter().copied(), width)).collect();
        let wrong_steps = decoded.iter().zip(&sent).filter(|(a, b)| a != b).count();
        let y_hat: Vec<f64> = decoded.iter().map(|&w| qc.dequantize_word(w)).collect();

        let usable = decoded_steps.min((inputs.len() + 1).saturating_sub(settings.estimate_delay));
        let (x_hat, fallback) = observer.estimate_guarded(&y_hat[..usable], &inputs, &gates)?;
        let u = plant.control_input(&x_hat);

        let y_hat_recent = y_hat[decoded_steps.saturating_sub(m)..].to_vec();
        let (next, y_next) = plant.step(&x, u, rng);
        trace.steps.push(StepRecord {
            x: std::mem::replace(&mut x, next),
            y,
            bits: block.bits(),
            saturated,
            z,
            y_hat_recent,
            decoded_steps,
            wrong_steps,
            x_hat,
            fallback,
            u,
            status: res.status,
            work,
        });
        inputs.push(u);
        y = y_next;
    }
    Ok(trace)
}
