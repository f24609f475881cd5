use crate::channel::{ChannelModel, Symbol};
use crate::treecode::BitBlock;
use crate::{Error, Result};

/// Parameters of the generalized Fano metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricConfig {
    /// Per-symbol bias `B`, bits per channel use.
    pub bias: f64,
    /// Threshold spacing `Δ` of the Fano algorithm; unused by the stack
    /// decoder.
    pub delta: f64,
}

impl MetricConfig {
    pub fn new(bias: f64, delta: f64) -> Result<Self> {
        let cfg = Self { bias, delta };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.bias.is_finite() {
            return Err(Error::invalid(format!("metric bias {} is not finite", self.bias)));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid(format!("Fano delta {} must be finite and >= 0", self.delta)));
        }
        Ok(())
    }
}

#[inline]
fn symbol_term(ch: &ChannelModel, z: Symbol, bit: bool, bias: f64) -> f64 {
    let pz = 0.5 * (ch.w(z, false) + ch.w(z, true));
    ch.w(z, bit).log2() - pz.log2() - bias
}

/// `Σ_j [log2 w(z_j|c_j) − log2 p(z_j) − B]` for one branch.
///
/// A symbol that cannot be produced by the hypothesized bit contributes
/// `−∞`, which prunes the path.
pub fn branch_metric(
    ch: &ChannelModel,
    code_block: &BitBlock,
    received: &[Symbol],
    cfg: &MetricConfig,
) -> Result<f64> {
    if code_block.len() != received.len() {
        return Err(Error::DimensionMismatch { expected: code_block.len(), actual: received.len() });
    }
    let mut m = 0.0;
    for (j, &z) in received.iter().enumerate() {
        let pz = ch.output_marginal(z)?;
        if pz == 0.0 {
            return Err(Error::UnknownSymbol(z));
        }
        m += symbol_term(ch, z, code_block.get(j), cfg.bias);
    }
    Ok(m)
}

/// Per-position metric terms for one received block, so a candidate code
/// word costs `n` table reads.
#[derive(Debug, Clone)]
pub(crate) struct MetricTable {
    terms: Vec<[f64; 2]>,
}

impl MetricTable {
    pub(crate) fn new(ch: &ChannelModel, received: &[Symbol], bias: f64) -> Result<Self> {
        let terms = received
            .iter()
            .map(|&z| {
                let pz = ch.output_marginal(z)?;
                if pz == 0.0 {
                    return Err(Error::UnknownSymbol(z));
                }
                Ok([symbol_term(ch, z, false, bias), symbol_term(ch, z, true, bias)])
            })
            .collect::<Result<_>>()?;
        Ok(Self { terms })
    }

    /// Same summation order as [`branch_metric`], so the two agree exactly.
    #[inline]
    pub(crate) fn metric(&self, word: u64) -> f64 {
        let mut m = 0.0;
        for (j, t) in self.terms.iter().enumerate() {
            m += t[((word >> j) & 1) as usize];
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bsc_branch_metrics() {
        let ch = ChannelModel::bsc(0.01).unwrap();
        let cfg = MetricConfig::new(0.5, 0.0).unwrap();
        let zero = BitBlock::new(0, 1).unwrap();
        let one = BitBlock::new(1, 1).unwrap();
        let m = branch_metric(&ch, &zero, &[0], &cfg).unwrap();
        assert!((m - 0.48550).abs() < 1e-5, "{m}");
        let m = branch_metric(&ch, &one, &[0], &cfg).unwrap();
        assert!((m + 6.14386).abs() < 1e-5, "{m}");
    }

    #[test]
    fn matching_metric_positive_without_bias() {
        let cfg = MetricConfig::new(0.0, 0.0).unwrap();
        for p in [0.0, 0.01, 0.2, 0.49] {
            let ch = ChannelModel::bsc(p).unwrap();
            let m = branch_metric(&ch, &BitBlock::new(0, 1).unwrap(), &[0], &cfg).unwrap();
            assert!((m - (2.0 * (1.0 - p)).log2()).abs() < 1e-12);
            assert!(m > 0.0);
        }
    }

    #[test]
    fn impossible_symbol_prunes() {
        let ch = ChannelModel::bsc(0.0).unwrap();
        let cfg = MetricConfig::new(0.5, 0.0).unwrap();
        let m = branch_metric(&ch, &BitBlock::new(1, 1).unwrap(), &[0], &cfg).unwrap();
        assert_eq!(m, f64::NEG_INFINITY);
    }

    #[test]
    fn table_agrees_with_direct_sum() {
        let ch = ChannelModel::bec(0.2).unwrap();
        let cfg = MetricConfig::new(0.3, 0.0).unwrap();
        let z = [0, 1, 2, 1, 0];
        let table = MetricTable::new(&ch, &z, cfg.bias).unwrap();
        for w in 0..32u64 {
            let direct = branch_metric(&ch, &BitBlock::new(w, 5).unwrap(), &z, &cfg).unwrap();
            let fast = table.metric(w);
            assert!(direct == fast || (direct.is_infinite() && fast.is_infinite()));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let ch = ChannelModel::bsc(0.1).unwrap();
        let cfg = MetricConfig::new(0.5, 0.0).unwrap();
        assert!(branch_metric(&ch, &BitBlock::new(0, 2).unwrap(), &[0], &cfg).is_err());
        assert!(branch_metric(&ch, &BitBlock::new(0, 1).unwrap(), &[5], &cfg).is_err());
        assert!(MetricConfig::new(f64::NAN, 0.0).is_err());
        assert!(MetricConfig::new(0.5, -1.0).is_err());
    }
}
