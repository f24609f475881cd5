use crate::treecode::{mask, BitBlock};
use crate::{Error, Result};

/// Saturating uniform mid-rise quantizer: `2^k` bins of width `δ` centred
/// on zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    pub k: usize,
    pub delta: f64,
}

impl QuantizerConfig {
    pub fn new(k: usize, delta: f64) -> Result<Self> {
        if k == 0 || k > 63 {
            return Err(Error::invalid(format!("quantizer bits {k} outside 1..=63")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid(format!("bin width {delta} must be positive")));
        }
        Ok(Self { k, delta })
    }

    fn offset(&self) -> i64 {
        1i64 << (self.k - 1)
    }

    /// Largest magnitude reproduced within `δ/2`.
    pub fn range(&self) -> f64 {
        self.offset() as f64 * self.delta
    }

    /// Unclamped bin index; out of `[0, 2^k)` when the input saturates.
    fn raw_index(&self, y: f64) -> i64 {
        let r = (y / self.delta).floor();
        if r.is_nan() {
            0
        } else {
            (r.clamp(i64::MIN as f64 / 2.0, i64::MAX as f64 / 2.0) as i64).saturating_add(self.offset())
        }
    }

    pub fn index(&self, y: f64) -> u64 {
        self.raw_index(y).clamp(0, mask(self.k) as i64) as u64
    }

    pub fn is_saturated(&self, y: f64) -> bool {
        let i = self.raw_index(y);
        i < 0 || i > mask(self.k) as i64
    }

    pub fn quantize(&self, y: f64) -> BitBlock {
        BitBlock::new(self.index(y), self.k).expect("index fits in k bits")
    }

    /// Midpoint of the bin encoded by `bits`.
    pub fn dequantize_word(&self, bits: u64) -> f64 {
        ((bits as i64 - self.offset()) as f64 + 0.5) * self.delta
    }

    pub fn dequantize(&self, bits: &BitBlock) -> Result<f64> {
        if bits.len() != self.k {
            return Err(Error::DimensionMismatch { expected: self.k, actual: bits.len() });
        }
        Ok(self.dequantize_word(bits.bits()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_examples() {
        let q = QuantizerConfig::new(10, 0.1).unwrap();
        assert_eq!(q.index(0.0), 512);
        assert!((q.dequantize(&q.quantize(0.0)).unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(q.index(0.17), 513);
        assert!((q.dequantize(&q.quantize(0.17)).unwrap() - 0.15).abs() < 1e-12);
        assert_eq!(q.index(1e6), 1023);
        assert_eq!(q.index(-1e6), 0);
        assert!(q.is_saturated(1e6) && q.is_saturated(-51.3) && !q.is_saturated(51.1));
        assert_eq!(q.index(f64::INFINITY), 1023);
    }

    #[test]
    fn round_trip_error_on_grid() {
        for (k, delta) in [(10, 0.1), (4, 0.1), (5, 0.37)] {
            let q = QuantizerConfig::new(k, delta).unwrap();
            let r = q.range();
            for i in 0..10_000 {
                let y = -r + 2.0 * r * (i as f64 + 0.5) / 10_000.0;
                let e = (y - q.dequantize(&q.quantize(y)).unwrap()).abs();
                assert!(e <= delta / 2.0 + 1e-12, "k={k} y={y} err={e}");
            }
        }
    }

    #[test]
    fn rejects_bad_config() {
        assert!(QuantizerConfig::new(0, 0.1).is_err());
        assert!(QuantizerConfig::new(4, 0.0).is_err());
        let q = QuantizerConfig::new(4, 0.1).unwrap();
        assert!(q.dequantize(&BitBlock::new(0, 3).unwrap()).is_err());
    }
}
