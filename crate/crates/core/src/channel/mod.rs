//! Memoryless binary-input output-symmetric channels.
//!
//! Output symbols are indices into a finite alphabet. Continuous-output
//! channels have to be quantized by the caller before they fit here.

mod exponents;

pub use exponents::{
    capacity, certification_bound, critical_rate, cutoff_rate, e0, gallager_exponent,
    jelinek_constant, jelinek_exponent, pareto_exponent, ExponentResult,
};

use rand::Rng;

use crate::{Error, Result};

/// Index of a channel output symbol.
pub type Symbol = usize;

const SUM_TOL: f64 = 1e-12;

/// A finite-output MBIOS channel `w(z|c)`.
///
/// The involution `σ` pairs outputs so that `w(z|0) = w(σ(z)|1)`; for the
/// BSC it swaps the two symbols, for the BEC it swaps `0`/`1` and fixes the
/// erasure.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelModel {
    labels: Vec<String>,
    w0: Vec<f64>,
    w1: Vec<f64>,
    involution: Vec<Symbol>,
}

impl ChannelModel {
    pub fn new(
        labels: Vec<String>,
        w0: Vec<f64>,
        w1: Vec<f64>,
        involution: Vec<Symbol>,
    ) -> Result<Self> {
        let q = labels.len();
        if q == 0 {
            return Err(Error::invalid("empty output alphabet"));
        }
        for (name, v) in [("w0", &w0), ("w1", &w1)] {
            if v.len() != q {
                return Err(Error::DimensionMismatch { expected: q, actual: v.len() });
            }
            if v.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::invalid(format!("{name} has entries outside [0, 1]")));
            }
            let s: f64 = v.iter().sum();
            if (s - 1.0).abs() > SUM_TOL {
                return Err(Error::invalid(format!("{name} sums to {s}, not 1")));
            }
        }
        if involution.len() != q {
            return Err(Error::DimensionMismatch { expected: q, actual: involution.len() });
        }
        for z in 0..q {
            let s = involution[z];
            if s >= q || involution[s] != z {
                return Err(Error::invalid("output map is not an involution"));
            }
            if (w0[z] - w1[s]).abs() > SUM_TOL {
                return Err(Error::invalid(format!(
                    "channel is not output-symmetric at symbol {z}"
                )));
            }
        }
        Ok(Self { labels, w0, w1, involution })
    }

    /// Binary symmetric channel with crossover probability `p ∈ [0, 0.5)`.
    pub fn bsc(p: f64) -> Result<Self> {
        if !(0.0..0.5).contains(&p) {
            return Err(Error::invalid(format!("BSC crossover {p} outside [0, 0.5)")));
        }
        Self::new(
            vec!["+".into(), "-".into()],
            vec![1.0 - p, p],
            vec![p, 1.0 - p],
            vec![1, 0],
        )
    }

    /// Binary erasure channel with erasure probability `eps ∈ [0, 1)`.
    /// Symbols are `0`, `e`, `1` in that order.
    pub fn bec(eps: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&eps) {
            return Err(Error::invalid(format!("BEC erasure {eps} outside [0, 1)")));
        }
        Self::new(
            vec!["0".into(), "e".into(), "1".into()],
            vec![1.0 - eps, eps, 0.0],
            vec![0.0, eps, 1.0 - eps],
            vec![2, 1, 0],
        )
    }

    pub fn alphabet_size(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, z: Symbol) -> Option<&str> {
        self.labels.get(z).map(String::as_str)
    }

    pub fn involution(&self, z: Symbol) -> Option<Symbol> {
        self.involution.get(z).copied()
    }

    /// Transition probabilities given the input bit.
    pub fn transitions(&self, bit: bool) -> &[f64] {
        if bit {
            &self.w1
        } else {
            &self.w0
        }
    }

    /// `w(z|bit)`; panics on an out-of-range symbol.
    #[inline]
    pub fn w(&self, z: Symbol, bit: bool) -> f64 {
        self.transitions(bit)[z]
    }

    /// Output marginal `p(z)` under equiprobable inputs.
    pub fn output_marginal(&self, z: Symbol) -> Result<f64> {
        if z >= self.labels.len() {
            return Err(Error::UnknownSymbol(z));
        }
        Ok(0.5 * (self.w0[z] + self.w1[z]))
    }

    /// Draws one output for the given input bit.
    pub fn transmit<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> Symbol {
        let w = self.transitions(bit);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (z, &p) in w.iter().enumerate() {
            acc += p;
            if u < acc {
                return z;
            }
        }
        // u landed in the rounding slack above the last partial sum
        w.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    /// Passes a bit sequence through the channel, one independent use per bit.
    pub fn simulate<R, I>(&self, bits: I, rng: &mut R) -> Vec<Symbol>
    where
        R: Rng + ?Sized,
        I: IntoIterator<Item = bool>,
    {
        bits.into_iter().map(|b| self.transmit(b, rng)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn bsc_shape() {
        let ch = ChannelModel::bsc(0.01).unwrap();
        assert_eq!(ch.alphabet_size(), 2);
        assert_eq!(ch.w(0, false), 0.99);
        assert_eq!(ch.w(1, false), 0.01);
        assert_eq!(ch.involution(0), Some(1));
        assert_eq!(ch.involution(1), Some(0));

        let noiseless = ChannelModel::bsc(0.0).unwrap();
        assert_eq!(noiseless.w(0, false), 1.0);
        assert!(ChannelModel::bsc(0.1).is_ok());
    }

    #[test]
    fn bsc_rejects_out_of_range() {
        assert!(ChannelModel::bsc(0.5).is_err());
        assert!(ChannelModel::bsc(-0.01).is_err());
        assert!(ChannelModel::bsc(f64::NAN).is_err());
    }

    #[test]
    fn rejects_asymmetric_channel() {
        let r = ChannelModel::new(
            vec!["a".into(), "b".into()],
            vec![0.9, 0.1],
            vec![0.2, 0.8],
            vec![1, 0],
        );
        assert!(r.is_err());
        let r = ChannelModel::new(
            vec!["a".into(), "b".into()],
            vec![0.9, 0.1],
            vec![0.1, 0.9],
            vec![0, 0],
        );
        assert!(r.is_err());
    }

    #[test]
    fn output_marginals() {
        let bsc = ChannelModel::bsc(0.23).unwrap();
        assert_eq!(bsc.output_marginal(0).unwrap(), 0.5);
        assert_eq!(bsc.output_marginal(1).unwrap(), 0.5);
        let bec = ChannelModel::bec(0.3).unwrap();
        assert!((bec.output_marginal(1).unwrap() - 0.3).abs() < 1e-15);
        assert!((bec.output_marginal(0).unwrap() - 0.35).abs() < 1e-15);
        assert!(matches!(bec.output_marginal(3), Err(Error::UnknownSymbol(3))));
    }

    #[test]
    fn noiseless_simulation_is_identity() {
        let ch = ChannelModel::bsc(0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bits: Vec<bool> = (0..1000).map(|i| i % 3 == 0).collect();
        let out = ch.simulate(bits.iter().copied(), &mut rng);
        for (b, z) in bits.iter().zip(&out) {
            assert_eq!(*z, usize::from(*b));
        }
    }

    #[test]
    fn flip_fraction_concentrates() {
        let ch = ChannelModel::bsc(0.01).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let out = ch.simulate(std::iter::repeat_n(false, n), &mut rng);
        let flips = out.iter().filter(|&&z| z == 1).count() as f64 / n as f64;
        // 3 sigma of a Binomial(1e6, 0.01) fraction is ~3e-4
        assert!((flips - 0.01).abs() < 3e-4, "flip fraction {flips}");
    }

    #[test]
    fn simulation_is_seed_deterministic() {
        let ch = ChannelModel::bec(0.4).unwrap();
        let bits = vec![true, false, true, true, false, false, true];
        let a = ch.simulate(bits.clone(), &mut ChaCha8Rng::seed_from_u64(9));
        let b = ch.simulate(bits, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }
}
