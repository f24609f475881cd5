use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::{Error, Result};

/// `N(0, σ²)` conditioned on `[−bound, bound]`, sampled by rejection.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedGaussian {
    normal: Normal<f64>,
    bound: f64,
}

impl TruncatedGaussian {
    pub fn new(sigma: f64, bound: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::invalid(format!("noise sigma {sigma} must be positive")));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::invalid(format!("truncation bound {bound} must be positive")));
        }
        let normal = Normal::new(0.0, sigma).map_err(|e| Error::invalid(e.to_string()))?;
        Ok(Self { normal, bound })
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }
}

impl Distribution<f64> for TruncatedGaussian {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let x = self.normal.sample(rng);
            if x.abs() <= self.bound {
                return x;
            }
        }
    }
}

pub fn sample_truncated_gaussian<R: Rng + ?Sized>(sigma: f64, bound: f64, rng: &mut R) -> Result<f64> {
    Ok(TruncatedGaussian::new(sigma, bound)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

    #[test]
    fn samples_stay_inside_and_center() {
        let d = TruncatedGaussian::new(0.1, 0.025).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = d.sample(&mut rng);
            assert!(x.abs() <= 0.025);
            sum += x;
        }
        assert!((sum / n as f64).abs() < 3e-4);
    }

    #[test]
    fn matches_conditional_cdf() {
        let (sigma, bound) = (0.1, 0.025);
        let d = TruncatedGaussian::new(sigma, bound).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut xs: Vec<f64> = (0..20_000).map(|_| d.sample(&mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let phi = StatNormal::new(0.0, sigma).unwrap();
        let (lo, hi) = (phi.cdf(-bound), phi.cdf(bound));
        let cdf = |x: f64| (phi.cdf(x) - lo) / (hi - lo);
        let n = xs.len() as f64;
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "KS distance {ks}");
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TruncatedGaussian::new(0.1, 0.0).is_err());
        assert!(TruncatedGaussian::new(0.0, 0.1).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(sample_truncated_gaussian(0.1, -1.0, &mut rng).is_err());
    }
}
