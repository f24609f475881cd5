use nalgebra::{DMatrix, DVector};

use super::plant::PlantModel;
use crate::{Error, Result};

/// Deadbeat reconstruction from the last `m` measurements.
///
/// With `s = t − m + 1`, the stacked equations
/// `y_{s+j} = C A^j x_s + Σ_{i<j} C A^{j−1−i} B u_{s+i}` are solved for
/// `x_s` through the inverse observability matrix, and `x_s` is then rolled
/// forward to `t` with the known inputs. Times before 1 are treated as a
/// plant at rest (zero state, input and measurement).
#[derive(Debug, Clone)]
pub struct DeadbeatObserver {
    a: DMatrix<f64>,
    b: DVector<f64>,
    obs_inv: DMatrix<f64>,
    // markov[j] = C A^j B
    markov: Vec<f64>,
}

impl DeadbeatObserver {
    pub fn new(plant: &PlantModel) -> Result<Self> {
        let obs_inv = plant
            .observability_matrix()
            .try_inverse()
            .ok_or_else(|| Error::invalid("observability matrix is singular"))?;
        let m = plant.dim();
        let mut markov = Vec::with_capacity(m);
        let mut v = plant.b.clone();
        for _ in 0..m {
            markov.push(plant.c.dot(&v));
            v = &plant.a * v;
        }
        Ok(Self { a: plant.a.clone(), b: plant.b.clone(), obs_inv, markov })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    /// `x̂_{t|t}` from `ŷ_1..ŷ_t` and `u_1..u_{t−1}`.
    pub fn reconstruct(&self, measurements: &[f64], inputs: &[f64]) -> Result<DVector<f64>> {
        let t = measurements.len();
        if t == 0 {
            return Err(Error::invalid("state reconstruction needs at least one measurement"));
        }
        if inputs.len() + 1 != t {
            return Err(Error::DimensionMismatch { expected: t - 1, actual: inputs.len() });
        }
        let m = self.dim();
        let s = t as i64 - m as i64 + 1;
        // 1-based time index, zero before the start
        let y = |time: i64| if time >= 1 { measurements[(time - 1) as usize] } else { 0.0 };
        let u = |time: i64| if time >= 1 { inputs[(time - 1) as usize] } else { 0.0 };

        let rhs = DVector::from_iterator(
            m,
            (0..m).map(|j| {
                let forced: f64 = (0..j).map(|i| self.markov[j - 1 - i] * u(s + i as i64)).sum();
                y(s + j as i64) - forced
            }),
        );
        let mut x = &self.obs_inv * rhs;
        for i in 0..m - 1 {
            x = &self.a * x + &self.b * u(s + i as i64);
        }
        Ok(x)
    }

    /// Rolls an estimate forward one step with a known input.
    pub fn predict(&self, x: &DVector<f64>, u: f64) -> DVector<f64> {
        &self.a * x + &self.b * u
    }

    /// `x̂_{t|t}` with `t = inputs.len() + 1` from the decoded measurements
    /// `ŷ_1..ŷ_L`, `L ≤ t`: reconstruct at `L`, then roll forward with the
    /// known inputs. With nothing decoded the rest state is rolled forward.
    pub fn estimate(&self, y_hat: &[f64], inputs: &[f64]) -> Result<DVector<f64>> {
        let t = inputs.len() + 1;
        let l = y_hat.len();
        if l > t {
            return Err(Error::DimensionMismatch { expected: t, actual: l });
        }
        let (mut x, from) = if l == 0 {
            (DVector::zeros(self.dim()), 0)
        } else {
            (self.reconstruct(y_hat, &inputs[..l - 1])?, l - 1)
        };
        for &u in &inputs[from..] {
            x = self.predict(&x, u);
        }
        Ok(x)
    }

    /// `ŷ_i − C x̂_i` for the newest `lag` decoded measurements, where `x̂`
    /// is reconstructed from the older ones and rolled forward.
    fn innovations(&self, y_hat: &[f64], inputs: &[f64], lag: usize) -> Result<(Vec<f64>, DVector<f64>)> {
        let l = y_hat.len();
        let s = l - lag;
        let mut x = self.reconstruct(&y_hat[..s], &inputs[..s - 1])?;
        let mut out = Vec::with_capacity(lag);
        // 0-based measurement index i = time − 1
        for i in s..l {
            x = self.predict(&x, inputs[i - 1]);
            out.push(y_hat[i] - x[0]);
        }
        Ok((out, x))
    }

    /// Worst-case `|innovation|` at each of `lag` prediction steps when every
    /// measurement is off by at most `meas_bound` (quantization plus
    /// measurement noise) and every process noise component by at most
    /// `process_bound`. The innovation is linear in these perturbations, so
    /// the bound is the ℓ1 norm of its coefficients.
    pub fn innovation_bounds(&self, lag: usize, meas_bound: f64, process_bound: f64) -> Vec<f64> {
        let m = self.dim();
        let len = m + lag;
        let zeros = vec![0.0; len - 1];
        let mut bounds = vec![0.0; lag];
        let mut add = |y: &[f64], scale: f64| {
            let (innov, _) = self.innovations(y, &zeros, lag).expect("lengths are consistent");
            for (b, v) in bounds.iter_mut().zip(innov) {
                *b += scale * v.abs();
            }
        };
        for i in 0..len {
            let mut y = vec![0.0; len];
            y[i] = 1.0;
            add(&y, meas_bound);
        }
        // unit process noise entering at step i, component c
        for i in 0..len - 1 {
            for c in 0..m {
                let mut x = DVector::zeros(m);
                x[c] = 1.0;
                let mut y = vec![0.0; len];
                for yj in &mut y[i + 1..] {
                    *yj = x[0];
                    x = &self.a * x;
                }
                add(&y, process_bound);
            }
        }
        bounds
    }

    /// [`DeadbeatObserver::estimate`] with a consistency check: the newest
    /// `gates.len()` decoded measurements are compared against the
    /// prediction from an estimate built on the older ones, and if any
    /// differs by more than its gate the older estimate is used instead.
    /// Returns the estimate and whether the fallback was taken.
    pub fn estimate_guarded(&self, y_hat: &[f64], inputs: &[f64], gates: &[f64]) -> Result<(DVector<f64>, bool)> {
        let l = y_hat.len();
        let lag = gates.len();
        if lag == 0 || l <= lag + self.dim() - 1 {
            return Ok((self.estimate(y_hat, inputs)?, false));
        }
        if inputs.len() + 1 < l {
            return Err(Error::DimensionMismatch { expected: inputs.len() + 1, actual: l });
        }
        let (innov, mut x) = self.innovations(y_hat, inputs, lag)?;
        if innov.iter().zip(gates).all(|(v, g)| v.abs() <= *g) {
            return Ok((self.estimate(y_hat, inputs)?, false));
        }
        // innovations() rolled x to time l − 1 (0-based), i.e. ŷ's last time
        for &u in &inputs[l - 1..] {
            x = self.predict(&x, u);
        }
        Ok((x, true))
    }
}

/// Fallback rule for [`DeadbeatObserver::estimate_guarded`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsistencyGuard {
    /// Newest decoded measurements under test.
    pub lag: usize,
    /// Multiplier on the worst-case innovation of correctly decoded data.
    pub slack: f64,
}

impl ConsistencyGuard {
    /// Per-step gates for a plant measured through a quantizer of bin `delta`.
    pub fn gates(&self, observer: &DeadbeatObserver, plant: &PlantModel, delta: f64) -> Vec<f64> {
        let noise = if plant.noise_sigma > 0.0 { plant.noise_trunc } else { 0.0 };
        observer
            .innovation_bounds(self.lag, delta / 2.0 + noise, noise)
            .into_iter()
            .map(|b| b * self.slack)
            .collect()
    }
}

pub fn reconstruct_state(plant: &PlantModel, measurements: &[f64], inputs: &[f64]) -> Result<DVector<f64>> {
    DeadbeatObserver::new(plant)?.reconstruct(measurements, inputs)
}
