use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::Distribution;

use super::noise::TruncatedGaussian;
use crate::{Error, Result};

/// Discrete-time plant `x_{t+1} = A x_t + B u_t + w_t`, `y_t = C x_t + v_t`
/// under state feedback `u_t = −K x̂_{t|t}`.
///
/// `(A, C)` must be in observer canonical form (`C = e_1ᵀ`). Process and
/// measurement noise are i.i.d. truncated Gaussians; a zero `noise_sigma`
/// disables both.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantModel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    pub gain: DVector<f64>,
    pub noise_sigma: f64,
    pub noise_trunc: f64,
}

impl PlantModel {
    pub fn new(
        a: DMatrix<f64>,
        b: DVector<f64>,
        c: DVector<f64>,
        gain: DVector<f64>,
        noise_sigma: f64,
        noise_trunc: f64,
    ) -> Result<Self> {
        let m = a.nrows();
        if m == 0 || a.ncols() != m {
            return Err(Error::invalid("A must be square and non-empty"));
        }
        for v in [&b, &c, &gain] {
            if v.len() != m {
                return Err(Error::DimensionMismatch { expected: m, actual: v.len() });
            }
        }
        if c.iter().enumerate().any(|(i, &ci)| ci != if i == 0 { 1.0 } else { 0.0 }) {
            return Err(Error::invalid("C must be [1 0 ... 0] (observer canonical form)"));
        }
        if noise_sigma < 0.0 || noise_trunc < 0.0 || !noise_sigma.is_finite() || !noise_trunc.is_finite() {
            return Err(Error::invalid("noise parameters must be finite and non-negative"));
        }
        let plant = Self { a, b, c, gain, noise_sigma, noise_trunc };
        if plant.observability_matrix().determinant().abs() < 1e-12 {
            return Err(Error::invalid("(A, C) is not observable"));
        }
        Ok(plant)
    }

    /// Cart-stick balancer in observer canonical form, with the LQR gain
    /// and noise `N(0, 0.01)` truncated to `±0.025`.
    pub fn cart_stick() -> Self {
        let a = DMatrix::from_row_slice(3, 3, &[
            3.3010, 1.0, 0.0,
            -3.2750, 0.0, 1.0,
            0.9801, 0.0, 0.0,
        ]);
        let b = DVector::from_vec(vec![-0.0300, -0.0072, 0.0376]);
        let c = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let gain = DVector::from_vec(vec![-55.6920, -32.3333, -19.0476]);
        Self::new(a, b, c, gain, 0.1, 0.025).expect("cart-stick model is valid")
    }

    pub fn without_noise(mut self) -> Self {
        self.noise_sigma = 0.0;
        self
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    fn noise(&self) -> Option<TruncatedGaussian> {
        if self.noise_sigma == 0.0 || self.noise_trunc == 0.0 {
            None
        } else {
            Some(TruncatedGaussian::new(self.noise_sigma, self.noise_trunc).expect("validated noise"))
        }
    }

    /// `[C; CA; ...; CA^{m−1}]`.
    pub fn observability_matrix(&self) -> DMatrix<f64> {
        let m = self.dim();
        let mut o = DMatrix::zeros(m, m);
        let mut row = self.c.transpose();
        for i in 0..m {
            o.set_row(i, &row);
            row *= &self.a;
        }
        o
    }

    pub fn closed_loop_matrix(&self) -> DMatrix<f64> {
        &self.a - &self.b * self.gain.transpose()
    }

    pub fn open_loop_spectral_radius(&self) -> f64 {
        spectral_radius(&self.a)
    }

    pub fn closed_loop_spectral_radius(&self) -> f64 {
        spectral_radius(&self.closed_loop_matrix())
    }

    /// Draws `y = C x + v`.
    pub fn measure<R: Rng + ?Sized>(&self, x: &DVector<f64>, rng: &mut R) -> f64 {
        let v = self.noise().map_or(0.0, |d| d.sample(rng));
        self.c.dot(x) + v
    }

    /// Advances one step and returns `(x_{t+1}, y_{t+1})`.
    pub fn step<R: Rng + ?Sized>(&self, x: &DVector<f64>, u: f64, rng: &mut R) -> (DVector<f64>, f64) {
        let mut next = &self.a * x + &self.b * u;
        if let Some(d) = self.noise() {
            for xi in next.iter_mut() {
                *xi += d.sample(rng);
            }
        }
        let y = self.measure(&next, rng);
        (next, y)
    }

    /// `u = −K x̂`.
    pub fn control_input(&self, x_hat: &DVector<f64>) -> f64 {
        -self.gain.dot(x_hat)
    }
}

fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}
