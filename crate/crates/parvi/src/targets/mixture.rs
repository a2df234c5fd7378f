//! Posterior for a two-component 1-D Gaussian mixture with unknown location
//! parameters.
//!
//! Observation model: y ~ (1/2) N(w1, sigma^2) + (1/2) N(w1 + w2, sigma^2),
//! prior (w1, w2) ~ N(0, I). The potential is the negative log of the
//! unnormalized posterior; likelihood terms and responsibilities go through
//! log-sum-exp so distant parameters stay finite.

use ndarray::{Array1, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numeric::logsumexp;

/// Observations plus the (known) component standard deviation.
#[derive(Debug, Clone)]
pub struct MixtureData {
    pub observations: Vec<f64>,
    pub sigma: f64,
}

impl MixtureData {
    pub fn new(observations: Vec<f64>, sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 {
            return Err(Error::invalid(format!(
                "mixture sigma must be positive and finite, got {sigma}"
            )));
        }
        if observations.iter().any(|y| !y.is_finite()) {
            return Err(Error::invalid("mixture observations must be finite"));
        }
        Ok(MixtureData {
            observations,
            sigma,
        })
    }
}

/// Draws t observations from the mixture at parameters (omega1, omega2).
/// Per observation: one uniform component coin, then one normal draw.
pub fn generate_mixture_data(
    t: usize,
    omega1: f64,
    omega2: f64,
    sigma: f64,
    seed: u64,
) -> Result<MixtureData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observations = Vec::with_capacity(t);
    for _ in 0..t {
        let mean = if rng.gen::<f64>() < 0.5 {
            omega1
        } else {
            omega1 + omega2
        };
        let z: f64 = rng.sample(StandardNormal);
        observations.push(mean + sigma * z);
    }
    MixtureData::new(observations, sigma)
}

/// Negative log-posterior of (w1, w2) given the data; dim 2, deterministic.
#[derive(Debug, Clone)]
pub struct MixturePosterior {
    data: MixtureData,
}

impl MixturePosterior {
    pub fn new(data: MixtureData) -> Self {
        MixturePosterior { data }
    }

    pub fn data(&self) -> &MixtureData {
        &self.data
    }

    /// V(w) = |w|^2/2 - sum_i ln[ (1/2) phi(y_i; w1, s^2) + (1/2) phi(y_i; w1+w2, s^2) ].
    pub fn potential(&self, w: ArrayView1<f64>) -> f64 {
        let (w1, w2) = (w[0], w[1]);
        let m2 = w1 + w2;
        let s = self.data.sigma;
        let inv_2s2 = 1.0 / (2.0 * s * s);
        // Per-observation constant: ln(1/2) - ln(sqrt(2 pi) s).
        let log_norm = -(2.0f64).ln() - (2.0 * std::f64::consts::PI).sqrt().ln() - s.ln();
        let mut v = 0.5 * (w1 * w1 + w2 * w2);
        for &y in &self.data.observations {
            let l1 = -(y - w1) * (y - w1) * inv_2s2;
            let l2 = -(y - m2) * (y - m2) * inv_2s2;
            v -= log_norm + logsumexp(&[l1, l2]);
        }
        v
    }

    /// Gradient via component responsibilities r_k = softmax(l1, l2):
    /// dV/dw = w - sum_i (r1*d1 + r2*d2, r2*d2) with d_k = (y_i - m_k)/s^2.
    pub fn grad(&self, w: ArrayView1<f64>) -> Array1<f64> {
        let (w1, w2) = (w[0], w[1]);
        let m2 = w1 + w2;
        let s = self.data.sigma;
        let inv_s2 = 1.0 / (s * s);
        let inv_2s2 = 0.5 * inv_s2;
        let mut g = w.to_owned();
        for &y in &self.data.observations {
            let l1 = -(y - w1) * (y - w1) * inv_2s2;
            let l2 = -(y - m2) * (y - m2) * inv_2s2;
            let m = l1.max(l2);
            let e1 = (l1 - m).exp();
            let e2 = (l2 - m).exp();
            let sum = e1 + e2;
            let r1 = e1 / sum;
            let r2 = e2 / sum;
            let d1 = (y - w1) * inv_s2;
            let d2 = (y - m2) * inv_s2;
            g[0] -= r1 * d1 + r2 * d2;
            g[1] -= r2 * d2;
        }
        g
    }
}
