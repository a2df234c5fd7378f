//! Gaussian kernel evaluation, gradients, pairwise kernel matrices, and
//! bandwidth selection.
//!
//! Every kernel quantity in this crate uses the convention
//!
//! ```text
//! K_h(x, y) = (2*pi*h)^(-d/2) * exp(-||x - y||^2 / h^2)
//! ```
//!
//! with `h^2` in the exponent denominator (no factor of 2) and `h` (not
//! `h^2`) inside the normalizing constant. `h` is therefore a squared-length
//! scale, not a standard deviation. The normalizer is retained even where it
//! would cancel so energy values stay comparable across runs.

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::{median, pairwise_sum};
use crate::particles::ParticleSet;

/// How the bandwidth h is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthPolicy {
    /// A fixed positive bandwidth.
    Fixed(f64),
    /// h = med^2 / ln N with med the median pairwise particle distance,
    /// recomputed from whatever ensemble is passed to [`KernelConfig::resolve`].
    MedianRule,
}

/// Kernel bandwidth policy plus the ambient dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    pub bandwidth_policy: BandwidthPolicy,
    pub dim: usize,
}

impl KernelConfig {
    pub fn new(bandwidth_policy: BandwidthPolicy, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("kernel dim must be at least 1"));
        }
        if let BandwidthPolicy::Fixed(h) = bandwidth_policy {
            check_bandwidth(h)?;
        }
        Ok(KernelConfig {
            bandwidth_policy,
            dim,
        })
    }

    /// Resolves the bandwidth for the given ensemble. Fixed policies return
    /// the stored value; the median rule recomputes from current pairwise
    /// distances. Callers that need one bandwidth across several evaluations
    /// (inner solver loops) should resolve once and pass the value down.
    pub fn resolve(&self, particles: &ParticleSet) -> Result<f64> {
        if particles.dim() != self.dim {
            return Err(Error::mismatch(format!(
                "kernel config is for dim {}, particles have dim {}",
                self.dim,
                particles.dim()
            )));
        }
        match self.bandwidth_policy {
            BandwidthPolicy::Fixed(h) => Ok(h),
            BandwidthPolicy::MedianRule => median_bandwidth(particles),
        }
    }
}

/// Pairwise kernel evaluations for one ensemble.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    /// values[(i, j)] = K_h(x_i, x_j); exactly symmetric because each pair is
    /// computed once and mirrored.
    pub values: Array2<f64>,
    /// row_sums[i] = sum_j values[(i, j)].
    pub row_sums: Array1<f64>,
}

fn check_bandwidth(h: f64) -> Result<()> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::invalid(format!(
            "kernel bandwidth must be positive and finite, got {h}"
        )));
    }
    Ok(())
}

fn check_same_dim(x1: ArrayView1<f64>, x2: ArrayView1<f64>) -> Result<()> {
    if x1.len() != x2.len() {
        return Err(Error::mismatch(format!(
            "kernel arguments have dims {} and {}",
            x1.len(),
            x2.len()
        )));
    }
    Ok(())
}

/// (2*pi*h)^(-d/2), the kernel value at zero distance.
fn normalizer(h: f64, d: usize) -> f64 {
    (2.0 * std::f64::consts::PI * h).powf(-(d as f64) / 2.0)
}

fn squared_distance(x1: ArrayView1<f64>, x2: ArrayView1<f64>) -> f64 {
    x1.iter()
        .zip(x2.iter())
        .map(|(a, b)| {
            let diff = a - b;
            diff * diff
        })
        .sum()
}

/// K_h(x1, x2) = (2*pi*h)^(-d/2) * exp(-||x1 - x2||^2 / h^2).
pub fn gaussian_kernel(x1: ArrayView1<f64>, x2: ArrayView1<f64>, h: f64) -> Result<f64> {
    check_bandwidth(h)?;
    check_same_dim(x1, x2)?;
    let r2 = squared_distance(x1, x2);
    Ok(normalizer(h, x1.len()) * (-r2 / (h * h)).exp())
}

/// Gradient of `gaussian_kernel` with respect to its first argument:
/// -(2/h^2) * (x1 - x2) * K_h(x1, x2).
pub fn gaussian_kernel_grad(
    x1: ArrayView1<f64>,
    x2: ArrayView1<f64>,
    h: f64,
) -> Result<Array1<f64>> {
    check_bandwidth(h)?;
    check_same_dim(x1, x2)?;
    let k = normalizer(h, x1.len()) * (-squared_distance(x1, x2) / (h * h)).exp();
    let factor = -2.0 / (h * h) * k;
    let mut grad = Array1::zeros(x1.len());
    for (g, (a, b)) in grad.iter_mut().zip(x1.iter().zip(x2.iter())) {
        *g = factor * (a - b);
    }
    Ok(grad)
}

/// All pairwise kernel values for one ensemble, with per-row sums.
///
/// Each unordered pair is evaluated once and mirrored, so the matrix is
/// exactly symmetric no matter how the rows are scheduled. Diagonal entries
/// are the zero-distance value (2*pi*h)^(-d/2).
pub fn kernel_matrix(particles: &ParticleSet, h: f64) -> Result<KernelMatrix> {
    check_bandwidth(h)?;
    let x = particles.positions();
    let n = x.nrows();
    let d = x.ncols();
    let norm = normalizer(h, d);
    let inv_h2 = 1.0 / (h * h);

    // Upper-triangle strips (j > i), one per row, computed independently.
    let compute_strip = |i: usize| -> Vec<f64> {
        let xi = x.row(i);
        (i + 1..n)
            .map(|j| norm * (-squared_distance(xi, x.row(j)) * inv_h2).exp())
            .collect()
    };
    let strips: Vec<Vec<f64>> = if n >= 64 {
        (0..n).into_par_iter().map(compute_strip).collect()
    } else {
        (0..n).map(compute_strip).collect()
    };

    let mut values = Array2::zeros((n, n));
    for i in 0..n {
        values[(i, i)] = norm;
        for (offset, &k) in strips[i].iter().enumerate() {
            let j = i + 1 + offset;
            values[(i, j)] = k;
            values[(j, i)] = k;
        }
    }
    let row_sums = Array1::from_iter(
        (0..n).map(|i| pairwise_sum(values.row(i).as_slice().expect("row-major layout"))),
    );
    Ok(KernelMatrix { values, row_sums })
}

/// Median-trick bandwidth h = med^2 / ln N, where med is the median of the
/// N(N-1)/2 pairwise Euclidean distances.
pub fn median_bandwidth(particles: &ParticleSet) -> Result<f64> {
    let x = particles.positions();
    let n = x.nrows();
    if n < 2 {
        return Err(Error::invalid(
            "median bandwidth needs at least 2 particles",
        ));
    }
    let mut distances = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            distances.push(squared_distance(x.row(i), x.row(j)).sqrt());
        }
    }
    let med = median(&distances).expect("n >= 2 gives at least one distance");
    if med <= 0.0 {
        return Err(Error::DegenerateConfiguration(
            "median pairwise distance is zero; no bandwidth exists".into(),
        ));
    }
    Ok(med * med / (n as f64).ln())
}
