//! The kernel-regularized discrete KL energy F_h, its analytic gradient, and
//! the proximal objective J_n minimized by the implicit-Euler solver.
//!
//! ```text
//! F_h(X)    = (1/N) sum_i [ ln((1/N) sum_j K_h(x_i, x_j)) + V(x_i) ]
//! J_n(X)    = (1/(2 tau)) (1/N) sum_i |x_i - x_i^n|^2 + F_h(X)
//! dF_h/dx_i = (1/N) [ sum_j grad_1 K(x_i, x_j) / sum_j K(x_i, x_j)
//!                   + sum_k grad_2 K(x_k, x_i) / sum_j K(x_k, x_j)
//!                   + grad V(x_i) ]
//! ```
//!
//! The two interaction sums collapse to one pass over pairs because the
//! Gaussian kernel's gradients are antisymmetric; self-terms are zero.

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, KernelConfig};
use crate::numeric::pairwise_sum;
use crate::particles::ParticleSet;
use crate::targets::TargetModel;

/// Row count above which per-particle loops use the rayon pool. Results are
/// identical either way: parallel maps collect in index order and reductions
/// happen on the collected buffers sequentially.
const PAR_MIN_N: usize = 64;

/// Energy value and gradient evaluated together from one kernel matrix.
#[derive(Debug, Clone)]
pub struct EnergyReport {
    pub value: f64,
    /// Row i is dF_h/dx_i.
    pub grad: Array2<f64>,
    /// Frobenius norm of `grad`.
    pub grad_norm: f64,
}

fn check_target_dim(particles: &ParticleSet, target: &TargetModel) -> Result<()> {
    if particles.dim() != target.dim() {
        return Err(Error::mismatch(format!(
            "particles have dim {}, target has dim {}",
            particles.dim(),
            target.dim()
        )));
    }
    Ok(())
}

fn check_tau(tau: f64) -> Result<()> {
    if !tau.is_finite() || tau <= 0.0 {
        return Err(Error::invalid(format!(
            "proximal step tau must be positive and finite, got {tau}"
        )));
    }
    Ok(())
}

fn check_same_shape(particles: &ParticleSet, prev: &ParticleSet) -> Result<()> {
    if particles.len() != prev.len() || particles.dim() != prev.dim() {
        return Err(Error::mismatch(format!(
            "particle sets have shapes {}x{} and {}x{}",
            particles.len(),
            particles.dim(),
            prev.len(),
            prev.dim()
        )));
    }
    Ok(())
}

/// F_h with the bandwidth resolved from `particles` by the kernel policy.
pub fn discrete_energy(
    particles: &ParticleSet,
    kernel: &KernelConfig,
    target: &TargetModel,
) -> Result<f64> {
    let h = kernel.resolve(particles)?;
    discrete_energy_with_bandwidth(particles, h, target)
}

/// F_h at an explicitly fixed bandwidth. Solvers resolve the median rule once
/// per outer iteration and call this, so the bandwidth stays frozen inside
/// inner loops and finite-difference checks.
pub fn discrete_energy_with_bandwidth(
    particles: &ParticleSet,
    h: f64,
    target: &TargetModel,
) -> Result<f64> {
    check_target_dim(particles, target)?;
    let km = kernel_matrix(particles, h)?;
    Ok(energy_from_row_sums(particles, &km.row_sums, target))
}

fn energy_from_row_sums(
    particles: &ParticleSet,
    row_sums: &Array1<f64>,
    target: &TargetModel,
) -> f64 {
    let x = particles.positions();
    let n = x.nrows();
    let inv_n = 1.0 / n as f64;
    let term = |i: usize| (row_sums[i] * inv_n).ln() + target.potential(x.row(i));
    // potential() is deterministic for every target, so the parallel map is
    // safe; collect keeps index order and the reduction is sequential.
    let terms: Vec<f64> = if n >= PAR_MIN_N {
        (0..n).into_par_iter().map(term).collect()
    } else {
        (0..n).map(term).collect()
    };
    pairwise_sum(&terms) * inv_n
}

/// dF_h/dx_i rows, bandwidth resolved from `particles`.
pub fn discrete_energy_grad(
    particles: &ParticleSet,
    kernel: &KernelConfig,
    target: &TargetModel,
) -> Result<Array2<f64>> {
    let h = kernel.resolve(particles)?;
    discrete_energy_grad_with_bandwidth(particles, h, target)
}

/// dF_h/dx_i rows at an explicitly fixed bandwidth.
pub fn discrete_energy_grad_with_bandwidth(
    particles: &ParticleSet,
    h: f64,
    target: &TargetModel,
) -> Result<Array2<f64>> {
    check_target_dim(particles, target)?;
    let km = kernel_matrix(particles, h)?;
    grad_from_kernel(particles, h, &km.values, &km.row_sums, target)
}

fn grad_from_kernel(
    particles: &ParticleSet,
    h: f64,
    kernel_values: &Array2<f64>,
    row_sums: &Array1<f64>,
    target: &TargetModel,
) -> Result<Array2<f64>> {
    let x = particles.positions();
    let n = x.nrows();
    let d = x.ncols();
    let inv_n = 1.0 / n as f64;
    let neg_two_over_h2 = -2.0 / (h * h);
    let inv_row_sums: Vec<f64> = row_sums.iter().map(|s| 1.0 / s).collect();

    // Potential gradients first: stochastic targets consume RNG state per
    // call, so those are evaluated in row order on one thread.
    let grad_v: Vec<Array1<f64>> = if target.is_stochastic() || n < PAR_MIN_N {
        (0..n).map(|i| target.grad(x.row(i))).collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| target.grad(x.row(i)))
            .collect()
    };

    let row = |i: usize| -> Vec<f64> {
        let mut acc = vec![0.0; d];
        for j in 0..n {
            if j == i {
                continue;
            }
            // grad_1 K(x_i,x_j)/rs_i and grad_2 K(x_j,x_i)/rs_j share the
            // factor (x_i - x_j) K_ij.
            let w = kernel_values[(i, j)] * (inv_row_sums[i] + inv_row_sums[j]);
            for k in 0..d {
                acc[k] += w * (x[(i, k)] - x[(j, k)]);
            }
        }
        for k in 0..d {
            acc[k] = (acc[k] * neg_two_over_h2 + grad_v[i][k]) * inv_n;
        }
        acc
    };
    let rows: Vec<Vec<f64>> = if n >= PAR_MIN_N {
        (0..n).into_par_iter().map(row).collect()
    } else {
        (0..n).map(row).collect()
    };

    let mut grad = Array2::zeros((n, d));
    for (i, r) in rows.into_iter().enumerate() {
        for (k, v) in r.into_iter().enumerate() {
            grad[(i, k)] = v;
        }
    }
    if grad.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure(
            "energy gradient has non-finite entries".into(),
        ));
    }
    Ok(grad)
}

/// Energy value and gradient from a single kernel-matrix evaluation.
pub fn energy_report_with_bandwidth(
    particles: &ParticleSet,
    h: f64,
    target: &TargetModel,
) -> Result<EnergyReport> {
    check_target_dim(particles, target)?;
    let km = kernel_matrix(particles, h)?;
    let value = energy_from_row_sums(particles, &km.row_sums, target);
    let grad = grad_from_kernel(particles, h, &km.values, &km.row_sums, target)?;
    let grad_norm = frobenius_norm(&grad);
    Ok(EnergyReport {
        value,
        grad,
        grad_norm,
    })
}

pub(crate) fn frobenius_norm(m: &Array2<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// J_n = (1/(2 tau)) (1/N) sum_i |x_i - prev_i|^2 + F_h(particles), bandwidth
/// resolved from `particles`.
pub fn proximal_objective(
    particles: &ParticleSet,
    prev: &ParticleSet,
    tau: f64,
    kernel: &KernelConfig,
    target: &TargetModel,
) -> Result<f64> {
    let h = kernel.resolve(particles)?;
    proximal_objective_with_bandwidth(particles, prev, tau, h, target)
}

/// J_n at an explicitly fixed bandwidth.
pub fn proximal_objective_with_bandwidth(
    particles: &ParticleSet,
    prev: &ParticleSet,
    tau: f64,
    h: f64,
    target: &TargetModel,
) -> Result<f64> {
    check_tau(tau)?;
    check_same_shape(particles, prev)?;
    let energy = discrete_energy_with_bandwidth(particles, h, target)?;
    let n = particles.len() as f64;
    let mut quad = 0.0;
    for (a, b) in particles.positions().iter().zip(prev.positions().iter()) {
        let diff = a - b;
        quad += diff * diff;
    }
    Ok(quad / (2.0 * tau * n) + energy)
}

/// Gradient of J_n: row i = (x_i - prev_i)/(tau N) + dF_h/dx_i, bandwidth
/// resolved from `particles`.
pub fn proximal_objective_grad(
    particles: &ParticleSet,
    prev: &ParticleSet,
    tau: f64,
    kernel: &KernelConfig,
    target: &TargetModel,
) -> Result<Array2<f64>> {
    let h = kernel.resolve(particles)?;
    proximal_objective_grad_with_bandwidth(particles, prev, tau, h, target)
}

/// Gradient of J_n at an explicitly fixed bandwidth.
pub fn proximal_objective_grad_with_bandwidth(
    particles: &ParticleSet,
    prev: &ParticleSet,
    tau: f64,
    h: f64,
    target: &TargetModel,
) -> Result<Array2<f64>> {
    check_tau(tau)?;
    check_same_shape(particles, prev)?;
    let mut grad = discrete_energy_grad_with_bandwidth(particles, h, target)?;
    let scale = 1.0 / (tau * particles.len() as f64);
    let x = particles.positions();
    let xp = prev.positions();
    for i in 0..particles.len() {
        for k in 0..particles.dim() {
            grad[(i, k)] += (x[(i, k)] - xp[(i, k)]) * scale;
        }
    }
    Ok(grad)
}
