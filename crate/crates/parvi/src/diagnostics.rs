//! Fidelity and convergence metrics: squared maximum mean discrepancy,
//! kernel density estimates, sample moments, and KDE mode detection.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::pairwise_sum;
use crate::particles::ParticleSet;

/// One per-iteration metrics row emitted by the run loop.
#[derive(Debug, Clone)]
pub struct MetricsRecord {
    pub iter: usize,
    /// Discrete energy F_h at this iterate.
    pub energy: f64,
    /// Frobenius norm of dF_h/dx.
    pub grad_norm: f64,
    /// Squared MMD against the configured reference set, when one is set.
    pub mmd2: Option<f64>,
    /// Cumulative wall time since the run started, seconds.
    pub wall_time_s: f64,
}

/// Polynomial kernel (x.y/3 + 1)^3 used by the MMD statistic.
fn poly_kernel(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let t = a.dot(&b) / 3.0 + 1.0;
    t * t * t
}

/// Sum of k(a_i, b_j) over all pairs: inner sums run sequentially per row,
/// per-row totals combine with a pairwise reduction.
fn poly_kernel_sum(a: ArrayView2<f64>, b: ArrayView2<f64>) -> f64 {
    let row_total = |i: usize| -> f64 {
        let ai = a.row(i);
        (0..b.nrows()).map(|j| poly_kernel(ai, b.row(j))).sum()
    };
    let totals: Vec<f64> = if a.nrows() >= 64 {
        (0..a.nrows()).into_par_iter().map(row_total).collect()
    } else {
        (0..a.nrows()).map(row_total).collect()
    };
    pairwise_sum(&totals)
}

/// Orders the two sets canonically (more rows first; lexicographic on the
/// flattened values for ties) so the cross term is summed in the same order
/// for either argument order, making mmd2(x, y) == mmd2(y, x) bit for bit.
fn canonical<'a>(
    xs: ArrayView2<'a, f64>,
    ys: ArrayView2<'a, f64>,
) -> (ArrayView2<'a, f64>, ArrayView2<'a, f64>) {
    let swap = match xs.nrows().cmp(&ys.nrows()) {
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Equal => {
            let mut swap = false;
            for (u, v) in xs.iter().zip(ys.iter()) {
                if u < v {
                    break;
                }
                if u > v {
                    swap = true;
                    break;
                }
            }
            swap
        }
    };
    if swap {
        (ys, xs)
    } else {
        (xs, ys)
    }
}

/// Squared maximum mean discrepancy between two particle sets, computed with
/// the polynomial kernel as the biased V-statistic (diagonal terms included):
///
/// ```text
/// MMD^2 = (1/N^2) sum_ij k(x_i, x_j) + (1/M^2) sum_ij k(y_i, y_j)
///       - (2/NM) sum_ij k(x_i, y_j)
/// ```
pub fn mmd2(xs: &ParticleSet, ys: &ParticleSet) -> Result<f64> {
    if xs.dim() != ys.dim() {
        return Err(Error::mismatch(format!(
            "mmd2 sets have dims {} and {}",
            xs.dim(),
            ys.dim()
        )));
    }
    let (a, b) = canonical(xs.positions().view(), ys.positions().view());
    let na = a.nrows() as f64;
    let nb = b.nrows() as f64;
    let saa = poly_kernel_sum(a, a);
    let sbb = poly_kernel_sum(b, b);
    let sab = poly_kernel_sum(a, b);
    Ok(saa / (na * na) + sbb / (nb * nb) - 2.0 * sab / (na * nb))
}

/// Kernel density estimate at one query point: (1/N) sum_j K_h(x - x_j),
/// reported raw (the kernel in use does not integrate to one, so neither
/// does this estimate; its total mass is (h/2)^(d/2) regardless of the
/// particle positions).
pub fn kde_density(particles: &ParticleSet, h: f64, query: ArrayView1<f64>) -> Result<f64> {
    if query.len() != particles.dim() {
        return Err(Error::mismatch(format!(
            "query has dim {}, particles have dim {}",
            query.len(),
            particles.dim()
        )));
    }
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::invalid(format!(
            "kde bandwidth must be positive and finite, got {h}"
        )));
    }
    let x = particles.positions();
    let n = x.nrows();
    let d = x.ncols();
    let norm = (2.0 * std::f64::consts::PI * h).powf(-(d as f64) / 2.0);
    let inv_h2 = 1.0 / (h * h);
    let terms: Vec<f64> = (0..n)
        .map(|j| {
            let r2: f64 = query
                .iter()
                .zip(x.row(j).iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            norm * (-r2 * inv_h2).exp()
        })
        .collect();
    Ok(pairwise_sum(&terms) / n as f64)
}

/// Sample mean and unbiased (divisor N-1) sample covariance.
pub fn particle_moments(particles: &ParticleSet) -> Result<(Array1<f64>, Array2<f64>)> {
    let x = particles.positions();
    let n = x.nrows();
    let d = x.ncols();
    if n < 2 {
        return Err(Error::invalid("covariance needs at least 2 particles"));
    }
    let mean = x.sum_axis(ndarray::Axis(0)) / n as f64;
    let mut cov = Array2::zeros((d, d));
    for i in 0..n {
        let row = x.row(i);
        for a in 0..d {
            let da = row[a] - mean[a];
            for b in a..d {
                cov[(a, b)] += da * (row[b] - mean[b]);
            }
        }
    }
    cov /= (n - 1) as f64;
    for a in 0..d {
        for b in 0..a {
            cov[(a, b)] = cov[(b, a)];
        }
    }
    Ok((mean, cov))
}

/// Rectangular evaluation grid for [`find_modes`]: `nx` by `ny` points over
/// the particle bounding box padded by `pad_bandwidths * h` on every side.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub pad_bandwidths: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            nx: 201,
            ny: 201,
            pad_bandwidths: 3.0,
        }
    }
}

/// Local maxima of the KDE on a 2-D grid: interior grid points whose density
/// strictly exceeds all 8 neighbors, sorted by density descending.
pub fn find_modes(particles: &ParticleSet, h: f64, grid: &GridSpec) -> Result<Vec<Array1<f64>>> {
    if particles.dim() != 2 {
        return Err(Error::invalid(format!(
            "mode finding is implemented for dim 2, got dim {}",
            particles.dim()
        )));
    }
    if grid.nx < 3 || grid.ny < 3 {
        return Err(Error::invalid(format!(
            "mode grid must be at least 3x3, got {}x{}",
            grid.nx, grid.ny
        )));
    }
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::invalid(format!(
            "kde bandwidth must be positive and finite, got {h}"
        )));
    }
    let x = particles.positions();
    let n = x.nrows();
    let pad = grid.pad_bandwidths * h;
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for i in 0..n {
        x0 = x0.min(x[(i, 0)]);
        x1 = x1.max(x[(i, 0)]);
        y0 = y0.min(x[(i, 1)]);
        y1 = y1.max(x[(i, 1)]);
    }
    x0 -= pad;
    x1 += pad;
    y0 -= pad;
    y1 += pad;

    let norm = (2.0 * std::f64::consts::PI * h).powi(-1);
    let inv_h2 = 1.0 / (h * h);
    let gx = |i: usize| x0 + (x1 - x0) * i as f64 / (grid.nx - 1) as f64;
    let gy = |j: usize| y0 + (y1 - y0) * j as f64 / (grid.ny - 1) as f64;
    // Density over the grid; rows are independent, order fixed by collect.
    let density_row = |j: usize| -> Vec<f64> {
        let qy = gy(j);
        (0..grid.nx)
            .map(|i| {
                let qx = gx(i);
                let mut sum = 0.0;
                for r in 0..n {
                    let dx = qx - x[(r, 0)];
                    let dy = qy - x[(r, 1)];
                    sum += (-(dx * dx + dy * dy) * inv_h2).exp();
                }
                norm * sum / n as f64
            })
            .collect()
    };
    let rows: Vec<Vec<f64>> = if grid.ny >= 64 && n >= 16 {
        (0..grid.ny).into_par_iter().map(density_row).collect()
    } else {
        (0..grid.ny).map(density_row).collect()
    };

    let mut modes: Vec<(f64, Array1<f64>)> = Vec::new();
    for j in 1..grid.ny - 1 {
        for i in 1..grid.nx - 1 {
            let v = rows[j][i];
            let is_peak = (-1..=1).all(|dj: i64| {
                (-1..=1).all(|di: i64| {
                    (di == 0 && dj == 0)
                        || v > rows[(j as i64 + dj) as usize][(i as i64 + di) as usize]
                })
            });
            if is_peak {
                modes.push((v, ndarray::array![gx(i), gy(j)]));
            }
        }
    }
    modes.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite densities"));
    Ok(modes.into_iter().map(|(_, p)| p).collect())
}
