//! Time integrators and the outer run loop.
//!
//! * [`evi_im_step`]: implicit Euler on the energy gradient flow. Each step
//!   minimizes the proximal objective J_n with Barzilai-Borwein gradient
//!   descent; a backtracking guard accepts only strict J_n decreases, which
//!   forces F_h(new) + |X_new - X_n|^2/(2 tau N) <= F_h(old).
//! * [`explicit_step`]: one AdaGrad step along a kernel velocity field
//!   (Blob, SVGD, GFSF, or GFSD).
//! * [`lmc_step`]: unadjusted Langevin with a polynomially decaying step.
//! * [`run`]: drives any scheme for a fixed number of outer iterations,
//!   recording metrics and particle snapshots.

use std::time::Instant;

use ndarray::{Array1, Array2, ArrayView1};

use crate::diagnostics::{mmd2, MetricsRecord};
use crate::energy::{
    discrete_energy_grad_with_bandwidth, discrete_energy_with_bandwidth,
    energy_report_with_bandwidth, frobenius_norm, proximal_objective_grad_with_bandwidth,
    proximal_objective_with_bandwidth,
};
use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, KernelConfig};
use crate::particles::ParticleSet;
use crate::targets::TargetModel;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Particle update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Implicit Euler on F_h solved as a proximal subproblem per step.
    EviIm,
    /// Explicit Euler on F_h (velocity = -N * dF_h/dx), AdaGrad step sizes.
    Blob,
    /// Stein variational gradient descent velocity, AdaGrad step sizes.
    Svgd,
    /// Smoothed-test-function flow: kernel linear solve, AdaGrad step sizes.
    Gfsf,
    /// Smoothed-density flow, AdaGrad step sizes.
    Gfsd,
    /// Langevin Monte Carlo baseline.
    Lmc,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::EviIm => "evi_im",
            Scheme::Blob => "blob",
            Scheme::Svgd => "svgd",
            Scheme::Gfsf => "gfsf",
            Scheme::Gfsd => "gfsd",
            Scheme::Lmc => "lmc",
        }
    }

    pub fn is_explicit_parvi(&self) -> bool {
        matches!(
            self,
            Scheme::Blob | Scheme::Svgd | Scheme::Gfsf | Scheme::Gfsd
        )
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "evi_im" => Ok(Scheme::EviIm),
            "blob" => Ok(Scheme::Blob),
            "svgd" => Ok(Scheme::Svgd),
            "gfsf" => Ok(Scheme::Gfsf),
            "gfsd" => Ok(Scheme::Gfsd),
            "lmc" => Ok(Scheme::Lmc),
            other => Err(Error::invalid(format!(
                "unknown scheme {other:?} (expected evi_im, blob, svgd, gfsf, gfsd, or lmc)"
            ))),
        }
    }
}

/// Step-size schedule eps_n = a * (b + n)^(-c) for the Langevin baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmcSchedule {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for LmcSchedule {
    fn default() -> Self {
        LmcSchedule {
            a: 0.1,
            b: 1.0,
            c: 0.55,
        }
    }
}

impl LmcSchedule {
    pub fn eps(&self, n: usize) -> f64 {
        self.a * (self.b + n as f64).powf(-self.c)
    }
}

/// Everything a solver needs besides the target and kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub scheme: Scheme,
    /// Proximal step size (EviIm only).
    pub tau: f64,
    /// AdaGrad learning rate (explicit schemes only).
    pub lr: f64,
    /// Inner-loop iteration budget for the proximal solve.
    pub inner_max_iter: usize,
    /// Inner-loop stop threshold on the Frobenius norm of grad J_n.
    pub inner_tol: f64,
    pub outer_iters: usize,
    pub lmc_schedule: LmcSchedule,
    /// Tikhonov term for the GFSF linear solve, relative to the kernel
    /// diagonal (2 pi h)^(-d/2). Zero solves the raw system.
    pub gfsf_ridge: f64,
    pub seed: u64,
    /// Fallback bandwidth when the median rule hits a fully coincident
    /// ensemble. None propagates the degenerate-configuration error instead.
    pub median_floor: Option<f64>,
    /// Flip the Langevin drift to +eps * grad V (the ascent variant; it runs
    /// away from the target and exists only for comparison runs).
    pub lmc_ascent_drift: bool,
}

impl SolverConfig {
    pub fn new(scheme: Scheme) -> Self {
        SolverConfig {
            scheme,
            tau: 0.01,
            lr: 0.01,
            inner_max_iter: 100,
            inner_tol: 1e-8,
            outer_iters: 100,
            lmc_schedule: LmcSchedule::default(),
            gfsf_ridge: 1e-8,
            seed: 0,
            median_floor: None,
            lmc_ascent_drift: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| -> Result<()> {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
            Ok(())
        };
        match self.scheme {
            Scheme::EviIm => {
                positive("tau", self.tau)?;
                positive("inner_tol", self.inner_tol)?;
                if self.inner_max_iter == 0 {
                    return Err(Error::invalid("inner_max_iter must be at least 1"));
                }
            }
            Scheme::Blob | Scheme::Svgd | Scheme::Gfsf | Scheme::Gfsd => {
                positive("lr", self.lr)?;
            }
            Scheme::Lmc => {
                positive("lmc.a", self.lmc_schedule.a)?;
                positive("lmc.b", self.lmc_schedule.b)?;
                if !self.lmc_schedule.c.is_finite() || self.lmc_schedule.c < 0.0 {
                    return Err(Error::invalid(format!(
                        "lmc.c must be nonnegative, got {}",
                        self.lmc_schedule.c
                    )));
                }
            }
        }
        if !self.gfsf_ridge.is_finite() || self.gfsf_ridge < 0.0 {
            return Err(Error::invalid(format!(
                "gfsf_ridge must be nonnegative, got {}",
                self.gfsf_ridge
            )));
        }
        if let Some(floor) = self.median_floor {
            positive("median_floor", floor)?;
        }
        Ok(())
    }
}

/// Mutable per-run state: the ensemble, the iteration counter, the AdaGrad
/// accumulator, and the noise RNG.
#[derive(Debug, Clone)]
pub struct RunState {
    pub particles: ParticleSet,
    pub iter: usize,
    /// Per-coordinate running sum of squared velocities.
    pub adagrad_accum: Array2<f64>,
    /// Noise stream (Langevin); minibatch draws live inside the target.
    pub rng: ChaCha8Rng,
}

impl RunState {
    pub fn new(particles: ParticleSet, seed: u64) -> Self {
        let accum = Array2::zeros((particles.len(), particles.dim()));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        RunState {
            particles,
            iter: 0,
            adagrad_accum: accum,
            rng,
        }
    }
}

/// What the proximal inner loop did in one outer step.
#[derive(Debug, Clone, Copy)]
pub struct InnerReport {
    /// Accepted inner iterations.
    pub iterations: usize,
    /// Frobenius norm of grad J_n at the returned point.
    pub grad_norm: f64,
    /// Whether the inner loop hit `inner_tol`.
    pub converged: bool,
    /// Whether F_h(new) <= F_h(old) - |X_new - X_old|^2/(2 tau N) held
    /// (up to 1e-10 * (1 + |F_h(old)|) slack).
    pub decrease_holds: bool,
}

/// Resolves the bandwidth for this ensemble, substituting the configured
/// floor when the median rule degenerates.
pub fn resolve_bandwidth(
    kernel: &KernelConfig,
    particles: &ParticleSet,
    median_floor: Option<f64>,
) -> Result<f64> {
    match kernel.resolve(particles) {
        Err(Error::DegenerateConfiguration(_)) if median_floor.is_some() => {
            Ok(median_floor.expect("checked above"))
        }
        other => other,
    }
}

/// Velocity field of one explicit scheme, bandwidth resolved from the
/// ensemble by the kernel policy. `gfsf_ridge` is the relative Tikhonov term
/// for the GFSF solve; other schemes ignore it.
pub fn parvi_velocity(
    scheme: Scheme,
    particles: &ParticleSet,
    kernel: &KernelConfig,
    target: &TargetModel,
    gfsf_ridge: f64,
) -> Result<Array2<f64>> {
    let h = kernel.resolve(particles)?;
    parvi_velocity_with_bandwidth(scheme, particles, h, target, gfsf_ridge)
}

/// Velocity field at an explicitly fixed bandwidth.
///
/// ```text
/// Blob:  dx_i = -N * dF_h/dx_i
/// SVGD:  dx_i = -sum_j [ K_ij grad V(x_j) + grad_1 K(x_i, x_j) ]
/// GFSF:  solve (K + ridge I) dX = SVGD right-hand side
/// GFSD:  dx_i = -[ sum_j grad_1 K(x_i, x_j) / sum_j K_ij + grad V(x_i) ]
/// ```
pub fn parvi_velocity_with_bandwidth(
    scheme: Scheme,
    particles: &ParticleSet,
    h: f64,
    target: &TargetModel,
    gfsf_ridge: f64,
) -> Result<Array2<f64>> {
    if particles.dim() != target.dim() {
        return Err(Error::mismatch(format!(
            "particles have dim {}, target has dim {}",
            particles.dim(),
            target.dim()
        )));
    }
    match scheme {
        Scheme::Blob => {
            let mut grad = discrete_energy_grad_with_bandwidth(particles, h, target)?;
            grad *= -(particles.len() as f64);
            Ok(grad)
        }
        Scheme::Svgd => {
            let km = kernel_matrix(particles, h)?;
            Ok(svgd_velocity(particles, h, &km.values, target))
        }
        Scheme::Gfsd => {
            let km = kernel_matrix(particles, h)?;
            gfsd_velocity(particles, h, &km.values, &km.row_sums, target)
        }
        Scheme::Gfsf => {
            if !gfsf_ridge.is_finite() || gfsf_ridge < 0.0 {
                return Err(Error::invalid(format!(
                    "gfsf_ridge must be nonnegative, got {gfsf_ridge}"
                )));
            }
            let km = kernel_matrix(particles, h)?;
            if particles.len() == 1 {
                // Scalar system (c + ridge) v = -c grad V: divide through by
                // c analytically so the zero-ridge case is exactly -grad V.
                let c = km.values[(0, 0)];
                let scale = -(c / (c + gfsf_ridge * c));
                let gv = target.grad(particles.positions().row(0));
                let mut vel = Array2::zeros((1, particles.dim()));
                vel.row_mut(0).assign(&gv.mapv(|g| scale * g));
                return Ok(vel);
            }
            let rhs = svgd_velocity(particles, h, &km.values, target);
            gfsf_solve(particles, &km.values, rhs, gfsf_ridge)
        }
        Scheme::EviIm | Scheme::Lmc => Err(Error::invalid(format!(
            "{} is not an explicit velocity-field scheme",
            scheme.name()
        ))),
    }
}

/// Potential gradients for every particle. Stochastic targets draw their
/// minibatches here, one per row in row order.
fn potential_grads(particles: &ParticleSet, target: &TargetModel) -> Vec<Array1<f64>> {
    let x = particles.positions();
    (0..x.nrows()).map(|i| target.grad(x.row(i))).collect()
}

fn svgd_velocity(
    particles: &ParticleSet,
    h: f64,
    kernel_values: &Array2<f64>,
    target: &TargetModel,
) -> Array2<f64> {
    let x = particles.positions();
    let n = x.nrows();
    let d = x.ncols();
    let grad_v = potential_grads(particles, target);
    let two_over_h2 = 2.0 / (h * h);
    let mut vel = Array2::zeros((n, d));
    for i in 0..n {
        for j in 0..n {
            let k = kernel_values[(i, j)];
            for c in 0..d {
                // -K_ij grad V(x_j) - grad_1 K(x_i, x_j)
                vel[(i, c)] -= k * grad_v[j][c];
                vel[(i, c)] += two_over_h2 * (x[(i, c)] - x[(j, c)]) * k;
            }
        }
    }
    vel
}

fn gfsd_velocity(
    particles: &ParticleSet,
    h: f64,
    kernel_values: &Array2<f64>,
    row_sums: &Array1<f64>,
    target: &TargetModel,
) -> Result<Array2<f64>> {
    let x = particles.positions();
    let n = x.nrows();
    let d = x.ncols();
    let grad_v = potential_grads(particles, target);
    let neg_two_over_h2 = -2.0 / (h * h);
    let mut vel = Array2::zeros((n, d));
    for i in 0..n {
        let mut acc = vec![0.0; d];
        for j in 0..n {
            if j == i {
                continue;
            }
            let k = kernel_values[(i, j)];
            for c in 0..d {
                acc[c] += (x[(i, c)] - x[(j, c)]) * k;
            }
        }
        let inv_rs = 1.0 / row_sums[i];
        for c in 0..d {
            vel[(i, c)] = -(acc[c] * neg_two_over_h2 * inv_rs + grad_v[i][c]);
        }
    }
    Ok(vel)
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
fn cholesky(a: &Array2<f64>) -> Option<Array2<f64>> {
    let n = a.nrows();
    let mut l: Array2<f64> = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[(i, j)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(l: &Array2<f64>, b: ArrayView1<f64>) -> Array1<f64> {
    let n = l.nrows();
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[(i, k)] * y[k];
        }
        y[i] = sum / l[(i, i)];
    }
    let mut x = Array1::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l[(k, i)] * x[k];
        }
        x[i] = sum / l[(i, i)];
    }
    x
}

/// Solves (K + ridge I) X = rhs column by column via Cholesky with one
/// iterative-refinement pass, then enforces the relative residual bound.
fn gfsf_solve(
    particles: &ParticleSet,
    kernel_values: &Array2<f64>,
    rhs: Array2<f64>,
    gfsf_ridge: f64,
) -> Result<Array2<f64>> {
    let n = particles.len();
    let d = particles.dim();
    if !gfsf_ridge.is_finite() || gfsf_ridge < 0.0 {
        return Err(Error::invalid(format!(
            "gfsf_ridge must be nonnegative, got {gfsf_ridge}"
        )));
    }
    // The kernel diagonal is the zero-distance value; scale the ridge to it.
    let ridge_abs = gfsf_ridge * kernel_values[(0, 0)];

    let mut a = kernel_values.clone();
    for i in 0..n {
        a[(i, i)] += ridge_abs;
    }
    let l = cholesky(&a).ok_or_else(|| {
        Error::LinearSolveFailure(format!(
            "kernel system of size {n} is not positive definite with ridge {ridge_abs:.3e}; \
             increase gfsf_ridge"
        ))
    })?;
    let mut diag_min = f64::INFINITY;
    let mut diag_max = 0.0f64;
    for i in 0..n {
        diag_min = diag_min.min(l[(i, i)]);
        diag_max = diag_max.max(l[(i, i)]);
    }
    let cond_estimate = (diag_max / diag_min).powi(2);

    let mut vel = Array2::zeros((n, d));
    for c in 0..d {
        let b = rhs.column(c);
        let mut x = cholesky_solve(&l, b);
        // One refinement pass: solve A dx = b - A x.
        let residual = &b.to_owned() - &a.dot(&x);
        let dx = cholesky_solve(&l, residual.view());
        x += &dx;
        vel.column_mut(c).assign(&x);
    }

    let mut residual_norm = 0.0;
    let resid = &a.dot(&vel) - &rhs;
    for v in resid.iter() {
        residual_norm += v * v;
    }
    residual_norm = residual_norm.sqrt();
    let rhs_norm = frobenius_norm(&rhs);
    if residual_norm > 1e-8 * rhs_norm && rhs_norm > 0.0 {
        return Err(Error::LinearSolveFailure(format!(
            "kernel solve residual {residual_norm:.3e} exceeds 1e-8 * |rhs| = {:.3e} \
             (condition estimate {cond_estimate:.3e}); increase gfsf_ridge",
            1e-8 * rhs_norm
        )));
    }
    Ok(vel)
}

fn first_nonfinite_row(m: &Array2<f64>) -> Option<usize> {
    (0..m.nrows()).find(|&i| m.row(i).iter().any(|v| !v.is_finite()))
}

/// One AdaGrad step along the configured explicit velocity field:
/// G += v^2 (per coordinate), then x += lr * v / (sqrt(G) + 1e-8).
pub fn explicit_step(
    mut state: RunState,
    config: &SolverConfig,
    kernel: &KernelConfig,
    target: &TargetModel,
) -> Result<RunState> {
    const EPS_STAB: f64 = 1e-8;
    if !config.scheme.is_explicit_parvi() {
        return Err(Error::invalid(format!(
            "explicit_step drives blob/svgd/gfsf/gfsd, not {}",
            config.scheme.name()
        )));
    }
    let h = resolve_bandwidth(kernel, &state.particles, config.median_floor)?;
    let vel = parvi_velocity_with_bandwidth(
        config.scheme,
        &state.particles,
        h,
        target,
        config.gfsf_ridge,
    )?;
    if let Some(i) = first_nonfinite_row(&vel) {
        return Err(Error::NumericalFailure(format!(
            "non-finite velocity for particle {i} at iteration {}",
            state.iter
        )));
    }
    let mut x = state.particles.into_inner();
    for ((xi, gi), vi) in x
        .iter_mut()
        .zip(state.adagrad_accum.iter_mut())
        .zip(vel.iter())
    {
        *gi += vi * vi;
        *xi += config.lr * vi / (gi.sqrt() + EPS_STAB);
    }
    state.particles = ParticleSet::new(x)?;
    state.iter += 1;
    Ok(state)
}

/// One implicit-Euler (proximal) step: minimizes
/// J_n(X) = |X - X_n|^2 / (2 tau N) + F_h(X) by gradient descent with
/// Barzilai-Borwein step sizes and a backtracking guard, starting from X_n.
///
/// The bandwidth is resolved from X_n once and held fixed for the whole
/// step. Accepted iterates strictly decrease J_n, so the returned ensemble
/// always satisfies F_h(new) <= F_h(old).
pub fn evi_im_step(
    mut state: RunState,
    config: &SolverConfig,
    kernel: &KernelConfig,
    target: &TargetModel,
) -> Result<(RunState, InnerReport)> {
    const BB_MIN: f64 = 1e-10;
    const BB_MAX: f64 = 1e3;
    const MAX_HALVINGS: usize = 50;

    if config.scheme != Scheme::EviIm {
        return Err(Error::invalid(format!(
            "evi_im_step requires the evi_im scheme, got {}",
            config.scheme.name()
        )));
    }
    let tau = config.tau;
    let h = resolve_bandwidth(kernel, &state.particles, config.median_floor)?;
    let prev = state.particles.clone();
    let energy_prev = discrete_energy_with_bandwidth(&prev, h, target)?;

    let quad_term = |x: &ParticleSet| -> f64 {
        let mut q = 0.0;
        for (a, b) in x.positions().iter().zip(prev.positions().iter()) {
            let diff = a - b;
            q += diff * diff;
        }
        q / (2.0 * tau * prev.len() as f64)
    };

    let mut x = prev.clone();
    // J_n(X_n) = F_h(X_n): the quadratic term vanishes at the anchor.
    let mut objective = energy_prev;
    let mut grad = proximal_objective_grad_with_bandwidth(&x, &prev, tau, h, target)?;
    let mut grad_norm = frobenius_norm(&grad);
    let mut alpha = 1e-3 * tau;
    let mut iterations = 0;
    let mut converged = grad_norm <= config.inner_tol;

    while !converged && iterations < config.inner_max_iter {
        // Backtracking: halve the step until J_n strictly decreases.
        let mut step = alpha;
        let mut accepted: Option<(ParticleSet, f64)> = None;
        let mut last_candidate_finite = true;
        for _ in 0..=MAX_HALVINGS {
            let mut cand = x.positions().clone();
            cand.scaled_add(-step, &grad);
            let cand = match ParticleSet::new(cand) {
                Ok(c) => c,
                Err(_) => {
                    // Non-finite positions: treat like a failed candidate.
                    last_candidate_finite = false;
                    step *= 0.5;
                    continue;
                }
            };
            let j = match proximal_objective_with_bandwidth(&cand, &prev, tau, h, target) {
                Ok(j) => j,
                Err(_) => {
                    last_candidate_finite = false;
                    step *= 0.5;
                    continue;
                }
            };
            last_candidate_finite = j.is_finite();
            if j.is_finite() && j < objective {
                accepted = Some((cand, j));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, j_cand)) = accepted else {
            if iterations == 0 && !last_candidate_finite {
                return Err(Error::StalledInnerSolver(format!(
                    "proximal objective is non-finite near the current ensemble \
                     (iteration {}, grad norm {grad_norm:.3e})",
                    state.iter
                )));
            }
            // No representable descent left: the objective is converged to
            // floating-point resolution at this point.
            break;
        };

        let grad_new = proximal_objective_grad_with_bandwidth(&cand, &prev, tau, h, target)?;
        // BB1 step from s = -step * grad, y = grad_new - grad.
        let mut s_dot_y = 0.0;
        let mut y_dot_y = 0.0;
        for (g_old, g_new) in grad.iter().zip(grad_new.iter()) {
            let y = g_new - g_old;
            s_dot_y += (-step * g_old) * y;
            y_dot_y += y * y;
        }
        alpha = if y_dot_y > 0.0 && s_dot_y.is_finite() {
            let bb = s_dot_y / y_dot_y;
            if bb > 0.0 {
                bb.clamp(BB_MIN, BB_MAX)
            } else {
                1e-3 * tau
            }
        } else {
            step
        };

        let objective_before = objective;
        x = cand;
        objective = j_cand;
        grad = grad_new;
        grad_norm = frobenius_norm(&grad);
        iterations += 1;
        if grad_norm <= config.inner_tol {
            converged = true;
            break;
        }
        if objective_before - objective <= 1e-14 * (1.0 + objective.abs()) {
            // Progress is below floating-point resolution.
            break;
        }
    }

    let quad = quad_term(&x);
    let energy_new = objective - quad;
    let decrease_holds = energy_new - (energy_prev - quad) <= 1e-10 * (1.0 + energy_prev.abs());
    state.particles = x;
    state.iter += 1;
    Ok((
        state,
        InnerReport {
            iterations,
            grad_norm,
            converged,
            decrease_holds,
        },
    ))
}

/// One Langevin step: x <- x - eps_n grad V(x) + sqrt(2 eps_n) xi with
/// standard normal xi. Per particle, the gradient is evaluated first (which
/// may consume the target's minibatch stream), then d noise coordinates are
/// drawn from the state RNG.
pub fn lmc_step(
    mut state: RunState,
    config: &SolverConfig,
    target: &TargetModel,
) -> Result<RunState> {
    if config.scheme != Scheme::Lmc {
        return Err(Error::invalid(format!(
            "lmc_step requires the lmc scheme, got {}",
            config.scheme.name()
        )));
    }
    let eps = config.lmc_schedule.eps(state.iter);
    let noise_scale = (2.0 * eps).sqrt();
    let drift_sign = if config.lmc_ascent_drift { 1.0 } else { -1.0 };
    let mut x = state.particles.into_inner();
    let n = x.nrows();
    let d = x.ncols();
    for i in 0..n {
        let g = target.grad(x.row(i));
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure(format!(
                "non-finite potential gradient for particle {i} at iteration {}",
                state.iter
            )));
        }
        for k in 0..d {
            let xi: f64 = state.rng.sample(StandardNormal);
            x[(i, k)] += drift_sign * eps * g[k] + noise_scale * xi;
        }
    }
    state.particles = ParticleSet::new(x)?;
    state.iter += 1;
    Ok(state)
}

/// Extra outputs recorded by [`run`].
#[derive(Debug, Clone, Default)]
pub struct DiagnosticsSpec {
    /// Record a particle snapshot every this many outer iterations (0 keeps
    /// only the initial and final snapshots). The initial and final states
    /// are always snapshotted.
    pub snapshot_every: usize,
    /// Reference sample for a per-iteration squared-MMD column.
    pub mmd_reference: Option<ParticleSet>,
}

/// Particle positions at one recorded iteration.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub iter: usize,
    pub particles: ParticleSet,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub snapshots: Vec<Snapshot>,
    /// One record per outer iteration plus the initial state.
    pub metrics: Vec<MetricsRecord>,
    pub final_particles: ParticleSet,
}

/// Runs `config.outer_iters` outer iterations of the configured scheme.
///
/// Emits a [`MetricsRecord`] for the initial state and after every outer
/// iteration (energy and gradient norm at the bandwidth resolved from the
/// current ensemble, optional squared MMD against the reference, cumulative
/// wall time), plus snapshots at the configured interval.
pub fn run(
    target: &TargetModel,
    init: ParticleSet,
    config: &SolverConfig,
    kernel: &KernelConfig,
    diagnostics: &DiagnosticsSpec,
) -> Result<RunOutput> {
    config.validate()?;
    if init.dim() != target.dim() {
        return Err(Error::mismatch(format!(
            "init particles have dim {}, target has dim {}",
            init.dim(),
            target.dim()
        )));
    }
    if let Some(reference) = &diagnostics.mmd_reference {
        if reference.dim() != target.dim() {
            return Err(Error::mismatch(format!(
                "mmd reference has dim {}, target has dim {}",
                reference.dim(),
                target.dim()
            )));
        }
    }

    let started = Instant::now();
    let mut state = RunState::new(init, config.seed);
    let mut snapshots = Vec::new();
    let mut metrics = Vec::new();

    let record = |state: &RunState, started: &Instant| -> Result<MetricsRecord> {
        let h = resolve_bandwidth(kernel, &state.particles, config.median_floor)?;
        let report = energy_report_with_bandwidth(&state.particles, h, target)?;
        let mmd = diagnostics
            .mmd_reference
            .as_ref()
            .map(|reference| mmd2(&state.particles, reference))
            .transpose()?;
        Ok(MetricsRecord {
            iter: state.iter,
            energy: report.value,
            grad_norm: report.grad_norm,
            mmd2: mmd,
            wall_time_s: started.elapsed().as_secs_f64(),
        })
    };

    metrics.push(record(&state, &started)?);
    snapshots.push(Snapshot {
        iter: 0,
        particles: state.particles.clone(),
    });

    for _ in 0..config.outer_iters {
        state = match config.scheme {
            Scheme::EviIm => evi_im_step(state, config, kernel, target)?.0,
            Scheme::Lmc => lmc_step(state, config, target)?,
            _ => explicit_step(state, config, kernel, target)?,
        };
        metrics.push(record(&state, &started)?);
        if diagnostics.snapshot_every > 0 && state.iter.is_multiple_of(diagnostics.snapshot_every) {
            snapshots.push(Snapshot {
                iter: state.iter,
                particles: state.particles.clone(),
            });
        }
    }
    if snapshots.last().map(|s| s.iter) != Some(state.iter) {
        snapshots.push(Snapshot {
            iter: state.iter,
            particles: state.particles.clone(),
        });
    }
    Ok(RunOutput {
        final_particles: state.particles.clone(),
        snapshots,
        metrics,
    })
}
