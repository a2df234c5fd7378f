//! Target distributions: each supplies the potential V = -ln(density) up to
//! an additive constant and its gradient, which is all any solver needs.

mod logistic;
mod mixture;
mod toys;

pub use logistic::{load_csv_dataset, LabeledDataset, LogisticPosterior};
pub use mixture::{generate_mixture_data, MixtureData, MixturePosterior};
pub use toys::{toy1_potential, toy2_potential, toy3_potential};

use ndarray::{Array1, Array2, ArrayView1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::particles::ParticleSet;

/// A target density known through its potential and gradient.
#[derive(Debug)]
pub enum TargetModel {
    /// 2-D banana-shaped density (see [`toy1_potential`]).
    Toy1,
    /// 2-D ring with two bump attractors (see [`toy2_potential`]).
    Toy2,
    /// 2-D sine-curve ridge (see [`toy3_potential`]).
    Toy3,
    /// Isotropic standard Gaussian in `dim` dimensions: V = |x|^2 / 2.
    StandardGaussian { dim: usize },
    /// V identically zero (pure diffusion / interaction-only test target).
    Flat { dim: usize },
    /// Gaussian-mixture location posterior (see [`MixturePosterior`]).
    Mixture(MixturePosterior),
    /// Bayesian logistic regression (see [`LogisticPosterior`]).
    Logistic(Box<LogisticPosterior>),
}

/// Wraps mixture data as a 2-D target.
pub fn mixture_posterior(data: MixtureData) -> TargetModel {
    TargetModel::Mixture(MixturePosterior::new(data))
}

/// Wraps a labeled dataset as a logistic-regression target with prior
/// variance `alpha`. `batch_size: None` gives deterministic full-batch
/// gradients; `Some(b)` draws a fresh uniform batch per gradient call using
/// an RNG derived from `seed`.
pub fn logistic_posterior(
    data: LabeledDataset,
    alpha: f64,
    batch_size: Option<usize>,
    seed: u64,
) -> Result<TargetModel> {
    Ok(TargetModel::Logistic(Box::new(LogisticPosterior::new(
        data, alpha, batch_size, seed,
    )?)))
}

impl TargetModel {
    pub fn dim(&self) -> usize {
        match self {
            TargetModel::Toy1 | TargetModel::Toy2 | TargetModel::Toy3 => 2,
            TargetModel::StandardGaussian { dim } | TargetModel::Flat { dim } => *dim,
            TargetModel::Mixture(_) => 2,
            TargetModel::Logistic(post) => post.dim(),
        }
    }

    /// True when `grad` is a randomized (minibatch) estimator. Such targets
    /// consume RNG state per call, so gradient evaluations must be serialized
    /// to stay reproducible.
    pub fn is_stochastic(&self) -> bool {
        match self {
            TargetModel::Logistic(post) => post.is_stochastic(),
            _ => false,
        }
    }

    /// V(x), always the deterministic full-data value.
    pub fn potential(&self, x: ArrayView1<f64>) -> f64 {
        match self {
            TargetModel::Toy1 => toy1_potential(x).0,
            TargetModel::Toy2 => toy2_potential(x).0,
            TargetModel::Toy3 => toy3_potential(x).0,
            TargetModel::StandardGaussian { .. } => 0.5 * x.dot(&x),
            TargetModel::Flat { .. } => 0.0,
            TargetModel::Mixture(post) => post.potential(x),
            TargetModel::Logistic(post) => post.potential(x),
        }
    }

    /// grad V(x); a fresh minibatch estimate for stochastic targets.
    pub fn grad(&self, x: ArrayView1<f64>) -> Array1<f64> {
        match self {
            TargetModel::Toy1 => toy1_potential(x).1,
            TargetModel::Toy2 => toy2_potential(x).1,
            TargetModel::Toy3 => toy3_potential(x).1,
            TargetModel::StandardGaussian { .. } => x.to_owned(),
            TargetModel::Flat { .. } => Array1::zeros(x.len()),
            TargetModel::Mixture(post) => post.grad(x),
            TargetModel::Logistic(post) => post.grad(x),
        }
    }
}

/// n i.i.d. draws from N(mean, scale^2 * I). Coordinates are consumed from
/// the seeded RNG in row-major order.
pub fn sample_gaussian_init(
    n: usize,
    dim: usize,
    mean: &[f64],
    scale: f64,
    seed: u64,
) -> Result<ParticleSet> {
    if n == 0 {
        return Err(Error::invalid("need at least one particle"));
    }
    if mean.len() != dim {
        return Err(Error::mismatch(format!(
            "mean has {} entries for dim {}",
            mean.len(),
            dim
        )));
    }
    if !scale.is_finite() || scale < 0.0 {
        return Err(Error::invalid(format!(
            "init scale must be finite and nonnegative, got {scale}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Array2::zeros((n, dim));
    for i in 0..n {
        for k in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            data[(i, k)] = mean[k] + scale * z;
        }
    }
    ParticleSet::new(data)
}

/// n approximate direct draws from the target density, for use as an MMD
/// reference set. Gaussian targets are sampled exactly; the 2-D toys go
/// through rejection sampling with a uniform proposal on a bounding box that
/// carries all but negligible mass ([-4,4]^2 for toys 1 and 3, [-3,3]^2 for
/// toy 2). Other targets have no direct sampler.
pub fn sample_reference(target: &TargetModel, n: usize, seed: u64) -> Result<ParticleSet> {
    if n == 0 {
        return Err(Error::invalid("need at least one reference sample"));
    }
    match target {
        TargetModel::StandardGaussian { dim } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(3);
            let mut data = Array2::zeros((n, *dim));
            for i in 0..n {
                for k in 0..*dim {
                    data[(i, k)] = rng.sample::<f64, _>(StandardNormal);
                }
            }
            ParticleSet::new(data)
        }
        TargetModel::Toy1 | TargetModel::Toy3 => rejection_sample_2d(target, 4.0, n, seed),
        TargetModel::Toy2 => rejection_sample_2d(target, 3.0, n, seed),
        _ => Err(Error::invalid(
            "direct reference sampling is available for gaussian and toy targets only",
        )),
    }
}

/// Rejection sampling of exp(-V) on [-half_width, half_width]^2. The density
/// bound is 1.05 times the maximum of exp(-V) over a 401x401 grid. Each
/// proposal consumes (x1, x2, u) from the RNG in that order.
fn rejection_sample_2d(
    target: &TargetModel,
    half_width: f64,
    n: usize,
    seed: u64,
) -> Result<ParticleSet> {
    const GRID: usize = 401;
    let mut max_density = 0.0f64;
    for i in 0..GRID {
        for j in 0..GRID {
            let x1 = -half_width + 2.0 * half_width * i as f64 / (GRID - 1) as f64;
            let x2 = -half_width + 2.0 * half_width * j as f64 / (GRID - 1) as f64;
            let d = (-target.potential(ndarray::aview1(&[x1, x2]))).exp();
            max_density = max_density.max(d);
        }
    }
    if max_density <= 0.0 {
        return Err(Error::ProposalFailure(
            "target density vanishes on the whole proposal box".into(),
        ));
    }
    let bound = 1.05 * max_density;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(3);
    let mut data = Array2::zeros((n, 2));
    let mut accepted = 0usize;
    let mut attempts = 0u64;
    while accepted < n {
        attempts += 1;
        let x1 = rng.gen_range(-half_width..half_width);
        let x2 = rng.gen_range(-half_width..half_width);
        let u: f64 = rng.gen();
        let density = (-target.potential(ndarray::aview1(&[x1, x2]))).exp();
        if u * bound < density {
            data[(accepted, 0)] = x1;
            data[(accepted, 1)] = x2;
            accepted += 1;
        }
        if attempts.is_multiple_of(100_000) {
            let rate = accepted as f64 / attempts as f64;
            if rate < 1e-5 {
                return Err(Error::ProposalFailure(format!(
                    "acceptance rate {rate:.2e} after {attempts} proposals \
                     ({accepted} accepted, bound {bound:.3e})"
                )));
            }
        }
    }
    ParticleSet::new(data)
}
