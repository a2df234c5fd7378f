//! Particle-based variational inference driven by a discrete energy-dissipation law.
//!
//! The library evolves a set of particles so that their empirical measure
//! approximates an unnormalized target density `rho* = exp(-V)`. The central
//! object is a kernel-regularized discrete KL energy `F_h`; minimizing it moves
//! the particles toward the target. Several update rules are provided:
//!
//! * **EVI-Im**: implicit Euler on the energy gradient flow. Each outer
//!   iteration solves a proximal subproblem `argmin J_n` with Barzilai-Borwein
//!   gradient descent, which guarantees the energy never increases.
//! * **Blob**: explicit Euler on the same energy, stepped with AdaGrad.
//! * **SVGD / GFSF / GFSD**: kernelized velocity fields stepped with AdaGrad.
//! * **LMC**: Langevin Monte Carlo with a polynomially decaying step size,
//!   as a stochastic baseline.
//!
//! Built-in targets cover three 2-D toy densities, an isotropic Gaussian, a
//! two-parameter Gaussian-mixture posterior, and Bayesian logistic regression
//! with optional minibatch gradients. The [`diagnostics`] module scores
//! particle fidelity (squared MMD, kernel density estimates, moments, modes).
//!
//! ```
//! use parvi::kernels::{BandwidthPolicy, KernelConfig};
//! use parvi::solvers::{run, DiagnosticsSpec, Scheme, SolverConfig};
//! use parvi::targets::{sample_gaussian_init, TargetModel};
//!
//! let target = TargetModel::Toy1;
//! let init = sample_gaussian_init(30, 2, &[0.0, 0.0], 1.0, 7).unwrap();
//! let kernel = KernelConfig::new(BandwidthPolicy::Fixed(0.05), 2).unwrap();
//! let mut config = SolverConfig::new(Scheme::EviIm);
//! config.tau = 0.01;
//! config.outer_iters = 5;
//! let out = run(&target, init, &config, &kernel, &DiagnosticsSpec::default()).unwrap();
//! // The proximal solver never lets the energy increase.
//! assert!(out.metrics.last().unwrap().energy <= out.metrics[0].energy);
//! ```
//!
//! The `parvi` binary drives the same machinery from a flat `key = value`
//! config file and writes per-iteration metrics and particle snapshots as CSV.

pub mod app;
pub mod config;
pub mod diagnostics;
pub mod energy;
pub mod error;
pub mod io;
pub mod kernels;
pub mod numeric;
pub mod particles;
pub mod solvers;
pub mod targets;

pub use error::{Error, Result};
pub use particles::ParticleSet;
