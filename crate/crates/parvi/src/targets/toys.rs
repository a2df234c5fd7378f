//! Three built-in 2-D toy potentials. Each returns (V, grad V) in one call
//! since the terms are shared.

use ndarray::{array, Array1, ArrayView1};

use crate::numeric::logsumexp;

/// Banana-shaped density: V = x1^2/2 + (10*x2 + 3*x1^2 - 3)^2 / 2.
pub fn toy1_potential(x: ArrayView1<f64>) -> (f64, Array1<f64>) {
    let (x1, x2) = (x[0], x[1]);
    let u = 10.0 * x2 + 3.0 * x1 * x1 - 3.0;
    let v = 0.5 * x1 * x1 + 0.5 * u * u;
    let grad = array![x1 + u * 6.0 * x1, u * 10.0];
    (v, grad)
}

/// Ring of radius sqrt(3) with two bump attractors:
/// V = 2*((x1^2 + x2^2) - 3)^2 - ln(exp(-2*(x1-2)^2) + exp(-2*(x2+2)^2)).
/// The log term is evaluated with log-sum-exp so far-field points stay finite.
pub fn toy2_potential(x: ArrayView1<f64>) -> (f64, Array1<f64>) {
    let (x1, x2) = (x[0], x[1]);
    let r2 = x1 * x1 + x2 * x2;
    let a1 = -2.0 * (x1 - 2.0) * (x1 - 2.0);
    let a2 = -2.0 * (x2 + 2.0) * (x2 + 2.0);
    let lse = logsumexp(&[a1, a2]);
    let v = 2.0 * (r2 - 3.0) * (r2 - 3.0) - lse;
    // Softmax weights of the two bump terms.
    let w1 = (a1 - lse).exp();
    let w2 = (a2 - lse).exp();
    let grad = array![
        8.0 * x1 * (r2 - 3.0) + 4.0 * w1 * (x1 - 2.0),
        8.0 * x2 * (r2 - 3.0) + 4.0 * w2 * (x2 + 2.0),
    ];
    (v, grad)
}

/// Sine-curve ridge: V = ((x2 - sin(pi*x1/2)) / 0.4)^2 / 2.
/// Zero exactly on the curve x2 = sin(pi*x1/2).
pub fn toy3_potential(x: ArrayView1<f64>) -> (f64, Array1<f64>) {
    const WIDTH: f64 = 0.4;
    let (x1, x2) = (x[0], x[1]);
    let angle = std::f64::consts::PI * x1 / 2.0;
    let z = (x2 - angle.sin()) / WIDTH;
    let dcurve = 0.5 * std::f64::consts::PI * angle.cos();
    let grad = array![-z * dcurve / WIDTH, z / WIDTH];
    (0.5 * z * z, grad)
}
