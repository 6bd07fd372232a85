//! Gauss-Hermite quadrature and standard-normal helpers.

use nalgebra::{DMatrix, SymmetricEigen};
use statrs::function::erf::erfc;

use std::f64::consts::PI;

/// Physicists' Gauss-Hermite rule: nodes and weights such that
/// `integral exp(-x^2) f(x) dx ~= sum w_i f(x_i)`, computed by the
/// Golub-Welsch eigendecomposition of the Jacobi matrix. Nodes ascend.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let b = (k as f64 / 2.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (node, PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Expectation of `f` under N(mean, var) via an n-node Gauss-Hermite rule.
pub fn gh_expect<F: FnMut(f64) -> f64>(mean: f64, var: f64, n: usize, mut f: F) -> f64 {
    let (nodes, weights) = gauss_hermite(n);
    let sd = var.max(0.0).sqrt();
    let norm = 1.0 / PI.sqrt();
    nodes
        .iter()
        .zip(&weights)
        .map(|(&x, &w)| w * f(mean + std::f64::consts::SQRT_2 * sd * x))
        .sum::<f64>()
        * norm
}

/// Standard normal density.
pub fn norm_pdf(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * PI).sqrt()
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

// Tail series Phi(x) = phi(x)/(-x) * S(x) for x << 0.
fn tail_series(x: f64) -> f64 {
    let inv2 = 1.0 / (x * x);
    1.0 + inv2
        * (-1.0 + inv2 * (3.0 + inv2 * (-15.0 + inv2 * (105.0 + inv2 * -945.0))))
}

/// log(Phi(x)), stable far into the lower tail via the asymptotic expansion.
pub fn log_norm_cdf(x: f64) -> f64 {
    if x > -13.0 {
        norm_cdf(x).ln()
    } else {
        -0.5 * x * x - (-x).ln() - 0.5 * (2.0 * PI).ln() + tail_series(x).ln()
    }
}

/// Inverse Mills ratio phi(x)/Phi(x), stable for large negative x.
pub fn mills_ratio(x: f64) -> f64 {
    if x > -13.0 {
        norm_pdf(x) / norm_cdf(x)
    } else {
        -x / tail_series(x)
    }
}
