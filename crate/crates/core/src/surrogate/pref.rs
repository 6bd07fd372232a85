//! Latent-utility model over outcome space from pairwise comparisons.
//!
//! A GP prior over utilities `g(y)` at the distinct outcomes seen in
//! comparisons, a probit response likelihood
//! `P(z = 1) = Phi((g(y1) - g(y2)) / (sqrt(2) lambda))`, and a Laplace
//! approximation at the MAP found by damped Newton iterations. Outcomes are
//! standardized before entering the kernel; utilities live on the
//! standardized scale.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::infotheory::binary_entropy;
use crate::quad::{log_norm_cdf, mills_ratio, norm_cdf};
use crate::surrogate::gp::KernelSpec;
use crate::surrogate::Standardizer;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// One pairwise preference observation over raw outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    /// 1 if `y1` was preferred, 2 if `y2`.
    pub z: u8,
}

impl Comparison {
    pub fn new(y1: Vec<f64>, y2: Vec<f64>, z: u8) -> Result<Self> {
        if z != 1 && z != 2 {
            return Err(Error::Parameter(format!("response must be 1 or 2, got {z}")));
        }
        if y1.len() != y2.len() {
            return Err(Error::Parameter("outcome dimension mismatch".into()));
        }
        if y1.iter().any(|v| !v.is_finite()) || y2.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parameter("outcomes must be finite".into()));
        }
        if crate::util::sq_dist(&y1, &y2) < 1e-24 {
            return Err(Error::Parameter("compared outcomes must differ".into()));
        }
        Ok(Self { y1, y2, z })
    }
}

/// Probability of preferring the first of two utilities.
pub fn response_likelihood(g1: f64, g2: f64, lambda: f64) -> f64 {
    assert!(lambda > 0.0, "lambda must be positive");
    norm_cdf((g1 - g2) / (SQRT2 * lambda))
}

/// Pairwise-probit latent-utility model with a Laplace-approximate posterior
/// at the distinct compared outcomes.
#[derive(Debug, Clone)]
pub struct PreferenceModel {
    kernel: KernelSpec,
    lambda: f64,
    standardizer: Standardizer,
    /// Distinct outcomes (standardized coordinates).
    points: Vec<Vec<f64>>,
    /// MAP utilities at `points`.
    map_utilities: DVector<f64>,
    /// Laplace covariance `(K^-1 + W)^-1` at the MAP.
    laplace_cov: DMatrix<f64>,
    k_inv: DMatrix<f64>,
    /// `K^-1 g_hat` (predictive mean weights).
    mean_weights: DVector<f64>,
    /// `K^-1 Sigma K^-1` (predictive variance correction).
    var_correction: DMatrix<f64>,
}

/// Index pair (winner, loser) of a comparison within the point list.
fn comparison_indices(
    points: &mut Vec<Vec<f64>>,
    std_y: Vec<f64>,
) -> usize {
    for (i, p) in points.iter().enumerate() {
        if crate::util::sq_dist(p, &std_y) < 1e-24 {
            return i;
        }
    }
    points.push(std_y);
    points.len() - 1
}

impl PreferenceModel {
    /// Fits the model by Newton iterations on the log posterior until the
    /// gradient norm falls below 1e-6 (cap: 100 iterations). Outcomes are
    /// standardized by `standardizer` when given, otherwise by the running
    /// statistics of the compared outcomes themselves.
    pub fn laplace_fit(
        comparisons: &[Comparison],
        kernel: KernelSpec,
        lambda: f64,
        standardizer: Option<Standardizer>,
    ) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::Parameter("lambda must be positive".into()));
        }
        let standardizer = match standardizer {
            Some(s) => s,
            None => {
                let mut all: Vec<Vec<f64>> = Vec::new();
                for c in comparisons {
                    all.push(c.y1.clone());
                    all.push(c.y2.clone());
                }
                if all.is_empty() {
                    Standardizer::identity(kernel.lengthscales.len())
                } else {
                    Standardizer::fit(&all)
                }
            }
        };

        let mut points: Vec<Vec<f64>> = Vec::new();
        let mut pairs: Vec<(usize, usize)> = Vec::new(); // (winner, loser)
        for c in comparisons {
            let i1 = comparison_indices(&mut points, standardizer.transform(&c.y1));
            let i2 = comparison_indices(&mut points, standardizer.transform(&c.y2));
            if i1 == i2 {
                return Err(Error::Parameter(
                    "comparison collapses to a single point after standardization".into(),
                ));
            }
            pairs.push(if c.z == 1 { (i1, i2) } else { (i2, i1) });
        }
        let n = points.len();
        if n == 0 {
            return Ok(Self {
                kernel,
                lambda,
                standardizer,
                points,
                map_utilities: DVector::zeros(0),
                laplace_cov: DMatrix::zeros(0, 0),
                k_inv: DMatrix::zeros(0, 0),
                mean_weights: DVector::zeros(0),
                var_correction: DMatrix::zeros(0, 0),
            });
        }

        let mut gram = DMatrix::from_fn(n, n, |r, c| kernel.eval(&points[r], &points[c]));
        for i in 0..n {
            gram[(i, i)] += 1e-9;
        }
        let k_chol = Cholesky::new(gram.clone())
            .ok_or_else(|| Error::Numeric("preference kernel matrix not PSD".into()))?;
        let k_inv = k_chol.inverse();

        let scale = 1.0 / (SQRT2 * lambda);
        let log_lik = |g: &DVector<f64>| -> f64 {
            pairs
                .iter()
                .map(|&(w, l)| log_norm_cdf((g[w] - g[l]) * scale))
                .sum()
        };
        let objective = |g: &DVector<f64>| -> f64 {
            log_lik(g) - 0.5 * (&k_inv * g).dot(g)
        };

        let mut g = DVector::zeros(n);
        let mut grad_norm = f64::INFINITY;
        let mut converged = false;
        for _iter in 0..100 {
            // Gradient and likelihood Hessian.
            let mut grad = -(&k_inv * &g);
            let mut w = DMatrix::<f64>::zeros(n, n);
            for &(wi, li) in &pairs {
                let u = (g[wi] - g[li]) * scale;
                let m = mills_ratio(u);
                grad[wi] += m * scale;
                grad[li] -= m * scale;
                let r = (m * (u + m)).max(0.0) * scale * scale;
                w[(wi, wi)] += r;
                w[(li, li)] += r;
                w[(wi, li)] -= r;
                w[(li, wi)] -= r;
            }
            grad_norm = grad.norm();
            if grad_norm <= 1e-6 {
                converged = true;
                break;
            }
            let a = &k_inv + &w;
            let a_chol = Cholesky::new(a.clone())
                .ok_or_else(|| Error::Numeric("Newton system not PSD".into()))?;
            let step = a_chol.solve(&grad);

            // Damped step: halve until the log posterior does not decrease.
            let base = objective(&g);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let cand = &g + t * &step;
                if objective(&cand) >= base - 1e-12 {
                    g = cand;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // Stationary up to line-search resolution.
                converged = grad_norm <= 1e-4;
                break;
            }
        }
        if !converged && grad_norm > 1e-6 {
            return Err(Error::Convergence {
                iterations: 100,
                grad_norm,
            });
        }

        // Laplace covariance at the MAP.
        let mut w = DMatrix::<f64>::zeros(n, n);
        for &(wi, li) in &pairs {
            let u = (g[wi] - g[li]) * scale;
            let m = mills_ratio(u);
            let r = (m * (u + m)).max(0.0) * scale * scale;
            w[(wi, wi)] += r;
            w[(li, li)] += r;
            w[(wi, li)] -= r;
            w[(li, wi)] -= r;
        }
        let a = &k_inv + &w;
        let a_chol = Cholesky::new(a.clone())
            .ok_or_else(|| Error::Numeric("Laplace precision not PSD".into()))?;
        let mut laplace_cov = a_chol.inverse();
        laplace_cov = 0.5 * (&laplace_cov + laplace_cov.transpose());

        let mean_weights = &k_inv * &g;
        let var_correction = &k_inv * &laplace_cov * &k_inv;

        Ok(Self {
            kernel,
            lambda,
            standardizer,
            points,
            map_utilities: g,
            laplace_cov,
            k_inv,
            mean_weights,
            var_correction,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_points(&self) -> usize {
        self.points.len()
    }

    pub fn map_utilities(&self) -> &DVector<f64> {
        &self.map_utilities
    }

    pub fn laplace_cov(&self) -> &DMatrix<f64> {
        &self.laplace_cov
    }

    pub fn standardizer(&self) -> &Standardizer {
        &self.standardizer
    }

    /// MAP utility of a raw outcome that coincides with a stored point
    /// (within tolerance), if any.
    pub fn utility_at_observed(&self, y: &[f64]) -> Option<f64> {
        let sy = self.standardizer.transform(y);
        self.points
            .iter()
            .position(|p| crate::util::sq_dist(p, &sy) < 1e-20)
            .map(|i| self.map_utilities[i])
    }

    fn cross(&self, sy: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.points.len(), |i, _| self.kernel.eval(&self.points[i], sy))
    }

    /// Predictive mean and variance of the latent utility at a raw outcome,
    /// conditioning the GP on the Laplace posterior at the stored points.
    pub fn predict_utility(&self, y: &[f64]) -> (f64, f64) {
        let sy = self.standardizer.transform(y);
        let k_star_star = self.kernel.eval(&sy, &sy);
        if self.points.is_empty() {
            return (0.0, k_star_star);
        }
        let ks = self.cross(&sy);
        let mean = ks.dot(&self.mean_weights);
        let var = k_star_star - ks.dot(&(&self.k_inv * &ks)) + ks.dot(&(&self.var_correction * &ks));
        (mean, var.max(0.0))
    }

    /// Joint predictive (mean, covariance) of the latent utilities at two raw
    /// outcomes.
    pub fn predict_pair(&self, y1: &[f64], y2: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let s1 = self.standardizer.transform(y1);
        let s2 = self.standardizer.transform(y2);
        let prior = DMatrix::from_fn(2, 2, |r, c| {
            let a = if r == 0 { &s1 } else { &s2 };
            let b = if c == 0 { &s1 } else { &s2 };
            self.kernel.eval(a, b)
        });
        if self.points.is_empty() {
            return (DVector::zeros(2), prior);
        }
        let k1 = self.cross(&s1);
        let k2 = self.cross(&s2);
        let mean = DVector::from_vec(vec![k1.dot(&self.mean_weights), k2.dot(&self.mean_weights)]);
        let correct = |a: &DVector<f64>, b: &DVector<f64>| -> f64 {
            -a.dot(&(&self.k_inv * b)) + a.dot(&(&self.var_correction * b))
        };
        let mut cov = prior;
        cov[(0, 0)] = (cov[(0, 0)] + correct(&k1, &k1)).max(0.0);
        cov[(1, 1)] = (cov[(1, 1)] + correct(&k2, &k2)).max(0.0);
        let off = cov[(0, 1)] + correct(&k1, &k2);
        cov[(0, 1)] = off;
        cov[(1, 0)] = off;
        (mean, cov)
    }

    /// Expected information gain about the latent utilities from asking the
    /// decision-maker to compare two raw outcomes:
    /// `H[E_g P(z=1)] - E_g H[P(z=1|g)]`, with the expectation over the
    /// bivariate Laplace predictive. The response depends on the latents
    /// only through `d = g(y1) - g(y2)`, so both expectations reduce to
    /// one-dimensional integrals over `d ~ N(mu_d, var_d)`, evaluated by a
    /// fixed 513-node Simpson rule on +-8 sd (the conditional-entropy bump is
    /// narrower than coarse Hermite rules resolve at small lambda). Bounded
    /// by ln 2.
    pub fn pair_response_ig(&self, y1: &[f64], y2: &[f64]) -> f64 {
        let (mean, cov) = self.predict_pair(y1, y2);
        let mu_d = mean[0] - mean[1];
        let var_d = (cov[(0, 0)] + cov[(1, 1)] - 2.0 * cov[(0, 1)]).max(0.0);
        let scale = 1.0 / (SQRT2 * self.lambda);
        let sd = var_d.sqrt();
        if sd < 1e-12 {
            return 0.0;
        }
        let n = 512usize;
        let lo = mu_d - 8.0 * sd;
        let h = 16.0 * sd / n as f64;
        let inv_norm = 1.0 / (sd * (2.0 * std::f64::consts::PI).sqrt());
        let mut p_marginal = 0.0;
        let mut h_conditional = 0.0;
        for i in 0..=n {
            let d = lo + i as f64 * h;
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            let dev = (d - mu_d) / sd;
            let density = (-0.5 * dev * dev).exp() * inv_norm;
            let p = norm_cdf(d * scale);
            p_marginal += w * density * p;
            h_conditional += w * density * binary_entropy(p);
        }
        p_marginal *= h / 3.0;
        h_conditional *= h / 3.0;
        (binary_entropy(p_marginal.clamp(0.0, 1.0)) - h_conditional).clamp(0.0, 2f64.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::gauss_hermite;
    use rand::Rng;

    fn kernel_2d() -> KernelSpec {
        KernelSpec::isotropic(2, 1.0, 1.0, 1e-6).unwrap()
    }

    #[test]
    fn response_likelihood_cases() {
        assert!((response_likelihood(0.3, 0.3, 0.1) - 0.5).abs() < 1e-15);
        // g1 - g2 = sqrt(2) lambda -> Phi(1).
        let lambda = 0.25;
        let p = response_likelihood(SQRT2 * lambda, 0.0, lambda);
        assert!((p - 0.8413447460685429).abs() < 1e-9);
        // Symmetry.
        let (a, b) = (0.7, -0.2);
        assert!(
            (response_likelihood(a, b, 0.1) + response_likelihood(b, a, 0.1) - 1.0).abs() < 1e-12
        );
        // Shift invariance is exact: only the difference enters.
        let c = 123.456;
        assert_eq!(
            response_likelihood(a, b, 0.1),
            response_likelihood(a + c, b + c, 0.1)
        );
    }

    #[test]
    fn empty_model_is_prior() {
        let model = PreferenceModel::laplace_fit(&[], kernel_2d(), 0.1, None).unwrap();
        assert_eq!(model.n_points(), 0);
        let (mean, var) = model.predict_utility(&[0.4, 0.6]);
        assert_eq!(mean, 0.0);
        assert!((var - 1.0).abs() < 1e-12);
        assert_eq!(model.laplace_cov().nrows(), 0);
    }

    #[test]
    fn single_comparison_orders_utilities() {
        let c = Comparison::new(vec![1.0, 0.0], vec![0.0, 1.0], 1).unwrap();
        let model = PreferenceModel::laplace_fit(&[c], kernel_2d(), 0.1, None).unwrap();
        let u_win = model.utility_at_observed(&[1.0, 0.0]).unwrap();
        let u_lose = model.utility_at_observed(&[0.0, 1.0]).unwrap();
        assert!(u_win > u_lose, "{u_win} !> {u_lose}");
    }

    /// Finite-difference oracle for the log-posterior gradient.
    fn fd_gradient(
        points: &[Vec<f64>],
        pairs: &[(usize, usize)],
        kernel: &KernelSpec,
        lambda: f64,
        g: &DVector<f64>,
    ) -> DVector<f64> {
        let n = points.len();
        let mut gram = DMatrix::from_fn(n, n, |r, c| kernel.eval(&points[r], &points[c]));
        for i in 0..n {
            gram[(i, i)] += 1e-9;
        }
        let k_inv = Cholesky::new(gram).unwrap().inverse();
        let psi = |g: &DVector<f64>| -> f64 {
            let ll: f64 = pairs
                .iter()
                .map(|&(w, l)| log_norm_cdf((g[w] - g[l]) / (SQRT2 * lambda)))
                .sum();
            ll - 0.5 * (&k_inv * g).dot(g)
        };
        let h = 1e-6;
        DVector::from_fn(n, |i, _| {
            let mut up = g.clone();
            up[i] += h;
            let mut dn = g.clone();
            dn[i] -= h;
            (psi(&up) - psi(&dn)) / (2.0 * h)
        })
    }

    #[test]
    fn map_gradient_matches_finite_differences() {
        let mut rng = crate::rng::substream(31, "pref-fd");
        for case in 0..20 {
            let n_outcomes = rng.random_range(3..6);
            let outcomes: Vec<Vec<f64>> = (0..n_outcomes)
                .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let n_comp = rng.random_range(3..10);
            let mut comparisons = Vec::new();
            for _ in 0..n_comp {
                let i = rng.random_range(0..n_outcomes);
                let mut j = rng.random_range(0..n_outcomes);
                while j == i {
                    j = rng.random_range(0..n_outcomes);
                }
                let z = if rng.random_range(0.0..1.0) < 0.5 { 1 } else { 2 };
                comparisons
                    .push(Comparison::new(outcomes[i].clone(), outcomes[j].clone(), z).unwrap());
            }
            let kernel = kernel_2d();
            let lambda = 0.3;
            let model =
                PreferenceModel::laplace_fit(&comparisons, kernel.clone(), lambda, None).unwrap();

            // Rebuild the (points, pairs) indexing the fit used.
            let mut points: Vec<Vec<f64>> = Vec::new();
            let mut pairs = Vec::new();
            for c in &comparisons {
                let i1 = comparison_indices(&mut points, model.standardizer().transform(&c.y1));
                let i2 = comparison_indices(&mut points, model.standardizer().transform(&c.y2));
                pairs.push(if c.z == 1 { (i1, i2) } else { (i2, i1) });
            }

            // At the MAP the analytic gradient vanished to <= 1e-6; the
            // finite-difference gradient must agree relative to unit scale.
            let fd = fd_gradient(&points, &pairs, &kernel, lambda, model.map_utilities());
            let denom = fd.norm().max(1.0);
            assert!(
                fd.norm() / denom < 1e-4,
                "case {case}: FD gradient at MAP has norm {}",
                fd.norm()
            );

            // Stronger check away from the stationary point: analytic vs FD.
            let mut probe = model.map_utilities().clone();
            for i in 0..probe.len() {
                probe[i] += 0.2 * ((i as f64 + 1.0).sin());
            }
            let scale = 1.0 / (SQRT2 * lambda);
            let n = points.len();
            let mut gram = DMatrix::from_fn(n, n, |r, c| kernel.eval(&points[r], &points[c]));
            for i in 0..n {
                gram[(i, i)] += 1e-9;
            }
            let k_inv = Cholesky::new(gram).unwrap().inverse();
            let mut analytic = -(&k_inv * &probe);
            for &(w, l) in &pairs {
                let u = (probe[w] - probe[l]) * scale;
                let m = mills_ratio(u);
                analytic[w] += m * scale;
                analytic[l] -= m * scale;
            }
            let fd = fd_gradient(&points, &pairs, &kernel, lambda, &probe);
            let rel = (&analytic - &fd).norm() / fd.norm().max(1.0);
            assert!(rel < 1e-4, "case {case}: gradient mismatch {rel}");
        }
    }

    #[test]
    fn consistent_wins_raise_predicted_utility() {
        let winner = vec![1.0, 1.0];
        let loser = vec![-1.0, -1.0];
        let other = vec![1.0, -1.0];
        let comparisons: Vec<Comparison> = (0..6)
            .map(|i| {
                if i % 2 == 0 {
                    Comparison::new(winner.clone(), loser.clone(), 1).unwrap()
                } else {
                    Comparison::new(winner.clone(), other.clone(), 1).unwrap()
                }
            })
            .collect();
        let model = PreferenceModel::laplace_fit(&comparisons, kernel_2d(), 0.1, None).unwrap();
        let (mw, _) = model.predict_utility(&winner);
        let (ml, _) = model.predict_utility(&loser);
        assert!(mw > ml);
    }

    #[test]
    fn prediction_decays_to_prior_far_from_data() {
        let c = Comparison::new(vec![0.1, 0.0], vec![0.0, 0.1], 1).unwrap();
        let model = PreferenceModel::laplace_fit(&[c], kernel_2d(), 0.1, None).unwrap();
        let (mean, var) = model.predict_utility(&[600.0, -900.0]);
        assert!(mean.abs() < 1e-9);
        assert!((var - model.kernel.signal_var).abs() < 1e-9);
    }

    #[test]
    fn pair_ig_zero_for_deterministic_latents() {
        // A model with negligible latent variance at the queried outcomes
        // carries no response information regardless of the means.
        let mut comparisons = Vec::new();
        for _ in 0..3 {
            comparisons.push(Comparison::new(vec![1.0, 0.0], vec![0.0, 1.0], 1).unwrap());
        }
        let kernel = KernelSpec::isotropic(2, 1.0, 1e-12, 1e-9).unwrap();
        // signal_var ~ 0 forces the latent to be essentially deterministic.
        let model = PreferenceModel::laplace_fit(&comparisons, kernel, 0.1, None).unwrap();
        let ig = model.pair_response_ig(&[1.0, 0.0], &[0.0, 1.0]);
        assert!(ig < 1e-9, "ig = {ig}");
    }

    #[test]
    fn pair_ig_matches_dense_quadrature_oracle() {
        // Oracle: brute-force MI by dense two-dimensional Gauss-Hermite
        // enumeration over the full bivariate predictive.
        let mut rng = crate::rng::substream(32, "pref-ig-oracle");
        for _ in 0..5 {
            let outcomes: Vec<Vec<f64>> = (0..4)
                .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let mut comparisons = Vec::new();
            for _ in 0..5 {
                let i = rng.random_range(0..4);
                let mut j = rng.random_range(0..4);
                while j == i {
                    j = rng.random_range(0..4);
                }
                comparisons.push(
                    Comparison::new(outcomes[i].clone(), outcomes[j].clone(), 1).unwrap(),
                );
            }
            let model =
                PreferenceModel::laplace_fit(&comparisons, kernel_2d(), 0.2, None).unwrap();
            let y1 = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let y2 = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let got = model.pair_response_ig(&y1, &y2);

            let (mean, cov) = model.predict_pair(&y1, &y2);
            let l = Cholesky::new(cov.clone() + DMatrix::identity(2, 2) * 1e-12)
                .unwrap()
                .unpack();
            let scale = 1.0 / (SQRT2 * model.lambda());
            let n_nodes = 160;
            let (nodes, weights) = gauss_hermite(n_nodes);
            let norm = 1.0 / std::f64::consts::PI;
            let mut p_marg = 0.0;
            let mut h_cond = 0.0;
            for (i, &xi) in nodes.iter().enumerate() {
                for (j, &xj) in nodes.iter().enumerate() {
                    let z0 = SQRT2 * xi;
                    let z1 = SQRT2 * xj;
                    let g1 = mean[0] + l[(0, 0)] * z0;
                    let g2 = mean[1] + l[(1, 0)] * z0 + l[(1, 1)] * z1;
                    let p = norm_cdf((g1 - g2) * scale);
                    let w = weights[i] * weights[j] * norm;
                    p_marg += w * p;
                    h_cond += w * binary_entropy(p);
                }
            }
            let want = binary_entropy(p_marg.clamp(0.0, 1.0)) - h_cond;
            assert!((got - want).abs() < 1e-3, "ig {got} vs oracle {want}");
            assert!((0.0..=2f64.ln() + 1e-12).contains(&got));
        }
    }

    #[test]
    fn noiseless_total_order_is_reproduced_exactly() {
        // Five outcomes with a ground-truth order, >= 20 near-noiseless
        // comparisons covering every adjacent and several skip pairs.
        let outcomes: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64, -(i as f64)]).collect();
        let mut comparisons = Vec::new();
        for rep in 0..2 {
            for i in 0..5usize {
                for j in 0..5usize {
                    if i == j || (i + j + rep) % 2 == 0 {
                        continue;
                    }
                    // Higher index = preferred.
                    let z = if i > j { 1 } else { 2 };
                    comparisons.push(
                        Comparison::new(outcomes[i].clone(), outcomes[j].clone(), z).unwrap(),
                    );
                }
            }
        }
        assert!(comparisons.len() >= 20);
        let model = PreferenceModel::laplace_fit(&comparisons, kernel_2d(), 1e-3, None).unwrap();
        let utilities: Vec<f64> = outcomes
            .iter()
            .map(|y| model.utility_at_observed(y).unwrap())
            .collect();
        for i in 0..4 {
            assert!(
                utilities[i + 1] > utilities[i],
                "order violated at {i}: {utilities:?}"
            );
        }
    }

    #[test]
    fn comparison_validation() {
        assert!(Comparison::new(vec![1.0], vec![1.0], 1).is_err());
        assert!(Comparison::new(vec![1.0], vec![2.0], 3).is_err());
        assert!(Comparison::new(vec![1.0], vec![2.0, 3.0], 1).is_err());
        assert!(Comparison::new(vec![f64::NAN], vec![2.0], 1).is_err());
    }
}
