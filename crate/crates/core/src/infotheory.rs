//! Discrete and Gaussian information-theoretic primitives.
//!
//! Everything the surrogates and acquisition rules consume lives here:
//! normalized discrete distributions in log space, the Boltzmann operator
//! turning energies into preferences, entropy/KL, Poisson pmf and entropy,
//! the closed-form Gaussian mutual-information terms, and a numerical
//! verifier for the free-energy decomposition
//! `G = -I(s;(x,y)) - E[log p(y)]`.

use nalgebra::{Cholesky, DMatrix};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::util::logsumexp;

/// A normalized distribution over a finite support, stored as log weights.
/// Zero-probability atoms carry `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    log_weights: Vec<f64>,
}

impl DiscreteDistribution {
    /// Normalizes arbitrary (finite or `-inf`) log weights.
    pub fn from_log_weights(log_weights: Vec<f64>) -> Result<Self> {
        if log_weights.is_empty() {
            return Err(Error::Parameter("empty support".into()));
        }
        if log_weights.iter().any(|w| w.is_nan() || *w == f64::INFINITY) {
            return Err(Error::Parameter("log weights must be finite or -inf".into()));
        }
        let z = logsumexp(&log_weights);
        if z == f64::NEG_INFINITY {
            return Err(Error::Degenerate("all weights are zero".into()));
        }
        Ok(Self {
            log_weights: log_weights.into_iter().map(|w| w - z).collect(),
        })
    }

    /// Builds from linear-space probabilities (renormalizing).
    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        if probs.iter().any(|p| *p < 0.0) {
            return Err(Error::Parameter("negative probability".into()));
        }
        Self::from_log_weights(probs.iter().map(|p| p.ln()).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Self::from_log_weights(vec![0.0; n]).expect("nonempty uniform")
    }

    /// All mass on one atom.
    pub fn delta(n: usize, atom: usize) -> Self {
        assert!(atom < n);
        let mut lw = vec![f64::NEG_INFINITY; n];
        lw[atom] = 0.0;
        Self::from_log_weights(lw).expect("valid delta")
    }

    pub fn support_size(&self) -> usize {
        self.log_weights.len()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.log_weights[i].exp()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }
}

/// An energy function over an outcome grid together with a temperature.
/// `+inf` entries are admitted and map to zero probability.
#[derive(Debug, Clone)]
pub struct EnergyTable {
    values: Vec<f64>,
    temperature: f64,
}

impl EnergyTable {
    pub fn new(values: Vec<f64>, temperature: f64) -> Result<Self> {
        if !(temperature > 0.0) {
            return Err(Error::Parameter(format!(
                "temperature must be positive, got {temperature}"
            )));
        }
        if values.is_empty() {
            return Err(Error::Parameter("empty energy table".into()));
        }
        if values.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::Parameter("energies must be > -inf and not NaN".into()));
        }
        Ok(Self { values, temperature })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }
}

/// Boltzmann operator: `p_i proportional to exp(-h_i / beta)`. The argmin of
/// the energy is the argmax of the output, with identical lowest-index
/// tie-breaking.
pub fn boltzmann(energy: &EnergyTable) -> Result<DiscreteDistribution> {
    if energy.values.iter().all(|v| *v == f64::INFINITY) {
        return Err(Error::Degenerate("all energies are +inf".into()));
    }
    let lw: Vec<f64> = energy
        .values
        .iter()
        .map(|&h| {
            if h == f64::INFINITY {
                f64::NEG_INFINITY
            } else {
                -h / energy.temperature
            }
        })
        .collect();
    DiscreteDistribution::from_log_weights(lw)
}

/// Shannon entropy in nats, with the `0 ln 0 = 0` convention.
pub fn entropy(p: &DiscreteDistribution) -> f64 {
    let h: f64 = p
        .log_weights
        .iter()
        .filter(|lw| lw.is_finite())
        .map(|&lw| -lw.exp() * lw)
        .sum();
    h.max(0.0)
}

/// Entropy of a two-point distribution with success probability `p`.
pub fn binary_entropy(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p) || p.is_nan());
    let mut h = 0.0;
    if p > 0.0 {
        h -= p * p.ln();
    }
    if p < 1.0 {
        h -= (1.0 - p) * (1.0 - p).ln();
    }
    h.max(0.0)
}

/// KL divergence `D(p || q)` in nats. Requires matching supports and
/// absolute continuity (`q_i = 0` implies `p_i = 0`).
pub fn kl(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<f64> {
    if p.support_size() != q.support_size() {
        return Err(Error::Domain("support size mismatch".into()));
    }
    let mut sum = 0.0;
    for (lp, lq) in p.log_weights.iter().zip(&q.log_weights) {
        if *lp == f64::NEG_INFINITY {
            continue;
        }
        if *lq == f64::NEG_INFINITY {
            return Err(Error::Domain(
                "absolute continuity violated: p > 0 where q = 0".into(),
            ));
        }
        sum += lp.exp() * (lp - lq);
    }
    Ok(sum.max(0.0))
}

/// Log of the Poisson pmf, computed via log-gamma so large counts never
/// overflow a factorial.
pub fn poisson_log_pmf(rate: f64, k: u64) -> f64 {
    assert!(rate >= 0.0, "negative Poisson rate");
    if rate == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let kf = k as f64;
    kf * rate.ln() - rate - ln_gamma(kf + 1.0)
}

/// Poisson pmf `P(K = k)` for mean `rate`.
pub fn poisson_pmf(rate: f64, k: u64) -> f64 {
    poisson_log_pmf(rate, k).exp()
}

/// Upper support bound such that the Poisson tail mass beyond it is below
/// 1e-12: `rate + 12 sqrt(rate) + 30`.
pub fn poisson_truncation_cap(rate: f64) -> u64 {
    assert!(rate >= 0.0);
    (rate + 12.0 * rate.sqrt() + 30.0).ceil() as u64
}

/// Entropy of a Poisson distribution in nats, by truncated summation until
/// the cumulative mass reaches `1 - 1e-12` (capped by
/// [`poisson_truncation_cap`]).
pub fn poisson_entropy(rate: f64) -> f64 {
    assert!(rate >= 0.0, "negative Poisson rate");
    if rate == 0.0 {
        return 0.0;
    }
    let cap = poisson_truncation_cap(rate);
    let mut h = 0.0;
    let mut mass = 0.0;
    for k in 0..=cap {
        let lp = poisson_log_pmf(rate, k);
        let p = lp.exp();
        h -= p * lp;
        mass += p;
        if mass >= 1.0 - 1e-12 {
            break;
        }
    }
    h.max(0.0)
}

/// Gaussian information gain of one observation with noise variance
/// `noise_var` about a latent with posterior variance `posterior_var`:
/// `0.5 ln(1 + posterior_var / noise_var)`.
pub fn gaussian_mi_point(posterior_var: f64, noise_var: f64) -> f64 {
    assert!(noise_var > 0.0, "noise variance must be positive");
    let v = posterior_var.max(0.0);
    0.5 * (1.0 + v / noise_var).ln()
}

/// Joint Gaussian information gain `0.5 ln det(I + C / noise_var)` for a
/// posterior covariance `C`, via Cholesky factorization. A symmetric jitter
/// of 1e-9 is added once if the first factorization fails; a second failure
/// is a numeric error.
pub fn gaussian_mi_joint(posterior_cov: &DMatrix<f64>, noise_var: f64) -> Result<f64> {
    if !(noise_var > 0.0) {
        return Err(Error::Parameter("noise variance must be positive".into()));
    }
    if !posterior_cov.is_square() {
        return Err(Error::Domain("covariance must be square".into()));
    }
    let n = posterior_cov.nrows();
    let sym = 0.5 * (posterior_cov + posterior_cov.transpose());
    let build = |jitter: f64| -> Option<f64> {
        let mut m = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] += (sym[(i, j)] + if i == j { jitter } else { 0.0 }) / noise_var;
            }
        }
        let l = Cholesky::new(m)?.unpack();
        let mut mi = 0.0;
        for i in 0..n {
            let pivot = l[(i, i)];
            if !(pivot > 0.0) || !pivot.is_finite() {
                return None;
            }
            mi += pivot.ln();
        }
        Some(mi)
    };
    let mi = build(0.0)
        .or_else(|| build(1e-9))
        .ok_or_else(|| Error::Numeric("covariance not PSD after 1e-9 jitter".into()))?;
    Ok(mi.max(0.0))
}

/// The free-energy objective computed by two independent routes on an exact
/// discrete joint, plus its epistemic/pragmatic split.
#[derive(Debug, Clone, Copy)]
pub struct EfeDecomposition {
    /// Expectation-form route: `-E_q(s,y)[ln q(s|y) - ln q(s)] - E_q(y)[ln p(y)]`.
    pub expectation_form: f64,
    /// Split route: `-(H(s) + H(y) - H(s,y)) - E_q(y)[ln p(y)]`.
    pub split_form: f64,
    /// Mutual information `I_q(s; y)` from the split route.
    pub epistemic_value: f64,
    /// `E_q(y)[ln p(y)]` under the preference distribution.
    pub expected_log_preference: f64,
}

/// Computes the free energy of a candidate's exact joint `q(s, y | x)`
/// (rows: states `s`, columns: outcomes `y`) under preferences `p(y)` by two
/// algebraically equal but computationally distinct routes. The two values
/// must agree to 1e-10 on any normalized joint.
pub fn verify_efe_decomposition(
    joint: &DMatrix<f64>,
    preference: &DiscreteDistribution,
) -> Result<EfeDecomposition> {
    let (ns, ny) = joint.shape();
    if ns == 0 || ny == 0 {
        return Err(Error::Domain("empty joint".into()));
    }
    if preference.support_size() != ny {
        return Err(Error::Domain("preference support must match outcomes".into()));
    }
    if joint.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::Domain("joint entries must be finite and nonnegative".into()));
    }
    let total: f64 = joint.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("joint not normalized: sums to {total}")));
    }

    let qs: Vec<f64> = (0..ns).map(|s| joint.row(s).iter().sum()).collect();
    let qy: Vec<f64> = (0..ny).map(|y| joint.column(y).iter().sum()).collect();

    for y in 0..ny {
        if qy[y] > 0.0 && preference.log_weights()[y] == f64::NEG_INFINITY {
            return Err(Error::Domain(
                "preference assigns zero probability to a reachable outcome".into(),
            ));
        }
    }

    let expected_log_preference: f64 = (0..ny)
        .filter(|&y| qy[y] > 0.0)
        .map(|y| qy[y] * preference.log_weights()[y])
        .sum();

    // Route (i): pointwise expectation of the log posterior ratio.
    let mut info_expectation = 0.0;
    for s in 0..ns {
        for y in 0..ny {
            let j = joint[(s, y)];
            if j > 0.0 {
                info_expectation += j * ((j / qy[y]).ln() - qs[s].ln());
            }
        }
    }
    let expectation_form = -info_expectation - expected_log_preference;

    // Route (ii): mutual information from marginal and joint entropies.
    let ent = |ps: &[f64]| -> f64 {
        ps.iter()
            .filter(|p| **p > 0.0)
            .map(|&p| -p * p.ln())
            .sum()
    };
    let h_joint: f64 = joint
        .iter()
        .filter(|p| **p > 0.0)
        .map(|&p| -p * p.ln())
        .sum();
    let epistemic_value = (ent(&qs) + ent(&qy) - h_joint).max(0.0);
    let split_form = -epistemic_value - expected_log_preference;

    Ok(EfeDecomposition {
        expectation_form,
        split_form,
        epistemic_value,
        expected_log_preference,
    })
}

/// Magnitude of the surrogate-vs-truth posterior mismatch dropped when the
/// decomposition treats the surrogate as exact:
/// `E_q(y)[ D_KL(q(s|y) || p(s|y)) ]` for a reference joint `p`. Reported for
/// diagnostics only; the decomposition contract does not constrain it.
pub fn posterior_mismatch(q_joint: &DMatrix<f64>, p_joint: &DMatrix<f64>) -> Result<f64> {
    if q_joint.shape() != p_joint.shape() {
        return Err(Error::Domain("joint shape mismatch".into()));
    }
    let (ns, ny) = q_joint.shape();
    let qy: Vec<f64> = (0..ny).map(|y| q_joint.column(y).iter().sum()).collect();
    let py: Vec<f64> = (0..ny).map(|y| p_joint.column(y).iter().sum()).collect();
    let mut total = 0.0;
    for y in 0..ny {
        if qy[y] == 0.0 {
            continue;
        }
        let mut term = 0.0;
        for s in 0..ns {
            let qc = q_joint[(s, y)] / qy[y];
            if qc > 0.0 {
                if p_joint[(s, y)] == 0.0 || py[y] == 0.0 {
                    return Err(Error::Domain(
                        "reference joint not absolutely continuous".into(),
                    ));
                }
                term += qc * (qc / (p_joint[(s, y)] / py[y])).ln();
            }
        }
        total += qy[y] * term.max(0.0);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::{argmax, argmin};
    use rand::Rng;

    // Independent direct-sum oracle for entropy and KL.
    fn entropy_oracle(probs: &[f64]) -> f64 {
        probs.iter().filter(|p| **p > 0.0).map(|&p| -p * p.ln()).sum()
    }

    fn kl_oracle(p: &[f64], q: &[f64]) -> f64 {
        p.iter()
            .zip(q)
            .filter(|(pi, _)| **pi > 0.0)
            .map(|(&pi, &qi)| pi * (pi / qi).ln())
            .sum()
    }

    // Poisson pmf via the multiplicative recurrence, independent of log-gamma.
    fn poisson_pmf_oracle(rate: f64, k: u64) -> f64 {
        let mut p = (-rate).exp();
        for i in 1..=k {
            p *= rate / i as f64;
        }
        p
    }

    #[test]
    fn boltzmann_uniform_energies() {
        let d = boltzmann(&EnergyTable::new(vec![0.0, 0.0, 0.0], 1.0).unwrap()).unwrap();
        for p in d.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn boltzmann_ln2_energy() {
        let d = boltzmann(&EnergyTable::new(vec![0.0, 2f64.ln()], 1.0).unwrap()).unwrap();
        assert!((d.prob(0) - 2.0 / 3.0).abs() < 1e-14);
        assert!((d.prob(1) - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn boltzmann_high_temperature_is_uniform() {
        let d = boltzmann(&EnergyTable::new(vec![1.0, 2.0, 3.0], 1e6).unwrap()).unwrap();
        for p in d.probs() {
            assert!((p - 1.0 / 3.0).abs() < 1e-5);
        }
    }

    #[test]
    fn boltzmann_errors() {
        assert!(matches!(
            EnergyTable::new(vec![1.0], 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            EnergyTable::new(vec![1.0], -2.0),
            Err(Error::Parameter(_))
        ));
        let all_inf = EnergyTable::new(vec![f64::INFINITY, f64::INFINITY], 1.0).unwrap();
        assert!(matches!(boltzmann(&all_inf), Err(Error::Degenerate(_))));
    }

    #[test]
    fn boltzmann_argmin_energy_is_argmax_prob() {
        let mut rng = crate::rng::substream(11, "boltzmann-argmax");
        for _ in 0..100 {
            let n = rng.random_range(2..12);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(-4.0..4.0)).collect();
            let beta = rng.random_range(0.05..20.0);
            let d = boltzmann(&EnergyTable::new(values.clone(), beta).unwrap()).unwrap();
            assert_eq!(argmin(&values), argmax(&d.probs()));
        }
    }

    #[test]
    fn boltzmann_entropy_nondecreasing_in_temperature() {
        let mut rng = crate::rng::substream(12, "boltzmann-entropy");
        for _ in 0..100 {
            let n = rng.random_range(2..10);
            let values: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let betas = [0.05, 0.2, 1.0, 5.0, 50.0, 1e4];
            let mut last = -1.0;
            for beta in betas {
                let h = entropy(
                    &boltzmann(&EnergyTable::new(values.clone(), beta).unwrap()).unwrap(),
                );
                assert!(h >= last - 1e-12, "entropy decreased: {h} < {last}");
                last = h;
            }
        }
    }

    #[test]
    fn entropy_delta_and_uniform() {
        assert_eq!(entropy(&DiscreteDistribution::delta(5, 2)), 0.0);
        let h = entropy(&DiscreteDistribution::uniform(4));
        assert!((h - 4f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn entropy_matches_direct_sum_oracle() {
        let d = DiscreteDistribution::from_probs(&[0.25, 0.75]).unwrap();
        assert!((entropy(&d) - entropy_oracle(&[0.25, 0.75])).abs() < 1e-14);
        let mut rng = crate::rng::substream(13, "entropy-oracle");
        for _ in 0..50 {
            let n = rng.random_range(2..15);
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0f64)).collect();
            let total: f64 = raw.iter().sum();
            let probs: Vec<f64> = raw.iter().map(|p| p / total).collect();
            let d = DiscreteDistribution::from_probs(&probs).unwrap();
            assert!((entropy(&d) - entropy_oracle(&d.probs())).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_cases() {
        let u = DiscreteDistribution::uniform(4);
        assert_eq!(kl(&u, &u).unwrap(), 0.0);

        let p = DiscreteDistribution::from_probs(&[1.0, 0.0]).unwrap();
        let q = DiscreteDistribution::from_probs(&[0.5, 0.5]).unwrap();
        assert!((kl(&p, &q).unwrap() - 2f64.ln()).abs() < 1e-14);

        // Absolute-continuity violation.
        assert!(matches!(kl(&q, &p), Err(Error::Domain(_))));

        let mut rng = crate::rng::substream(14, "kl-oracle");
        for _ in 0..50 {
            let n = rng.random_range(2..10);
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0f64)).collect();
                let total: f64 = raw.iter().sum();
                raw.into_iter().map(|p| p / total).collect::<Vec<_>>()
            };
            let pp = mk(&mut rng);
            let qq = mk(&mut rng);
            let p = DiscreteDistribution::from_probs(&pp).unwrap();
            let q = DiscreteDistribution::from_probs(&qq).unwrap();
            assert!((kl(&p, &q).unwrap() - kl_oracle(&p.probs(), &q.probs())).abs() < 1e-12);
        }
    }

    #[test]
    fn poisson_pmf_edges_and_oracle() {
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        assert_eq!(poisson_pmf(0.0, 3), 0.0);
        assert!((poisson_pmf(2.5, 4) - poisson_pmf_oracle(2.5, 4)).abs() < 1e-12);
        for (rate, k) in [(0.3f64, 0u64), (1.0, 5), (7.5, 20), (60.0, 45), (300.0, 310)] {
            let a = poisson_pmf(rate, k);
            let b = poisson_pmf_oracle(rate, k);
            assert!((a - b).abs() <= 1e-12 * b.max(1.0), "rate={rate} k={k}");
        }
        // pmf stays a probability.
        assert!(poisson_pmf(1e4, 10_000) <= 1.0);
    }

    #[test]
    fn poisson_entropy_oracle_and_monotonicity() {
        assert_eq!(poisson_entropy(0.0), 0.0);
        // Long-truncation oracle at rate 1: direct sum to k = 60.
        let brute: f64 = (0..=60u64)
            .map(|k| {
                let p = poisson_pmf_oracle(1.0, k);
                if p > 0.0 {
                    -p * p.ln()
                } else {
                    0.0
                }
            })
            .sum();
        assert!((poisson_entropy(1.0) - brute).abs() < 1e-10);

        let sweep = [0.5, 1.0, 2.0, 5.0];
        let hs: Vec<f64> = sweep.iter().map(|&r| poisson_entropy(r)).collect();
        for w in hs.windows(2) {
            assert!(w[1] >= w[0]);
        }
    }

    #[test]
    fn gaussian_mi_point_cases() {
        assert_eq!(gaussian_mi_point(0.0, 1.0), 0.0);
        assert!((gaussian_mi_point(1.0, 1.0) - 0.5 * 2f64.ln()).abs() < 1e-15);
        let c = DMatrix::from_element(1, 1, 0.37);
        assert!(
            (gaussian_mi_point(0.37, 0.8) - gaussian_mi_joint(&c, 0.8).unwrap()).abs() < 1e-14
        );
    }

    #[test]
    fn gaussian_mi_joint_cases() {
        let z = DMatrix::<f64>::zeros(3, 3);
        assert_eq!(gaussian_mi_joint(&z, 0.5).unwrap(), 0.0);

        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.2, 0.9, 1.7]));
        let joint = gaussian_mi_joint(&d, 0.4).unwrap();
        let pointwise: f64 = [0.2, 0.9, 1.7]
            .iter()
            .map(|&v| gaussian_mi_point(v, 0.4))
            .sum();
        assert!((joint - pointwise).abs() < 1e-12);

        let neg = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![-2.0, 1.0]));
        assert!(matches!(gaussian_mi_joint(&neg, 1.0), Err(Error::Numeric(_))));
    }

    /// Monte-Carlo oracle: the joint MI equals E_Y[KL(posterior || prior)]
    /// for the Gaussian observation model Y = f + eps.
    #[test]
    fn gaussian_mi_joint_matches_mc_kl_oracle() {
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = crate::rng::substream(15, "mi-mc");
        // Random 3x3 PSD matrix A A^T.
        let a = DMatrix::<f64>::from_fn(3, 3, |_, _| rng.random_range(-1.0..1.0));
        let cov = &a * a.transpose();
        let noise_var = 0.5;
        let mi = gaussian_mi_joint(&cov, noise_var).unwrap();

        // KL(post || prior) where prior = N(0, cov), posterior conditions on
        // y = f + eps. Posterior covariance is constant; the mean term varies.
        let n = 3;
        let s = &cov + DMatrix::identity(n, n) * noise_var;
        let s_inv = s.clone().try_inverse().unwrap();
        let gain = &cov * &s_inv; // K S^-1
        let post_cov = &cov - &gain * &cov;
        let prior_chol = Cholesky::new(cov.clone() + DMatrix::identity(n, n) * 1e-12).unwrap();
        let prior_inv = prior_chol.inverse();
        let log_det_prior = 2.0 * (0..n).map(|i| prior_chol.l()[(i, i)].ln()).sum::<f64>();
        let post_chol = Cholesky::new(post_cov.clone() + DMatrix::identity(n, n) * 1e-12).unwrap();
        let log_det_post = 2.0 * (0..n).map(|i| post_chol.l()[(i, i)].ln()).sum::<f64>();
        let trace_term = (&prior_inv * &post_cov).trace();
        let const_part = 0.5 * (trace_term - n as f64 + log_det_prior - log_det_post);

        let f_chol = prior_chol.l();
        let draws = 20_000;
        let mut kls = Vec::with_capacity(draws);
        for _ in 0..draws {
            let f = &f_chol
                * nalgebra::DVector::from_fn(n, |_, _| {
                    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                });
            let y = &f
                + nalgebra::DVector::from_fn(n, |_, _| {
                    noise_var.sqrt()
                        * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                });
            let mean = &gain * &y;
            let quad = (&prior_inv * &mean).dot(&mean);
            kls.push(const_part + 0.5 * quad);
        }
        let mc_mean: f64 = kls.iter().sum::<f64>() / draws as f64;
        let var: f64 =
            kls.iter().map(|k| (k - mc_mean) * (k - mc_mean)).sum::<f64>() / (draws - 1) as f64;
        let stderr = (var / draws as f64).sqrt();
        assert!(
            (mc_mean - mi).abs() <= 3.0 * stderr,
            "MC {mc_mean} vs MI {mi} (stderr {stderr})"
        );
    }

    fn random_joint(rng: &mut rand_chacha::ChaCha8Rng, ns: usize, ny: usize) -> DMatrix<f64> {
        let mut m = DMatrix::from_fn(ns, ny, |_, _| rng.random_range(0.01..1.0f64));
        let total: f64 = m.iter().sum();
        m /= total;
        m
    }

    #[test]
    fn efe_independent_joint_has_zero_epistemic_value() {
        // q(s, y) = q(s) q(y).
        let qs = [0.3, 0.7];
        let qy = [0.2, 0.5, 0.3];
        let joint = DMatrix::from_fn(2, 3, |s, y| qs[s] * qy[y]);
        let pref = DiscreteDistribution::from_probs(&[0.5, 0.25, 0.25]).unwrap();
        let d = verify_efe_decomposition(&joint, &pref).unwrap();
        assert!(d.epistemic_value.abs() < 1e-12);
        assert!((d.split_form + d.expected_log_preference).abs() < 1e-12);
        assert!((d.expectation_form - d.split_form).abs() < 1e-12);
    }

    #[test]
    fn efe_uniform_preference_reduces_to_mi_ranking() {
        // With uniform p(y) the pragmatic term is the constant ln|Y|, so the
        // EFE-minimizing candidate is the MI-maximizing one.
        let mut rng = crate::rng::substream(16, "efe-uniform");
        let pref = DiscreteDistribution::uniform(5);
        let joints: Vec<DMatrix<f64>> = (0..6).map(|_| random_joint(&mut rng, 4, 5)).collect();
        let mut g = Vec::new();
        let mut mi = Vec::new();
        for j in &joints {
            let d = verify_efe_decomposition(j, &pref).unwrap();
            assert!((d.expected_log_preference - -(5f64.ln())).abs() < 1e-12);
            g.push(d.split_form);
            mi.push(d.epistemic_value);
        }
        assert_eq!(argmin(&g), argmax(&mi));
    }

    #[test]
    fn efe_decomposition_routes_agree_on_random_joints() {
        let mut rng = crate::rng::substream(17, "efe-random");
        for _ in 0..100 {
            let ns = rng.random_range(2..=6);
            let ny = rng.random_range(2..=8);
            let joint = random_joint(&mut rng, ns, ny);
            let praw: Vec<f64> = (0..ny).map(|_| rng.random_range(0.05..1.0f64)).collect();
            let pref = DiscreteDistribution::from_probs(&praw).unwrap();
            let d = verify_efe_decomposition(&joint, &pref).unwrap();
            assert!(
                (d.expectation_form - d.split_form).abs() <= 1e-10,
                "routes disagree: {} vs {}",
                d.expectation_form,
                d.split_form
            );
        }
    }

    #[test]
    fn efe_rejects_unnormalized_joint() {
        let joint = DMatrix::from_element(2, 2, 0.3);
        let pref = DiscreteDistribution::uniform(2);
        assert!(matches!(
            verify_efe_decomposition(&joint, &pref),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn posterior_mismatch_zero_for_identical_joints() {
        let mut rng = crate::rng::substream(18, "mismatch");
        let q = random_joint(&mut rng, 3, 4);
        assert!(posterior_mismatch(&q, &q).unwrap().abs() < 1e-14);
        let p = random_joint(&mut rng, 3, 4);
        assert!(posterior_mismatch(&q, &p).unwrap() > 0.0);
    }

    #[test]
    fn ucb_bound_holds_on_grid_sweep() {
        // With kernel values <= 1 (so posterior variance in [0,1]) and
        // beta_ucb = 0.5 ln(1 + 1/noise), the point MI dominates
        // beta_ucb * posterior_var everywhere on a 1e-3 sweep.
        for noise_var in [0.25f64, 1.0, 4.0] {
            let beta_ucb = 0.5 * (1.0 + 1.0 / noise_var).ln();
            for i in 0..=1000 {
                let var = i as f64 * 1e-3;
                let mi = gaussian_mi_point(var, noise_var);
                assert!(
                    mi >= beta_ucb * var - 1e-15,
                    "violated at var={var}, noise={noise_var}"
                );
            }
        }
    }
}
