//! Numerical verification suite: the free-energy decomposition identity, the
//! information-gain equivalence for GP observations, and the confidence-bound
//! inequality. Run by `aifbench verify` and by the acceptance tests.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::infotheory::{gaussian_mi_joint, gaussian_mi_point, verify_efe_decomposition, DiscreteDistribution};
use crate::surrogate::gp::{GpModel, KernelSpec};

/// Outcome of one verification check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub max_error: f64,
    pub detail: String,
}

impl CheckReport {
    pub fn line(&self) -> String {
        format!(
            "[{}] {} (max error {:.3e}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.max_error,
            self.detail
        )
    }
}

/// The two routes to the free-energy score agree to 1e-10 on random exact
/// joints (up to 6 states x 8 outcomes).
pub fn efe_decomposition_check(seed: u64, n_joints: usize) -> CheckReport {
    let mut rng = crate::rng::substream(seed, "verify-efe");
    let mut max_err: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..n_joints {
        let ns = rng.random_range(2..=6);
        let ny = rng.random_range(2..=8);
        let mut joint = DMatrix::from_fn(ns, ny, |_, _| rng.random_range(0.01..1.0f64));
        let total: f64 = joint.iter().sum();
        joint /= total;
        let praw: Vec<f64> = (0..ny).map(|_| rng.random_range(0.05..1.0f64)).collect();
        let pref = DiscreteDistribution::from_probs(&praw).expect("valid preference");
        match verify_efe_decomposition(&joint, &pref) {
            Ok(d) => {
                let err = (d.expectation_form - d.split_form).abs();
                max_err = max_err.max(err);
                if err > 1e-10 {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    CheckReport {
        name: format!("free-energy decomposition ({n_joints} random joints)"),
        passed: failures == 0,
        max_error: max_err,
        detail: format!("tolerance 1e-10, {failures} failures"),
    }
}

/// Desk-scale information-gain equivalence: on a finite grid, the expected
/// KL between the posterior and prior over the full grid vector (averaged
/// over simulated observations at a subset) equals the closed-form joint MI
/// restricted to the subset.
pub fn gp_information_equivalence_check(
    seed: u64,
    n_instances: usize,
    n_draws: usize,
) -> CheckReport {
    let mut rng = crate::rng::substream(seed, "verify-lemma");
    let mut max_z: f64 = 0.0;
    let mut failures = 0usize;
    for _ in 0..n_instances {
        // Random model over a grid of up to 6 well-separated points.
        let g = rng.random_range(2..=6usize);
        let mut grid: Vec<Vec<f64>> = Vec::new();
        while grid.len() < g {
            let p = vec![rng.random_range(0.0..1.0)];
            if grid.iter().all(|q| (q[0] - p[0]).abs() > 0.06) {
                grid.push(p);
            }
        }
        let noise_var = rng.random_range(0.05..0.5);
        let kernel = KernelSpec::isotropic(
            1,
            rng.random_range(0.2..0.6),
            rng.random_range(0.3..1.0),
            noise_var,
        )
        .expect("valid kernel");
        let n_train = rng.random_range(0..3usize);
        let train_x: Vec<Vec<f64>> = (0..n_train)
            .map(|_| vec![rng.random_range(0.0..1.0)])
            .collect();
        let train_y: Vec<Vec<f64>> = train_x
            .iter()
            .map(|p| vec![(4.0 * p[0]).sin() * 0.5])
            .collect();
        let model = GpModel::fit(&train_x, &train_y, vec![kernel]).expect("fit");

        // Prior over the full grid vector.
        let joint = model.predict_joint(&grid).expect("joint");
        let mu0 = joint.means[0].clone();
        let mut sigma0 = joint.covs[0].clone();
        for i in 0..g {
            sigma0[(i, i)] += 1e-10;
        }

        // Random nonempty observation subset.
        let subset_size = rng.random_range(1..=g);
        let mut subset: Vec<usize> = (0..g).collect();
        for i in (1..g).rev() {
            let j = rng.random_range(0..=i);
            subset.swap(i, j);
        }
        subset.truncate(subset_size);
        subset.sort_unstable();

        let sigma_x = DMatrix::from_fn(subset_size, subset_size, |r, c| {
            sigma0[(subset[r], subset[c])]
        });
        let mi = gaussian_mi_joint(&sigma_x, noise_var).expect("mi");

        // Posterior pieces: S = Sigma_X + noise I, B = Sigma0[:, X].
        let b = DMatrix::from_fn(g, subset_size, |r, c| sigma0[(r, subset[c])]);
        let s = &sigma_x + DMatrix::identity(subset_size, subset_size) * noise_var;
        let s_chol = Cholesky::new(s.clone()).expect("S PSD");
        let gain = &b * s_chol.inverse(); // g x |X|
        let sigma1 = &sigma0 - &gain * b.transpose();
        let prior_chol = Cholesky::new(sigma0.clone()).expect("prior PSD");
        let prior_inv = prior_chol.inverse();
        let post_chol =
            Cholesky::new(&sigma1 + DMatrix::identity(g, g) * 1e-12).expect("post PSD");
        let log_det_ratio = 2.0
            * ((0..g).map(|i| prior_chol.l_dirty()[(i, i)].ln()).sum::<f64>()
                - (0..g).map(|i| post_chol.l_dirty()[(i, i)].ln()).sum::<f64>());
        let const_part =
            0.5 * ((&prior_inv * &sigma1).trace() - g as f64 + log_det_ratio);
        // Quadratic form matrix on the residual r = Y - mu0_X.
        let q = gain.transpose() * &prior_inv * &gain;

        // Y ~ N(mu0_X, Sigma_X + noise I).
        let y_chol = s_chol.l();
        let mu0_x = DVector::from_fn(subset_size, |i, _| mu0[subset[i]]);
        let mut kls = Vec::with_capacity(n_draws);
        for _ in 0..n_draws {
            let z = DVector::from_fn(subset_size, |_, _| {
                <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
            });
            let r = &y_chol * z;
            let _ = &mu0_x; // Y - mu0_X = r by construction
            let quad = (&q * &r).dot(&r);
            kls.push(const_part + 0.5 * quad);
        }
        let mean: f64 = kls.iter().sum::<f64>() / n_draws as f64;
        let var: f64 =
            kls.iter().map(|k| (k - mean) * (k - mean)).sum::<f64>() / (n_draws - 1) as f64;
        let stderr = (var / n_draws as f64).sqrt().max(1e-14);
        let z_score = (mean - mi).abs() / stderr;
        max_z = max_z.max(z_score);
        if z_score > 3.0 {
            failures += 1;
        }
    }
    CheckReport {
        name: format!(
            "GP information-gain equivalence ({n_instances} instances, {n_draws} draws)"
        ),
        passed: failures == 0,
        max_error: max_z,
        detail: format!("max |z| over instances (limit 3), {failures} failures"),
    }
}

/// With kernel values at most 1 and `beta = 0.5 ln(1 + 1/noise_var)`, the
/// point information gain dominates `beta * posterior_var` over a 1e-3 grid.
pub fn ucb_bound_check() -> CheckReport {
    let mut worst: f64 = 0.0;
    let mut failures = 0usize;
    for noise_var in [0.1f64, 0.25, 1.0, 4.0] {
        let beta = 0.5 * (1.0 + 1.0 / noise_var).ln();
        for i in 0..=1000 {
            let var = i as f64 * 1e-3;
            let gap = gaussian_mi_point(var, noise_var) - beta * var;
            worst = worst.min(gap);
            if gap < -1e-15 {
                failures += 1;
            }
        }
    }
    CheckReport {
        name: "confidence-bound inequality (1e-3 sweep, 4 noise levels)".into(),
        passed: failures == 0,
        max_error: (-worst).max(0.0),
        detail: format!("most negative gap {worst:.3e}, {failures} failures"),
    }
}

/// Runs all verification checks.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    vec![
        efe_decomposition_check(seed, 100),
        gp_information_equivalence_check(seed, 20, 10_000),
        ucb_bound_check(),
    ]
}
