//! Exact Gaussian-process regression with independent outputs.
//!
//! Zero-mean prior, squared-exponential kernel with per-dimension
//! lengthscales, one kernel per output. Fitting factors each output's gram
//! matrix once; predictions, joint covariances, posterior samples, and the
//! mutual-information terms all reuse the factor. Refits are from scratch.
//! Callers standardize inputs/outputs before fitting (the harness keeps
//! inputs in the unit cube and standardizes outputs by running statistics).

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::infotheory::{gaussian_mi_joint, gaussian_mi_point};

/// Squared-exponential kernel with noise.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub lengthscales: Vec<f64>,
    pub signal_var: f64,
    pub noise_var: f64,
}

impl KernelSpec {
    pub fn new(lengthscales: Vec<f64>, signal_var: f64, noise_var: f64) -> Result<Self> {
        if lengthscales.is_empty() || lengthscales.iter().any(|l| !(*l > 0.0)) {
            return Err(Error::Parameter("lengthscales must be positive".into()));
        }
        if !(signal_var > 0.0) || !(noise_var > 0.0) {
            return Err(Error::Parameter(
                "signal and noise variances must be positive".into(),
            ));
        }
        Ok(Self {
            lengthscales,
            signal_var,
            noise_var,
        })
    }

    /// Isotropic kernel for `dim` input dimensions.
    pub fn isotropic(
        dim: usize,
        lengthscale: f64,
        signal_var: f64,
        noise_var: f64,
    ) -> Result<Self> {
        Self::new(vec![lengthscale; dim], signal_var, noise_var)
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.lengthscales.len());
        let mut d2 = 0.0;
        for ((x, y), l) in a.iter().zip(b).zip(&self.lengthscales) {
            let d = (x - y) / l;
            d2 += d * d;
        }
        self.signal_var * (-0.5 * d2).exp()
    }

    fn scaled_lengthscales(&self, factor: f64) -> Self {
        Self {
            lengthscales: self.lengthscales.iter().map(|l| l * factor).collect(),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone)]
struct OutputState {
    /// Lower factor of `K + noise_var I`.
    chol_l: DMatrix<f64>,
    /// `(K + noise_var I)^-1 y`.
    alpha: DVector<f64>,
    train_y: DVector<f64>,
}

/// Independent-output exact GP.
#[derive(Debug, Clone)]
pub struct GpModel {
    dim: usize,
    train_x: Vec<Vec<f64>>,
    kernels: Vec<KernelSpec>,
    outputs: Vec<OutputState>,
}

fn chol_with_jitter(mut k: DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    let n = k.nrows();
    for jitter in [0.0, 1e-9, 1e-6] {
        if jitter > 0.0 {
            for i in 0..n {
                k[(i, i)] += jitter;
            }
        }
        if let Some(c) = Cholesky::new(k.clone()) {
            let ok = (0..n).all(|i| {
                let p = c.l_dirty()[(i, i)];
                p.is_finite() && p > 0.0
            });
            if ok {
                return Ok(c);
            }
        }
    }
    Err(Error::Numeric(
        "gram matrix singular after 1e-9 and 1e-6 jitter".into(),
    ))
}

impl GpModel {
    /// Fits one GP per output column of `y`. Zero training points yield the
    /// prior model.
    pub fn fit(x: &[Vec<f64>], y: &[Vec<f64>], kernels: Vec<KernelSpec>) -> Result<Self> {
        if kernels.is_empty() {
            return Err(Error::Parameter("at least one output kernel required".into()));
        }
        if x.len() != y.len() {
            return Err(Error::Parameter("x/y length mismatch".into()));
        }
        let dim = kernels[0].lengthscales.len();
        if kernels.iter().any(|k| k.lengthscales.len() != dim) {
            return Err(Error::Parameter("kernel dimension mismatch".into()));
        }
        for (i, xi) in x.iter().enumerate() {
            if xi.len() != dim {
                return Err(Error::Parameter(format!("input {i} has wrong dimension")));
            }
            if y[i].len() != kernels.len() {
                return Err(Error::Parameter(format!("output {i} has wrong dimension")));
            }
        }

        let n = x.len();
        let mut outputs = Vec::with_capacity(kernels.len());
        for (j, kernel) in kernels.iter().enumerate() {
            if n == 0 {
                outputs.push(OutputState {
                    chol_l: DMatrix::zeros(0, 0),
                    alpha: DVector::zeros(0),
                    train_y: DVector::zeros(0),
                });
                continue;
            }
            let mut gram = DMatrix::from_fn(n, n, |r, c| kernel.eval(&x[r], &x[c]));
            for i in 0..n {
                gram[(i, i)] += kernel.noise_var;
            }
            let chol = chol_with_jitter(gram)?;
            let train_y = DVector::from_fn(n, |i, _| y[i][j]);
            let alpha = chol.solve(&train_y);
            outputs.push(OutputState {
                chol_l: chol.unpack(),
                alpha,
                train_y,
            });
        }
        Ok(Self {
            dim,
            train_x: x.to_vec(),
            kernels,
            outputs,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_outputs(&self) -> usize {
        self.kernels.len()
    }

    pub fn n_train(&self) -> usize {
        self.train_x.len()
    }

    pub fn kernels(&self) -> &[KernelSpec] {
        &self.kernels
    }

    fn cross_vector(&self, kernel: &KernelSpec, x: &[f64]) -> DVector<f64> {
        DVector::from_fn(self.n_train(), |i, _| kernel.eval(&self.train_x[i], x))
    }

    /// Predictive mean and variance per output at one input.
    pub fn predict(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        assert_eq!(x.len(), self.dim);
        let mut means = Vec::with_capacity(self.n_outputs());
        let mut vars = Vec::with_capacity(self.n_outputs());
        for (kernel, state) in self.kernels.iter().zip(&self.outputs) {
            if self.n_train() == 0 {
                means.push(0.0);
                vars.push(kernel.signal_var);
                continue;
            }
            let ks = self.cross_vector(kernel, x);
            let mean = ks.dot(&state.alpha);
            let v = state
                .chol_l
                .solve_lower_triangular(&ks)
                .expect("triangular solve");
            let var = (kernel.signal_var - v.norm_squared()).max(0.0);
            means.push(mean);
            vars.push(var);
        }
        (means, vars)
    }

    /// Joint posterior over several inputs: per-output mean vectors and full
    /// covariance matrices (symmetrized).
    pub fn predict_joint(&self, xs: &[Vec<f64>]) -> Result<JointPrediction> {
        if xs.is_empty() {
            return Err(Error::Parameter(
                "predict_joint needs at least one input".into(),
            ));
        }
        let m = xs.len();
        let mut means = Vec::with_capacity(self.n_outputs());
        let mut covs = Vec::with_capacity(self.n_outputs());
        for (kernel, state) in self.kernels.iter().zip(&self.outputs) {
            let prior = DMatrix::from_fn(m, m, |r, c| kernel.eval(&xs[r], &xs[c]));
            if self.n_train() == 0 {
                means.push(DVector::zeros(m));
                covs.push(prior);
                continue;
            }
            let cross = DMatrix::from_fn(self.n_train(), m, |i, j| {
                kernel.eval(&self.train_x[i], &xs[j])
            });
            let v = state
                .chol_l
                .solve_lower_triangular(&cross)
                .expect("triangular solve");
            let mean = cross.transpose() * &state.alpha;
            let mut cov = prior - v.transpose() * &v;
            cov = 0.5 * (&cov + cov.transpose());
            means.push(mean);
            covs.push(cov);
        }
        Ok(JointPrediction { means, covs })
    }

    /// Draws `n` joint posterior samples at `xs`, deterministically from
    /// `seed`. Shape: `[sample][point][output]`.
    pub fn sample_posterior(
        &self,
        xs: &[Vec<f64>],
        n: usize,
        seed: u64,
    ) -> Result<Vec<Vec<Vec<f64>>>> {
        if n == 0 {
            return Err(Error::Parameter("sample count must be >= 1".into()));
        }
        let joint = self.predict_joint(xs)?;
        let m = xs.len();
        let mut factors = Vec::with_capacity(self.n_outputs());
        for cov in &joint.covs {
            factors.push(sampling_factor(cov)?);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples = Vec::with_capacity(n);
        for _ in 0..n {
            let mut sample = vec![vec![0.0; self.n_outputs()]; m];
            for (j, factor) in factors.iter().enumerate() {
                let z = DVector::from_fn(m, |_, _| {
                    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)
                });
                let draw = &joint.means[j] + factor * z;
                for p in 0..m {
                    sample[p][j] = draw[p];
                }
            }
            samples.push(sample);
        }
        Ok(samples)
    }

    /// Information gain of one observation at `x` about the latent values
    /// there, summed over outputs.
    pub fn mi_query(&self, x: &[f64]) -> f64 {
        let (_, vars) = self.predict(x);
        vars.iter()
            .zip(&self.kernels)
            .map(|(&v, k)| gaussian_mi_point(v, k.noise_var))
            .sum()
    }

    /// Information gain of jointly observing two inputs, summed over outputs.
    pub fn mi_pair(&self, x1: &[f64], x2: &[f64]) -> Result<f64> {
        let joint = self.predict_joint(&[x1.to_vec(), x2.to_vec()])?;
        let mut total = 0.0;
        for (cov, kernel) in joint.covs.iter().zip(&self.kernels) {
            total += gaussian_mi_joint(cov, kernel.noise_var)?;
        }
        Ok(total)
    }

    /// Sum over outputs of the exact log marginal likelihood.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let n = self.n_train() as f64;
        if self.n_train() == 0 {
            return 0.0;
        }
        self.outputs
            .iter()
            .map(|state| {
                let data_fit = -0.5 * state.train_y.dot(&state.alpha);
                let log_det: f64 = (0..state.chol_l.nrows())
                    .map(|i| state.chol_l[(i, i)].ln())
                    .sum();
                data_fit - log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln()
            })
            .sum()
    }
}

/// Joint posterior at a set of inputs.
#[derive(Debug, Clone)]
pub struct JointPrediction {
    /// Per-output posterior mean at each input.
    pub means: Vec<DVector<f64>>,
    /// Per-output posterior covariance across the inputs.
    pub covs: Vec<DMatrix<f64>>,
}

/// Cholesky factor of a covariance for sampling, with an escalating jitter
/// ladder that absorbs rank deficiency from duplicated or nearly-noiseless
/// inputs.
fn sampling_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = cov.nrows();
    for jitter in [0.0, 1e-12, 1e-10, 1e-8] {
        let mut m = cov.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(c) = Cholesky::new(m) {
            let l = c.unpack();
            if (0..n).all(|i| l[(i, i)].is_finite() && l[(i, i)] >= 0.0) {
                return Ok(l);
            }
        }
    }
    Err(Error::Numeric(
        "posterior covariance not factorizable for sampling".into(),
    ))
}

/// Joint grid search over a shared lengthscale factor in {0.5, 1, 2},
/// selecting the refit with the highest total log marginal likelihood.
/// Guards against gross misfit of the fixed per-task hyperparameters.
pub fn refine_lengthscales(
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    base: &[KernelSpec],
) -> Result<Vec<KernelSpec>> {
    let mut best: Option<(f64, Vec<KernelSpec>)> = None;
    for factor in [0.5, 1.0, 2.0] {
        let kernels: Vec<KernelSpec> = base
            .iter()
            .map(|k| k.scaled_lengthscales(factor))
            .collect();
        let model = GpModel::fit(x, y, kernels.clone())?;
        let lml = model.log_marginal_likelihood();
        let better = match &best {
            None => true,
            Some((b, _)) => lml > *b,
        };
        if better {
            best = Some((lml, kernels));
        }
    }
    Ok(best.expect("nonempty factor grid").1)
}
