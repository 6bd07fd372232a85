//! Exact Bayesian posterior over a finite hypothesis grid with Poisson
//! observation likelihoods.
//!
//! Hypotheses parameterize an environment rate field `R_theta(x)`; a count
//! observed at `x` over a window `dt` multiplies each hypothesis weight by
//! `Poisson(y; R_theta(x) dt)`. All weight arithmetic stays in log space,
//! normalized by logsumexp, so long update sequences and deep Poisson tails
//! never underflow the posterior itself.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::infotheory::{
    poisson_entropy, poisson_log_pmf, poisson_truncation_cap, DiscreteDistribution,
};
use crate::util::{argmax, logsumexp};

/// A latent environment parameterization.
#[derive(Debug, Clone, PartialEq)]
pub enum Hypothesis {
    /// Unknown source location (field units).
    SourceLocation([f64; 2]),
    /// Unknown wind vector (field units / s).
    Wind([f64; 2]),
    /// Unknown activity mask over six potential sources.
    ActiveMask([bool; 6]),
}

impl Hypothesis {
    /// Numeric parameter vector (mask entries as 0/1).
    pub fn params(&self) -> Vec<f64> {
        match self {
            Hypothesis::SourceLocation(p) | Hypothesis::Wind(p) => p.to_vec(),
            Hypothesis::ActiveMask(m) => m.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// Rate evaluator shared by all hypotheses of a grid.
pub type RateFn = Arc<dyn Fn(&Hypothesis, [f64; 2]) -> f64 + Send + Sync>;

/// A finite set of distinct hypotheses together with their rate evaluator.
#[derive(Clone)]
pub struct HypothesisGrid {
    hypotheses: Vec<Hypothesis>,
    rate_fn: RateFn,
}

impl std::fmt::Debug for HypothesisGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HypothesisGrid")
            .field("len", &self.hypotheses.len())
            .finish()
    }
}

impl HypothesisGrid {
    pub fn new(hypotheses: Vec<Hypothesis>, rate_fn: RateFn) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::Parameter("empty hypothesis grid".into()));
        }
        for i in 0..hypotheses.len() {
            for j in (i + 1)..hypotheses.len() {
                if hypotheses[i] == hypotheses[j] {
                    return Err(Error::Parameter(format!(
                        "duplicate hypotheses at {i} and {j}"
                    )));
                }
            }
        }
        Ok(Self { hypotheses, rate_fn })
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn hypothesis(&self, i: usize) -> &Hypothesis {
        &self.hypotheses[i]
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    /// Rates of every hypothesis at a query location.
    pub fn rates_at(&self, x: [f64; 2]) -> Vec<f64> {
        self.hypotheses.iter().map(|h| (self.rate_fn)(h, x)).collect()
    }
}

/// Rate evaluations cached per (candidate, hypothesis) pair. Acquisition
/// sweeps revisit the same candidate set every iteration and the Bessel
/// evaluation dominates their cost.
#[derive(Debug, Clone)]
pub struct RateTable {
    rates: Vec<Vec<f64>>, // [candidate][hypothesis]
}

impl RateTable {
    pub fn build(grid: &HypothesisGrid, candidates: &[[f64; 2]]) -> Self {
        Self {
            rates: candidates.iter().map(|&x| grid.rates_at(x)).collect(),
        }
    }

    pub fn rates(&self, candidate: usize) -> &[f64] {
        &self.rates[candidate]
    }

    pub fn n_candidates(&self) -> usize {
        self.rates.len()
    }
}

/// Point summary of a posterior: the MAP hypothesis and, for grids over
/// continuous parameters, the posterior mean.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEstimate {
    pub map_index: usize,
    pub map_params: Vec<f64>,
    pub mean: Option<Vec<f64>>,
}

/// Immutable weighted hypothesis set; updates return a new posterior.
#[derive(Debug, Clone)]
pub struct DiscretePosterior {
    grid: Arc<HypothesisGrid>,
    log_weights: Vec<f64>,
}

/// Log of the upper tail `P(K >= cap)` of a Poisson, stable for both
/// saturation-dominated and deep-tail regimes.
pub fn poisson_log_survival(lambda: f64, cap: u64) -> f64 {
    if cap == 0 {
        return 0.0;
    }
    if lambda == 0.0 {
        return f64::NEG_INFINITY;
    }
    // Linear route when the tail carries appreciable mass.
    if lambda < 700.0 {
        let mut p = (-lambda).exp();
        let mut below = p;
        for k in 1..cap {
            p *= lambda / k as f64;
            below += p;
        }
        let surv = 1.0 - below;
        if surv > 1e-10 {
            return surv.ln();
        }
    }
    // Log-space tail sum otherwise.
    let hi = poisson_truncation_cap(lambda).max(cap + 200);
    let mut terms = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for k in cap..=hi {
        let lp = poisson_log_pmf(lambda, k);
        best = best.max(lp);
        terms.push(lp);
        if lp < best - 46.0 && k > cap + 4 {
            break;
        }
    }
    logsumexp(&terms)
}

/// Log-likelihood of a saturating sensor's report: counts below the cap are
/// exact Poisson observations; a report at the cap means "count >= cap".
pub fn censored_log_likelihood(lambda: f64, reported: u64, cap: u64) -> f64 {
    if reported < cap {
        poisson_log_pmf(lambda, reported)
    } else {
        poisson_log_survival(lambda, cap)
    }
}

/// Poisson pmf table `P(K = k)` for `k = 0..=cap(lambda)` via the stable
/// multiplicative recurrence (exact for the rates this crate produces; the
/// log route takes over for extreme rates).
fn poisson_pmf_table(lambda: f64) -> Vec<f64> {
    let cap = poisson_truncation_cap(lambda) as usize;
    let mut table = vec![0.0; cap + 1];
    if lambda == 0.0 {
        table[0] = 1.0;
        return table;
    }
    if lambda < 700.0 {
        let mut p = (-lambda).exp();
        table[0] = p;
        for k in 1..=cap {
            p *= lambda / k as f64;
            table[k] = p;
        }
    } else {
        for (k, slot) in table.iter_mut().enumerate() {
            *slot = poisson_log_pmf(lambda, k as u64).exp();
        }
    }
    table
}

impl DiscretePosterior {
    /// Uniform prior over the grid.
    pub fn init_uniform(grid: Arc<HypothesisGrid>) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Parameter("empty hypothesis grid".into()));
        }
        let n = grid.len();
        let lw = -(n as f64).ln();
        Ok(Self {
            grid,
            log_weights: vec![lw; n],
        })
    }

    pub fn grid(&self) -> &Arc<HypothesisGrid> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_weights.is_empty()
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    pub fn entropy(&self) -> f64 {
        self.log_weights
            .iter()
            .filter(|w| w.is_finite())
            .map(|&w| -w.exp() * w)
            .sum::<f64>()
            .max(0.0)
    }

    /// Bayes update on one observation: count `y` at `x` over window `dt`.
    /// Fails with a degenerate-evidence error when every hypothesis assigns
    /// the observation zero likelihood.
    pub fn update(&self, x: [f64; 2], y: u64, dt: f64) -> Result<Self> {
        let rates = self.grid.rates_at(x);
        self.update_with_rates(&rates, y, dt)
    }

    /// Update with precomputed hypothesis rates at the query.
    pub fn update_with_rates(&self, rates: &[f64], y: u64, dt: f64) -> Result<Self> {
        self.reweight(rates, dt, |lambda| poisson_log_pmf(lambda, y), y)
    }

    /// Update on a saturating sensor's report: a value below `cap` is an
    /// exact count, a value at `cap` means the count reached the cap.
    pub fn update_censored_with_rates(
        &self,
        rates: &[f64],
        reported: u64,
        cap: u64,
        dt: f64,
    ) -> Result<Self> {
        self.reweight(
            rates,
            dt,
            |lambda| censored_log_likelihood(lambda, reported, cap),
            reported,
        )
    }

    fn reweight<F: Fn(f64) -> f64>(
        &self,
        rates: &[f64],
        dt: f64,
        log_lik: F,
        y: u64,
    ) -> Result<Self> {
        assert_eq!(rates.len(), self.len());
        let mut lw: Vec<f64> = self
            .log_weights
            .iter()
            .zip(rates)
            .map(|(&w, &r)| w + log_lik(r * dt))
            .collect();
        let z = logsumexp(&lw);
        if z == f64::NEG_INFINITY {
            return Err(Error::Degenerate(format!(
                "observation y={y} has zero likelihood under every hypothesis"
            )));
        }
        for w in &mut lw {
            *w -= z;
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            log_weights: lw,
        })
    }

    /// Posterior predictive over counts at `x`: the weight-mixture of the
    /// per-hypothesis Poisson pmfs on the union of their truncated supports.
    pub fn predictive_pmf(&self, x: [f64; 2], dt: f64) -> DiscreteDistribution {
        let rates = self.grid.rates_at(x);
        self.predictive_with_rates(&rates, dt)
    }

    pub fn predictive_with_rates(&self, rates: &[f64], dt: f64) -> DiscreteDistribution {
        let support = rates
            .iter()
            .map(|&r| poisson_truncation_cap(r * dt) as usize)
            .max()
            .unwrap_or(0)
            + 1;
        let mut mix = vec![0.0; support];
        for (i, &r) in rates.iter().enumerate() {
            let w = self.log_weights[i].exp();
            if w == 0.0 {
                continue;
            }
            for (k, p) in poisson_pmf_table(r * dt).iter().enumerate() {
                mix[k] += w * p;
            }
        }
        DiscreteDistribution::from_probs(&mix).expect("mixture has positive mass")
    }

    /// Expected information gain of querying `x`: the entropy of the
    /// predictive mixture minus the weighted per-hypothesis Poisson
    /// entropies. Clamped at zero.
    pub fn eig(&self, x: [f64; 2], dt: f64) -> f64 {
        let rates = self.grid.rates_at(x);
        self.eig_with_rates(&rates, dt)
    }

    pub fn eig_with_rates(&self, rates: &[f64], dt: f64) -> f64 {
        let mixture = self.predictive_with_rates(rates, dt);
        let mix_entropy = crate::infotheory::entropy(&mixture);
        let cond_entropy: f64 = rates
            .iter()
            .zip(&self.log_weights)
            .filter(|(_, lw)| lw.is_finite())
            .map(|(&r, &lw)| lw.exp() * poisson_entropy(r * dt))
            .sum();
        (mix_entropy - cond_entropy).max(0.0)
    }

    /// Probability the next count at `x` exceeds `y_max` under the posterior
    /// predictive.
    pub fn violation_probability(&self, x: [f64; 2], dt: f64, y_max: u64) -> f64 {
        let rates = self.grid.rates_at(x);
        self.violation_with_rates(&rates, dt, y_max)
    }

    pub fn violation_with_rates(&self, rates: &[f64], dt: f64, y_max: u64) -> f64 {
        let mut total = 0.0;
        for (i, &r) in rates.iter().enumerate() {
            let w = self.log_weights[i].exp();
            if w == 0.0 {
                continue;
            }
            let lambda = r * dt;
            if lambda == 0.0 {
                continue;
            }
            let table = poisson_pmf_table(lambda);
            let below: f64 = table.iter().take(y_max as usize + 1).sum();
            total += w * (1.0 - below).clamp(0.0, 1.0);
        }
        total.clamp(0.0, 1.0)
    }

    /// MAP hypothesis plus the posterior mean where the grid is over a
    /// continuous parameter (location or wind); mask grids report MAP only.
    pub fn point_estimate(&self) -> PointEstimate {
        let map_index = argmax(&self.log_weights);
        let map_params = self.grid.hypothesis(map_index).params();
        let continuous = self
            .grid
            .hypotheses()
            .iter()
            .all(|h| !matches!(h, Hypothesis::ActiveMask(_)));
        let mean = if continuous {
            let dim = map_params.len();
            let mut m = vec![0.0; dim];
            for (h, &lw) in self.grid.hypotheses().iter().zip(&self.log_weights) {
                let w = lw.exp();
                if w == 0.0 {
                    continue;
                }
                for (acc, v) in m.iter_mut().zip(h.params()) {
                    *acc += w * v;
                }
            }
            Some(m)
        } else {
            None
        };
        PointEstimate {
            map_index,
            map_params,
            mean,
        }
    }
}
