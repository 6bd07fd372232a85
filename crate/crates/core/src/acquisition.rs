//! Acquisition rules: the curiosity-weighted free-energy score, its three
//! task instantiations, the baselines, and candidate generation.
//!
//! Every selector scores a finite candidate set and returns the argmax with
//! the full score table for logging. Ties always resolve to the lowest
//! index, independent of evaluation order.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::coverage::CoverageTracker;
use crate::error::{Error, Result};
use crate::infotheory::poisson_truncation_cap;
use crate::rng::derive_seed;
use crate::surrogate::discrete::{DiscretePosterior, HypothesisGrid, RateTable};
use crate::surrogate::gp::GpModel;
use crate::surrogate::pref::PreferenceModel;
use crate::surrogate::Standardizer;
use crate::util::argmax;

/// Scores of one candidate: the epistemic term, the pragmatic term, and the
/// combined acquisition value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreRow {
    pub index: usize,
    pub epistemic: f64,
    pub pragmatic: f64,
    pub score: f64,
}

/// A chosen candidate plus the full score table.
#[derive(Debug, Clone)]
pub struct Selection {
    pub index: usize,
    pub rows: Vec<ScoreRow>,
}

impl Selection {
    pub fn chosen(&self) -> Option<&ScoreRow> {
        self.rows.iter().find(|r| r.index == self.index)
    }

    fn from_scores(rows: Vec<ScoreRow>) -> Self {
        let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
        Selection {
            index: argmax(&scores),
            rows,
        }
    }
}

/// The curiosity-weighted score `beta * epistemic - pragmatic_energy`.
pub fn efe_score(epistemic: f64, pragmatic_energy: f64, beta: f64) -> f64 {
    debug_assert!(beta >= 0.0);
    beta * epistemic - pragmatic_energy
}

/// Per-run caches for constrained-system-identification sweeps: hypothesis
/// rates, plain and sensor-censored Poisson entropies, and saturation
/// probabilities per (candidate, hypothesis) pair. The candidate set is the
/// fixed measurement grid, so these never change within a run.
///
/// The curiosity rule previews outcomes through the saturating sensor: a
/// report at the threshold means only "the count reached the threshold", so
/// candidates whose outcome saturates under every plausible hypothesis carry
/// almost no information and stop competing on the epistemic term. The pure
/// information-gain baseline previews the raw count instead (a standard
/// experimental-design criterion, blind to the sensor limit).
pub struct CsiScorer {
    candidates: Vec<[f64; 2]>,
    rates: RateTable,
    /// Entropy of the uncensored Poisson at `rate * dt`.
    plain_entropy: Vec<Vec<f64>>,
    /// Entropy of the sensor-censored count (tail absorbed at `y_max`).
    censored_entropy: Vec<Vec<f64>>,
    /// `P(count > y_max)` per (candidate, hypothesis): the violation law.
    exceed: Vec<Vec<f64>>,
    /// `P(count >= y_max)` per (candidate, hypothesis): the censor atom.
    saturate: Vec<Vec<f64>>,
    dt: f64,
    y_max: u64,
}

impl CsiScorer {
    pub fn new(grid: &HypothesisGrid, candidates: Vec<[f64; 2]>, dt: f64, y_max: u64) -> Self {
        let rates = RateTable::build(grid, &candidates);
        let mut plain_entropy = Vec::with_capacity(candidates.len());
        let mut censored_entropy = Vec::with_capacity(candidates.len());
        let mut exceed = Vec::with_capacity(candidates.len());
        let mut saturate = Vec::with_capacity(candidates.len());
        for c in 0..candidates.len() {
            let row = rates.rates(c);
            let mut pe = Vec::with_capacity(row.len());
            let mut ce = Vec::with_capacity(row.len());
            let mut ex = Vec::with_capacity(row.len());
            let mut sa = Vec::with_capacity(row.len());
            for &r in row {
                let lambda = r * dt;
                pe.push(crate::infotheory::poisson_entropy(lambda));
                let table = censored_pmf_table(lambda, y_max);
                ce.push(
                    table
                        .iter()
                        .filter(|p| **p > 0.0)
                        .map(|&p| -p * p.ln())
                        .sum::<f64>()
                        .max(0.0),
                );
                sa.push(table[y_max as usize]);
                ex.push(poisson_tail(lambda, y_max + 1));
            }
            plain_entropy.push(pe);
            censored_entropy.push(ce);
            exceed.push(ex);
            saturate.push(sa);
        }
        Self {
            candidates,
            rates,
            plain_entropy,
            censored_entropy,
            exceed,
            saturate,
            dt,
            y_max,
        }
    }

    pub fn candidates(&self) -> &[[f64; 2]] {
        &self.candidates
    }

    pub fn n_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn rates(&self, candidate: usize) -> &[f64] {
        self.rates.rates(candidate)
    }

    pub fn y_max(&self) -> u64 {
        self.y_max
    }

    /// Expected information gain of the raw count at a candidate (sensor
    /// limit ignored), via the cached rates and per-hypothesis entropies.
    pub fn eig_plain(&self, post: &DiscretePosterior, candidate: usize) -> f64 {
        let rates = self.rates.rates(candidate);
        let weights: Vec<f64> = post.log_weights().iter().map(|w| w.exp()).collect();
        let support = rates
            .iter()
            .zip(&weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(&r, _)| poisson_truncation_cap(r * self.dt) as usize)
            .max()
            .unwrap_or(0)
            + 1;
        let mut mix = vec![0.0f64; support];
        let mut cond_entropy = 0.0;
        for (i, (&r, &w)) in rates.iter().zip(&weights).enumerate() {
            if w <= 0.0 {
                continue;
            }
            cond_entropy += w * self.plain_entropy[candidate][i];
            accumulate_pmf(&mut mix, r * self.dt, w, None);
        }
        let mix_entropy: f64 = mix
            .iter()
            .filter(|p| **p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        (mix_entropy - cond_entropy).max(0.0)
    }

    /// Expected information gain of the sensor's (censored) report.
    pub fn eig_censored(&self, post: &DiscretePosterior, candidate: usize) -> f64 {
        let rates = self.rates.rates(candidate);
        let weights: Vec<f64> = post.log_weights().iter().map(|w| w.exp()).collect();
        let mut mix = vec![0.0f64; self.y_max as usize + 1];
        let mut cond_entropy = 0.0;
        for (i, (&r, &w)) in rates.iter().zip(&weights).enumerate() {
            if w <= 0.0 {
                continue;
            }
            cond_entropy += w * self.censored_entropy[candidate][i];
            accumulate_pmf(&mut mix, r * self.dt, w, Some(self.y_max));
            mix[self.y_max as usize] += w * self.saturate[candidate][i];
        }
        let mix_entropy: f64 = mix
            .iter()
            .filter(|p| **p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        (mix_entropy - cond_entropy).max(0.0)
    }

    /// Posterior probability that the raw count at a candidate exceeds the
    /// saturation threshold.
    pub fn violation(&self, post: &DiscretePosterior, candidate: usize) -> f64 {
        let mut total = 0.0;
        for (s, lw) in self.exceed[candidate].iter().zip(post.log_weights()) {
            if lw.is_finite() {
                total += lw.exp() * s;
            }
        }
        total.clamp(0.0, 1.0)
    }

    /// Full score table under the free-energy rule (censored preview).
    pub fn score_all(&self, post: &DiscretePosterior, beta: f64) -> Vec<ScoreRow> {
        (0..self.n_candidates())
            .map(|i| {
                let epistemic = self.eig_censored(post, i);
                let pragmatic = self.violation(post, i);
                ScoreRow {
                    index: i,
                    epistemic,
                    pragmatic,
                    score: efe_score(epistemic, pragmatic, beta),
                }
            })
            .collect()
    }
}

/// Adds `w * pmf(k; lambda)` into `mix[k]`, either over the truncated raw
/// support or over `0..cap` when censoring (the caller owns the cap atom).
fn accumulate_pmf(mix: &mut [f64], lambda: f64, w: f64, censor_at: Option<u64>) {
    if censor_at == Some(0) {
        return; // everything saturates; no sub-cap mass
    }
    if lambda == 0.0 {
        mix[0] += w;
        return;
    }
    let raw_cap = poisson_truncation_cap(lambda) as usize;
    let upper = match censor_at {
        Some(c) => raw_cap.min(c as usize - 1),
        None => raw_cap,
    };
    if lambda >= 700.0 {
        for (k, slot) in mix.iter_mut().enumerate().take(upper + 1) {
            *slot += w * crate::infotheory::poisson_pmf(lambda, k as u64);
        }
        return;
    }
    let mut p = (-lambda).exp();
    mix[0] += w * p;
    for (k, slot) in mix.iter_mut().enumerate().take(upper + 1).skip(1) {
        p *= lambda / k as f64;
        *slot += w * p;
    }
}

/// `P(count >= cap)` in linear space.
fn poisson_tail(lambda: f64, cap: u64) -> f64 {
    if cap == 0 {
        return 1.0;
    }
    if lambda == 0.0 {
        return 0.0;
    }
    if lambda >= 700.0 {
        let below: f64 = (0..cap)
            .map(|k| crate::infotheory::poisson_pmf(lambda, k))
            .sum();
        return (1.0 - below).clamp(0.0, 1.0);
    }
    let mut p = (-lambda).exp();
    let mut below = p;
    for k in 1..cap {
        p *= lambda / k as f64;
        below += p;
    }
    (1.0 - below).clamp(0.0, 1.0)
}

/// Censored count pmf on `0..=y_max`: exact Poisson below the cap, the tail
/// mass absorbed at the cap.
fn censored_pmf_table(lambda: f64, y_max: u64) -> Vec<f64> {
    let mut table = vec![0.0; y_max as usize + 1];
    if y_max > 0 {
        accumulate_pmf(&mut table[..y_max as usize], lambda, 1.0, Some(y_max));
    }
    table[y_max as usize] = poisson_tail(lambda, y_max);
    table
}

/// Constrained system identification: maximize
/// `beta * EIG(x) - P(y > y_max | x)`.
pub fn select_csi(post: &DiscretePosterior, scorer: &CsiScorer, beta: f64) -> Selection {
    Selection::from_scores(scorer.score_all(post, beta))
}

/// Greedy baseline: minimize the violation probability alone.
pub fn select_greedy_csi(post: &DiscretePosterior, scorer: &CsiScorer) -> Selection {
    let rows: Vec<ScoreRow> = (0..scorer.n_candidates())
        .map(|i| {
            let pragmatic = scorer.violation(post, i);
            ScoreRow {
                index: i,
                epistemic: 0.0,
                pragmatic,
                score: -pragmatic,
            }
        })
        .collect();
    Selection::from_scores(rows)
}

/// Pure information-gain baseline (raw-count preview, blind to saturation).
pub fn select_eig_csi(post: &DiscretePosterior, scorer: &CsiScorer) -> Selection {
    let rows: Vec<ScoreRow> = (0..scorer.n_candidates())
        .map(|i| {
            let epistemic = scorer.eig_plain(post, i);
            ScoreRow {
                index: i,
                epistemic,
                pragmatic: 0.0,
                score: epistemic,
            }
        })
        .collect();
    Selection::from_scores(rows)
}

/// Targeted active search: maximize
/// `beta * I(f_x; y) + E[coverage gain of the sampled outcome]`.
/// Outcome samples are drawn per candidate from the GP posterior
/// (standardized space) and mapped back through `out_std` before they meet
/// the tracker. Deterministic per `seed`.
pub fn select_tas(
    gp: &GpModel,
    tracker: &CoverageTracker,
    candidates: &[Vec<f64>],
    beta: f64,
    n_mc: usize,
    seed: u64,
    out_std: &Standardizer,
) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::Parameter("empty candidate set".into()));
    }
    let mut rows = Vec::with_capacity(candidates.len());
    for (i, x) in candidates.iter().enumerate() {
        let mi = gp.mi_query(x);
        let samples_std =
            gp.sample_posterior(&[x.clone()], n_mc, derive_seed(seed, "tas-mc", i as u64))?;
        let samples: Vec<Vec<f64>> = samples_std
            .iter()
            .map(|s| out_std.inverse(&s[0]))
            .collect();
        let gain = tracker.expected_gain(&samples)?;
        rows.push(ScoreRow {
            index: i,
            epistemic: mi,
            pragmatic: gain,
            score: beta * mi + gain,
        });
    }
    Ok(Selection::from_scores(rows))
}

/// Greedy coverage baseline: expected outcome-space gain alone (the beta = 0
/// reduction of the full rule, sharing its predictive sampler).
pub fn select_greedy_tas(
    gp: &GpModel,
    tracker: &CoverageTracker,
    candidates: &[Vec<f64>],
    n_mc: usize,
    seed: u64,
    out_std: &Standardizer,
) -> Result<Selection> {
    select_tas(gp, tracker, candidates, 0.0, n_mc, seed, out_std)
}

/// Input-space coverage baseline: incremental coverage of the candidate
/// itself in the (unit-cube) input tracker. Deterministic, no sampling.
pub fn select_eig_tas(
    param_tracker: &CoverageTracker,
    candidates: &[Vec<f64>],
) -> Result<Selection> {
    if candidates.is_empty() {
        return Err(Error::Parameter("empty candidate set".into()));
    }
    let rows: Vec<ScoreRow> = candidates
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let gain = param_tracker.gain_of(x);
            ScoreRow {
                index: i,
                epistemic: gain,
                pragmatic: 0.0,
                score: gain,
            }
        })
        .collect();
    Ok(Selection::from_scores(rows))
}

/// Composite acquisition over jointly evaluated candidate pairs:
/// `gamma * I(f_pair; y_pair) + E_samples[ beta * I(g; z | y1, y2)
///  + (u(y1) + u(y2)) / 2 ]`, with `(y1, y2)` sampled jointly from the GP
/// posterior at the pair. The row's epistemic field carries both curiosity
/// terms; the pragmatic field carries the expected utility.
#[allow(clippy::too_many_arguments)]
pub fn select_composite(
    gp: &GpModel,
    pref: &PreferenceModel,
    candidates: &[Vec<f64>],
    pairs: &[(usize, usize)],
    beta: f64,
    gamma: f64,
    n_mc: usize,
    seed: u64,
    out_std: &Standardizer,
) -> Result<Selection> {
    if pairs.is_empty() {
        return Err(Error::Parameter("empty pair set".into()));
    }
    let mut rows = Vec::with_capacity(pairs.len());
    for (i, &(a, b)) in pairs.iter().enumerate() {
        let x1 = &candidates[a];
        let x2 = &candidates[b];
        let mi = if gamma > 0.0 {
            gp.mi_pair(x1, x2)?
        } else {
            0.0
        };
        let samples = gp.sample_posterior(
            &[x1.clone(), x2.clone()],
            n_mc,
            derive_seed(seed, "composite-mc", i as u64),
        )?;
        let mut mean_ig = 0.0;
        let mut mean_utility = 0.0;
        for s in &samples {
            let y1 = out_std.inverse(&s[0]);
            let y2 = out_std.inverse(&s[1]);
            if beta > 0.0 {
                mean_ig += pref.pair_response_ig(&y1, &y2);
            }
            let (u1, _) = pref.predict_utility(&y1);
            let (u2, _) = pref.predict_utility(&y2);
            mean_utility += 0.5 * (u1 + u2);
        }
        mean_ig /= n_mc as f64;
        mean_utility /= n_mc as f64;
        let epistemic = gamma * mi + beta * mean_ig;
        rows.push(ScoreRow {
            index: i,
            epistemic,
            pragmatic: mean_utility,
            score: epistemic + mean_utility,
        });
    }
    Ok(Selection::from_scores(rows))
}

/// Uniform random choice over the candidate (or pair) indices.
pub fn select_random(n_candidates: usize, rng: &mut ChaCha8Rng) -> Result<Selection> {
    if n_candidates == 0 {
        return Err(Error::Parameter("empty candidate set".into()));
    }
    Ok(Selection {
        index: rng.random_range(0..n_candidates),
        rows: Vec::new(),
    })
}

/// The fixed measurement grid for plume tasks: stride-2 cell centers over
/// the field extent (odd coordinates 1, 3, ..).
pub fn csi_candidate_grid(extent: [f64; 2], stride: f64) -> Vec<[f64; 2]> {
    let nx = (extent[0] / stride).floor() as usize;
    let ny = (extent[1] / stride).floor() as usize;
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        for j in 0..ny {
            out.push([
                stride * i as f64 + stride / 2.0,
                stride * j as f64 + stride / 2.0,
            ]);
        }
    }
    out
}

/// Root of `x^(d+1) = x + 1` (the generalized golden ratio driving the R_d
/// additive recurrence).
fn harmonious_number(dim: usize) -> f64 {
    let d = dim as f64;
    let mut x = 1.5f64;
    for _ in 0..64 {
        let f = x.powf(d + 1.0) - x - 1.0;
        let fp = (d + 1.0) * x.powf(d) - 1.0;
        x -= f / fp;
    }
    x
}

/// `count` low-discrepancy points in the unit cube from the R_d additive
/// recurrence, rotated by a seeded random offset per dimension.
pub fn low_discrepancy_candidates(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim >= 1);
    let phi = harmonious_number(dim);
    let alphas: Vec<f64> = (1..=dim as i32).map(|j| (1.0 / phi).powi(j)).collect();
    let mut rng = crate::rng::substream(seed, "low-discrepancy-offset");
    let offsets: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..1.0)).collect();
    (0..count)
        .map(|n| {
            (0..dim)
                .map(|d| (offsets[d] + (n as f64 + 1.0) * alphas[d]).fract())
                .collect()
        })
        .collect()
}

/// `n_pairs` index pairs with distinct members drawn from the candidate set.
pub fn random_pairs(n_points: usize, n_pairs: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    assert!(n_points >= 2);
    (0..n_pairs)
        .map(|_| {
            let a = rng.random_range(0..n_points);
            let mut b = rng.random_range(0..n_points);
            while b == a {
                b = rng.random_range(0..n_points);
            }
            (a, b)
        })
        .collect()
}

/// Baseline selector kinds recognized by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Random,
    GreedyCsi,
    EigCsi,
    GreedyTas,
    EigTas,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surrogate::discrete::{Hypothesis, RateFn};
    use crate::surrogate::gp::KernelSpec;
    use std::sync::Arc;

    fn toy_scorer(rate_rows: Vec<Vec<f64>>, n_candidates: usize, y_max: u64) -> (Arc<HypothesisGrid>, CsiScorer) {
        let hyps: Vec<Hypothesis> = (0..rate_rows.len())
            .map(|i| Hypothesis::SourceLocation([i as f64, 0.0]))
            .collect();
        let rows = rate_rows;
        let rate_fn: RateFn = Arc::new(move |h, x| {
            let i = match h {
                Hypothesis::SourceLocation(p) => p[0] as usize,
                _ => unreachable!(),
            };
            rows[i][x[0] as usize]
        });
        let grid = Arc::new(HypothesisGrid::new(hyps, rate_fn).unwrap());
        let candidates: Vec<[f64; 2]> = (0..n_candidates).map(|c| [c as f64, 0.0]).collect();
        let scorer = CsiScorer::new(&grid, candidates, 1.0, y_max);
        (grid, scorer)
    }

    #[test]
    fn efe_score_arithmetic() {
        assert_eq!(efe_score(3.0, 0.4, 0.0), -0.4);
        assert_eq!(efe_score(0.0, 0.4, 2.0), -0.4);
        assert!((efe_score(1.0, 0.2, 0.5) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn csi_scorer_matches_posterior_ops() {
        let (grid, scorer) = toy_scorer(
            vec![
                vec![1.0, 6.0, 40.0],
                vec![5.0, 2.5, 12.0],
                vec![9.0, 0.0, 70.0],
            ],
            3,
            8,
        );
        let post = DiscretePosterior::init_uniform(Arc::clone(&grid)).unwrap();
        let post = post.update([0.0, 0.0], 3, 1.0).unwrap();
        for c in 0..3 {
            let rates = scorer.rates(c).to_vec();
            let want_eig = post.eig_with_rates(&rates, 1.0);
            let want_viol = post.violation_with_rates(&rates, 1.0, 8);
            assert!((scorer.eig_plain(&post, c) - want_eig).abs() < 1e-9);
            assert!((scorer.violation(&post, c) - want_viol).abs() < 1e-12);
        }
    }

    #[test]
    fn csi_censored_eig_matches_brute_force() {
        use crate::infotheory::poisson_pmf;
        use crate::surrogate::discrete::poisson_log_survival;
        let y_max = 8u64;
        let (grid, scorer) = toy_scorer(
            vec![vec![1.0, 6.0, 40.0], vec![5.0, 2.5, 12.0], vec![9.0, 2.0, 3.0]],
            3,
            y_max,
        );
        let post = DiscretePosterior::init_uniform(Arc::clone(&grid)).unwrap();
        let post = post.update([1.0, 0.0], 3, 1.0).unwrap();
        let weights = post.weights();
        for c in 0..3 {
            // Brute force: the censored joint over (hypothesis, report).
            let rates = scorer.rates(c);
            let mut mix = vec![0.0; y_max as usize + 1];
            let mut cond = 0.0;
            for (i, &r) in rates.iter().enumerate() {
                let mut table = vec![0.0; y_max as usize + 1];
                for k in 0..y_max {
                    table[k as usize] = poisson_pmf(r, k);
                }
                table[y_max as usize] = poisson_log_survival(r, y_max).exp();
                let h: f64 = table
                    .iter()
                    .filter(|p| **p > 0.0)
                    .map(|&p| -p * p.ln())
                    .sum();
                cond += weights[i] * h;
                for (m, t) in mix.iter_mut().zip(&table) {
                    *m += weights[i] * t;
                }
            }
            let want = (mix
                .iter()
                .filter(|p| **p > 0.0)
                .map(|&p| -p * p.ln())
                .sum::<f64>()
                - cond)
                .max(0.0);
            let got = scorer.eig_censored(&post, c);
            assert!((got - want).abs() < 1e-9, "candidate {c}: {got} vs {want}");
            // Saturation makes the censored report no more informative than
            // the raw count.
            assert!(got <= scorer.eig_plain(&post, c) + 1e-9);
        }
    }

    #[test]
    fn csi_beta_zero_reduces_to_greedy() {
        let (grid, scorer) = toy_scorer(
            vec![vec![2.0, 50.0, 9.0], vec![4.0, 45.0, 1.0]],
            3,
            10,
        );
        let post = DiscretePosterior::init_uniform(grid).unwrap();
        let aif = select_csi(&post, &scorer, 0.0);
        let greedy = select_greedy_csi(&post, &scorer);
        assert_eq!(aif.index, greedy.index);
    }

    #[test]
    fn csi_violation_free_instance_reduces_to_eig() {
        // Rates far below the threshold everywhere: the pragmatic term is
        // zero and the rule must agree with the pure-EIG baseline.
        let (grid, scorer) = toy_scorer(
            vec![vec![0.5, 3.0, 1.0], vec![2.0, 0.3, 1.5], vec![1.0, 1.0, 2.8]],
            3,
            1000,
        );
        let post = DiscretePosterior::init_uniform(grid).unwrap();
        let aif = select_csi(&post, &scorer, 0.7);
        let eig = select_eig_csi(&post, &scorer);
        assert_eq!(aif.index, eig.index);
        for row in &aif.rows {
            assert!(row.pragmatic < 1e-12);
        }
    }

    #[test]
    fn csi_greedy_picks_the_safe_candidate() {
        let (grid, scorer) = toy_scorer(
            vec![vec![90.0, 0.2, 80.0], vec![70.0, 0.1, 95.0]],
            3,
            10,
        );
        let post = DiscretePosterior::init_uniform(grid).unwrap();
        assert_eq!(select_greedy_csi(&post, &scorer).index, 1);
    }

    #[test]
    fn csi_scale_coherence() {
        // Multiplying beta by a power of two and dividing the epistemic
        // scores by the same factor leaves the argmax unchanged exactly.
        let (grid, scorer) = toy_scorer(
            vec![
                vec![1.0, 20.0, 7.0, 3.0],
                vec![6.0, 2.0, 9.0, 0.5],
                vec![3.0, 11.0, 1.0, 8.0],
            ],
            4,
            12,
        );
        let post = DiscretePosterior::init_uniform(grid).unwrap();
        let rows = scorer.score_all(&post, 0.5);
        let c = 4.0;
        let scaled: Vec<f64> = rows
            .iter()
            .map(|r| efe_score(r.epistemic / c, r.pragmatic, 0.5 * c))
            .collect();
        let plain: Vec<f64> = rows.iter().map(|r| r.score).collect();
        assert_eq!(argmax(&plain), argmax(&scaled));
        for (a, b) in plain.iter().zip(&scaled) {
            assert_eq!(a, b, "power-of-two scaling must be exact");
        }
    }

    #[test]
    fn csi_monotone_curiosity() {
        // Threshold far above the rates, so the censored and raw previews
        // coincide and the large-beta limit is the plain-EIG baseline.
        let (grid, scorer) = toy_scorer(
            vec![
                vec![1.0, 30.0, 7.0, 3.0, 14.0],
                vec![6.0, 2.0, 9.0, 0.5, 16.0],
                vec![3.0, 11.0, 1.0, 8.0, 2.0],
                vec![8.0, 25.0, 3.0, 2.0, 9.0],
            ],
            5,
            300,
        );
        let post = DiscretePosterior::init_uniform(grid).unwrap();
        let eig_scores: Vec<f64> = (0..5).map(|c| scorer.eig_censored(&post, c)).collect();
        let rank = |c: usize| eig_scores.iter().filter(|e| **e < eig_scores[c]).count();
        let mut last_rank = 0;
        for beta in [0.0, 0.1, 0.5, 1.0, 5.0, 100.0] {
            let sel = select_csi(&post, &scorer, beta);
            let r = rank(sel.index);
            assert!(
                r >= last_rank,
                "EIG rank decreased at beta={beta}: {r} < {last_rank}"
            );
            last_rank = r;
        }
        // In the large-beta limit the choice coincides with the EIG baseline.
        let eig_sel = select_eig_csi(&post, &scorer);
        let big = select_csi(&post, &scorer, 1e6);
        assert_eq!(big.index, eig_sel.index);
    }

    #[test]
    fn csi_determinism() {
        let (grid, scorer) = toy_scorer(
            vec![vec![1.0, 6.0, 40.0], vec![5.0, 2.5, 12.0]],
            3,
            8,
        );
        let post = DiscretePosterior::init_uniform(grid).unwrap();
        let a = select_csi(&post, &scorer, 0.5);
        let b = select_csi(&post, &scorer, 0.5);
        assert_eq!(a.index, b.index);
        assert_eq!(a.rows.len(), b.rows.len());
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x, y);
        }
    }

    fn fitted_gp_2out(seed: u64, n: usize) -> GpModel {
        let mut rng = crate::rng::substream(seed, "acq-gp");
        let x: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..3)
                    .map(|_| rng.random_range(0.0..1.0))
                    .collect::<Vec<f64>>()
            })
            .collect();
        let y: Vec<Vec<f64>> = x
            .iter()
            .map(|p| vec![(p[0] * 3.0).sin() * 0.5, p[1] * p[2]])
            .collect();
        let kernels = vec![
            KernelSpec::isotropic(3, 0.3, 1.0, 1e-4).unwrap(),
            KernelSpec::isotropic(3, 0.3, 1.0, 1e-4).unwrap(),
        ];
        GpModel::fit(&x, &y, kernels).unwrap()
    }

    #[test]
    fn tas_fully_covered_tracker_reduces_to_mi() {
        let gp = fitted_gp_2out(1, 6);
        let mut tracker = CoverageTracker::new(
            crate::coverage::TargetSet::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            0.8,
            20,
            None,
        )
        .unwrap();
        tracker.add_outcome(&[0.5, 0.5]); // delta covers the whole box
        assert_eq!(tracker.covered_fraction(), 1.0);
        let candidates = low_discrepancy_candidates(3, 32, 5);
        let std = Standardizer::identity(2);
        let sel = select_tas(&gp, &tracker, &candidates, 20.0, 8, 3, &std).unwrap();
        let mi_scores: Vec<f64> = candidates.iter().map(|x| gp.mi_query(x)).collect();
        assert_eq!(sel.index, argmax(&mi_scores));
        for row in &sel.rows {
            assert_eq!(row.pragmatic, 0.0);
        }
    }

    #[test]
    fn tas_plugin_mean_limit_with_tiny_variance() {
        // A GP that is essentially certain: a single posterior sample sits at
        // the predictive mean, so the sampled gain equals the plug-in-mean
        // gain.
        let gp = fitted_gp_2out(2, 10);
        let tracker = CoverageTracker::new(
            crate::coverage::TargetSet::new(vec![-1.0, -1.0], vec![1.0, 1.0]).unwrap(),
            0.05,
            50,
            None,
        )
        .unwrap();
        let std = Standardizer::identity(2);
        // Query at training points where variance is ~1e-4-scale.
        let candidates: Vec<Vec<f64>> = (0..4)
            .map(|i| {
                low_discrepancy_candidates(3, 8, 77)[i].clone()
            })
            .collect();
        let sel = select_tas(&gp, &tracker, &candidates, 0.0, 1, 9, &std).unwrap();
        for row in &sel.rows {
            let (mean, _) = gp.predict(&candidates[row.index]);
            let plug_in = tracker.gain_of(&mean);
            assert!(
                (row.pragmatic - plug_in).abs() < 0.02,
                "sampled {} vs plug-in {plug_in}",
                row.pragmatic
            );
        }
    }

    #[test]
    fn tas_determinism_per_seed() {
        let gp = fitted_gp_2out(3, 8);
        let tracker = CoverageTracker::new(
            crate::coverage::TargetSet::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap(),
            0.1,
            30,
            None,
        )
        .unwrap();
        let candidates = low_discrepancy_candidates(3, 64, 11);
        let std = Standardizer::identity(2);
        let a = select_tas(&gp, &tracker, &candidates, 20.0, 16, 42, &std).unwrap();
        let b = select_tas(&gp, &tracker, &candidates, 20.0, 16, 42, &std).unwrap();
        assert_eq!(a.index, b.index);
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x, y);
        }
        let c = select_tas(&gp, &tracker, &candidates, 20.0, 16, 43, &std).unwrap();
        let _ = c; // different seed may change scores; only determinism is contractual
    }

    #[test]
    fn composite_reductions() {
        use crate::surrogate::pref::Comparison;
        let gp = fitted_gp_2out(4, 8);
        let kernel = KernelSpec::isotropic(2, 1.0, 1.0, 1e-6).unwrap();
        let comparisons = vec![
            Comparison::new(vec![0.4, 0.1], vec![0.1, 0.4], 1).unwrap(),
            Comparison::new(vec![0.4, 0.1], vec![0.2, 0.2], 1).unwrap(),
        ];
        let pref = PreferenceModel::laplace_fit(&comparisons, kernel, 0.1, None).unwrap();
        let candidates = low_discrepancy_candidates(3, 16, 21);
        let mut rng = crate::rng::substream(0, "pairs");
        let pairs = random_pairs(candidates.len(), 24, &mut rng);
        let std = Standardizer::identity(2);

        // beta = gamma = 0: the score is the expected posterior utility of
        // the sampled outcomes alone.
        let sel = select_composite(&gp, &pref, &candidates, &pairs, 0.0, 0.0, 8, 5, &std).unwrap();
        for row in &sel.rows {
            assert_eq!(row.epistemic, 0.0);
            assert!((row.score - row.pragmatic).abs() < 1e-15);
        }

        // Determinism per seed.
        let again =
            select_composite(&gp, &pref, &candidates, &pairs, 1.0, 1.0, 8, 5, &std).unwrap();
        let again2 =
            select_composite(&gp, &pref, &candidates, &pairs, 1.0, 1.0, 8, 5, &std).unwrap();
        assert_eq!(again.index, again2.index);

        // gamma term equals mi_pair exactly when the inner sum is constant:
        // compare against a beta=0 run with an empty preference model whose
        // utilities are identically zero.
        let empty = PreferenceModel::laplace_fit(
            &[],
            KernelSpec::isotropic(2, 1.0, 1e-18, 1e-9).unwrap(),
            0.1,
            None,
        )
        .unwrap();
        let sel =
            select_composite(&gp, &empty, &candidates, &pairs, 0.0, 1.0, 4, 5, &std).unwrap();
        for row in &sel.rows {
            let (a, b) = pairs[row.index];
            let mi = gp.mi_pair(&candidates[a], &candidates[b]).unwrap();
            assert!((row.epistemic - mi).abs() < 1e-12);
            assert!(row.pragmatic.abs() < 1e-6);
        }
    }

    #[test]
    fn random_selection_reproducible() {
        let mut rng = crate::rng::substream(9, "random-sel");
        let seq: Vec<usize> = (0..10)
            .map(|_| select_random(7, &mut rng).unwrap().index)
            .collect();
        let mut rng = crate::rng::substream(9, "random-sel");
        let seq2: Vec<usize> = (0..10)
            .map(|_| select_random(7, &mut rng).unwrap().index)
            .collect();
        assert_eq!(seq, seq2);
        assert!(seq.iter().all(|i| *i < 7));
        assert!(select_random(0, &mut rng).is_err());
    }

    #[test]
    fn candidate_grids() {
        let grid = csi_candidate_grid([100.0, 100.0], 2.0);
        assert_eq!(grid.len(), 2500);
        assert_eq!(grid[0], [1.0, 1.0]);
        assert_eq!(grid[grid.len() - 1], [99.0, 99.0]);
        assert!(grid.iter().all(|p| p[0] < 100.0 && p[1] < 100.0));

        let pts = low_discrepancy_candidates(3, 512, 0);
        assert_eq!(pts.len(), 512);
        assert!(pts
            .iter()
            .all(|p| p.iter().all(|v| (0.0..1.0).contains(v))));
        // Same seed regenerates identical candidates; different seed shifts.
        assert_eq!(pts, low_discrepancy_candidates(3, 512, 0));
        assert_ne!(pts, low_discrepancy_candidates(3, 512, 1));
        // Low-discrepancy: each axis third holds roughly a third of points.
        for d in 0..3 {
            let count = pts.iter().filter(|p| p[d] < 1.0 / 3.0).count();
            assert!((count as f64 / 512.0 - 1.0 / 3.0).abs() < 0.05, "axis {d}");
        }

        let mut rng = crate::rng::substream(1, "pairs");
        let pairs = random_pairs(16, 40, &mut rng);
        assert_eq!(pairs.len(), 40);
        assert!(pairs.iter().all(|(a, b)| a != b && *a < 16 && *b < 16));
    }

    #[test]
    fn selection_lowest_index_tie_break() {
        let rows = vec![
            ScoreRow {
                index: 0,
                epistemic: 0.0,
                pragmatic: 0.0,
                score: 1.0,
            },
            ScoreRow {
                index: 1,
                epistemic: 0.0,
                pragmatic: 0.0,
                score: 1.0,
            },
        ];
        assert_eq!(Selection::from_scores(rows).index, 0);
    }
}
