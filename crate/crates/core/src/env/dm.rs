//! Simulated decision-maker answering pairwise preference queries.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::quad::norm_cdf;

/// Latent utilities the decision-maker judges outcomes by. Hidden from the
/// optimizer; the harness uses them only to generate responses and to score
/// collected outcomes after the fact.
#[derive(Debug, Clone, PartialEq)]
pub enum HiddenUtility {
    /// `g(y) = -|y - target|^2`.
    NegSquaredDistance { target: Vec<f64> },
    /// `g(y) = weights . y`.
    Linear { weights: Vec<f64> },
}

impl HiddenUtility {
    pub fn evaluate(&self, y: &[f64]) -> f64 {
        match self {
            HiddenUtility::NegSquaredDistance { target } => {
                -crate::util::sq_dist(y, target)
            }
            HiddenUtility::Linear { weights } => {
                weights.iter().zip(y).map(|(w, v)| w * v).sum()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DmMode {
    /// Draw z = 1 with probability `Phi((g(y1) - g(y2)) / (sqrt(2) lambda))`.
    Stochastic,
    /// Always pick the higher-utility outcome; ties go to the first.
    Deterministic,
}

/// One pairwise preference response: 1 if the first outcome is preferred.
pub fn dm_respond(
    utility: &HiddenUtility,
    y1: &[f64],
    y2: &[f64],
    lambda: f64,
    mode: DmMode,
    rng: &mut ChaCha8Rng,
) -> u8 {
    let g1 = utility.evaluate(y1);
    let g2 = utility.evaluate(y2);
    match mode {
        DmMode::Deterministic => {
            if g2 > g1 {
                2
            } else {
                1
            }
        }
        DmMode::Stochastic => {
            let p1 = norm_cdf((g1 - g2) / (std::f64::consts::SQRT_2 * lambda));
            if rng.random_range(0.0..1.0) < p1 {
                1
            } else {
                2
            }
        }
    }
}
