//! Deterministic synthetic objectives for the targeted-search and
//! composite-optimization benchmarks.
//!
//! `tas_truth` is a 3-input / 2-output map built from sums of Gaussian bumps
//! around three well-separated centers, clamped to [0,1]. Its joint
//! super-level sets `{c1 >= C, c2 >= C}` are nested across
//! C in {0.1, 0.5, 0.8} and occupy a small share of the cube at C = 0.8.
//! `mo_truth` provides dimension-matched smooth multi-output objectives for
//! the composite tasks (5d -> 3d in vehicle-safety-style output ranges, and
//! 40d -> 4d roughly centered at zero).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::util::sq_dist;

/// Failure pockets of the targeted-search map. Each pocket is a cluster of
/// seven Gaussian sub-bumps (an octahedral arrangement around its center)
/// shared by both outputs; the second output is shifted slightly and scaled
/// to the pocket's second anchor height. Pockets form an archipelago over
/// the cube with a lean toward faces and corners (detection failures
/// concentrate at parameter extremes); between pockets both outputs decay
/// toward zero. Each pocket tops out at its own (anchor1, anchor2) pair, so
/// covering the whole target box requires visiting many pockets.
const TAS_POCKETS: [([f64; 3], [f64; 3], f64, f64); 12] = [
    ([1.00, 1.00, 0.08], [-0.03, 0.02, -0.03], 0.99, 0.93),
    ([0.02, 0.97, 0.50], [-0.02, 0.03, -0.04], 0.86, 0.97),
    ([0.55, 0.25, 0.98], [-0.04, -0.03, 0.03], 0.90, 0.90),
    ([0.97, 0.04, 0.72], [0.03, -0.02, -0.04], 0.93, 0.99),
    ([0.05, 0.05, 0.90], [0.03, 0.03, 0.02], 0.97, 0.86),
    ([0.50, 0.96, 0.04], [-0.02, 0.02, 0.03], 0.86, 0.86),
    ([0.96, 0.55, 0.35], [0.02, -0.03, 0.03], 0.99, 0.99),
    ([0.30, 0.55, 0.50], [-0.03, 0.02, -0.03], 0.92, 0.95),
    ([0.70, 0.75, 0.85], [0.02, 0.02, -0.03], 0.95, 0.89),
    ([0.25, 0.15, 0.20], [0.03, -0.02, 0.03], 0.89, 0.93),
    ([0.93, 0.93, 0.93], [-0.02, 0.03, -0.02], 0.96, 0.91),
    ([0.07, 0.50, 0.05], [0.02, -0.02, 0.03], 0.91, 0.96),
];
/// Octahedral sub-bump spread and per-bump width.
const TAS_CLUSTER_SPREAD: f64 = 0.16;
const TAS_CLUSTER_WIDTH: f64 = 0.11;
/// Central and ring sub-bump amplitude factors; the cluster plateau is
/// roughly 0.93x the nominal height.
const TAS_AMP_CENTER: f64 = 0.52;
const TAS_AMP_RING: f64 = 0.20;
const TAS_PLATEAU_FACTOR: f64 = 0.93;

fn cluster_value(x: &[f64; 3], center: &[f64; 3], height: f64) -> f64 {
    let s = TAS_CLUSTER_SPREAD;
    let w2 = 2.0 * TAS_CLUSTER_WIDTH * TAS_CLUSTER_WIDTH;
    let offsets: [[f64; 3]; 7] = [
        [0.0, 0.0, 0.0],
        [s, 0.0, 0.0],
        [-s, 0.0, 0.0],
        [0.0, s, 0.0],
        [0.0, -s, 0.0],
        [0.0, 0.0, s],
        [0.0, 0.0, -s],
    ];
    let mut v = 0.0;
    for (i, off) in offsets.iter().enumerate() {
        let c = [center[0] + off[0], center[1] + off[1], center[2] + off[2]];
        let amp = if i == 0 { TAS_AMP_CENTER } else { TAS_AMP_RING };
        v += amp * height * (-sq_dist(x, &c) / w2).exp();
    }
    v
}

/// The targeted-search ground truth: two bounded failure-intensity outputs
/// over the unit cube.
pub fn tas_truth(x: [f64; 3]) -> Result<[f64; 2]> {
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain(format!("input {x:?} outside the unit cube")));
    }
    let mut y = [0.0f64; 2];
    for (center, shift, a1, a2) in &TAS_POCKETS {
        y[0] += cluster_value(&x, center, a1 / TAS_PLATEAU_FACTOR);
        let shifted = [x[0] - shift[0], x[1] - shift[1], x[2] - shift[2]];
        y[1] += cluster_value(&shifted, center, a2 / TAS_PLATEAU_FACTOR);
    }
    Ok([y[0].min(1.0), y[1].min(1.0)])
}

/// Which multi-output synthetic problem to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoKind {
    /// 5 inputs, 3 outputs, output ranges matching a crash-worthiness study
    /// (mass-like, acceleration-like, intrusion-like).
    VehicleLike,
    /// 40 inputs, 4 outputs, roughly standardized output scale.
    LinearGridLike,
}

impl MoKind {
    pub fn input_dim(self) -> usize {
        match self {
            MoKind::VehicleLike => 5,
            MoKind::LinearGridLike => 40,
        }
    }

    pub fn output_dim(self) -> usize {
        match self {
            MoKind::VehicleLike => 3,
            MoKind::LinearGridLike => 4,
        }
    }
}

/// Frozen sinusoid directions for the vehicle-like map.
const VEHICLE_A: [[f64; 5]; 3] = [
    [2.1, 0.7, -1.4, 0.5, -0.9],
    [-0.9, 1.9, 0.7, -1.6, 0.5],
    [0.7, -0.5, 1.6, 1.2, -1.9],
];
const VEHICLE_B: [[f64; 5]; 3] = [
    [0.5, -1.2, 0.9, -0.7, 1.4],
    [1.4, 0.2, -1.1, 0.9, -0.5],
    [-0.7, 1.4, 0.5, -1.3, 0.7],
];
const VEHICLE_PHASE: [f64; 3] = [0.7, 2.1, 4.0];
const VEHICLE_BASE: [f64; 3] = [1650.0, 8.0, 0.05];
const VEHICLE_SCALE: [f64; 3] = [350.0, 5.0, 0.4];

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Frozen coefficient tables for the 40-d map, generated once from a fixed
/// stream so the function is identical in every build.
pub struct GridCoefficients {
    weights: Vec<Vec<f64>>, // [output][input]
    phases: Vec<Vec<f64>>,
    centers: Vec<Vec<f64>>,
    offsets: Vec<f64>,
}

impl GridCoefficients {
    fn new() -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(0x40d);
        let (n_in, n_out) = (40, 4);
        let mut weights = Vec::new();
        let mut phases = Vec::new();
        let mut centers = Vec::new();
        let mut offsets = Vec::new();
        for _ in 0..n_out {
            weights.push(
                (0..n_in)
                    .map(|_| {
                        let mag = rng.random_range(0.5..1.5);
                        if rng.random_range(0.0..1.0) < 0.5 {
                            -mag
                        } else {
                            mag
                        }
                    })
                    .collect(),
            );
            phases.push((0..n_in).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect());
            centers.push((0..n_in).map(|_| rng.random_range(0.25..0.75)).collect());
            offsets.push(rng.random_range(-0.5..0.5));
        }
        Self {
            weights,
            phases,
            centers,
            offsets,
        }
    }
}

fn grid_coefficients() -> &'static GridCoefficients {
    use std::sync::OnceLock;
    static CELL: OnceLock<GridCoefficients> = OnceLock::new();
    CELL.get_or_init(GridCoefficients::new)
}

/// Evaluates a multi-output synthetic objective at `x` in the unit cube of
/// the task's input dimension.
pub fn mo_truth(kind: MoKind, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != kind.input_dim() {
        return Err(Error::Domain(format!(
            "expected {} inputs, got {}",
            kind.input_dim(),
            x.len()
        )));
    }
    if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Domain("input outside the unit cube".into()));
    }
    match kind {
        MoKind::VehicleLike => {
            let tau = std::f64::consts::TAU;
            Ok((0..3)
                .map(|j| {
                    let s = 0.5
                        + 0.3 * (tau * dot(&VEHICLE_A[j], x) + VEHICLE_PHASE[j]).sin()
                        + 0.2 * (tau * dot(&VEHICLE_B[j], x)).cos();
                    VEHICLE_BASE[j] + VEHICLE_SCALE[j] * s
                })
                .collect())
        }
        MoKind::LinearGridLike => {
            let c = grid_coefficients();
            let tau = std::f64::consts::TAU;
            Ok((0..4)
                .map(|j| {
                    let mut v = c.offsets[j];
                    let mut quad = 0.0;
                    for i in 0..40 {
                        v += c.weights[j][i] * (tau * x[i] + c.phases[j][i]).sin()
                            / (40f64).sqrt();
                        let d = x[i] - c.centers[j][i];
                        quad += d * d;
                    }
                    v - 0.5 * quad / 40.0 * 40f64.sqrt()
                })
                .collect())
        }
    }
}
