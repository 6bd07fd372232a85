//! Benchmark task assemblies: ground-truth environments wired to their
//! hypothesis grids, kernels, target sets, and candidate generators.

use std::sync::Arc;

use crate::acquisition::csi_candidate_grid;
use crate::coverage::TargetSet;
use crate::env::dm::{DmMode, HiddenUtility};
use crate::env::plume::{localization_rate, mask_rate, wind_rate, PlumeField};
use crate::env::synthetic::MoKind;
use crate::error::{Error, Result};
use crate::harness::config::{EnvOverrides, ExperimentConfig, Task};
use crate::surrogate::discrete::{Hypothesis, HypothesisGrid, RateFn};
use crate::surrogate::gp::KernelSpec;

/// Which latent parameter a plume task identifies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiKind {
    Localization,
    Wind,
    Sources,
}

/// Ground truth for the source-identification task: sources 3, 5, 6 and 8
/// active out of the six potential sources 3-8.
pub const SOURCE_ID_TRUTH: [bool; 6] = [true, false, true, true, false, true];

/// A constrained-system-identification task instance.
pub struct CsiTask {
    pub kind: CsiKind,
    pub field: PlumeField,
    pub grid: Arc<HypothesisGrid>,
    pub candidates: Vec<[f64; 2]>,
    pub dt: f64,
    /// Saturation threshold as a count per measurement window.
    pub y_max_count: u64,
    /// True latent parameters, for the estimation-error metric.
    pub truth: Vec<f64>,
}

/// 20x20 grid of candidate source locations spanning the field at a
/// 5-unit resolution.
pub fn localization_hypotheses() -> Vec<Hypothesis> {
    let mut hyps = Vec::with_capacity(400);
    for i in 0..20 {
        for j in 0..20 {
            hyps.push(Hypothesis::SourceLocation([5.0 * i as f64, 5.0 * j as f64]));
        }
    }
    hyps
}

/// 20x20 grid of candidate wind vectors spanning [-1, 1]^2 at 0.1 resolution.
pub fn wind_hypotheses() -> Vec<Hypothesis> {
    let mut hyps = Vec::with_capacity(400);
    for i in 0..20 {
        for j in 0..20 {
            hyps.push(Hypothesis::Wind([
                0.1 * i as f64 - 1.0,
                0.1 * j as f64 - 1.0,
            ]));
        }
    }
    hyps
}

/// All 64 activity masks over the six potential sources.
pub fn source_mask_hypotheses() -> Vec<Hypothesis> {
    (0..64u32)
        .map(|bits| {
            let mut mask = [false; 6];
            for (b, slot) in mask.iter_mut().enumerate() {
                *slot = bits >> b & 1 == 1;
            }
            Hypothesis::ActiveMask(mask)
        })
        .collect()
}

pub fn build_csi(task: Task, env: &EnvOverrides) -> Result<CsiTask> {
    let kind = match task {
        Task::CsiLocalization => CsiKind::Localization,
        Task::CsiWind => CsiKind::Wind,
        Task::CsiSources => CsiKind::Sources,
        _ => return Err(Error::Config(format!("{task} is not a plume task"))),
    };
    let mut field = match kind {
        CsiKind::Localization => PlumeField::localization_task(),
        CsiKind::Wind => PlumeField::wind_task([-0.3, 0.2]),
        CsiKind::Sources => PlumeField::source_id_task(SOURCE_ID_TRUTH),
    };
    if let Some(y_max) = env.y_max {
        field.y_max = y_max;
    }
    if let Some(dt) = env.dt {
        field.dt = dt;
    }
    let dt = field.dt;
    let y_max_count = field.saturation_count();

    let template = field.clone();
    let (hypotheses, rate_fn): (Vec<Hypothesis>, RateFn) = match kind {
        CsiKind::Localization => (
            localization_hypotheses(),
            Arc::new(move |h, x| match h {
                Hypothesis::SourceLocation(loc) => localization_rate(&template, *loc, x),
                _ => unreachable!("localization grid holds locations"),
            }),
        ),
        CsiKind::Wind => (
            wind_hypotheses(),
            Arc::new(move |h, x| match h {
                Hypothesis::Wind(v) => wind_rate(&template, *v, x),
                _ => unreachable!("wind grid holds wind vectors"),
            }),
        ),
        CsiKind::Sources => (
            source_mask_hypotheses(),
            Arc::new(move |h, x| match h {
                Hypothesis::ActiveMask(m) => mask_rate(&template, *m, x),
                _ => unreachable!("source grid holds masks"),
            }),
        ),
    };
    let grid = Arc::new(HypothesisGrid::new(hypotheses, rate_fn)?);
    let stride = env.candidate_stride.unwrap_or(2.0);
    if !(stride > 0.0) {
        return Err(Error::Config("candidate stride must be positive".into()));
    }
    let candidates = csi_candidate_grid(field.extent, stride);

    let truth = match kind {
        CsiKind::Localization => vec![20.0, 20.0],
        CsiKind::Wind => vec![-0.3, 0.2],
        CsiKind::Sources => SOURCE_ID_TRUTH
            .iter()
            .map(|&b| if b { 1.0 } else { 0.0 })
            .collect(),
    };
    Ok(CsiTask {
        kind,
        field,
        grid,
        candidates,
        dt,
        y_max_count,
        truth,
    })
}

/// A targeted-active-search task instance over the synthetic 3d-2d map.
pub struct TasTask {
    pub target: TargetSet,
    pub delta: f64,
    pub param_delta: f64,
    pub probes_per_dim: usize,
    pub kernels: Vec<KernelSpec>,
    pub n_candidates: usize,
    pub n_init: usize,
    pub gp_refine_every: usize,
    pub threshold: f64,
}

pub fn build_tas(config: &ExperimentConfig) -> Result<TasTask> {
    let env = &config.environment;
    let threshold = env.target_threshold.unwrap_or(0.8);
    if !(0.0..1.0).contains(&threshold) {
        return Err(Error::Config("target threshold must be in [0, 1)".into()));
    }
    let target = TargetSet::new(vec![threshold, threshold], vec![1.0, 1.0])?;
    let lengthscale = env.gp_lengthscale.unwrap_or(0.25);
    let signal = env.gp_signal_var.unwrap_or(1.0);
    let noise = env.gp_noise_var.unwrap_or(0.1);
    let kernels = vec![
        KernelSpec::isotropic(3, lengthscale, signal, noise)?,
        KernelSpec::isotropic(3, lengthscale, signal, noise)?,
    ];
    Ok(TasTask {
        target,
        delta: config.delta,
        param_delta: env.param_delta.unwrap_or(0.1),
        probes_per_dim: env.probes_per_dim.unwrap_or(50),
        kernels,
        n_candidates: env.n_candidates.unwrap_or(512),
        n_init: 4,
        gp_refine_every: env.gp_refine_every.unwrap_or(0),
        threshold,
    })
}

/// A composite-optimization task instance with a hidden utility.
pub struct CompositeTask {
    pub kind: MoKind,
    pub utility: HiddenUtility,
    pub kernels: Vec<KernelSpec>,
    pub pref_kernel: KernelSpec,
    pub dm_mode: DmMode,
    /// DM probit scale on raw utility differences.
    pub dm_lambda: Option<f64>,
    pub n_candidates: usize,
    pub n_pairs: usize,
    pub n_init: usize,
    pub gp_refine_every: usize,
}

/// Crash-worthiness-style target the hidden utility scores against.
pub const VEHICLE_TARGET: [f64; 3] = [1864.7202, 11.8199, 0.2904];
/// Linear preference weights for the grid-style task.
pub const GRID_WEIGHTS: [f64; 4] = [1.0, -1.0, 2.0, 1.0];

pub fn build_composite(config: &ExperimentConfig) -> Result<CompositeTask> {
    let env = &config.environment;
    let kind = match env.mo_kind.as_deref().unwrap_or("vehicle") {
        "vehicle" => MoKind::VehicleLike,
        "grid" => MoKind::LinearGridLike,
        other => return Err(Error::Config(format!("unknown mo_kind '{other}'"))),
    };
    let utility = match kind {
        MoKind::VehicleLike => HiddenUtility::NegSquaredDistance {
            target: VEHICLE_TARGET.to_vec(),
        },
        MoKind::LinearGridLike => HiddenUtility::Linear {
            weights: GRID_WEIGHTS.to_vec(),
        },
    };
    let d = kind.input_dim();
    let lengthscale = env
        .gp_lengthscale
        .unwrap_or(if d <= 5 { 0.4 } else { 1.5 });
    let signal = env.gp_signal_var.unwrap_or(1.0);
    let noise = env.gp_noise_var.unwrap_or(0.1);
    let kernels = (0..kind.output_dim())
        .map(|_| KernelSpec::isotropic(d, lengthscale, signal, noise))
        .collect::<Result<Vec<_>>>()?;
    let pref_kernel = KernelSpec::isotropic(
        kind.output_dim(),
        env.pref_lengthscale.unwrap_or(1.0),
        env.pref_signal_var.unwrap_or(1.0),
        1e-6,
    )?;
    let dm_mode = if env.dm_deterministic.unwrap_or(false) {
        DmMode::Deterministic
    } else {
        DmMode::Stochastic
    };
    Ok(CompositeTask {
        kind,
        utility,
        kernels,
        pref_kernel,
        dm_mode,
        dm_lambda: env.dm_lambda,
        n_candidates: env.n_candidates.unwrap_or(512),
        n_pairs: env.n_pairs.unwrap_or(256),
        n_init: 4,
        gp_refine_every: env.gp_refine_every.unwrap_or(0),
    })
}
