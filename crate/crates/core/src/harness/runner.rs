//! Seeded experiment loops: initialize, iterate (acquire, observe, update,
//! record), compute metrics inline, and isolate per-seed failures.

use std::time::Instant;

use crate::acquisition::{
    low_discrepancy_candidates, random_pairs, select_composite, select_csi, select_eig_csi,
    select_eig_tas, select_greedy_csi, select_greedy_tas, select_random, select_tas,
    CsiScorer, Selection,
};
use crate::coverage::{CoverageTracker, TargetSet};
use crate::env::dm::dm_respond;
use crate::env::synthetic::{mo_truth, tas_truth};
use crate::error::{Error, Result};
use crate::harness::config::{ExperimentConfig, Strategy, Task};
use crate::harness::metrics::metric_labels;
use crate::harness::tasks::{build_composite, build_csi, build_tas, CompositeTask, CsiKind, CsiTask, TasTask};
use crate::harness::trace::{ExperimentTrace, Record};
use crate::rng::{derive_seed, substream, substream_indexed};
use crate::surrogate::discrete::DiscretePosterior;
use crate::surrogate::gp::{refine_lengthscales, GpModel, KernelSpec};
use crate::surrogate::pref::{Comparison, PreferenceModel};
use crate::surrogate::Standardizer;

/// Runs every seed of the configuration; a numeric failure in one seed
/// yields an aborted trace for that seed and leaves the others untouched.
pub fn run(config: &ExperimentConfig) -> Result<Vec<ExperimentTrace>> {
    match config.task {
        Task::CsiLocalization | Task::CsiWind | Task::CsiSources => {
            let task = build_csi(config.task, &config.environment)?;
            let scorer = CsiScorer::new(
                &task.grid,
                task.candidates.clone(),
                task.dt,
                task.y_max_count,
            );
            Ok(config
                .seeds
                .iter()
                .map(|&seed| run_csi_seed(config, &task, &scorer, seed))
                .collect())
        }
        Task::Tas => {
            let task = build_tas(config)?;
            Ok(config
                .seeds
                .iter()
                .map(|&seed| run_tas_seed(config, &task, seed))
                .collect())
        }
        Task::Composite => {
            let task = build_composite(config)?;
            Ok(config
                .seeds
                .iter()
                .map(|&seed| run_composite_seed(config, &task, seed))
                .collect())
        }
    }
}

fn blank_trace(config: &ExperimentConfig, seed: u64) -> ExperimentTrace {
    let (query_labels, outcome_labels): (Vec<String>, Vec<String>) = match config.task {
        Task::CsiLocalization | Task::CsiWind | Task::CsiSources => (
            vec!["x1".into(), "x2".into()],
            vec!["y".into()],
        ),
        Task::Tas => (
            vec!["x1".into(), "x2".into(), "x3".into()],
            vec!["y1".into(), "y2".into()],
        ),
        Task::Composite => {
            let task = build_composite(config).expect("validated config");
            let d = task.kind.input_dim();
            let m = task.kind.output_dim();
            let mut q = Vec::new();
            for side in ["xa", "xb"] {
                for i in 1..=d {
                    q.push(format!("{side}{i}"));
                }
            }
            let mut o = Vec::new();
            for side in ["ya", "yb"] {
                for i in 1..=m {
                    o.push(format!("{side}{i}"));
                }
            }
            o.push("z".into());
            (q, o)
        }
    };
    ExperimentTrace {
        task: config.task,
        strategy: config.strategy,
        seed,
        query_labels,
        outcome_labels,
        metric_labels: metric_labels(config.task),
        records: Vec::new(),
        aborted: None,
        config_hash: config.config_hash,
        wall_time_s: 0.0,
        n_env_evals: 0,
        n_dm_queries: 0,
        initial_outcomes: Vec::new(),
    }
}

fn estimation_error(kind: CsiKind, post: &DiscretePosterior, truth: &[f64]) -> f64 {
    match kind {
        CsiKind::Localization | CsiKind::Wind => {
            let mean = post
                .point_estimate()
                .mean
                .expect("continuous grid has a mean");
            crate::util::sq_dist(&mean, truth).sqrt()
        }
        CsiKind::Sources => {
            let map = post.point_estimate().map_params;
            map.iter()
                .zip(truth)
                .filter(|(a, b)| (*a - *b).abs() > 0.5)
                .count() as f64
        }
    }
}

fn run_csi_seed(
    config: &ExperimentConfig,
    task: &CsiTask,
    scorer: &CsiScorer,
    seed: u64,
) -> ExperimentTrace {
    let start = Instant::now();
    let mut trace = blank_trace(config, seed);
    let mut env_rng = substream(seed, "environment");
    let mut acq_rng = substream(seed, "acquisition");

    let mut post = match DiscretePosterior::init_uniform(task.grid.clone()) {
        Ok(p) => p,
        Err(e) => {
            trace.aborted = Some(e.to_string());
            return trace;
        }
    };
    let mut violations = 0u64;
    for t in 0..config.budget {
        let step: Result<()> = (|| {
            let sel = match config.strategy {
                Strategy::Aif => select_csi(&post, scorer, config.beta),
                Strategy::Greedy => select_greedy_csi(&post, scorer),
                Strategy::Eig => select_eig_csi(&post, scorer),
                Strategy::Random => select_random(scorer.n_candidates(), &mut acq_rng)?,
                other => return Err(Error::Config(format!("{other} not valid for plume tasks"))),
            };
            let x = scorer.candidates()[sel.index];
            let y_raw = task.field.observe(x, &mut env_rng)?;
            trace.n_env_evals += 1;
            // The sensor saturates: counts above the threshold are reported
            // as the threshold itself, and the posterior reads a capped
            // report as "the count reached the cap". Violations are counted
            // on the true draw.
            let y = y_raw.min(task.y_max_count);
            post = post.update_censored_with_rates(
                scorer.rates(sel.index),
                y,
                task.y_max_count,
                task.dt,
            )?;
            if y_raw > task.y_max_count {
                violations += 1;
            }
            let err = estimation_error(task.kind, &post, &task.truth);
            let (score, epistemic, pragmatic) = row_stats(&sel);
            trace.records.push(Record {
                iteration: t,
                query: x.to_vec(),
                outcome: vec![y as f64],
                score,
                epistemic,
                pragmatic,
                metrics: vec![err, violations as f64],
            });
            Ok(())
        })();
        if let Err(e) = step {
            trace.aborted = Some(format!("iteration {t}: {e}"));
            break;
        }
    }
    trace.wall_time_s = start.elapsed().as_secs_f64();
    trace
}

fn row_stats(sel: &Selection) -> (f64, f64, f64) {
    match sel.chosen() {
        Some(row) => (row.score, row.epistemic, row.pragmatic),
        None => (0.0, 0.0, 0.0),
    }
}

/// Standardize outputs by the running statistics of everything observed so
/// far, then fit.
fn fit_standardized(
    xs: &[Vec<f64>],
    ys_raw: &[Vec<f64>],
    kernels: &[KernelSpec],
) -> Result<(GpModel, Standardizer)> {
    let std = Standardizer::fit(ys_raw);
    let ys: Vec<Vec<f64>> = ys_raw.iter().map(|y| std.transform(y)).collect();
    Ok((GpModel::fit(xs, &ys, kernels.to_vec())?, std))
}

fn run_tas_seed(config: &ExperimentConfig, task: &TasTask, seed: u64) -> ExperimentTrace {
    let start = Instant::now();
    let mut trace = blank_trace(config, seed);
    let mut acq_rng = substream(seed, "acquisition");

    let mut out_tracker = match CoverageTracker::new(
        task.target.clone(),
        task.delta,
        task.probes_per_dim,
        None,
    ) {
        Ok(t) => t,
        Err(e) => {
            trace.aborted = Some(e.to_string());
            return trace;
        }
    };
    let mut param_tracker = match CoverageTracker::new(
        TargetSet::unit_cube(3),
        task.param_delta,
        task.probes_per_dim,
        None,
    ) {
        Ok(t) => t,
        Err(e) => {
            trace.aborted = Some(e.to_string());
            return trace;
        }
    };

    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<Vec<f64>> = Vec::new();
    let init = low_discrepancy_candidates(3, task.n_init, derive_seed(seed, "init", 0));
    for x in init {
        match tas_truth([x[0], x[1], x[2]]) {
            Ok(y) => {
                trace.n_env_evals += 1;
                out_tracker.add_outcome(&y);
                param_tracker.add_outcome(&x);
                trace.initial_outcomes.push(y.to_vec());
                xs.push(x);
                ys.push(y.to_vec());
            }
            Err(e) => {
                trace.aborted = Some(e.to_string());
                return trace;
            }
        }
    }

    let mut kernels = task.kernels.clone();
    for t in 0..config.budget {
        let step: Result<()> = (|| {
            if task.gp_refine_every > 0 && t > 0 && t % task.gp_refine_every == 0 {
                let std = Standardizer::fit(&ys);
                let ys_std: Vec<Vec<f64>> = ys.iter().map(|y| std.transform(y)).collect();
                kernels = refine_lengthscales(&xs, &ys_std, &task.kernels)?;
            }
            let (gp, out_std) = fit_standardized(&xs, &ys, &kernels)?;
            let candidates =
                low_discrepancy_candidates(3, task.n_candidates, derive_seed(seed, "candidates", t as u64));
            let sel = match config.strategy {
                Strategy::Aif => select_tas(
                    &gp,
                    &out_tracker,
                    &candidates,
                    config.beta,
                    config.n_mc,
                    derive_seed(seed, "acq-mc", t as u64),
                    &out_std,
                )?,
                Strategy::Greedy => select_greedy_tas(
                    &gp,
                    &out_tracker,
                    &candidates,
                    config.n_mc,
                    derive_seed(seed, "acq-mc", t as u64),
                    &out_std,
                )?,
                Strategy::Eig => select_eig_tas(&param_tracker, &candidates)?,
                Strategy::Random => select_random(candidates.len(), &mut acq_rng)?,
                other => return Err(Error::Config(format!("{other} not valid for tas"))),
            };
            let x = candidates[sel.index].clone();
            let y = tas_truth([x[0], x[1], x[2]])?;
            trace.n_env_evals += 1;
            out_tracker.add_outcome(&y);
            param_tracker.add_outcome(&x);
            xs.push(x.clone());
            ys.push(y.to_vec());
            let (score, epistemic, pragmatic) = row_stats(&sel);
            trace.records.push(Record {
                iteration: t,
                query: x,
                outcome: y.to_vec(),
                score,
                epistemic,
                pragmatic,
                metrics: vec![
                    out_tracker.covered_fraction(),
                    param_tracker.covered_fraction(),
                ],
            });
            Ok(())
        })();
        if let Err(e) = step {
            trace.aborted = Some(format!("iteration {t}: {e}"));
            break;
        }
    }
    trace.wall_time_s = start.elapsed().as_secs_f64();
    trace
}

fn run_composite_seed(
    config: &ExperimentConfig,
    task: &CompositeTask,
    seed: u64,
) -> ExperimentTrace {
    let start = Instant::now();
    let mut trace = blank_trace(config, seed);
    let mut acq_rng = substream(seed, "acquisition");
    let mut dm_rng = substream(seed, "dm");
    let d = task.kind.input_dim();

    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<Vec<f64>> = Vec::new();
    let init = low_discrepancy_candidates(d, task.n_init, derive_seed(seed, "init", 0));
    for x in init {
        match mo_truth(task.kind, &x) {
            Ok(y) => {
                trace.n_env_evals += 1;
                trace.initial_outcomes.push(y.clone());
                xs.push(x);
                ys.push(y);
            }
            Err(e) => {
                trace.aborted = Some(e.to_string());
                return trace;
            }
        }
    }

    // One random initial pairwise preference over the initial outcomes.
    let mut comparisons: Vec<Comparison> = Vec::new();
    {
        use rand::Rng;
        let a = dm_rng.random_range(0..task.n_init);
        let mut b = dm_rng.random_range(0..task.n_init);
        while b == a {
            b = dm_rng.random_range(0..task.n_init);
        }
        let z = dm_respond(
            &task.utility,
            &ys[a],
            &ys[b],
            task.dm_lambda.unwrap_or(config.lambda),
            task.dm_mode,
            &mut dm_rng,
        );
        trace.n_dm_queries += 1;
        match Comparison::new(ys[a].clone(), ys[b].clone(), z) {
            Ok(c) => comparisons.push(c),
            Err(e) => {
                trace.aborted = Some(format!("initial comparison: {e}"));
                return trace;
            }
        }
    }

    let mut best_utility = ys
        .iter()
        .map(|y| task.utility.evaluate(y))
        .fold(f64::NEG_INFINITY, f64::max);

    let mut kernels = task.kernels.clone();
    for t in 0..config.budget {
        let step: Result<()> = (|| {
            if task.gp_refine_every > 0 && t > 0 && t % task.gp_refine_every == 0 {
                let std = Standardizer::fit(&ys);
                let ys_std: Vec<Vec<f64>> = ys.iter().map(|y| std.transform(y)).collect();
                kernels = refine_lengthscales(&xs, &ys_std, &task.kernels)?;
            }
            let (gp, out_std) = fit_standardized(&xs, &ys, &kernels)?;
            let pref = PreferenceModel::laplace_fit(
                &comparisons,
                task.pref_kernel.clone(),
                config.lambda,
                Some(out_std.clone()),
            )?;
            let candidates = low_discrepancy_candidates(
                d,
                task.n_candidates,
                derive_seed(seed, "candidates", t as u64),
            );
            let mut pair_rng = substream_indexed(seed, "pair-gen", t as u64);
            let pairs = random_pairs(candidates.len(), task.n_pairs, &mut pair_rng);
            let (beta, gamma) = match config.strategy {
                Strategy::Aif => (config.beta, config.gamma),
                Strategy::GPlusGig => (config.beta, 0.0),
                Strategy::GOnly => (0.0, 0.0),
                Strategy::Random => (0.0, 0.0),
                other => {
                    return Err(Error::Config(format!("{other} not valid for composite")))
                }
            };
            let sel = if config.strategy == Strategy::Random {
                select_random(pairs.len(), &mut acq_rng)?
            } else {
                select_composite(
                    &gp,
                    &pref,
                    &candidates,
                    &pairs,
                    beta,
                    gamma,
                    config.n_mc,
                    derive_seed(seed, "acq-mc", t as u64),
                    &out_std,
                )?
            };
            let (a, b) = pairs[sel.index];
            let x1 = candidates[a].clone();
            let x2 = candidates[b].clone();
            let y1 = mo_truth(task.kind, &x1)?;
            let y2 = mo_truth(task.kind, &x2)?;
            trace.n_env_evals += 2;
            let z = dm_respond(
                &task.utility,
                &y1,
                &y2,
                task.dm_lambda.unwrap_or(config.lambda),
                task.dm_mode,
                &mut dm_rng,
            );
            trace.n_dm_queries += 1;
            // Identical outcomes carry no preference signal; keep the budget
            // accounting but skip the degenerate comparison.
            if crate::util::sq_dist(&y1, &y2) >= 1e-24 {
                comparisons.push(Comparison::new(y1.clone(), y2.clone(), z)?);
            }
            xs.push(x1.clone());
            ys.push(y1.clone());
            xs.push(x2.clone());
            ys.push(y2.clone());
            let iter_utility = task
                .utility
                .evaluate(&y1)
                .max(task.utility.evaluate(&y2));
            best_utility = best_utility.max(iter_utility);
            let (score, epistemic, pragmatic) = row_stats(&sel);
            let mut query = x1;
            query.extend(x2);
            let mut outcome = y1;
            outcome.extend(y2);
            outcome.push(z as f64);
            trace.records.push(Record {
                iteration: t,
                query,
                outcome,
                score,
                epistemic,
                pragmatic,
                metrics: vec![iter_utility, best_utility],
            });
            Ok(())
        })();
        if let Err(e) = step {
            trace.aborted = Some(format!("iteration {t}: {e}"));
            break;
        }
    }
    trace.wall_time_s = start.elapsed().as_secs_f64();
    trace
}

/// Writes trace CSVs and the per-task summary CSV; returns the written paths.
/// The summary aggregates completed seeds only.
pub fn write_outputs(
    config: &ExperimentConfig,
    traces: &[ExperimentTrace],
) -> Result<Vec<std::path::PathBuf>> {
    use crate::harness::metrics::{aggregate, metrics, write_summary};
    std::fs::create_dir_all(&config.output)?;
    let mut paths = Vec::new();
    for trace in traces {
        let path = config.output.join(trace.file_name());
        trace.write_csv(&path)?;
        paths.push(path);
    }
    let complete: Vec<_> = traces
        .iter()
        .filter(|t| t.aborted.is_none())
        .map(|t| metrics(t, config.task))
        .collect::<Result<Vec<_>>>()?;
    if !complete.is_empty() {
        let agg = aggregate(&complete)?;
        let path = config
            .output
            .join(format!("{}_{}_summary.csv", config.task, config.strategy));
        write_summary(&path, config.strategy, &agg)?;
        paths.push(path);
    }
    Ok(paths)
}
