//! Command-line interface: run single experiments, sweep strategies or
//! parameters, render reports, and run the numerical verification suite.
//!
//! Exit codes: 0 success, 1 run or check failure, 2 usage error.

use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::harness::{run, write_outputs, ExperimentConfig};

#[derive(Parser, Debug)]
#[command(name = "aifbench", version, about = "Curiosity-weighted acquisition benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment configuration over all its seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Config override `key=value`; repeatable, dotted keys reach the
        /// environment table.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        /// Added to every seed in the config.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
    /// Run the cross product of value lists over one config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Sweep spec `key=v1,v2,...`; repeatable for a cross product.
        #[arg(long = "sweep", value_name = "KEY=V1,V2,...")]
        sweep: Vec<String>,
        /// Concurrent sweep cells.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
    },
    /// Render SVG charts and a final-value table from summary CSVs.
    Report {
        /// Directory scanned recursively for `*_summary.csv`.
        #[arg(long)]
        dir: PathBuf,
        /// Where to write the report (default: `<dir>/report`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the numerical verification suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn usage_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parameter(_) => 2,
        _ => 1,
    }
}

fn parse_sets(raw: &[String]) -> Result<Vec<(String, String)>, String> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| format!("--set expects KEY=VALUE, got '{s}'"))
        })
        .collect()
}

fn cmd_run(
    config_path: &PathBuf,
    out: Option<PathBuf>,
    sets: &[(String, String)],
    seed_offset: u64,
) -> i32 {
    let mut config = match ExperimentConfig::from_path(config_path, sets) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return usage_code(&e);
        }
    };
    if seed_offset > 0 {
        config.offset_seeds(seed_offset);
    }
    if let Some(out) = out {
        config.output = out;
    }
    let traces = match run(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return usage_code(&e);
        }
    };
    if let Err(e) = write_outputs(&config, &traces) {
        eprintln!("error writing outputs: {e}");
        return 1;
    }
    let mut failed = false;
    for t in &traces {
        match &t.aborted {
            None => println!(
                "seed {}: {} iterations in {:.2}s",
                t.seed,
                t.records.len(),
                t.wall_time_s
            ),
            Some(msg) => {
                failed = true;
                eprintln!("seed {} aborted: {msg}", t.seed);
            }
        }
    }
    if failed {
        1
    } else {
        0
    }
}

fn parse_sweep_spec(raw: &[String]) -> Result<Vec<(String, Vec<String>)>, String> {
    if raw.is_empty() {
        return Err("sweep requires at least one --sweep KEY=V1,V2,...".into());
    }
    raw.iter()
        .map(|spec| {
            let (key, values) = spec
                .split_once('=')
                .ok_or_else(|| format!("--sweep expects KEY=V1,V2,..., got '{spec}'"))?;
            let values: Vec<String> = values
                .split(',')
                .filter(|v| !v.is_empty())
                .map(|v| v.to_string())
                .collect();
            if values.is_empty() {
                return Err(format!("empty value list in sweep '{spec}'"));
            }
            Ok((key.to_string(), values))
        })
        .collect()
}

fn cmd_sweep(
    config_path: &PathBuf,
    sweep: &[String],
    jobs: usize,
    out: Option<PathBuf>,
    sets: &[(String, String)],
    seed_offset: u64,
) -> i32 {
    let specs = match parse_sweep_spec(sweep) {
        Ok(s) => s,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    // Cross product of the value lists.
    let mut cells: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in &specs {
        let mut next = Vec::new();
        for cell in &cells {
            for v in values {
                let mut c = cell.clone();
                c.push((key.clone(), v.clone()));
                next.push(c);
            }
        }
        cells = next;
    }

    // Validate every cell's config up front so an unknown key or bad value
    // is a usage error before anything runs.
    let mut configs = Vec::with_capacity(cells.len());
    for cell in &cells {
        let mut overrides = sets.to_vec();
        overrides.extend(cell.iter().cloned());
        let mut config = match ExperimentConfig::from_path(config_path, &overrides) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error in cell {cell:?}: {e}");
                return usage_code(&e);
            }
        };
        if seed_offset > 0 {
            config.offset_seeds(seed_offset);
        }
        let root = out.clone().unwrap_or_else(|| config.output.clone());
        let cell_name = cell
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join("_");
        config.output = root.join(cell_name);
        configs.push(config);
    }

    let next_cell = AtomicUsize::new(0);
    let failures = Mutex::new(Vec::<String>::new());
    let workers = jobs.max(1).min(configs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next_cell.fetch_add(1, Ordering::SeqCst);
                if i >= configs.len() {
                    break;
                }
                let config = &configs[i];
                match run(config).and_then(|traces| {
                    write_outputs(config, &traces)?;
                    Ok(traces)
                }) {
                    Ok(traces) => {
                        for t in traces.iter().filter(|t| t.aborted.is_some()) {
                            failures.lock().unwrap().push(format!(
                                "{}: seed {} aborted: {}",
                                config.output.display(),
                                t.seed,
                                t.aborted.clone().unwrap_or_default()
                            ));
                        }
                    }
                    Err(e) => failures
                        .lock()
                        .unwrap()
                        .push(format!("{}: {e}", config.output.display())),
                }
            });
        }
    });
    let failures = failures.into_inner().unwrap();
    if failures.is_empty() {
        println!("sweep complete: {} cells", configs.len());
        0
    } else {
        for f in &failures {
            eprintln!("error: {f}");
        }
        1
    }
}

fn cmd_report(dir: &PathBuf, out: Option<PathBuf>) -> i32 {
    let out = out.unwrap_or_else(|| dir.join("report"));
    match crate::report::write_report(dir, &out) {
        Ok(written) => {
            println!("wrote {} report files to {}", written.len(), out.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            usage_code(&e)
        }
    }
}

fn cmd_verify(seed: u64) -> i32 {
    let reports = crate::verify::run_all(seed);
    let mut ok = true;
    for r in &reports {
        println!("{}", r.line());
        ok &= r.passed;
    }
    if ok {
        0
    } else {
        1
    }
}

/// Entry point shared by `main` and the CLI tests. `args` includes the
/// program name.
pub fn run_cli(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // Help/version requests are successful exits.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match cli.command {
        Command::Run {
            config,
            out,
            set,
            seed_offset,
        } => match parse_sets(&set) {
            Ok(sets) => cmd_run(&config, out, &sets, seed_offset),
            Err(msg) => {
                eprintln!("error: {msg}");
                2
            }
        },
        Command::Sweep {
            config,
            sweep,
            jobs,
            out,
            set,
            seed_offset,
        } => match parse_sets(&set) {
            Ok(sets) => cmd_sweep(&config, &sweep, jobs, out, &sets, seed_offset),
            Err(msg) => {
                eprintln!("error: {msg}");
                2
            }
        },
        Command::Report { dir, out } => cmd_report(&dir, out),
        Command::Verify { seed } => cmd_verify(seed),
    }
}
