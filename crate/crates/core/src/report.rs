//! Report rendering: hand-emitted SVG line charts (mean curve per strategy
//! with a +-1 std band) and a text table of final-iteration values, built
//! from summary CSVs. Output bytes depend only on the input files.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f",
];

/// One strategy's aggregate curves for one metric.
#[derive(Debug, Clone)]
struct Curve {
    strategy: String,
    mean: Vec<f64>,
    std: Vec<f64>,
    median: Vec<f64>,
}

/// task -> metric -> curves per strategy.
type ReportData = BTreeMap<String, BTreeMap<String, Vec<Curve>>>;

fn find_summaries(dir: &Path, found: &mut Vec<PathBuf>) -> Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            find_summaries(&path, found)?;
        } else if path
            .file_name()
            .and_then(|n| n.to_str())
            .is_some_and(|n| n.ends_with("_summary.csv"))
        {
            found.push(path);
        }
    }
    Ok(())
}

/// Column names look like `{strategy}_{metric}_{stat}`; metrics never
/// contain the stat suffix, and strategies never contain '_' except none of
/// ours do, so split from the right.
fn parse_column(name: &str) -> Option<(String, String, String)> {
    let (rest, stat) = name.rsplit_once('_')?;
    if !["mean", "std", "median"].contains(&stat) {
        return None;
    }
    // Metric labels themselves contain underscores (est_error); strategies
    // do not. Split at the first underscore.
    let (strategy, metric) = rest.split_once('_')?;
    Some((strategy.to_string(), metric.to_string(), stat.to_string()))
}

fn load_summary(path: &Path, data: &mut ReportData) -> Result<()> {
    let file_name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Config("bad summary file name".into()))?;
    let task = file_name
        .split('_')
        .next()
        .unwrap_or("unknown")
        .to_string();
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Config(format!("empty summary {}", path.display())))?
        .split(',')
        .collect();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); header.len()];
    for line in lines {
        for (i, cell) in line.split(',').enumerate() {
            columns[i].push(cell.parse().map_err(|e| {
                Error::Config(format!("bad cell '{cell}' in {}: {e}", path.display()))
            })?);
        }
    }
    // Group columns into (strategy, metric) curves.
    let mut curves: BTreeMap<(String, String), Curve> = BTreeMap::new();
    for (i, name) in header.iter().enumerate() {
        if let Some((strategy, metric, stat)) = parse_column(name) {
            let c = curves
                .entry((strategy.clone(), metric))
                .or_insert_with(|| Curve {
                    strategy,
                    mean: Vec::new(),
                    std: Vec::new(),
                    median: Vec::new(),
                });
            match stat.as_str() {
                "mean" => c.mean = columns[i].clone(),
                "std" => c.std = columns[i].clone(),
                _ => c.median = columns[i].clone(),
            }
        }
    }
    for ((_, metric), curve) in curves {
        data.entry(task.clone())
            .or_default()
            .entry(metric)
            .or_default()
            .push(curve);
    }
    Ok(())
}

fn fmt_coord(v: f64) -> String {
    format!("{v:.2}")
}

fn fmt_tick(v: f64) -> String {
    format!("{v:.4}")
}

fn render_chart(task: &str, metric: &str, curves: &[Curve]) -> String {
    let (w, h) = (640.0, 400.0);
    let (ml, mr, mt, mb) = (70.0, 20.0, 36.0, 46.0);
    let plot_w = w - ml - mr;
    let plot_h = h - mt - mb;

    let n = curves.iter().map(|c| c.mean.len()).max().unwrap_or(1);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for c in curves {
        for (m, s) in c.mean.iter().zip(&c.std) {
            lo = lo.min(m - s);
            hi = hi.max(m + s);
        }
    }
    if !lo.is_finite() || !hi.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    let x_of = |it: usize| ml + plot_w * it as f64 / (n.max(2) - 1) as f64;
    let y_of = |v: f64| mt + plot_h * (1.0 - (v - lo) / (hi - lo));

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{task}: {metric}</text>\n",
        w / 2.0
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        mt + plot_h,
        ml + plot_w,
        mt + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
        mt + plot_h
    ));
    // Ticks.
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n",
            ml - 4.0,
            fmt_coord(y),
            fmt_coord(y)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            ml - 7.0,
            fmt_coord(y + 4.0),
            fmt_tick(v)
        ));
        let it = (n.saturating_sub(1)) * k / 4;
        let x = x_of(it);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
            fmt_coord(x),
            mt + plot_h,
            fmt_coord(x),
            mt + plot_h + 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{it}</text>\n",
            fmt_coord(x),
            mt + plot_h + 18.0
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">iteration</text>\n",
        ml + plot_w / 2.0,
        h - 8.0
    ));

    // Bands then lines, a fixed color per sorted strategy.
    let mut sorted: Vec<&Curve> = curves.iter().collect();
    sorted.sort_by(|a, b| a.strategy.cmp(&b.strategy));
    for (ci, c) in sorted.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let mut band = String::from("<polygon points=\"");
        for (it, (m, s)) in c.mean.iter().zip(&c.std).enumerate() {
            band.push_str(&format!("{},{} ", fmt_coord(x_of(it)), fmt_coord(y_of(m + s))));
        }
        for (it, (m, s)) in c.mean.iter().zip(&c.std).enumerate().rev() {
            band.push_str(&format!("{},{} ", fmt_coord(x_of(it)), fmt_coord(y_of(m - s))));
        }
        band.push_str(&format!("\" fill=\"{color}\" fill-opacity=\"0.15\" stroke=\"none\"/>\n"));
        svg.push_str(&band);
    }
    for (ci, c) in sorted.iter().enumerate() {
        let color = PALETTE[ci % PALETTE.len()];
        let mut line = String::from("<polyline points=\"");
        for (it, m) in c.mean.iter().enumerate() {
            line.push_str(&format!("{},{} ", fmt_coord(x_of(it)), fmt_coord(y_of(*m))));
        }
        line.push_str(&format!(
            "\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"/>\n"
        ));
        svg.push_str(&line);
        // Legend entry.
        let ly = mt + 14.0 + 16.0 * ci as f64;
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{color}\" stroke-width=\"2\"/>\n",
            ml + plot_w - 110.0,
            fmt_coord(ly),
            ml + plot_w - 88.0,
            fmt_coord(ly)
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
            ml + plot_w - 82.0,
            fmt_coord(ly + 4.0),
            c.strategy
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

/// Renders one SVG per (task, metric) and a final-values table. Returns the
/// written paths. Fails when no summary CSVs are found.
pub fn write_report(input_dir: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut summaries = Vec::new();
    find_summaries(input_dir, &mut summaries)?;
    summaries.sort();
    if summaries.is_empty() {
        return Err(Error::Config(format!(
            "no summary CSVs under {}",
            input_dir.display()
        )));
    }
    let mut data: ReportData = BTreeMap::new();
    for path in &summaries {
        load_summary(path, &mut data)?;
    }
    std::fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    let mut table = String::from("task,strategy,metric,final_mean,final_std,final_median\n");
    for (task, metrics) in &data {
        for (metric, curves) in metrics {
            let path = out_dir.join(format!("{task}_{metric}.svg"));
            let mut f = std::fs::File::create(&path)?;
            f.write_all(render_chart(task, metric, curves).as_bytes())?;
            written.push(path);
            let mut sorted: Vec<&Curve> = curves.iter().collect();
            sorted.sort_by(|a, b| a.strategy.cmp(&b.strategy));
            for c in sorted {
                let last = c.mean.len().saturating_sub(1);
                table.push_str(&format!(
                    "{task},{},{metric},{},{},{}\n",
                    c.strategy,
                    crate::harness::trace::fmt_float(c.mean[last]),
                    crate::harness::trace::fmt_float(c.std[last]),
                    crate::harness::trace::fmt_float(c.median[last]),
                ));
            }
        }
    }
    let table_path = out_dir.join("final_values.txt");
    std::fs::File::create(&table_path)?.write_all(table.as_bytes())?;
    written.push(table_path);
    Ok(written)
}
