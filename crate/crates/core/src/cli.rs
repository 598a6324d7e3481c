//! Subcommand implementations behind the `bsq` binary.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::config::{parse_config, RunConfig};
use crate::diagnostics::{growth_fit, GrowthFit, TAIL_FRACTION_LIMIT};
use crate::error::HarnessError;
use crate::output::{
    summary_text, write_text, CsvSink, Table, CONFIG_ECHO_FILE, DIAGNOSTICS_FILE, SUMMARY_FILE,
};
use crate::plot::plot_svg;
use crate::solver::{run, RunSummary, StopReason};
use crate::verify::{run_suite, Suite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_BLOW_UP: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

pub fn load_config(path: &Path) -> Result<RunConfig, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(parse_config(&text)?)
}

pub fn exit_code_for(summary: &RunSummary) -> i32 {
    match summary.stop_reason {
        StopReason::Completed | StopReason::UnderResolved => EXIT_OK,
        StopReason::BlowUp { .. } => EXIT_BLOW_UP,
    }
}

/// Runs one configuration and writes the CSV, summary and config echo into its output directory.
pub fn cmd_run(config: &RunConfig) -> Result<RunSummary, HarnessError> {
    config.prepare_output()?;
    let dir = &config.output_dir;
    write_text(&dir.join(CONFIG_ECHO_FILE), &config.to_text())?;
    let mut sink = CsvSink::create(&dir.join(DIAGNOSTICS_FILE), &config.p_list)?;
    let mut failure = None;
    let start = Instant::now();
    let summary = run(config, &mut |r| {
        if failure.is_none() {
            if let Err(e) = sink.write(r) {
                failure = Some(e);
            }
        }
    })?;
    let wall = start.elapsed().as_secs_f64();
    if let Some(e) = failure {
        return Err(e);
    }
    sink.finish()?;
    write_text(&dir.join(SUMMARY_FILE), &summary_text(&summary, wall))?;
    Ok(summary)
}

/// Runs independent configurations on `jobs` worker threads. Output directories must differ.
pub fn cmd_sweep(
    configs: &[PathBuf],
    jobs: usize,
) -> Result<Vec<(PathBuf, Result<RunSummary, HarnessError>)>, HarnessError> {
    let parsed = configs
        .iter()
        .map(|p| load_config(p))
        .collect::<Result<Vec<_>, _>>()?;
    let mut dirs: Vec<&PathBuf> = parsed.iter().map(|c| &c.output_dir).collect();
    dirs.sort();
    if let Some(w) = dirs.windows(2).find(|w| w[0] == w[1]) {
        return Err(HarnessError::Usage(format!(
            "sweep configs share output_dir {}",
            w[0].display()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Usage(e.to_string()))?;
    Ok(pool.install(|| {
        configs
            .par_iter()
            .zip(parsed.par_iter())
            .map(|(p, c)| (p.clone(), cmd_run(c)))
            .collect()
    }))
}

/// Prints every check; `true` iff all pass.
pub fn cmd_verify(suite: &str, out: &mut dyn std::io::Write) -> Result<bool, HarnessError> {
    let suite: Suite = suite.parse()?;
    let checks = run_suite(suite);
    let mut ok = true;
    for c in &checks {
        ok &= c.pass;
        let _ = writeln!(out, "{c}");
    }
    let passed = checks.iter().filter(|c| c.pass).count();
    let _ = writeln!(out, "{passed}/{} checks passed", checks.len());
    Ok(ok)
}

/// Default fit window: resolved rows (tail fraction within the limit), minus the first 10% in time.
pub fn default_window(table: &Table) -> Result<(f64, f64), HarnessError> {
    let ts = table.column("t")?;
    let resolved_end = match table.column("tail_fraction_rho") {
        Ok(tail) => ts
            .iter()
            .zip(&tail)
            .take_while(|(_, f)| **f <= TAIL_FRACTION_LIMIT)
            .map(|(t, _)| *t)
            .last(),
        Err(_) => ts.last().copied(),
    };
    let (Some(&t0), Some(t1)) = (ts.first(), resolved_end) else {
        return Err(HarnessError::Usage("no resolved rows to fit".into()));
    };
    Ok((t0 + 0.1 * (t1 - t0), t1))
}

pub fn cmd_fit(
    csv: &Path,
    column: &str,
    window: Option<(f64, f64)>,
) -> Result<GrowthFit, HarnessError> {
    let table = Table::read(csv)?;
    let ts = table.column("t")?;
    let values = table.column(column)?;
    let window = match window {
        Some(w) => w,
        None => default_window(&table)?,
    };
    if let Some((row, (_, v))) = ts
        .iter()
        .zip(&values)
        .enumerate()
        .find(|(_, (t, v))| **t >= window.0 && **t <= window.1 && !(**v > 0.0))
    {
        return Err(HarnessError::NonPositive {
            column: column.to_string(),
            row: row + 1,
            value: *v,
        });
    }
    let series: Vec<(f64, f64)> = ts.into_iter().zip(values).collect();
    Ok(growth_fit(&series, window)?)
}

pub fn fit_report(column: &str, fit: &GrowthFit) -> String {
    format!(
        "column {column}, window [{}, {}], {} samples\n\
         linear fit:    log v = a + b t, b = {:.6}, R^2 = {:.6}, rss = {:.6e}\n\
         quadratic fit: log v = a + b t + q t^2, b = {:.6}, q = {:.6}, rss = {:.6e}\n\
         quadratic term removes {:.2}% of the linear residual\n\
         fit b={:.6} q={:.6} r2={:.6}\n",
        fit.window.0,
        fit.window.1,
        fit.samples,
        fit.linear_only_slope,
        fit.r_squared,
        fit.rss_linear,
        fit.linear_slope,
        fit.quadratic_coeff,
        fit.rss_quadratic,
        100.0 * fit.quadratic_improvement(),
        fit.linear_slope,
        fit.quadratic_coeff,
        fit.r_squared
    )
}

pub fn cmd_plot(csv: &Path, columns: &[String], out: &Path, log_y: bool) -> Result<(), HarnessError> {
    let table = Table::read(csv)?;
    let svg = plot_svg(&table, columns, log_y)?;
    write_text(out, &svg)
}
