//! `gluing --job job.json --out dir [--ci] [--threads n]`
//!
//! Writes `dir/report.json` and `dir/tables/*.csv`. Exit status: 0 on
//! success, 1 when the job does not validate, 2 when a cross-check fails
//! under `--ci`, 3 on internal errors. Errors are printed to stderr as JSON.

mod commands;
mod job;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use commands::{Artifacts, Failure};
use job::JobConfig;

#[derive(Parser, Debug)]
#[command(name = "gluing", version, about = "Run a gluing-orbit job file")]
struct Cli {
    /// Job file (JSON).
    #[arg(long)]
    job: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Treat cross-check failures as fatal.
    #[arg(long)]
    ci: bool,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn fail(code: u8, kind: &str, field: Option<&str>, message: &str) -> ExitCode {
    let mut err = json!({ "error": kind, "exit_code": code, "message": message });
    if let Some(f) = field {
        err["field"] = json!(f);
    }
    eprintln!("{err}");
    ExitCode::from(code)
}

/// Adds a trailing `seed` column to every row.
fn with_seed(csv_text: &str, seed: u64) -> Result<String, csv::Error> {
    let mut rd = csv::ReaderBuilder::new().has_headers(false).from_reader(csv_text.as_bytes());
    let mut w = csv::Writer::from_writer(Vec::new());
    for (i, rec) in rd.records().enumerate() {
        let mut rec = rec?;
        rec.push_field(&if i == 0 { "seed".to_string() } else { seed.to_string() });
        w.write_record(&rec)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
}

fn write_outputs(out: &Path, report: &serde_json::Value, artifacts: &Artifacts, seed: u64) -> Result<(), String> {
    let tables = out.join("tables");
    fs::create_dir_all(&tables).map_err(|e| format!("creating {}: {e}", tables.display()))?;
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())? + "\n";
    fs::write(out.join("report.json"), text).map_err(|e| format!("writing report.json: {e}"))?;
    for (name, body) in &artifacts.tables {
        let body = with_seed(body, seed).map_err(|e| format!("{name}: {e}"))?;
        fs::write(tables.join(name), body).map_err(|e| format!("writing {name}: {e}"))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(1, "validation", Some("--threads"), "--threads must be at least 1");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(3, "internal", None, &e.to_string());
        }
    }
    let text = match fs::read_to_string(&cli.job) {
        Ok(t) => t,
        Err(e) => return fail(1, "validation", Some("--job"), &format!("cannot read {}: {e}", cli.job.display())),
    };
    let base = cli.job.parent().unwrap_or(Path::new("."));
    let job = match JobConfig::from_json(&text).and_then(|c| c.validate(base)) {
        Ok(j) => j,
        Err(e) => return fail(1, "validation", Some(&e.field), &e.message),
    };
    let outcome = std::panic::catch_unwind(|| commands::run(&job));
    let artifacts = match outcome {
        Ok(Ok(a)) => a,
        Ok(Err(Failure::Invalid(e))) => return fail(1, "validation", Some(&e.field), &e.message),
        Ok(Err(Failure::Internal(m))) => return fail(3, "internal", None, &m),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            return fail(3, "internal", None, &msg);
        }
    };
    let report = json!({
        "command": job.config.command,
        "system": job.system.label,
        "metric": job.system.metric_convention(),
        "seed": job.config.seed,
        "params": job.config.params,
        "cross_check_failures": artifacts.failures,
        "result": artifacts.report,
    });
    if let Err(m) = write_outputs(&cli.out, &report, &artifacts, job.config.seed) {
        return fail(3, "internal", None, &m);
    }
    if cli.ci && !artifacts.failures.is_empty() {
        return fail(2, "cross_check", None, &artifacts.failures.join("; "));
    }
    ExitCode::SUCCESS
}
