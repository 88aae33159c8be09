//! Command-line driver: runs one verification pipeline per invocation and
//! writes `<name>.report.json` (and `<name>.table.csv` for sweeps).
//!
//! Exit codes: 0 all pass criteria true; 1 computation failure; 2 validation
//! failure (bad config, unknown keys, bad sweep parameters).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use tkindex::scenario::{run, sweep, ScenarioConfig};
use tkindex::Error;

#[derive(Parser)]
#[command(
    name = "tkindex",
    about = "Desk-scale workbench pipelines for decomposable twists",
    version
)]
struct Cli {
    /// pipeline: cech-h | dd-class | twisted-derham | family-index |
    /// index-compare | scl-check | thom-check | grr
    subcommand: String,
    /// JSON scenario configuration
    #[arg(long)]
    config: PathBuf,
    /// output directory (default: REPORT_DIR env var, then current dir)
    #[arg(long)]
    out: Option<PathBuf>,
    /// sweep one parameter over ≥ 3 values, e.g. --sweep resolution=1,2,3
    #[arg(long)]
    sweep: Option<String>,
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("REPORT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn emit(path: &PathBuf, text: &str) -> Result<(), Error> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

fn diagnostics(kind: &str, message: &str) {
    eprintln!(
        "{}",
        serde_json::json!({ "error": { "kind": kind, "message": message } })
    );
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            }
        }
        Err(Error::Validation(m)) => {
            diagnostics("validation", &m);
            ExitCode::from(2)
        }
        Err(e) => {
            diagnostics("computation", &e.to_string());
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::validation(format!("cannot read config {:?}: {e}", cli.config)))?;
    let cfg = ScenarioConfig::from_json(&text)?;
    let dir = out_dir(cli);

    match &cli.sweep {
        None => {
            let report = run(&cli.subcommand, &cfg)?;
            let path = dir.join(format!("{}.report.json", cfg.name));
            emit(&path, &report.to_json())?;
            println!("{}", report.to_json());
            Ok(report.all_pass())
        }
        Some(spec) => {
            let (param, list) = spec
                .split_once('=')
                .ok_or_else(|| Error::validation("sweep syntax: key=v1,v2,v3"))?;
            let values: Vec<f64> = list
                .split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::validation(format!("bad sweep value {v:?}: {e}")))
                })
                .collect::<Result<_, _>>()?;
            let (table, reports) = sweep(&cli.subcommand, &cfg, param, &values)?;
            let csv = table.to_csv();
            emit(&dir.join(format!("{}.table.csv", cfg.name)), &csv)?;
            let last = reports.last().expect("non-empty sweep");
            emit(
                &dir.join(format!("{}.report.json", cfg.name)),
                &last.to_json(),
            )?;
            print!("{csv}");
            Ok(reports.iter().all(|r| r.all_pass()))
        }
    }
}
