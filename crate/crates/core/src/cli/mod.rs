//! The `qmqkd` command line.
//!
//! Exit codes: 0 success, 1 runtime failure (including failed checks),
//! 2 bad arguments or configuration.

mod algebra;
mod output;

pub use algebra::{run_checks, Check};
pub use output::Provenance;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::interferometer::fading_scan;
use crate::qkd::{calibrate, qber_from_optics, simulate_session, sweep_distance, CalibrationReport};
use output::{emit, summary_json, CsvTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qmqkd", version, about = "Q-M interferometer QKD simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// Scenario TOML file, or a preset name (paper-50km, paper-100km, fading-demo).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; defaults to the scenario's output_path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Verify the operator identities and print residuals.
    AlgebraCheck {
        /// Pass threshold for every residual.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Fringe visibility under random channel and arm birefringence.
    FadingScan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Time series of QBER and secure key rate with phase drift.
    Session {
        #[command(flatten)]
        common: Common,
    },
    /// Analytic secure key rate against fiber length.
    SweepDistance {
        #[command(flatten)]
        common: Common,
        /// Comma-separated fiber lengths in km.
        #[arg(long, value_delimiter = ',')]
        lengths: Option<Vec<f64>>,
        #[arg(long)]
        loss_db_per_km: Option<f64>,
    },
    /// Fit detector and visibility parameters; writes the calibrated scenario.
    Calibrate {
        #[command(flatten)]
        common: Common,
    },
}

/// Parse `args` (including the program name) and run the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "qmqkd: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

fn load(common: &Common) -> Result<ScenarioConfig> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_path<'a>(common: &'a Common, cfg: &'a ScenarioConfig) -> Option<&'a Path> {
    common.out.as_deref().or(cfg.output_path.as_deref())
}

/// CSV goes to the output path (or stdout); the JSON summary goes to stdout
/// when the CSV went to a file and to stderr otherwise. With `--format json`
/// only the summary is written.
fn write_outputs(
    format: Format,
    path: Option<&Path>,
    csv: String,
    summary: String,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<()> {
    match format {
        Format::Json => emit(&summary, path, stdout),
        Format::Csv => {
            emit(&csv, path, stdout)?;
            if path.is_some() {
                stdout.write_all(summary.as_bytes())?;
            } else {
                stderr.write_all(summary.as_bytes())?;
            }
            Ok(())
        }
    }
}

fn calibrated(cfg: &mut ScenarioConfig) -> Result<Option<CalibrationReport>> {
    if !cfg.calibration.enabled {
        return Ok(None);
    }
    let report = calibrate(&cfg.source, &cfg.detector, &cfg.protocol, &cfg.drift, &cfg.calibration.targets)?;
    cfg.detector = report.detector;
    cfg.protocol = report.protocol;
    Ok(Some(report))
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match command {
        Command::AlgebraCheck { tol, samples, seed, out, format } => {
            if !(tol > 0.0) || samples < 3 {
                return Err(Error::InvalidArgument("need tol > 0 and samples >= 3".into()));
            }
            let checks = run_checks(tol, samples, seed);
            let all_pass = checks.iter().all(|c| c.pass);
            let prov = Provenance::new("algebra-check", "builtin", String::new(), seed);
            let text = match format {
                Format::Json => summary_json(&prov, json!({ "all_pass": all_pass, "checks": checks })),
                Format::Csv => {
                    let mut t = CsvTable::new(&prov, &["name", "residual", "tol", "pass"]);
                    for c in &checks {
                        t.row(&[&c.name, &c.residual, &c.tol, &c.pass]);
                    }
                    t.into_string()
                }
            };
            emit(&text, out.as_deref(), stdout)?;
            Ok(if all_pass { EXIT_OK } else { EXIT_FAILURE })
        }

        Command::FadingScan { common, samples } => {
            let mut cfg = load(&common)?;
            if let Some(n) = samples {
                cfg.fading.samples = n;
            }
            cfg.validate()?;
            let prov = Provenance::new("fading-scan", &cfg.name, cfg.hash(), cfg.seed);
            let mut table = CsvTable::new(&prov, &["scheme", "sample", "visibility"]);
            let mut summaries = Vec::new();
            for &scheme in &cfg.fading.schemes {
                let scan = fading_scan(scheme, cfg.fading.samples, cfg.seed)?;
                for (i, v) in scan.visibilities.iter().enumerate() {
                    table.row(&[&scheme, &i, v]);
                }
                summaries.push(scan.summary);
            }
            let summary = summary_json(&prov, json!({ "summary": summaries }));
            write_outputs(common.format, out_path(&common, &cfg), table.into_string(), summary, stdout, stderr)?;
            Ok(EXIT_OK)
        }

        Command::Session { common } => {
            let mut cfg = load(&common)?;
            let report = calibrated(&mut cfg)?;
            let result = simulate_session(
                &cfg.source,
                &cfg.channel,
                &cfg.detector,
                &cfg.protocol,
                &cfg.drift,
                &cfg.session_options(),
            )?;
            let prov = Provenance::new("session", &cfg.name, cfg.hash(), cfg.seed);
            let mut table = CsvTable::new(&prov, &["t_s", "qber", "rate_bps", "phase_error_rad"]);
            for b in &result.bins {
                table.row(&[&b.t_s, &b.qber, &b.rate_bps, &b.phase_error]);
            }
            let summary = summary_json(
                &prov,
                json!({ "summary": result.summary, "calibration": report, "detector": cfg.detector, "protocol": cfg.protocol }),
            );
            write_outputs(common.format, out_path(&common, &cfg), table.into_string(), summary, stdout, stderr)?;
            Ok(EXIT_OK)
        }

        Command::SweepDistance { common, lengths, loss_db_per_km } => {
            let mut cfg = load(&common)?;
            if let Some(l) = lengths {
                cfg.sweep.lengths_km = l;
            }
            if let Some(a) = loss_db_per_km {
                cfg.sweep.loss_db_per_km = a;
            }
            if cfg.sweep.lengths_km.is_empty() {
                return Err(Error::InvalidArgument("--lengths must name at least one length".into()));
            }
            cfg.validate()?;
            let report = calibrated(&mut cfg)?;
            let horizon = cfg.session_options().num_bins();
            let e_opt = qber_from_optics(0.0, cfg.protocol.intrinsic_visibility * cfg.drift.mean_cos_factor(horizon));
            let rows = sweep_distance(
                &cfg.source,
                &cfg.detector,
                &cfg.protocol,
                e_opt,
                cfg.sweep.loss_db_per_km,
                &cfg.sweep.lengths_km,
            )?;
            let prov = Provenance::new("sweep-distance", &cfg.name, cfg.hash(), cfg.seed);
            let mut table = CsvTable::new(&prov, &["length_km", "loss_db", "rate_bps"]);
            let mut json_rows = Vec::new();
            for (length, rate) in &rows {
                let loss = length * cfg.sweep.loss_db_per_km;
                table.row(&[length, &loss, rate]);
                json_rows.push(json!({ "length_km": length, "loss_db": loss, "rate_bps": rate }));
            }
            let summary = summary_json(&prov, json!({ "rows": json_rows, "calibration": report }));
            write_outputs(common.format, out_path(&common, &cfg), table.into_string(), summary, stdout, stderr)?;
            Ok(EXIT_OK)
        }

        Command::Calibrate { common } => {
            let mut cfg = load(&common)?;
            cfg.calibration.enabled = true;
            let report = calibrated(&mut cfg)?;
            cfg.calibration.enabled = false;
            let prov = Provenance::new("calibrate", &cfg.name, cfg.hash(), cfg.seed);
            if let Some(path) = out_path(&common, &cfg) {
                std::fs::write(path, cfg.to_toml())?;
            }
            stdout.write_all(summary_json(&prov, json!({ "calibration": report })).as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}
