//! Command-line front end: `analyze`, `fsd`, and `screen` subcommands over a
//! config-described corpus.
//!
//! Exit codes: 0 success, 1 input error (unreadable or malformed input,
//! invalid config), 2 internal error (output failures). Sectors are
//! processed in parallel up to `--workers`; output files are written
//! atomically (write-temp-then-rename) and their contents do not depend on
//! scheduling, so two runs with identical inputs produce byte-identical
//! output trees at any worker count.

mod config;

pub use config::{parse_config_text, resolve, Overrides, RunConfig, VariantSelection};

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use thiserror::Error;

use crate::conformance::{
    conformance_report, descriptive_stats, BenfordReference, ConformanceError, DigitFrequencies,
};
use crate::digits::FsdDistribution;
use crate::ingest::{compute_log_returns, parse_price_panel, pool_sector, PricePanel, PooledSample};
use crate::reporting::{
    bar_chart_csv, bar_chart_data, histogram_csv, histogram_data, render_conformance_table,
    render_conformance_text, render_descriptive_table, render_frequency_table, BarChartRow,
    HistogramSpec, ReportBundle, SectorEntry, Variant, DEFAULT_BIN_WIDTH,
};
use crate::screening::{adapt_panel, detect_panel, ScreeningSummary};

/// Environment variable naming a default config file used when `--config`
/// is not given.
pub const CONFIG_ENV_VAR: &str = "BENFORD_AUDIT_CONFIG";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 1,
            CliError::Internal(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "benford-audit",
    version,
    about = "First-significant-digit conformance auditing for panel price-index data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the full pipeline and write report tables, plot data, and the
    /// screening audit log to the output directory.
    Analyze(CommonArgs),
    /// Score a plain list of numbers (one per line): FSD table plus a
    /// conformance row, printed to stdout.
    Fsd(CommonArgs),
    /// Screening only: print the repetition audit log.
    Screen(CommonArgs),
}

#[derive(Debug, Args, Default)]
struct CommonArgs {
    /// Config file (flat `key = value` lines); flags override file values.
    /// Defaults to $BENFORD_AUDIT_CONFIG when set.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Input file.
    #[arg(long)]
    input: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Field delimiter for panel input (single character, or \t).
    #[arg(long)]
    delimiter: Option<String>,
    /// Date spelling in the date column: "DD/MM/YY" or "YYYY-MM".
    #[arg(long)]
    date_format: Option<String>,
    /// Header name of the date column.
    #[arg(long)]
    date_column: Option<String>,
    /// Header name of the country column.
    #[arg(long)]
    country_column: Option<String>,
    /// Header name of the sector column.
    #[arg(long)]
    sector_column: Option<String>,
    /// Header name of the level column.
    #[arg(long)]
    level_column: Option<String>,
    /// Minimum identical-run length flagged by screening (>= 2).
    #[arg(long)]
    min_run: Option<String>,
    /// Deletion policy: "drop-run-tail" or "drop-entire-run".
    #[arg(long)]
    policy: Option<String>,
    /// d* normalization: "table-consistent" or "literal-eq3".
    #[arg(long)]
    dstar_mode: Option<String>,
    /// Comma-separated sector filter.
    #[arg(long)]
    sectors: Option<String>,
    /// Datasets to report: "raw", "adapted", or "both".
    #[arg(long)]
    variant: Option<String>,
    /// Worker threads for per-sector computation (default: CPU count).
    #[arg(long)]
    workers: Option<String>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            input: self.input.clone(),
            out: self.out.clone(),
            delimiter: self.delimiter.clone(),
            date_format: self.date_format.clone(),
            date_column: self.date_column.clone(),
            country_column: self.country_column.clone(),
            sector_column: self.sector_column.clone(),
            level_column: self.level_column.clone(),
            min_run: self.min_run.clone(),
            policy: self.policy.clone(),
            dstar_mode: self.dstar_mode.clone(),
            sectors: self.sectors.clone(),
            variant: self.variant.clone(),
            workers: self.workers.clone(),
        }
    }

    fn resolve(&self) -> Result<RunConfig, CliError> {
        let config_path = self.config.clone().or_else(|| {
            std::env::var(CONFIG_ENV_VAR)
                .ok()
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        });
        let file_overrides = match config_path {
            Some(path) => {
                let text = fs::read_to_string(&path).map_err(|e| {
                    CliError::Input(format!("cannot read config {}: {e}", path.display()))
                })?;
                parse_config_text(&text, &path.display().to_string())?
            }
            None => Overrides::default(),
        };
        config::resolve(self.overrides().or(file_overrides))
    }
}

/// Parse arguments and dispatch; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match &cli.command {
        Command::Analyze(args) => args
            .resolve()
            .and_then(|config| cmd_analyze(&config).map(|_| String::new())),
        Command::Fsd(args) => args.resolve().and_then(|config| cmd_fsd(&config)),
        Command::Screen(args) => args.resolve().and_then(|config| cmd_screen(&config)),
    };
    match outcome {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn read_panel(config: &RunConfig) -> Result<PricePanel, CliError> {
    let file = fs::File::open(&config.input)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", config.input.display())))?;
    let provenance = config.input.display().to_string();
    let mut panel = parse_price_panel(file, &config.schema, &provenance)
        .map_err(|e| CliError::Input(format!("{}: {e}", config.input.display())))?;
    if let Some(sectors) = &config.sectors {
        panel.retain_sectors(sectors);
    }
    Ok(panel)
}

/// Per-sector results for one panel variant, plus histogram data.
type SectorOutputs = (Vec<SectorEntry>, Vec<(String, HistogramSpec)>, Vec<(String, Vec<BarChartRow>)>);

/// One sector's entry plus its optional histogram and bar-chart payloads.
type SectorArtifacts = (
    SectorEntry,
    Option<(String, HistogramSpec)>,
    Option<(String, Vec<BarChartRow>)>,
);

fn sector_outputs(
    panel: &PricePanel,
    reference: &BenfordReference,
    config: &RunConfig,
) -> Result<SectorOutputs, CliError> {
    let sectors = panel.sectors();
    // Parallel per-sector work; collect preserves input order, so results
    // are deterministic at any worker count.
    let results: Vec<SectorArtifacts> = sectors
        .par_iter()
        .map(|sector| sector_entry(panel, sector, reference, config))
        .collect::<Result<_, _>>()?;
    let mut entries = Vec::new();
    let mut histograms = Vec::new();
    let mut bar_charts = Vec::new();
    for (entry, histogram, chart) in results {
        entries.push(entry);
        histograms.extend(histogram);
        bar_charts.extend(chart);
    }
    Ok((entries, histograms, bar_charts))
}

fn sector_entry(
    panel: &PricePanel,
    sector: &str,
    reference: &BenfordReference,
    config: &RunConfig,
) -> Result<SectorArtifacts, CliError> {
    // Series iterate in (country, sector) order, so pooling order is fixed.
    let returns: Vec<_> = panel
        .series()
        .filter(|s| s.sector() == sector)
        .map(compute_log_returns)
        .collect();
    let sample = pool_sector(&returns, sector).map_err(internal)?;
    let stats = if sample.is_empty() {
        None
    } else {
        Some(descriptive_stats(&sample).map_err(internal)?)
    };
    let distribution = FsdDistribution::from_sample(&sample).map_err(internal)?;
    let conformance = match DigitFrequencies::from_distribution(&distribution) {
        Ok(freqs) => {
            match conformance_report(sector, &freqs, reference, config.d_star_mode) {
                Ok(report) => Some(report),
                // A zero-variance frequency vector has no defined
                // correlation; the sector is reported without a row.
                Err(ConformanceError::ZeroVariance) => None,
                Err(e) => return Err(internal(e)),
            }
        }
        Err(ConformanceError::EmptyDistribution) => None,
        Err(e) => return Err(internal(e)),
    };
    let histogram = if sample.is_empty() {
        None
    } else {
        Some((
            sector.to_string(),
            histogram_data(&sample, DEFAULT_BIN_WIDTH).map_err(internal)?,
        ))
    };
    let chart = bar_chart_data(&distribution, reference)
        .ok()
        .map(|rows| (sector.to_string(), rows));
    Ok((
        SectorEntry {
            sector: sector.to_string(),
            stats,
            distribution,
            conformance,
        },
        histogram,
        chart,
    ))
}

fn internal(e: impl std::fmt::Display) -> CliError {
    CliError::Internal(e.to_string())
}

/// Write `contents` to `path` atomically (temp file + rename).
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)
        .and_then(|()| fs::rename(&tmp, path))
        .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| CliError::Internal(format!("cannot serialize: {e}")))
}

/// Full pipeline: ingest, screen, score, and write report files.
///
/// Returns the in-memory bundle that was written.
pub fn cmd_analyze(config: &RunConfig) -> Result<ReportBundle, CliError> {
    let out_dir = config
        .out_dir
        .as_ref()
        .ok_or_else(|| CliError::Input("analyze requires an output directory (--out)".into()))?
        .clone();

    let panel = read_panel(config)?;
    let flags = detect_panel(&panel, &config.screening);
    let (adapted, screening) =
        adapt_panel(&panel, &flags, &config.screening).map_err(internal)?;

    let reference = BenfordReference::new();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(internal)?;
    let (raw_result, adapted_result) = pool.install(|| {
        rayon::join(
            || sector_outputs(&panel, &reference, config),
            || sector_outputs(&adapted, &reference, config),
        )
    });
    let (raw, raw_hist, raw_chart) = raw_result?;
    let (adapted_entries, adapted_hist, adapted_chart) = adapted_result?;

    let bundle = ReportBundle {
        raw,
        adapted: adapted_entries,
        screening: screening.clone(),
    };

    fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out_dir.display())))?;

    for (variant, histograms, charts) in [
        (Variant::Raw, &raw_hist, &raw_chart),
        (Variant::Adapted, &adapted_hist, &adapted_chart),
    ] {
        if !config.variant.includes(variant) {
            continue;
        }
        let v = variant.as_str();
        let write = |name: String, contents: String| write_atomic(&out_dir.join(name), &contents);
        write(
            format!("table_frequency_{v}.csv"),
            render_frequency_table(&bundle, variant).map_err(internal)?,
        )?;
        write(
            format!("table_conformance_{v}.csv"),
            render_conformance_table(&bundle, variant).map_err(internal)?,
        )?;
        write(
            format!("table_descriptive_{v}.csv"),
            render_descriptive_table(&bundle, variant).map_err(internal)?,
        )?;
        let entries = match variant {
            Variant::Raw => &bundle.raw,
            Variant::Adapted => &bundle.adapted,
        };
        write(format!("table_sectors_{v}.json"), to_json(entries)?)?;
        write(format!("fig_histogram_{v}.csv"), histogram_csv(histograms))?;
        write(format!("fig_barchart_{v}.csv"), bar_chart_csv(charts))?;
    }

    write_atomic(
        &out_dir.join("screening_summary.json"),
        &to_json(&screening)?,
    )?;
    write_atomic(&out_dir.join("screening_audit.log"), &screening.audit_log())?;

    Ok(bundle)
}

/// Load one number per line; blank lines are skipped, anything else that
/// fails to parse as a finite number is an input error naming the line.
fn read_number_lines(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let value: f64 = line.parse().map_err(|_| {
            CliError::Input(format!(
                "{}:{}: not a number: {line:?}",
                path.display(),
                idx + 1
            ))
        })?;
        if !value.is_finite() {
            return Err(CliError::Input(format!(
                "{}:{}: not a finite number: {line:?}",
                path.display(),
                idx + 1
            )));
        }
        values.push(value);
    }
    Ok(values)
}

/// Digit tally and conformance row for a plain sample of numbers.
pub fn cmd_fsd(config: &RunConfig) -> Result<String, CliError> {
    let values = read_number_lines(&config.input)?;
    let label = config
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sample".to_string());
    let sample = PooledSample::from_values(label.clone(), values);
    let distribution = FsdDistribution::from_sample(&sample).map_err(internal)?;
    let freqs = DigitFrequencies::from_distribution(&distribution).map_err(|_| {
        CliError::Input(format!(
            "{}: empty distribution after exclusions ({} zero values)",
            config.input.display(),
            distribution.excluded()
        ))
    })?;
    let reference = BenfordReference::new();
    let report = conformance_report(&label, &freqs, &reference, config.d_star_mode)
        .map_err(|e| CliError::Input(format!("{}: {e}", config.input.display())))?;

    let entry = SectorEntry {
        sector: label,
        stats: None,
        distribution: distribution.clone(),
        conformance: Some(report),
    };
    let bundle = ReportBundle {
        raw: vec![entry.clone()],
        adapted: vec![entry],
        screening: ScreeningSummary {
            flags: vec![],
            removed_observations: vec![],
            sector_return_counts: vec![],
        },
    };
    let text = render_conformance_text(&bundle, Variant::Raw).map_err(internal)?;

    if let Some(out_dir) = &config.out_dir {
        fs::create_dir_all(out_dir)
            .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out_dir.display())))?;
        write_atomic(&out_dir.join("table_fsd_sample.csv"), &distribution.digit_csv())?;
        write_atomic(
            &out_dir.join("table_fsd_conformance.csv"),
            &render_conformance_table(&bundle, Variant::Raw).map_err(internal)?,
        )?;
    }

    Ok(format!("{}\n{}", distribution.digit_csv(), text))
}

/// Screening only: detect repetition runs, optionally write the summary,
/// and return the audit log.
pub fn cmd_screen(config: &RunConfig) -> Result<String, CliError> {
    let panel = read_panel(config)?;
    let flags = detect_panel(&panel, &config.screening);
    let (_, screening) = adapt_panel(&panel, &flags, &config.screening).map_err(internal)?;

    if let Some(out_dir) = &config.out_dir {
        fs::create_dir_all(out_dir)
            .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", out_dir.display())))?;
        write_atomic(
            &out_dir.join("screening_summary.json"),
            &to_json(&screening)?,
        )?;
        write_atomic(&out_dir.join("screening_audit.log"), &screening.audit_log())?;
    }

    Ok(screening.audit_log())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
    }

    fn china_config(out: Option<PathBuf>) -> RunConfig {
        let overrides = Overrides {
            input: Some(fixture("china_2000_2001.csv").display().to_string()),
            out: out.map(|p| p.display().to_string()),
            date_format: Some("DD/MM/YY".into()),
            workers: Some("2".into()),
            ..Overrides::default()
        };
        config::resolve(overrides).unwrap()
    }

    #[test]
    fn screen_reports_the_hea_run() {
        let log = cmd_screen(&china_config(None)).unwrap();
        let lines: Vec<&str> = log.lines().collect();
        assert_eq!(lines.len(), 1);
        assert_eq!(
            lines[0],
            "REPETITION country=China sector=HEA start=2000-09 length=7 value=444.19"
        );
    }

    #[test]
    fn analyze_requires_out_dir() {
        let err = cmd_analyze(&china_config(None)).unwrap_err();
        assert!(matches!(err, CliError::Input(_)));
    }

    #[test]
    fn missing_input_is_an_input_error() {
        let mut config = china_config(None);
        config.input = PathBuf::from("/no/such/file.csv");
        let err = cmd_screen(&config).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn fsd_rejects_non_numeric_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("values.txt");
        fs::write(&path, "1.5\n2.5\nnot-a-number\n").unwrap();
        let mut config = china_config(None);
        config.input = path;
        let err = cmd_fsd(&config).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains(":3:"));
    }

    #[test]
    fn fsd_rejects_all_zero_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("zeros.txt");
        fs::write(&path, "0\n").unwrap();
        let mut config = china_config(None);
        config.input = path;
        let err = cmd_fsd(&config).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("empty distribution"));
    }
}
