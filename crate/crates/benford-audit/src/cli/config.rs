//! Flat key/value run configuration.
//!
//! A config file is UTF-8 text, one `key = value` pair per line, `#`
//! comments and blank lines ignored. Every key can be overridden by the
//! same-named command-line flag; flags win. Unknown keys are errors so a
//! typo cannot silently change a run.

use std::path::PathBuf;

use crate::cli::CliError;
use crate::conformance::DStarMode;
use crate::ingest::{DateFormat, ParseSchema};
use crate::reporting::Variant;
use crate::screening::{DeletionPolicy, ScreeningConfig};

/// String-level settings collected from a config file or from flags.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub input: Option<String>,
    pub out: Option<String>,
    pub delimiter: Option<String>,
    pub date_format: Option<String>,
    pub date_column: Option<String>,
    pub country_column: Option<String>,
    pub sector_column: Option<String>,
    pub level_column: Option<String>,
    pub min_run: Option<String>,
    pub policy: Option<String>,
    pub dstar_mode: Option<String>,
    pub sectors: Option<String>,
    pub variant: Option<String>,
    pub workers: Option<String>,
}

impl Overrides {
    /// Merge, with `self` taking precedence over `fallback`.
    pub fn or(self, fallback: Overrides) -> Overrides {
        Overrides {
            input: self.input.or(fallback.input),
            out: self.out.or(fallback.out),
            delimiter: self.delimiter.or(fallback.delimiter),
            date_format: self.date_format.or(fallback.date_format),
            date_column: self.date_column.or(fallback.date_column),
            country_column: self.country_column.or(fallback.country_column),
            sector_column: self.sector_column.or(fallback.sector_column),
            level_column: self.level_column.or(fallback.level_column),
            min_run: self.min_run.or(fallback.min_run),
            policy: self.policy.or(fallback.policy),
            dstar_mode: self.dstar_mode.or(fallback.dstar_mode),
            sectors: self.sectors.or(fallback.sectors),
            variant: self.variant.or(fallback.variant),
            workers: self.workers.or(fallback.workers),
        }
    }
}

/// Parse config text; `origin` names the file in diagnostics.
pub fn parse_config_text(text: &str, origin: &str) -> Result<Overrides, CliError> {
    let mut overrides = Overrides::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Input(format!(
                "{origin}:{}: expected `key = value`, got {line:?}",
                idx + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim().to_string();
        let slot = match key {
            "input" => &mut overrides.input,
            "out" => &mut overrides.out,
            "delimiter" => &mut overrides.delimiter,
            "date_format" => &mut overrides.date_format,
            "date_column" => &mut overrides.date_column,
            "country_column" => &mut overrides.country_column,
            "sector_column" => &mut overrides.sector_column,
            "level_column" => &mut overrides.level_column,
            "min_run" => &mut overrides.min_run,
            "policy" => &mut overrides.policy,
            "dstar_mode" => &mut overrides.dstar_mode,
            "sectors" => &mut overrides.sectors,
            "variant" => &mut overrides.variant,
            "workers" => &mut overrides.workers,
            other => {
                return Err(CliError::Input(format!(
                    "{origin}:{}: unknown config key {other:?}",
                    idx + 1
                )))
            }
        };
        *slot = Some(value);
    }
    Ok(overrides)
}

/// Which datasets to report on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantSelection {
    Raw,
    Adapted,
    Both,
}

impl VariantSelection {
    pub fn includes(&self, variant: Variant) -> bool {
        match self {
            VariantSelection::Raw => variant == Variant::Raw,
            VariantSelection::Adapted => variant == Variant::Adapted,
            VariantSelection::Both => true,
        }
    }
}

/// Fully resolved run settings.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub schema: ParseSchema,
    pub screening: ScreeningConfig,
    pub d_star_mode: DStarMode,
    pub sectors: Option<Vec<String>>,
    pub variant: VariantSelection,
    pub workers: usize,
}

/// Turn merged overrides into a typed [`RunConfig`].
pub fn resolve(overrides: Overrides) -> Result<RunConfig, CliError> {
    let input = overrides
        .input
        .ok_or_else(|| CliError::Input("no input given (--input or config key `input`)".into()))?;

    let mut schema = ParseSchema::default();
    if let Some(d) = overrides.delimiter {
        schema.delimiter = parse_delimiter(&d)?;
    }
    if let Some(f) = overrides.date_format {
        schema.date_format = f.parse::<DateFormat>().map_err(CliError::Input)?;
    }
    if let Some(c) = overrides.date_column {
        schema.date_column = c;
    }
    if let Some(c) = overrides.country_column {
        schema.country_column = c;
    }
    if let Some(c) = overrides.sector_column {
        schema.sector_column = c;
    }
    if let Some(c) = overrides.level_column {
        schema.level_column = c;
    }

    let min_run = match overrides.min_run {
        Some(raw) => raw
            .parse::<usize>()
            .map_err(|_| CliError::Input(format!("min_run must be an integer, got {raw:?}")))?,
        None => ScreeningConfig::default().min_run,
    };
    let policy = match overrides.policy {
        Some(raw) => raw.parse::<DeletionPolicy>().map_err(CliError::Input)?,
        None => ScreeningConfig::default().policy,
    };
    let screening =
        ScreeningConfig::new(min_run, policy).map_err(|e| CliError::Input(e.to_string()))?;

    let d_star_mode = match overrides.dstar_mode {
        Some(raw) => raw.parse::<DStarMode>().map_err(CliError::Input)?,
        None => DStarMode::TableConsistent,
    };

    let sectors = overrides.sectors.map(|raw| {
        raw.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect::<Vec<_>>()
    });

    let variant = match overrides.variant.as_deref() {
        None | Some("both") => VariantSelection::Both,
        Some("raw") => VariantSelection::Raw,
        Some("adapted") => VariantSelection::Adapted,
        Some(other) => {
            return Err(CliError::Input(format!(
                "unknown variant {other:?} (expected \"raw\", \"adapted\", or \"both\")"
            )))
        }
    };

    let workers = match overrides.workers {
        Some(raw) => {
            let w = raw
                .parse::<usize>()
                .map_err(|_| CliError::Input(format!("workers must be an integer, got {raw:?}")))?;
            if w == 0 {
                return Err(CliError::Input("workers must be at least 1".into()));
            }
            w
        }
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };

    Ok(RunConfig {
        input: PathBuf::from(input),
        out_dir: overrides.out.map(PathBuf::from),
        schema,
        screening,
        d_star_mode,
        sectors,
        variant,
        workers,
    })
}

fn parse_delimiter(raw: &str) -> Result<u8, CliError> {
    let bytes = raw.as_bytes();
    match bytes {
        [b] => Ok(*b),
        [b'\\', b't'] => Ok(b'\t'),
        _ => Err(CliError::Input(format!(
            "delimiter must be a single character (or \\t), got {raw:?}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# run settings
input = data/panel.csv
out = out
delimiter = ;
date_format = DD/MM/YY
date_column = period
min_run = 5
policy = drop-entire-run
dstar_mode = literal-eq3
sectors = MATS, HEA
variant = raw
workers = 2
";
        let config = resolve(parse_config_text(text, "test.cfg").unwrap()).unwrap();
        assert_eq!(config.input, PathBuf::from("data/panel.csv"));
        assert_eq!(config.schema.delimiter, b';');
        assert_eq!(config.schema.date_column, "period");
        assert_eq!(config.screening.min_run, 5);
        assert_eq!(config.screening.policy, DeletionPolicy::DropEntireRun);
        assert_eq!(config.d_star_mode, DStarMode::LiteralEq3);
        assert_eq!(
            config.sectors,
            Some(vec!["MATS".to_string(), "HEA".to_string()])
        );
        assert_eq!(config.variant, VariantSelection::Raw);
        assert_eq!(config.workers, 2);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = parse_config_text("no_such_key = 1\n", "test.cfg").unwrap_err();
        assert!(err.to_string().contains("no_such_key"));
    }

    #[test]
    fn flags_override_file_values() {
        let file = parse_config_text("input = a.csv\nmin_run = 4\n", "f").unwrap();
        let flags = Overrides {
            min_run: Some("6".into()),
            ..Overrides::default()
        };
        let config = resolve(flags.or(file)).unwrap();
        assert_eq!(config.input, PathBuf::from("a.csv"));
        assert_eq!(config.screening.min_run, 6);
    }

    #[test]
    fn defaults_apply() {
        let config = resolve(Overrides {
            input: Some("x.csv".into()),
            ..Overrides::default()
        })
        .unwrap();
        assert_eq!(config.schema.delimiter, b',');
        assert_eq!(config.screening, ScreeningConfig::default());
        assert_eq!(config.d_star_mode, DStarMode::TableConsistent);
        assert_eq!(config.variant, VariantSelection::Both);
        assert!(config.workers >= 1);
    }

    #[test]
    fn invalid_values_are_input_errors() {
        let bad = |key: &str, value: &str| {
            let text = format!("input = x.csv\n{key} = {value}\n");
            resolve(parse_config_text(&text, "f").unwrap()).unwrap_err()
        };
        assert!(matches!(bad("min_run", "1"), CliError::Input(_)));
        assert!(matches!(bad("min_run", "abc"), CliError::Input(_)));
        assert!(matches!(bad("policy", "nope"), CliError::Input(_)));
        assert!(matches!(bad("dstar_mode", "nope"), CliError::Input(_)));
        assert!(matches!(bad("variant", "nope"), CliError::Input(_)));
        assert!(matches!(bad("workers", "0"), CliError::Input(_)));
        assert!(matches!(bad("delimiter", ",,"), CliError::Input(_)));
        assert!(matches!(bad("date_format", "MM/DD"), CliError::Input(_)));
    }
}
