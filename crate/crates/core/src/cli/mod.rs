//! The `tripwell` command-line front end.
//!
//! Every subcommand writes one table (CSV or JSON) to `--out` or stdout.
//! With `--out`, a `<out>.manifest.json` records the resolved flags; passing
//! it back through `--config` repeats the run.

mod args;
mod commands;
mod output;

use std::ffi::OsString;
use std::io::Write;

use clap::error::ErrorKind;
use clap::Parser;

pub use args::{Cli, Command, Format, Grid, LzCommand, Spacing, StirapCommand};
pub use output::{manifest_path, Cell, RunManifest, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match parse(&argv) {
        Ok(cli) => cli,
        Err(code) => return code,
    };
    match execute(&cli, &argv) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let kind = match e {
                CliError::Usage(_) => "usage error",
                CliError::Numerical(_) => "numerical failure",
            };
            eprintln!("tripwell: {kind}: {e}");
            e.exit_code()
        }
    }
}

fn clap_exit(e: clap::Error) -> i32 {
    let _ = e.print();
    match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
        _ => EXIT_USAGE,
    }
}

fn parse(argv: &[OsString]) -> Result<Cli, i32> {
    let cli = Cli::try_parse_from(argv).map_err(clap_exit)?;
    let Some(path) = &cli.global.config else {
        return Ok(cli);
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("tripwell: usage error: cannot read config {}: {e}", path.display());
        EXIT_USAGE
    })?;
    let pairs = config_pairs(&text).map_err(|e| {
        eprintln!("tripwell: usage error: config {}: {e}", path.display());
        EXIT_USAGE
    })?;
    // file values go right after the subcommand so that explicit flags,
    // which come later, take precedence
    let insert_at = subcommand_end(argv, &cli.command.path());
    let mut merged: Vec<OsString> = argv[..insert_at].to_vec();
    merged.extend(pairs.iter().map(|(k, v)| OsString::from(format!("--{k}={v}"))));
    merged.extend_from_slice(&argv[insert_at..]);
    Cli::try_parse_from(&merged).map_err(clap_exit)
}

fn subcommand_end(argv: &[OsString], path: &[&str; 2]) -> usize {
    let mut idx = 0;
    for token in path.iter().filter(|t| !t.is_empty()) {
        match argv.iter().skip(idx + 1).position(|a| a == token) {
            Some(p) => idx += p + 1,
            None => break,
        }
    }
    idx + 1
}

/// `key = value` lines (`#` comments), or a JSON object / run manifest.
fn config_pairs(text: &str) -> Result<Vec<(String, String)>, String> {
    let trimmed = text.trim_start();
    let mut pairs = Vec::new();
    if trimmed.starts_with('{') {
        let doc: serde_json::Value = serde_json::from_str(trimmed).map_err(|e| e.to_string())?;
        let obj = doc.get("config").unwrap_or(&doc);
        let obj = obj.as_object().ok_or("expected a JSON object of flags")?;
        for (k, v) in obj {
            let value = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Null => continue,
                other => other.to_string(),
            };
            pairs.push((k.clone(), value));
        }
    } else {
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
            pairs.push((k.trim().trim_start_matches("--").to_string(), v.trim().to_string()));
        }
    }
    pairs.retain(|(k, _)| k != "config");
    Ok(pairs)
}

fn execute(cli: &Cli, argv: &[OsString]) -> Result<(), CliError> {
    let g = &cli.global;
    if let Some(t) = g.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    let threads = match g.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))?;

    let report = pool.install(|| match &cli.command {
        Command::Eigen(a) => commands::eigen(a, g.tol),
        Command::Lz(LzCommand::Run(a)) => commands::lz_run(a, g.tol),
        Command::Lz(LzCommand::Sweep(a)) => commands::lz_sweep(a, g.tol),
        Command::Stirap(StirapCommand::Run(a)) => commands::stirap_run(a, g.tol),
        Command::Stirap(StirapCommand::Sweep(a)) => commands::stirap_sweep(a, g.tol),
        Command::Stirap(StirapCommand::Levels(a)) => commands::stirap_levels_cmd(a, g.tol),
    })?;

    for d in &report.diagnostics {
        eprintln!("tripwell: {d}");
    }
    let body = report.table.render(g.format);
    match &g.out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .map_err(|e| CliError::Numerical(format!("cannot write output: {e}")))?;
        }
        Some(out) => {
            let mut config = cli.command.config_json();
            if let (Some(obj), serde_json::Value::Object(globals)) =
                (config.as_object_mut(), serde_json::to_value(g).expect("globals serialize"))
            {
                obj.extend(globals);
            }
            let manifest = RunManifest {
                command_line: argv.iter().map(|a| a.to_string_lossy().into_owned()).collect(),
                subcommand: cli.command.path().iter().filter(|s| !s.is_empty()).map(|s| s.to_string()).collect(),
                config,
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                timestamp: std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map_or(0, |d| d.as_secs()),
                output: out.clone(),
                rows: report.table.rows.len(),
                diagnostics: report.diagnostics.clone(),
            };
            output::write_outputs(out, &body, &manifest)
                .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", out.display())))?;
        }
    }
    Ok(())
}
