//! `verify`: runs the hypernet verification suites and consolidates their verdicts.
//!
//! Exit codes: 0 when every verdict passes, 1 when a suite fails, 2 on usage
//! or configuration errors.

use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use hypernet::net::NetModel;
use hypernet::suites::{self, SuiteError, SuiteOptions, SuiteReport, SUITES};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Parser, Debug)]
#[command(name = "verify", version, about = "Run hypernet verification suites")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run suites and write verdicts (the default).
    Run(RunArgs),
    /// Consolidate the verdicts in a directory into report.json.
    Report {
        /// Directory written by `run`.
        #[arg(default_value = "out")]
        dir: PathBuf,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// geometry, inner, axb, modular, current, net or all.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Model file with `key = value` lines.
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Threshold override `suite.case=value`; repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    tol: Vec<String>,
    /// ω-grid size of the model.
    #[arg(long)]
    grid: Option<usize>,
    /// Compression size of the model.
    #[arg(long)]
    m: Option<usize>,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("no verdict files in {0}")]
    MissingVerdicts(PathBuf),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}: malformed verdict file")]
    Malformed(PathBuf),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::MissingVerdicts(_) | CliError::Malformed(_) => 2,
            CliError::Io { .. } => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Some(Command::Run(args)) => run(&args),
        Some(Command::Report { dir }) => report(&dir).map(|()| true),
        None => run(&cli.run),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("verify: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn options(args: &RunArgs) -> Result<(Vec<&'static str>, SuiteOptions), CliError> {
    let names: Vec<&'static str> = if args.suite == "all" {
        SUITES.to_vec()
    } else {
        match SUITES.iter().find(|s| **s == args.suite) {
            Some(s) => vec![*s],
            None => {
                return Err(CliError::Usage(format!(
                    "unknown suite '{}' (expected one of {} or all)",
                    args.suite,
                    SUITES.join(", ")
                )))
            }
        }
    };
    let usage = |e: &dyn std::fmt::Display| CliError::Usage(e.to_string());
    let mut model = match &args.model {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            NetModel::from_config(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => NetModel::with_phi("1").map_err(|e| usage(&e))?,
    };
    if let Some(grid) = args.grid {
        model = model.with_grid(grid).map_err(|e| usage(&e))?;
    }
    if let Some(m) = args.m {
        if m == 0 {
            return Err(CliError::Usage("--m must be positive".into()));
        }
        model = model.with_m(m);
    }
    let mut opts = SuiteOptions::new(args.seed, model);
    for t in &args.tol {
        let (name, value) = t
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--tol expects NAME=VALUE, got '{t}'")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("--tol {name}: '{value}' is not a number")))?;
        opts = opts.with_tolerance(name.trim(), value).map_err(|e| usage(&e))?;
    }
    Ok((names, opts))
}

fn run(args: &RunArgs) -> Result<bool, CliError> {
    let (names, opts) = options(args)?;
    let results: Vec<(Result<SuiteReport, SuiteError>, u128)> = names
        .par_iter()
        .map(|name| {
            let start = Instant::now();
            let r = suites::run_suite(name, &opts);
            (r, start.elapsed().as_millis())
        })
        .collect();

    let out = &args.out;
    let curves = out.join("curves");
    fs::create_dir_all(&curves).map_err(io_err(&curves))?;
    let mut all_pass = true;
    let mut timings = String::from("{");
    let stdout = io::stdout();
    let mut w = stdout.lock();
    for (i, (name, (result, ms))) in names.iter().zip(results).enumerate() {
        timings.push_str(&format!("{}\"{name}\":{ms}", if i > 0 { "," } else { "" }));
        match result {
            Ok(rep) => {
                let path = out.join(format!("{name}.json"));
                fs::write(&path, rep.to_json()).map_err(io_err(&path))?;
                for (stem, csv) in &rep.curves {
                    let p = curves.join(format!("{stem}.csv"));
                    fs::write(&p, csv).map_err(io_err(&p))?;
                }
                for v in &rep.verdicts {
                    let _ = writeln!(
                        w,
                        "{:4} {:9} {:34} {:>12.4e} {:2} {:.1e}",
                        if v.pass { "ok" } else { "FAIL" },
                        v.suite,
                        v.case,
                        v.residual,
                        v.relation.symbol(),
                        v.threshold
                    );
                }
                all_pass &= rep.pass();
            }
            Err(e) => {
                let _ = writeln!(w, "FAIL {name:9} error: {e}");
                all_pass = false;
            }
        }
    }
    timings.push_str("}\n");
    let tp = out.join("timings.json");
    fs::write(&tp, timings).map_err(io_err(&tp))?;
    Ok(all_pass)
}

fn report(dir: &Path) -> Result<(), CliError> {
    let mut raw = Vec::new();
    for name in SUITES {
        let path = dir.join(format!("{name}.json"));
        if path.is_file() {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(|_| CliError::Malformed(path.clone()))?;
            raw.push((text, value));
        }
    }
    if raw.is_empty() {
        return Err(CliError::MissingVerdicts(dir.to_path_buf()));
    }
    let pass = raw.iter().all(|(_, v)| v["pass"].as_bool() == Some(true));
    let mut doc = format!("{{\"pass\":{pass},\"suites\":[\n");
    for (i, (text, _)) in raw.iter().enumerate() {
        if i > 0 {
            doc.push_str(",\n");
        }
        doc.push_str(text.trim_end());
    }
    doc.push_str("\n]}\n");
    let path = dir.join("report.json");
    fs::write(&path, doc).map_err(io_err(&path))?;

    println!("{:9} {:5} {:>8} {:>13} {:>10}", "suite", "pass", "verdicts", "max_residual", "threshold");
    for (_, v) in &raw {
        let count = v["verdicts"].as_array().map_or(0, Vec::len);
        let num = |key: &str| v[key].as_f64().map_or("null".to_string(), |x| format!("{x:.3e}"));
        println!(
            "{:9} {:5} {:>8} {:>13} {:>10}",
            v["suite"].as_str().unwrap_or("?"),
            v["pass"].as_bool().unwrap_or(false),
            count,
            num("max_residual"),
            num("threshold")
        );
    }
    Ok(())
}
