use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use ambient_cli::{bundled, load_scenario, verify, RunOptions, Suite};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "ambient",
    version,
    about = "Verify ambient-metric identities on a scenario"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites on a scenario file or bundled scenario name.
    Verify {
        scenario: String,
        /// Restrict to one suite; repeatable.
        #[arg(long = "suite", value_parser = parse_suite)]
        suites: Vec<Suite>,
        #[arg(long)]
        seed: Option<u64>,
        /// Points per sampled check.
        #[arg(long)]
        samples: Option<usize>,
        /// Override a tolerance, as CHECK=VALUE; repeatable.
        #[arg(long = "tolerance", value_parser = parse_tolerance)]
        tolerances: Vec<(String, f64)>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List bundled scenarios.
    List,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
    Csv,
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    Suite::parse(s).ok_or_else(|| {
        let names: Vec<&str> = Suite::ALL.iter().map(|s| s.name()).collect();
        format!("unknown suite `{s}`; expected one of {}", names.join(", "))
    })
}

fn parse_tolerance(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or("expected CHECK=VALUE")?;
    let v: f64 = v
        .trim()
        .parse()
        .map_err(|e| format!("bad tolerance `{v}`: {e}"))?;
    if !(v >= 0.0) {
        return Err("tolerance must be non-negative".into());
    }
    Ok((k.trim().to_string(), v))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::List => {
            for (name, text) in bundled::BUNDLED {
                println!("{name:<22} {}", bundled::description(text));
            }
            ExitCode::SUCCESS
        }
        Command::Verify {
            scenario,
            suites,
            seed,
            samples,
            tolerances,
            format,
            out,
        } => {
            let spec = match load_scenario(&scenario) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let options = RunOptions {
                suites,
                seed,
                samples,
                tolerances: tolerances.into_iter().collect::<BTreeMap<_, _>>(),
            };
            let report = match verify(&spec, &options) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let body = match format {
                Format::Json => report.to_json(),
                Format::Text => report.to_text(),
                Format::Csv => match report.to_csv() {
                    Ok(s) => s,
                    Err(e) => {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                },
            };
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, body) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{body}"),
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
