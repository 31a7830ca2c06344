//! `pooltest`: cost queries, test-count distributions, optimal group sizes,
//! seeded simulation, the verification battery, and figure data for the
//! group-testing library, as CSV or JSON on stdout or a file.
//!
//! Exit codes: 0 on success (for `verify`: every claim passed); 1 when
//! verification ran and at least one claim failed; 2 on usage or domain
//! errors; 3 on I/O errors.
//!
//! `--seed` falls back to the `POOLTEST_SEED` environment variable, then
//! to 0, so simulation output is reproducible unless explicitly varied.

mod figures;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use pooltest::executor::simulate_expected_tests;
use pooltest::optimizer::{
    continuous_minimizer, optimal_group_size_bruteforce, optimal_group_size_closed_form,
    OptimalConfig,
};
use pooltest::schemes::{cost_point, tests_distribution_modified_dorfman};
use pooltest::verifier::verify_all;
use pooltest::{Prevalence, SchemeId};

use output::{candidate_list, sig15, to_json, OutputFormat, Table};

#[derive(Parser)]
#[command(name = "pooltest", version, about = "Group testing: costs, optima, verification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Search strategy selected with `--method`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    BruteForce,
    ClosedForm,
    /// Real-valued minimizer via derivative bisection instead of a scan.
    Continuous,
}

#[derive(Subcommand)]
enum Command {
    /// Expected tests per item for one (scheme, group size, prevalence).
    Cost {
        #[arg(long, value_parser = parse_scheme)]
        scheme: SchemeId,
        /// Group size.
        #[arg(long)]
        n: u64,
        /// Prevalence, strictly between 0 and 1.
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Destination file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Distribution of the per-group test count (scheme D only).
    Distribution {
        #[arg(long, value_parser = parse_scheme)]
        scheme: SchemeId,
        /// Group size, at least 2.
        #[arg(long)]
        n: u64,
        /// Prevalence, strictly between 0 and 1.
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Destination file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Optimal group size at a prevalence, by scan, formula, or bisection.
    Optimal {
        #[arg(long, value_parser = parse_scheme)]
        scheme: SchemeId,
        /// Prevalence, strictly between 0 and 1.
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "brute-force")]
        method: MethodArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Destination file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the per-item cost.
    Simulate {
        #[arg(long, value_parser = parse_scheme)]
        scheme: SchemeId,
        /// Group size.
        #[arg(long)]
        n: u64,
        /// Prevalence, strictly between 0 and 1.
        #[arg(long)]
        p: f64,
        /// Number of replications.
        #[arg(long)]
        reps: u64,
        /// RNG seed; defaults to POOLTEST_SEED, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Destination file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the full verification battery and report each claim.
    Verify {
        /// Grid resolution per claim; at least 10.
        #[arg(long, default_value_t = 500)]
        grid_points: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: OutputFormat,
        /// Destination file; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Emit the CSV data behind one of the four diagnostic figures.
    Figures {
        /// Which figure to tabulate.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        figure: u8,
        /// Prevalence grid resolution.
        #[arg(long, default_value_t = 200)]
        grid_points: usize,
        /// Destination file; stdout when absent. Required for figure 4,
        /// which also writes a second file with a `_brace` suffix.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn parse_scheme(raw: &str) -> Result<SchemeId, String> {
    raw.parse().map_err(|err: pooltest::Error| err.to_string())
}

/// A failure mapped to its process exit code.
enum CliError {
    /// Bad flag combination or value: exit 2.
    Usage(String),
    /// Domain or resource error from the library: exit 2.
    Core(pooltest::Error),
    /// Filesystem or stream failure: exit 3.
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Core(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Io(msg) => f.write_str(msg),
            CliError::Core(err) => write!(f, "{err}"),
        }
    }
}

impl From<pooltest::Error> for CliError {
    fn from(err: pooltest::Error) -> Self {
        CliError::Core(err)
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Cost {
            scheme,
            n,
            p,
            format,
            output,
        } => {
            let point = cost_point(scheme, n, Prevalence::new(p)?)?;
            let payload = match format {
                OutputFormat::Csv => {
                    let mut table = Table::new(&["scheme", "n", "p", "t"]);
                    table.push(vec![
                        scheme.to_string(),
                        n.to_string(),
                        sig15(point.p),
                        sig15(point.t),
                    ]);
                    table.to_csv()
                }
                OutputFormat::Json => to_json(&point),
            };
            write_payload(output.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Distribution {
            scheme,
            n,
            p,
            format,
            output,
        } => {
            if scheme != SchemeId::D {
                return Err(CliError::Usage(format!(
                    "the test-count distribution is only available for scheme D, not {scheme}"
                )));
            }
            let atoms = tests_distribution_modified_dorfman(n, Prevalence::new(p)?)?;
            let payload = match format {
                OutputFormat::Csv => {
                    let mut table = Table::new(&["scheme", "n", "p", "tests", "probability"]);
                    for (tests, probability) in &atoms {
                        table.push(vec![
                            scheme.to_string(),
                            n.to_string(),
                            sig15(p),
                            tests.to_string(),
                            sig15(*probability),
                        ]);
                    }
                    table.to_csv()
                }
                OutputFormat::Json => to_json(&serde_json::json!({
                    "scheme": scheme,
                    "n": n,
                    "p": p,
                    "atoms": atoms
                        .iter()
                        .map(|&(tests, probability)| {
                            serde_json::json!({ "tests": tests, "probability": probability })
                        })
                        .collect::<Vec<_>>(),
                })),
            };
            write_payload(output.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Optimal {
            scheme,
            p,
            method,
            format,
            output,
        } => {
            let prevalence = Prevalence::new(p)?;
            let payload = match method {
                MethodArg::BruteForce | MethodArg::ClosedForm => {
                    let config: OptimalConfig = match method {
                        MethodArg::BruteForce => {
                            optimal_group_size_bruteforce(scheme, prevalence, None)?
                        }
                        _ => optimal_group_size_closed_form(scheme, prevalence)?,
                    };
                    match format {
                        OutputFormat::Csv => {
                            let mut table = Table::new(&[
                                "scheme",
                                "p",
                                "n_opt",
                                "t_opt",
                                "candidates",
                                "method",
                            ]);
                            table.push(vec![
                                config.scheme.to_string(),
                                sig15(config.p),
                                config.n_opt.to_string(),
                                sig15(config.t_opt),
                                candidate_list(&config.candidates),
                                config.method.to_string(),
                            ]);
                            table.to_csv()
                        }
                        OutputFormat::Json => to_json(&config),
                    }
                }
                MethodArg::Continuous => {
                    let root = continuous_minimizer(scheme, prevalence)?;
                    match format {
                        OutputFormat::Csv => {
                            let mut table = Table::new(&[
                                "scheme",
                                "p",
                                "x",
                                "residual",
                                "iterations",
                                "bracket_lo",
                                "bracket_hi",
                            ]);
                            table.push(vec![
                                scheme.to_string(),
                                sig15(p),
                                sig15(root.x),
                                sig15(root.residual),
                                root.iterations.to_string(),
                                sig15(root.bracket.0),
                                sig15(root.bracket.1),
                            ]);
                            table.to_csv()
                        }
                        OutputFormat::Json => to_json(&serde_json::json!({
                            "scheme": scheme,
                            "p": p,
                            "x": root.x,
                            "residual": root.residual,
                            "iterations": root.iterations,
                            "bracket": [root.bracket.0, root.bracket.1],
                        })),
                    }
                }
            };
            write_payload(output.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Simulate {
            scheme,
            n,
            p,
            reps,
            seed,
            format,
            output,
        } => {
            let seed = resolve_seed(seed)?;
            let estimate = simulate_expected_tests(scheme, n, Prevalence::new(p)?, reps, seed)?;
            let payload = match format {
                OutputFormat::Csv => {
                    let mut table = Table::new(&[
                        "scheme",
                        "n",
                        "p",
                        "mean",
                        "std_error",
                        "replications",
                        "seed",
                    ]);
                    table.push(vec![
                        estimate.scheme.to_string(),
                        estimate.n.to_string(),
                        sig15(estimate.p),
                        sig15(estimate.mean),
                        sig15(estimate.std_error),
                        estimate.replications.to_string(),
                        estimate.seed.to_string(),
                    ]);
                    table.to_csv()
                }
                OutputFormat::Json => to_json(&estimate),
            };
            write_payload(output.as_deref(), &payload)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify {
            grid_points,
            format,
            output,
        } => {
            let reports = verify_all(grid_points)?;
            let all_passed = reports.iter().all(|report| report.passed);
            let payload = match format {
                OutputFormat::Csv => {
                    let mut table = Table::new(&[
                        "claim_id",
                        "grid",
                        "passed",
                        "worst_margin",
                        "worst_location",
                    ]);
                    for report in &reports {
                        table.push(vec![
                            report.claim_id.clone(),
                            report.grid.clone(),
                            if report.passed { "PASS" } else { "FAIL" }.to_string(),
                            sig15(report.worst_margin),
                            sig15(report.worst_location),
                        ]);
                    }
                    table.to_csv()
                }
                OutputFormat::Json => to_json(&reports),
            };
            write_payload(output.as_deref(), &payload)?;
            Ok(if all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }

        Command::Figures {
            figure,
            grid_points,
            output,
        } => {
            match figure {
                1 => write_payload(output.as_deref(), &figures::figure_1(grid_points)?.to_csv())?,
                2 => write_payload(output.as_deref(), &figures::figure_2(grid_points)?.to_csv())?,
                3 => write_payload(output.as_deref(), &figures::figure_3(grid_points)?.to_csv())?,
                4 => {
                    let Some(path) = output else {
                        return Err(CliError::Usage(
                            "figure 4 writes two files; --output is required".to_string(),
                        ));
                    };
                    let (raster, brace) = figures::figure_4(grid_points)?;
                    write_payload(Some(&path), &raster.to_csv())?;
                    write_payload(Some(&brace_path(&path)), &brace.to_csv())?;
                }
                _ => unreachable!("clap bounds the figure number"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// `--seed`, else `POOLTEST_SEED`, else 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var("POOLTEST_SEED") {
        Ok(raw) => raw.trim().parse().map_err(|_| {
            CliError::Usage(format!(
                "POOLTEST_SEED must be a non-negative integer, got {raw:?}"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(0),
        Err(std::env::VarError::NotUnicode(_)) => Err(CliError::Usage(
            "POOLTEST_SEED is not valid unicode".to_string(),
        )),
    }
}

/// The figure-4 companion path: the output's stem with a `_brace` suffix.
fn brace_path(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "figure4".to_string());
    let extension = path
        .extension()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "csv".to_string());
    path.with_file_name(format!("{stem}_brace.{extension}"))
}

fn write_payload(output: Option<&Path>, payload: &str) -> Result<(), CliError> {
    output::emit(output, payload).map_err(|err| {
        CliError::Io(match output {
            Some(path) => format!("cannot write {}: {err}", path.display()),
            None => format!("cannot write to stdout: {err}"),
        })
    })
}
