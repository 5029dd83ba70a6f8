use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use dsmatch::dsopt::{solve_relaxation, SolverOpts};
use dsmatch::exactness::Verdict;
use dsmatch::experiments::groups::shipped_groups;
use dsmatch::experiments::{
    cmd_classify, cmd_counterexample, cmd_grid_symmetries, cmd_noise_experiment, cmd_table1, default_exponents,
    write_csv, ExperimentConfig, Method,
};
use dsmatch::permgroup::{GroupSpec, Permutation, DEFAULT_MAX_ORDER};
use dsmatch::projection::{dspp_path, l2_project, DsppOpts, PathReport};
use dsmatch::{Result, SymGraph};

#[derive(Parser)]
#[command(name = "dsmatch", version, about = "Doubly-stochastic graph matching for symmetric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Report zero wall times so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the relaxation is generically exact for a group.
    Classify {
        /// Group spec JSON: {"n": .., "generators": [[..], ..]}.
        #[arg(long, conflicts_with = "group")]
        group_file: Option<PathBuf>,
        /// One of the shipped groups.
        #[arg(long)]
        group: Option<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = dsmatch::exactness::RANK_TOL)]
        tol: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Fraction of random linear objectives whose optimum is a permutation.
    Table1 {
        /// Group spec files; the shipped groups when omitted.
        #[arg(long = "group-file")]
        group_files: Vec<PathBuf>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// All symmetries of a lattice distance matrix.
    Grid {
        #[arg(long, default_value_t = 20)]
        rows: usize,
        #[arg(long, default_value_t = 25)]
        cols: usize,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Retrieval ratios of both rounding methods under growing noise.
    Noise {
        #[arg(long, value_delimiter = ',', default_value = "8")]
        sizes: Vec<usize>,
        /// Number of exponents spread over [-3, 0].
        #[arg(long, default_value_t = 10)]
        levels: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// ds_l2, dspp, or both when omitted.
        #[arg(long = "method", value_parser = parse_method)]
        methods: Vec<Method>,
        /// Uniform steps of the convex-to-concave path.
        #[arg(long, default_value_t = 10)]
        schedule_steps: usize,
        /// Iteration cap of the convex relaxation.
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        /// Gradient-mapping tolerance of the convex relaxation.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Exhaustive ground truth at n = 10 on the first 10 trials.
        #[arg(long)]
        slow_ground_truth: bool,
        /// Also write per-trial records as JSON lines.
        #[arg(long)]
        records: Option<PathBuf>,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// The constant-row-sum graph on which the plain relaxation is not exact.
    Counterexample {
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Match two graphs given as whitespace-separated matrix files.
    Match {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "dspp", value_parser = parse_method)]
        method: Method,
        #[arg(long, default_value_t = 10)]
        schedule_steps: usize,
        #[arg(long, default_value_t = 20_000)]
        max_iter: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    Method::parse(s).map_err(|e| e.to_string())
}

fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    Ok(())
}

#[derive(Serialize)]
struct MatchReport {
    method: &'static str,
    permutation: Permutation,
    energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<PathReport>,
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Classify { group_file, group, trials, seed, tol, output } => {
            let spec = match (group_file, group) {
                (Some(path), _) => GroupSpec::load(&path)?,
                (None, Some(name)) => {
                    dsmatch::experiments::groups::shipped_group(&name)
                        .ok_or_else(|| dsmatch::Error::Parse(format!("unknown group `{name}`")))?
                        .spec
                }
                (None, None) => {
                    return Err(dsmatch::Error::Parse("pass --group-file or --group".into()));
                }
            };
            let verdict = cmd_classify(&spec, trials, seed, tol)?;
            emit_json(&verdict.to_json(&spec), output.as_deref())?;
            Ok(if verdict.verdict == Verdict::Inconclusive { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Table1 { group_files, trials, seed, out } => {
            let groups = if group_files.is_empty() {
                shipped_groups().into_iter().map(|g| (g.name.to_string(), g.group())).collect()
            } else {
                group_files
                    .iter()
                    .map(|p| {
                        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                        Ok((name, GroupSpec::load(p)?.to_group(DEFAULT_MAX_ORDER)?))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            let rows = cmd_table1(&groups, trials, seed, !out.no_timing)?;
            write_csv(&rows, sink(out.output.as_deref())?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Grid { rows, cols, out } => {
            let report = cmd_grid_symmetries(rows, cols, !out.no_timing)?;
            emit_json(&report, out.output.as_deref())?;
            let expected = if rows == cols { 8 } else { 4 };
            let ok = rows.min(cols) == 1 || (report.is_group && report.permutations.len() == expected);
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Noise {
            sizes,
            levels,
            trials,
            seed,
            methods,
            schedule_steps,
            max_iter,
            tol,
            slow_ground_truth,
            records,
            out,
        } => {
            let config = ExperimentConfig {
                seed,
                trials,
                sizes,
                noise_exponents: default_exponents(levels),
                methods: if methods.is_empty() { vec![Method::DsL2, Method::Dspp] } else { methods },
                slow_ground_truth,
                solver: SolverOpts { max_iter, grad_tol: tol, ..Default::default() },
                dspp: DsppOpts { steps: schedule_steps, ..Default::default() },
                timing: !out.no_timing,
                ..Default::default()
            };
            let results = cmd_noise_experiment(&config)?;
            write_csv(&results.rows, sink(out.output.as_deref())?)?;
            if let Some(path) = records {
                let mut w = File::create(path)?;
                for r in &results.records {
                    serde_json::to_writer(&mut w, r)?;
                    writeln!(w)?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Counterexample { output } => {
            let report = cmd_counterexample()?;
            emit_json(&report, output.as_deref())?;
            Ok(if report.passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Match { a, b, method, schedule_steps, max_iter, output } => {
            let a = SymGraph::load(&a)?;
            let b = SymGraph::load(&b)?;
            let report = match method {
                Method::DsL2 => {
                    let s = solve_relaxation(&a, &b, &SolverOpts { max_iter, ..Default::default() })?;
                    let p = l2_project(&s.s);
                    MatchReport { method: method.as_str(), energy: p.energy(&a, &b), permutation: p, path: None }
                }
                Method::Dspp => {
                    let path = dspp_path(&a, &b, &DsppOpts { steps: schedule_steps, ..Default::default() })?;
                    let p = path.final_permutation.clone();
                    MatchReport { method: method.as_str(), energy: p.energy(&a, &b), permutation: p, path: Some(path) }
                }
            };
            emit_json(&report, output.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
