//! `qclab`: measures, property suites, process simulation and experiments.
//!
//! Exit codes: 0 success, 1 property failure, 2 input error, 3 infeasible
//! configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qclab::bench::{self, ExperimentSpec, Format, MeasureOptions, ProbeConfig, Provenance, Row};
use qclab::conflict::ChiSearchConfig;
use qclab::simproc::{exact_process_chart, run_process, ChartOptions, ProcessOptions};
use qclab::verify::{self, SuiteConfig, SUITES};
use qclab::{io, BitString, DecisionTree, Error, Rational, Scalar, TreeSearchBudget};

#[derive(Parser)]
#[command(
    name = "qclab",
    version,
    about = "Query-complexity measures, process simulation and experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed for every random choice.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Deepest tree any enumeration may produce.
    #[arg(long, default_value_t = 3)]
    depth_cap: usize,
    /// Cap on weighted states of an exact process chart.
    #[arg(long, default_value_t = 1_000_000)]
    state_cap: usize,
    /// csv or json.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// D, D^mu_eps, the R_eps bracket, RS and the chi / chibar lower bounds
    /// of a function given as a JSON document.
    Measure {
        file: PathBuf,
        #[arg(long, default_value = "1/3")]
        epsilon: String,
        /// Distribution for D^mu_eps.
        #[arg(long)]
        mu: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a property suite (or `all`).
    Verify {
        /// simulation, walk, point-pairs, sabotage, direct-sum, single-block,
        /// truncation, composition, pinsker, mutin, chain-rule, oracle,
        /// compose, conditioning, or all.
        suite: String,
        /// Instances to draw; each suite has its own default.
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Simulate the query process of a tree against a mixture.
    #[command(subcommand)]
    Simulate(Simulate),
    /// Experiments with long-format reports.
    #[command(subcommand)]
    Bench(Bench),
}

#[derive(Subcommand)]
enum Simulate {
    /// The query process P(B, Q) on one z.
    Process {
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        mixture: PathBuf,
        #[arg(long)]
        z: String,
        /// Exact leaf distribution instead of sampled trajectories.
        #[arg(long)]
        exact: bool,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        /// Write one line per step of the first trajectory to this file.
        #[arg(long)]
        log: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Subcommand)]
enum Bench {
    /// The majority-probe protocol for f0 o g0^n on worst-case inputs.
    F0g0 {
        #[arg(long, default_value_t = 1600)]
        n: usize,
        #[arg(long, default_value = "1/3")]
        epsilon: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Measures of OR2, AND2, XOR2, MAJ3 and g0(4).
    Catalog {
        #[arg(long, default_value = "1/3")]
        epsilon: String,
        #[command(flatten)]
        common: Common,
    },
    /// An experiment described by a JSON document.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

/// A failed run and its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Infeasible { .. } => 3,
            Error::Defect(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: String) -> Failure {
    Failure { code: 2, message }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

fn emit(common: &Common, text: &str) -> Result<(), Failure> {
    match &common.out {
        Some(p) => fs::write(p, text).map_err(|e| input_error(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_rows(common: &Common, rows: &[Row]) -> Result<(), Failure> {
    emit(common, &bench::render(rows, common.format)?)
}

fn budget(common: &Common) -> Result<TreeSearchBudget, Failure> {
    let d = TreeSearchBudget::default();
    Ok(TreeSearchBudget::new(common.depth_cap, d.max_nodes, d.memo_cap)?)
}

fn epsilon(text: &str) -> Result<Rational, Failure> {
    Ok(Rational::parse(text)?)
}

fn measure(file: &Path, eps: &str, mu: Option<&Path>, common: &Common) -> Result<(), Failure> {
    let g = io::function_from_json(&io::parse_json(&read(file)?)?)?;
    let mu = match mu {
        Some(p) => Some(io::dist_from_json(&io::parse_json(&read(p)?)?)?),
        None => None,
    };
    let opts = MeasureOptions {
        epsilon: epsilon(eps)?,
        mu,
        budget: budget(common)?,
        search: ChiSearchConfig {
            seed: common.seed,
            ..ChiSearchConfig::default()
        },
        ..MeasureOptions::default()
    };
    let name = file
        .file_stem()
        .map_or("input".into(), |s| s.to_string_lossy().into_owned());
    let rows = bench::with_workers(|| bench::measure_rows("measure", &name, &g, &opts))??;
    emit_rows(common, &rows)
}

fn verify_suites(suite: &str, samples: Option<usize>, common: &Common) -> Result<(), Failure> {
    let names: Vec<&str> = if suite == "all" {
        SUITES.iter().map(|(n, _)| *n).collect()
    } else {
        vec![suite]
    };
    let cfg = SuiteConfig {
        seed: common.seed,
        samples,
        budget: budget(common)?,
        state_cap: common.state_cap,
    };
    let mut rows = Vec::new();
    let mut failed = false;
    for name in names {
        let out = bench::with_workers(|| verify::run_suite(name, &cfg))??;
        eprintln!("{out}");
        for c in &out.counterexamples {
            eprintln!("  counterexample: {c}");
        }
        failed |= !out.passed();
        rows.push(Row::count("verify", name, "checks", out.checks));
        rows.push(Row::count("verify", name, "failed", out.failed));
        for c in out.counterexamples {
            rows.push(Row::new("verify", name, "counterexample", c, Provenance::Exact));
        }
    }
    emit_rows(common, &rows)?;
    if failed {
        return Err(Failure {
            code: 1,
            message: "property suite failed".into(),
        });
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    tree: &Path,
    mixture: &Path,
    z: &str,
    exact: bool,
    trials: usize,
    log: Option<&Path>,
    common: &Common,
) -> Result<(), Failure> {
    let q = io::mixture_from_json(&io::parse_json(&read(mixture)?)?)?;
    let z: BitString = z.parse()?;
    let tree = DecisionTree::parse(read(tree)?.trim(), Some(z.len() * q.arity()))?;
    let inst = format!("z={z}");
    let mut rows = Vec::new();
    if exact {
        let opts = ChartOptions {
            z_budget: None,
            state_cap: common.state_cap,
        };
        let chart = exact_process_chart(&tree, &q, &z, &opts)?;
        for leaf in tree.leaves() {
            let p = chart.leaves.get(&leaf).cloned().unwrap_or_default();
            rows.push(Row::exact("simulate", inst.clone(), format!("leaf {leaf}"), &p));
        }
        for (i, e) in chart.expected_counts.iter().enumerate() {
            rows.push(Row::exact("simulate", inst.clone(), format!("E[N_{}]", i + 1), e));
        }
        for (i, p) in chart.query_probs.iter().enumerate() {
            rows.push(Row::exact(
                "simulate",
                inst.clone(),
                format!("Pr[z_{} queried]", i + 1),
                p,
            ));
        }
    } else {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        let mut first_log = None;
        for k in 0..trials {
            let mut rng = qclab::gen::substream(common.seed, k as u64);
            let opts = ProcessOptions {
                z_budget: None,
                log: k == 0 && log.is_some(),
            };
            let run = run_process(&tree, &q, &z, opts, &mut rng)?;
            let leaf = run.leaf.ok_or_else(|| Error::Defect("unbudgeted run stopped".into()))?;
            *counts.entry(leaf).or_default() += 1;
            if k == 0 {
                first_log = Some(run.steps);
            }
        }
        for leaf in tree.leaves() {
            let f = counts.get(&leaf).copied().unwrap_or(0) as f64 / trials.max(1) as f64;
            let sigma = (f * (1.0 - f) / trials.max(1) as f64).sqrt();
            rows.push(Row::monte_carlo(
                "simulate",
                inst.clone(),
                format!("leaf {leaf}"),
                f,
                sigma,
            ));
        }
        if let (Some(path), Some(steps)) = (log, first_log) {
            let text: String = steps.iter().map(|s| format!("{s}\n")).collect();
            fs::write(path, text).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))?;
        }
    }
    emit_rows(common, &rows)
}

fn f0g0(n: usize, eps: &str, trials: usize, common: &Common) -> Result<(), Failure> {
    let eps = epsilon(eps)?;
    let cfg = ProbeConfig::new(n, eps.to_f64(), trials, common.seed)?;
    let rows = bench::with_workers(|| bench::probe_rows(&cfg))??;
    emit_rows(common, &rows)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Measure {
            file,
            epsilon,
            mu,
            common,
        } => measure(&file, &epsilon, mu.as_deref(), &common),
        Command::Verify { suite, samples, common } => verify_suites(&suite, samples, &common),
        Command::Simulate(Simulate::Process {
            tree,
            mixture,
            z,
            exact,
            trials,
            log,
            common,
        }) => simulate(&tree, &mixture, &z, exact, trials, log.as_deref(), &common),
        Command::Bench(Bench::F0g0 {
            n,
            epsilon,
            trials,
            common,
        }) => f0g0(n, &epsilon, trials, &common),
        Command::Bench(Bench::Catalog { epsilon, common }) => {
            let spec = ExperimentSpec {
                experiment: "measure-catalog".into(),
                seed: common.seed,
                epsilon: Some(epsilon),
                ..ExperimentSpec::default()
            };
            let rows = bench::with_workers(|| bench::run_experiment(&spec))??;
            emit_rows(&common, &rows)
        }
        Command::Bench(Bench::Run { spec, common }) => {
            let spec = ExperimentSpec::from_json(&read(&spec)?)?;
            let rows = bench::with_workers(|| bench::run_experiment(&spec))??;
            emit_rows(&common, &rows)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qclab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
