//! `ldp`: analytic tables, parameter optimisation, simulations and
//! privacy/utility sweeps for LDP frequency oracles.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ldp_core::harness::{
    export, pareto_sweep, parse_grid, parse_int_grid, parse_protocols, DataSource, DomainSpec, EmpiricalOptions,
    Format, Protocol, SweepOptions,
};
use ldp_core::harness::sweep::{analytic_row, empirical_row};
use ldp_core::optimizer::{optimize_alh, optimize_ass, optimize_athe, optimize_aue, ObjectiveWeights};
use ldp_core::{Error, ErrorKind, Result};

#[derive(Parser)]
#[command(name = "ldp", version, about = "LDP frequency oracles: attacker success rate versus estimation error")]
struct Cli {
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Monte Carlo trials for the SHE attacker success rate.
    #[arg(long, global = true, default_value_t = ldp_core::attacks::SHE_MC_TRIALS)]
    she_trials: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form ASR and MSE over an (eps, k) grid.
    Analyze(AnalyzeArgs),
    /// Solve one adaptive protocol's parameter.
    Optimize(OptimizeArgs),
    /// Simulate one protocol end to end.
    Simulate(SimulateArgs),
    /// Sweep protocols over (eps, k), optionally with simulation.
    Pareto(ParetoArgs),
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    protocol: String,
    /// `lo:hi:step`, a comma list, or one value.
    #[arg(long)]
    eps: String,
    #[arg(long)]
    k: String,
    /// Explicit free parameter (omega, p, g or theta).
    #[arg(long)]
    param: Option<f64>,
    /// ASR weight used by adaptive protocols.
    #[arg(long, default_value_t = 0.5)]
    w_asr: f64,
    /// Users the MSE is reported at.
    #[arg(long, default_value_t = 1)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    protocol: String,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    w_asr: f64,
    #[arg(long, default_value_t = 1.0)]
    n: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DataArgs {
    /// `dirichlet`, `uniform`, or `csv:<path>:<column>`.
    #[arg(long, default_value = "dirichlet")]
    data: String,
    /// Category mapping for csv data: `lo:hi` integer range or `categorical`.
    /// Defaults to `0:(k-1)`.
    #[arg(long)]
    domain: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    protocol: String,
    #[arg(long)]
    eps: f64,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    param: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    w_asr: f64,
    #[arg(long, default_value_t = 50_000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ParetoArgs {
    #[arg(long, default_value = "all")]
    protocols: String,
    #[arg(long)]
    eps: String,
    #[arg(long)]
    k: String,
    #[arg(long, default_value_t = 0.5)]
    w_asr: f64,
    /// Users; with `--runs` this many are simulated.
    #[arg(long)]
    n: Option<usize>,
    /// Simulated repetitions; omit for analytic columns only.
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    output: Output,
}

fn data_source(args: &DataArgs, k: usize) -> Result<DataSource> {
    let domain = match args.domain.as_deref() {
        None => DomainSpec::Range { lo: 0, hi: k as i64 - 1 },
        Some("categorical") => DomainSpec::Categorical,
        Some(s) => {
            let bad = || Error::Range {
                field: "domain",
                allowed: "lo:hi or categorical".into(),
                got: s.into(),
            };
            let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
            DomainSpec::Range {
                lo: lo.trim().parse().map_err(|_| bad())?,
                hi: hi.trim().parse().map_err(|_| bad())?,
            }
        }
    };
    match args.data.as_str() {
        "dirichlet" => Ok(DataSource::Dirichlet),
        "uniform" => Ok(DataSource::RoundRobin),
        s => match s.strip_prefix("csv:").and_then(|rest| rest.rsplit_once(':')) {
            Some((path, column)) => Ok(DataSource::Csv {
                path: path.into(),
                column: column.into(),
                domain,
            }),
            None => Err(Error::Range {
                field: "data",
                allowed: "dirichlet, uniform or csv:<path>:<column>".into(),
                got: s.into(),
            }),
        },
    }
}

fn analyze(a: AnalyzeArgs, she_trials: u64) -> Result<()> {
    let protocol: Protocol = a.protocol.parse()?;
    let opts = SweepOptions {
        weights: ObjectiveWeights::asr_share(a.w_asr)?,
        mse_n: a.n,
        seed: a.seed,
        she_trials,
        empirical: None,
    };
    let format: Format = a.output.format.parse()?;
    let (eps, ks) = (parse_grid(&a.eps)?, parse_int_grid(&a.k)?);
    let rows = match a.param {
        None => pareto_sweep(&[protocol], &eps, &ks, &opts)?,
        Some(v) => {
            let mut rows = Vec::new();
            for &e in &eps {
                for &k in &ks {
                    rows.push(analytic_row(protocol.name(), &protocol.with_param(e, k, v)?, &opts, a.n)?);
                }
            }
            rows
        }
    };
    export(&rows, format, &a.output.out)
}

fn optimize(a: OptimizeArgs) -> Result<()> {
    let w = ObjectiveWeights::asr_share(a.w_asr)?;
    let protocol: Protocol = a.protocol.parse()?;
    let result = match protocol {
        Protocol::Ass => optimize_ass(a.eps, a.k, w, a.n)?,
        Protocol::Aue => optimize_aue(a.eps, a.k, w, a.n)?,
        Protocol::Alh => optimize_alh(a.eps, a.k, w, a.n)?,
        Protocol::Athe => optimize_athe(a.eps, a.k, w, a.n)?,
        p => {
            return Err(Error::Range {
                field: "protocol",
                allowed: "ass, aue, alh or athe".into(),
                got: p.name().into(),
            })
        }
    };
    let mut value = serde_json::to_value(&result)?;
    value["protocol"] = protocol.name().into();
    let text = serde_json::to_string_pretty(&value)? + "\n";
    std::fs::write(&a.out, text).map_err(|source| Error::Io { path: a.out.clone(), source })
}

fn simulate(a: SimulateArgs, she_trials: u64) -> Result<()> {
    let protocol: Protocol = a.protocol.parse()?;
    let format: Format = a.output.format.parse()?;
    let opts = SweepOptions {
        weights: ObjectiveWeights::asr_share(a.w_asr)?,
        mse_n: a.n as u64,
        seed: a.seed,
        she_trials,
        empirical: None,
    };
    let cfg = match a.param {
        Some(v) => protocol.with_param(a.eps, a.k, v)?,
        None => protocol.resolve(a.eps, a.k, opts.weights)?,
    };
    let data = data_source(&a.data, a.k)?.materialise(a.k, a.n, a.seed)?;
    let row = empirical_row(protocol.name(), &cfg, &opts, &data, a.runs)?;
    export(&[row], format, &a.output.out)
}

fn pareto(a: ParetoArgs, she_trials: u64) -> Result<()> {
    let protocols = parse_protocols(&a.protocols)?;
    let format: Format = a.output.format.parse()?;
    let (eps, ks) = (parse_grid(&a.eps)?, parse_int_grid(&a.k)?);
    let empirical = match a.runs {
        Some(runs) => Some(EmpiricalOptions {
            n: a.n.unwrap_or(50_000),
            runs,
            data: data_source(&a.data, ks.first().copied().unwrap_or(2))?,
        }),
        None => None,
    };
    let opts = SweepOptions {
        weights: ObjectiveWeights::asr_share(a.w_asr)?,
        mse_n: a.n.unwrap_or(1) as u64,
        seed: a.seed,
        she_trials,
        empirical,
    };
    let rows = pareto_sweep(&protocols, &eps, &ks, &opts)?;
    export(&rows, format, &a.output.out)
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Range {
                field: "threads",
                allowed: ">= 1".into(),
                got: e.to_string(),
            })?;
    }
    match cli.command {
        Command::Analyze(a) => analyze(a, cli.she_trials),
        Command::Optimize(a) => optimize(a),
        Command::Simulate(a) => simulate(a, cli.she_trials),
        Command::Pareto(a) => pareto(a, cli.she_trials),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Config => 2,
                ErrorKind::Io => 3,
                ErrorKind::Data => 4,
            })
        }
    }
}
