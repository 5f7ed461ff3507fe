use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use sinai_idla::brownian::DEFAULT_RESOLUTION;
use sinai_idla::experiment::{self, KeyIdentityParams, Output, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "sinai-idla",
    version,
    about = "Internal DLA in a Sinai random environment"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Environment law: uniform, two-point or flat
    #[arg(long, global = true, default_value = "uniform")]
    law: String,

    /// Parameter of the two-point law (omega is p or 1 - p)
    #[arg(long, global = true)]
    p: Option<f64>,

    /// Truncation of the uniform law (omega uniform on (delta, 1 - delta))
    #[arg(long, global = true)]
    delta: Option<f64>,

    /// Cluster size(s) or potential scale(s), comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    n: Vec<u64>,

    #[arg(long, global = true)]
    replicas: Option<usize>,

    /// Master seed; required so that every run is reproducible
    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long, global = true, default_value_t = 0.05)]
    eps: f64,

    /// Brownian grid points per unit time
    #[arg(long, global = true, default_value_t = DEFAULT_RESOLUTION)]
    resolution: usize,

    /// Extra cluster sizes at which to record the cluster, comma separated
    #[arg(long, global = true, value_delimiter = ',')]
    checkpoints: Vec<u64>,

    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,

    /// Output directory for `<command>.csv` and `<command>.json`
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq)]
enum Command {
    /// Annealed cluster growth and the d_n/n pools
    Simulate,
    /// |d_n/n - d*_n| > eps on shared environments
    Localization,
    /// Long growths in fixed environments, checkpoints at powers of two
    QuenchedExplore,
    /// Exact sampler against step-by-step walks in one environment
    OracleCompare,
    /// Arcsine identities on simulated Brownian paths
    BrownianIdentities {
        /// Also run the key-identity diagnostic
        #[arg(long)]
        keyidentity: bool,
        #[arg(long, default_value_t = 10_000)]
        keyidentity_replicas: usize,
        /// Censoring cap in time units
        #[arg(long, default_value_t = 16.0)]
        keyidentity_cap: f64,
    },
    /// Frequency of the localizing good events
    GoodEvents,
    /// Per-environment functionals of the rescaled potential
    Functionals,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Localization => "localization",
            Command::QuenchedExplore => "quenched-explore",
            Command::OracleCompare => "oracle-compare",
            Command::BrownianIdentities { .. } => "brownian-identities",
            Command::GoodEvents => "good-events",
            Command::Functionals => "functionals",
        }
    }
}

fn config(cli: &Cli) -> Result<RunConfig> {
    let Some(seed) = cli.seed else {
        bail!("--seed is required");
    };
    let law = experiment::parse_law(&cli.law, cli.p, cli.delta)?;
    let n = match (cli.command, cli.n.is_empty()) {
        (Command::BrownianIdentities { .. }, true) => vec![1],
        (_, true) => bail!("--n is required for {}", cli.command.name()),
        _ => cli.n.clone(),
    };
    let default_replicas = match cli.command {
        Command::BrownianIdentities { .. } => 20_000,
        Command::QuenchedExplore => 20,
        _ => 1000,
    };
    let cfg = RunConfig {
        law,
        n,
        replicas: cli.replicas.unwrap_or(default_replicas),
        seed,
        eps: cli.eps,
        resolution: cli.resolution,
        checkpoints: cli.checkpoints.clone(),
        workers: cli.workers,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig) -> Result<Output> {
    let out = match cli.command {
        Command::Simulate => experiment::run_simulate(cfg),
        Command::Localization => experiment::run_localization(cfg),
        Command::QuenchedExplore => experiment::run_quenched_explore(cfg),
        Command::OracleCompare => experiment::run_oracle_compare(cfg),
        Command::BrownianIdentities {
            keyidentity,
            keyidentity_replicas,
            keyidentity_cap,
        } => {
            let key = keyidentity.then_some(KeyIdentityParams {
                replicas: keyidentity_replicas,
                t: 1.0,
                cap: keyidentity_cap,
            });
            experiment::run_brownian(cfg, key)
        }
        Command::GoodEvents => experiment::run_good_events(cfg),
        Command::Functionals => experiment::run_functionals(cfg),
    };
    Ok(out?)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = config(&cli)?;
    let output = run(&cli, &cfg)?;

    fs::create_dir_all(&cli.out).with_context(|| format!("creating {}", cli.out.display()))?;
    let name = cli.command.name();
    let csv_path = cli.out.join(format!("{name}.csv"));
    let json_path = cli.out.join(format!("{name}.json"));
    let report = serde_json::to_string_pretty(&output.report)?;
    fs::write(&csv_path, &output.csv).with_context(|| format!("writing {}", csv_path.display()))?;
    fs::write(&json_path, format!("{report}\n"))
        .with_context(|| format!("writing {}", json_path.display()))?;
    eprintln!("wrote {} and {}", csv_path.display(), json_path.display());
    println!("{report}");
    Ok(())
}
