//! `eulerlab`: command-line entry point for every experiment.

mod commands;
mod config;
mod error;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{
    DeformScanConfig, ExperimentConfig, FlowSimConfig, InflateConfig, InitialData, Lemma51Config, Lemma53Config,
    NormKind, NormsConfig, ShearFlowConfig,
};
use error::CliError;
use output::{commit, resolve_output_dir, Artifacts};

#[derive(Parser, Debug)]
#[command(name = "eulerlab", version, about = "Hölder and Besov ill-posedness experiments for 2D/3D Euler")]
struct Cli {
    /// JSON experiment configuration; flags given on the command line take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; relative paths resolve against $EULERLAB_OUTPUT_ROOT when set.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write field or checkpoint files under `fields/`.
    #[arg(long, global = true)]
    write_fields: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Shear-flow counterexample: discontinuity quotient, gap and residual.
    ShearFlow(ShearFlowArgs),
    /// Vortex-blob simulation with deformation tracking.
    FlowSim(FlowSimArgs),
    /// Perturbed multiscale flow and its norm-inflation decomposition.
    Inflate(InflateArgs),
    /// Deformation growth for several scale counts.
    DeformScan(DeformScanArgs),
    /// Norms of the multiscale vorticity against the number of scales.
    Lemma51Scan(Lemma51Args),
    /// Scaling of the perturbation norms in k and λ.
    Lemma53Scan(Lemma53Args),
    /// Norm of a field file.
    Norms(NormsArgs),
    /// Static checks of a configuration, without running it.
    Validate(ValidateArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ShearFlow(_) => "shear-flow",
            Command::FlowSim(_) => "flow-sim",
            Command::Inflate(_) => "inflate",
            Command::DeformScan(_) => "deform-scan",
            Command::Lemma51Scan(_) => "lemma51-scan",
            Command::Lemma53Scan(_) => "lemma53-scan",
            Command::Norms(_) => "norms",
            Command::Validate(_) => "validate",
        }
    }
}

#[derive(Args, Debug)]
struct ShearFlowArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long)]
    residual_samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct InflationArgs {
    /// Amplitude parameter M.
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    /// Perturbation index n (λ = 3n).
    #[arg(long = "n")]
    n: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
}

impl InflationArgs {
    fn apply(&self, p: &mut eulerlab::inflation::InflationParams) {
        set(&mut p.m, self.m);
        set(&mut p.r, self.r);
        set(&mut p.q, self.q);
        set(&mut p.n, self.n);
        if self.horizon.is_some() {
            p.horizon = self.horizon;
        }
    }
}

#[derive(Args, Debug)]
struct SolverArgs {
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    sample_every: Option<usize>,
    #[arg(long)]
    lattice_nodes: Option<usize>,
    #[arg(long)]
    field_grid_n: Option<usize>,
    #[arg(long)]
    seeds_per_bump: Option<usize>,
}

impl SolverArgs {
    fn apply(&self, s: &mut eulerlab::inflation::SolverSettings) {
        set(&mut s.steps, self.steps);
        set(&mut s.sample_every, self.sample_every);
        set(&mut s.lattice_nodes, self.lattice_nodes);
        set(&mut s.field_grid_n, self.field_grid_n);
        set(&mut s.seeds_per_bump, self.seeds_per_bump);
    }
}

#[derive(Args, Debug)]
struct FlowSimArgs {
    #[arg(long, value_enum)]
    initial: Option<InitialData>,
    /// Number of scales for multiscale data.
    #[arg(long = "N")]
    n_scales: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    checkpoint_every: Option<usize>,
}

#[derive(Args, Debug)]
struct InflateArgs {
    #[command(flatten)]
    inflation: InflationArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long = "N")]
    n_scales: Option<usize>,
}

#[derive(Args, Debug)]
struct DeformScanArgs {
    #[command(flatten)]
    inflation: InflationArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Scale counts to compare.
    #[arg(long = "N", value_delimiter = ',')]
    scales: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct Lemma51Args {
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long = "N", value_delimiter = ',')]
    scales: Option<Vec<usize>>,
}

#[derive(Args, Debug)]
struct Lemma53Args {
    #[arg(long)]
    grid_n: Option<usize>,
    /// Modulation frequencies k/2π for the k series.
    #[arg(long, value_delimiter = ',')]
    frequencies: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct NormsArgs {
    #[arg(long)]
    field: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<NormKind>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    l_min: Option<i32>,
    #[arg(long, allow_negative_numbers = true)]
    l_max: Option<i32>,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Args, Debug)]
struct ValidateArgs {}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

/// Decodes the block, applies flag overrides and stores the effective block back.
fn effective<T>(cfg: &mut ExperimentConfig, apply: impl FnOnce(&mut T)) -> Result<T, CliError>
where
    T: serde::Serialize + for<'de> serde::Deserialize<'de> + Default,
{
    let mut block: T = cfg.block()?;
    apply(&mut block);
    cfg.set_block(&block);
    Ok(block)
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))?;
    }
    let name = cli.command.name();
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None if name == "validate" => {
            return Err(CliError::Config("validate needs --config naming the experiment to check".into()))
        }
        None => ExperimentConfig::new(name),
    };
    if name == "validate" {
        let diagnostics = validate::validate(&cfg)?;
        let text = serde_json::to_string_pretty(&diagnostics).map_err(eulerlab::Error::from)?;
        println!("{text}");
        for c in diagnostics.checks.iter().filter(|c| c.status == validate::Status::Warning) {
            eprintln!("warning: {}: {}", c.name, c.message);
        }
        return Ok(());
    }
    if cfg.command != name {
        return Err(CliError::Config(format!("config is for `{}`, not `{name}`", cfg.command)));
    }
    let write_fields = cli.write_fields || cfg.write_fields;
    cfg.write_fields = write_fields;
    let artifacts: Artifacts = match &cli.command {
        Command::ShearFlow(a) => {
            let c = effective(&mut cfg, |c: &mut ShearFlowConfig| {
                set(&mut c.alpha, a.alpha);
                set(&mut c.eps, a.eps);
                set(&mut c.times, a.times.clone());
                set(&mut c.residual_samples, a.residual_samples);
                set(&mut c.seed, a.seed);
            })?;
            commands::shear_flow(&c)?
        }
        Command::FlowSim(a) => {
            let c = effective(&mut cfg, |c: &mut FlowSimConfig| {
                set(&mut c.initial, a.initial);
                set(&mut c.inflation.n_scales, a.n_scales);
                set(&mut c.dt, a.dt);
                set(&mut c.t_end, a.t_end);
                set(&mut c.checkpoint_every, a.checkpoint_every);
            })?;
            commands::flow_sim(&c, write_fields)?
        }
        Command::Inflate(a) => {
            let c = effective(&mut cfg, |c: &mut InflateConfig| {
                a.inflation.apply(&mut c.inflation);
                a.solver.apply(&mut c.solver);
                set(&mut c.inflation.n_scales, a.n_scales);
            })?;
            commands::inflate(&c, write_fields)?
        }
        Command::DeformScan(a) => {
            let c = effective(&mut cfg, |c: &mut DeformScanConfig| {
                a.inflation.apply(&mut c.inflation);
                a.solver.apply(&mut c.solver);
                set(&mut c.scales, a.scales.clone());
            })?;
            commands::deform_scan(&c, write_fields)?
        }
        Command::Lemma51Scan(a) => {
            let c = effective(&mut cfg, |c: &mut Lemma51Config| {
                set(&mut c.m, a.m);
                set(&mut c.r, a.r);
                set(&mut c.q, a.q);
                set(&mut c.scales, a.scales.clone());
            })?;
            commands::lemma51(&c)?
        }
        Command::Lemma53Scan(a) => {
            let c = effective(&mut cfg, |c: &mut Lemma53Config| {
                set(&mut c.grid_n, a.grid_n);
                set(&mut c.frequencies, a.frequencies.clone());
                set(&mut c.lambdas, a.lambdas.clone());
            })?;
            commands::lemma53(&c)?
        }
        Command::Norms(a) => {
            let c = effective(&mut cfg, |c: &mut NormsConfig| {
                if a.field.is_some() {
                    c.field = a.field.clone();
                }
                set(&mut c.kind, a.kind);
                set(&mut c.s, a.s);
                set(&mut c.p, a.p);
                set(&mut c.q, a.q);
                set(&mut c.alpha, a.alpha);
                if a.l_min.is_some() {
                    c.l_min = a.l_min;
                }
                if a.l_max.is_some() {
                    c.l_max = a.l_max;
                }
                set(&mut c.budget, a.budget);
            })?;
            commands::norms(&c)?
        }
        Command::Validate(_) => unreachable!("handled above"),
    };
    let out = resolve_output_dir(cli.out.as_deref().or(cfg.output_dir.as_deref()), name);
    commit(&out, &artifacts, &cfg.to_json())?;
    println!("{}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
