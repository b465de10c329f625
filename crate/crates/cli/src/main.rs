//! `oblate`: planar ion crystals in an oblate Paul trap.
//!
//! Four subcommands cover the pipeline: `stability` maps the DC voltage
//! region admitting a planar crystal, `equilibrium` solves an N-ion crystal,
//! `modes` tracks the phonon bands across a ring-voltage sweep, and
//! `couplings` evaluates phonon-mediated Ising couplings over a list of
//! detunings. Identical invocations produce byte-identical outputs, each
//! recorded in a manifest that `--check` verifies later.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 3 compute failure
//! or failed verification, 4 partial results (some requested points failed;
//! outputs cover the rest).

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{CliError, Outcome};

#[derive(Parser)]
#[command(name = "oblate", version, about = "Planar ion crystals in an oblate Paul trap")]
struct Cli {
    /// Trap configuration file (`key = value unit` lines); built-in
    /// reference setup when omitted
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Verify this command's previous outputs against its manifest instead
    /// of computing
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map planar-crystal stability over a DC voltage grid
    Stability(StabilityArgs),
    /// Solve an N-ion planar crystal at one operating point
    Equilibrium(EquilibriumArgs),
    /// Phonon spectra at one ring voltage or across a sweep
    Modes(ModesArgs),
    /// Ising couplings over a list of beat-note detunings
    Couplings(CouplingsArgs),
}

#[derive(Args)]
struct StabilityArgs {
    /// Ring voltage sweep start, V
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    ring_min: f64,
    /// Ring voltage sweep end (inclusive), V
    #[arg(long, default_value_t = 100.0, allow_hyphen_values = true)]
    ring_max: f64,
    /// Ring voltage step, V
    #[arg(long, default_value_t = 1.0)]
    ring_step: f64,
    /// End-cap voltage sweep start, V
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    endcap_min: f64,
    /// End-cap voltage sweep end (inclusive), V
    #[arg(long, default_value_t = 100.0, allow_hyphen_values = true)]
    endcap_max: f64,
    /// End-cap voltage step, V
    #[arg(long, default_value_t = 1.0)]
    endcap_step: f64,
}

#[derive(Args)]
struct SolveArgs {
    /// Number of ions
    #[arg(long)]
    n: usize,
    /// Top end-cap voltage, V (overrides the configuration)
    #[arg(long, allow_hyphen_values = true)]
    v_top: Option<f64>,
    /// Bottom end-cap voltage, V (overrides the configuration)
    #[arg(long, allow_hyphen_values = true)]
    v_bottom: Option<f64>,
    /// Number of starting configurations (default scales with N)
    #[arg(long)]
    seeds: Option<usize>,
    /// Seed for the starting-configuration generator
    #[arg(long, default_value_t = 1)]
    rng_seed: u64,
    /// Convergence bound on the gradient max-norm
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Newton iteration budget per seed
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
}

impl SolveArgs {
    fn params(&self, v_ring: Option<f64>) -> commands::SolveParams {
        commands::SolveParams {
            n: self.n,
            v_ring,
            v_top: self.v_top,
            v_bottom: self.v_bottom,
            seeds: self.seeds,
            rng_seed: self.rng_seed,
            tol: self.tol,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Args)]
struct EquilibriumArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Ring electrode voltage, V (overrides the configuration)
    #[arg(long, allow_hyphen_values = true)]
    v_ring: Option<f64>,
    /// Re-solve by simulated annealing and compare energies and structure
    #[arg(long)]
    cross_check: bool,
    /// Seed for the annealing cross-check
    #[arg(long, default_value_t = 0)]
    anneal_seed: u64,
}

#[derive(Args)]
struct ModesArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Single ring voltage, V (alternative to a sweep)
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["ring_min", "ring_max", "ring_step"])]
    v_ring: Option<f64>,
    /// Ring voltage sweep start, V
    #[arg(long, allow_hyphen_values = true)]
    ring_min: Option<f64>,
    /// Ring voltage sweep end (inclusive), V
    #[arg(long, allow_hyphen_values = true)]
    ring_max: Option<f64>,
    /// Ring voltage step, V
    #[arg(long)]
    ring_step: Option<f64>,
}

#[derive(Args)]
struct CouplingsArgs {
    #[command(flatten)]
    solve: SolveArgs,
    /// Ring electrode voltage, V (overrides the configuration)
    #[arg(long, allow_hyphen_values = true)]
    v_ring: Option<f64>,
    /// Beat-note detunings in units of the axial center-of-mass frequency,
    /// comma separated
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    mu: Vec<f64>,
    /// Carrier Rabi frequency, rad/s (with --delta-k, reports the coupling
    /// scale in rad/s)
    #[arg(long, requires = "delta_k")]
    rabi: Option<f64>,
    /// Beat-note wavevector difference, 1/m
    #[arg(long, requires = "rabi")]
    delta_k: Option<f64>,
}

fn dispatch(cli: &Cli, argv: &[String]) -> Result<Outcome, CliError> {
    let name = match &cli.command {
        Command::Stability(_) => "stability",
        Command::Equilibrium(_) => "equilibrium",
        Command::Modes(_) => "modes",
        Command::Couplings(_) => "couplings",
    };
    if cli.check {
        return commands::run_check(&cli.out, name);
    }
    let setup = commands::load_setup(&cli.config)?;
    match &cli.command {
        Command::Stability(a) => commands::run_stability(
            &setup,
            &commands::StabilityParams {
                ring: (a.ring_min, a.ring_max, a.ring_step),
                endcap: (a.endcap_min, a.endcap_max, a.endcap_step),
            },
            &cli.out,
            argv,
        ),
        Command::Equilibrium(a) => commands::run_equilibrium(
            &setup,
            &a.solve.params(a.v_ring),
            a.cross_check,
            a.anneal_seed,
            &cli.out,
            argv,
        ),
        Command::Modes(a) => commands::run_modes(
            &setup,
            &a.solve.params(None),
            &commands::ModesParams {
                v_ring: a.v_ring,
                ring_min: a.ring_min,
                ring_max: a.ring_max,
                ring_step: a.ring_step,
            },
            &cli.out,
            argv,
        ),
        Command::Couplings(a) => commands::run_couplings(
            &setup,
            &a.solve.params(a.v_ring),
            &commands::CouplingsParams {
                mu: a.mu.clone(),
                rabi: a.rabi,
                delta_k: a.delta_k,
            },
            &cli.out,
            argv,
        ),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();
    match dispatch(&cli, &argv) {
        Ok(Outcome { partial: false }) => ExitCode::SUCCESS,
        Ok(Outcome { partial: true }) => {
            eprintln!("warning: some requested points failed; outputs cover the rest");
            ExitCode::from(4)
        }
        Err(e @ CliError::Usage(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
