//! Command-line runner: wires a model file, an environment, seeds, and a
//! horizon into a simulation that writes one JSON line per timestep, plus a
//! `validate` subcommand for checking model files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use actinf::env::{EpistemicChamberEnv, TabularEnv, ThreeStateEnv};
use actinf::sim::LearnFlags;
use actinf::{
    load_model, run_simulation, ActionSelection, AgentConfig, EfeFlags, Environment,
    LearningOptions, SimOptions,
};

#[derive(Parser)]
#[command(name = "actinf", version, about = "Discrete-state active inference simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an agent-environment loop and write a JSONL trace
    Run(RunArgs),
    /// Check a model file and report any violations
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Model file (JSON)
    #[arg(long)]
    model: PathBuf,
    /// Built-in environment name (`three-state`, `epistemic-chamber`) or a
    /// model file to simulate as the true process
    #[arg(long)]
    env: String,
    /// Number of timesteps
    #[arg(long)]
    steps: usize,
    /// Seed for the agent's action sampling
    #[arg(long, default_value_t = 0)]
    agent_seed: u64,
    /// Seed for the environment's randomness
    #[arg(long, default_value_t = 0)]
    env_seed: u64,
    /// Trace output path (stdout if omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Update the observation-model Dirichlet counts each step
    #[arg(long)]
    learn_a: bool,
    /// Update the transition-model Dirichlet counts each step
    #[arg(long)]
    learn_b: bool,
    /// Update the initial-state-prior Dirichlet counts at the first step
    #[arg(long)]
    learn_d: bool,
    /// Learning rate for Dirichlet updates
    #[arg(long, default_value_t = 1.0)]
    lr: f64,
    /// Policy precision (inverse temperature on expected free energy)
    #[arg(long, default_value_t = 16.0)]
    gamma: f64,
    /// Action precision (inverse temperature on control marginals)
    #[arg(long, default_value_t = 16.0)]
    alpha: f64,
    /// Planning horizon in timesteps
    #[arg(long, default_value_t = 1)]
    policy_len: usize,
    /// Sample actions from the control marginals instead of taking the argmax
    #[arg(long)]
    stochastic_actions: bool,
    /// Drop the utility (preference) term from the expected free energy
    #[arg(long)]
    no_utility: bool,
    /// Drop the state information-gain term from the expected free energy
    #[arg(long)]
    no_state_info_gain: bool,
    /// Add the Dirichlet-parameter information-gain (novelty) terms
    #[arg(long)]
    param_info_gain: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Model file (JSON)
    #[arg(long)]
    model: PathBuf,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Validate(args) => validate(args),
    }
}

fn build_env(spec: &str, seed: u64) -> Result<Box<dyn Environment>, String> {
    match spec {
        "three-state" => Ok(Box::new(ThreeStateEnv::new(seed))),
        "epistemic-chamber" => Ok(Box::new(EpistemicChamberEnv::new(seed))),
        path => {
            let model = load_model(path).map_err(|e| format!("environment model: {e}"))?;
            let env = TabularEnv::new(model, seed).map_err(|e| format!("environment model: {e}"))?;
            Ok(Box::new(env))
        }
    }
}

fn run(args: RunArgs) -> ExitCode {
    // setup failures (parsing, validation, unwritable output) exit 1 before
    // any trace content is produced
    let model = match load_model(&args.model) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {}: {e}", args.model.display());
            return ExitCode::from(1);
        }
    };
    let mut env = match build_env(&args.env, args.env_seed) {
        Ok(env) => env,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let opts = SimOptions {
        steps: args.steps,
        agent: AgentConfig {
            policy_len: args.policy_len,
            efe: EfeFlags {
                use_utility: !args.no_utility,
                use_states_info_gain: !args.no_state_info_gain,
                use_param_info_gain: args.param_info_gain,
            },
            gamma: args.gamma,
            alpha: args.alpha,
            action_selection: if args.stochastic_actions {
                ActionSelection::Stochastic
            } else {
                ActionSelection::Deterministic
            },
            learning: LearningOptions {
                lr: args.lr,
                ..LearningOptions::default()
            },
            seed: args.agent_seed,
            ..AgentConfig::default()
        },
        learn: LearnFlags {
            a: args.learn_a,
            b: args.learn_b,
            d: args.learn_d,
        },
    };
    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        },
        None => Box::new(std::io::stdout().lock()),
    };
    match run_simulation(model, env.as_mut(), &opts, &mut out) {
        Ok(summary) => {
            eprintln!("steps: {}", summary.steps);
            eprintln!("mean vfe: {:.6}", summary.mean_vfe);
            for (f, counts) in summary.action_counts.iter().enumerate() {
                eprintln!("actions[{f}]: {counts:?}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("runtime error: {e}");
            ExitCode::from(2)
        }
    }
}

fn validate(args: ValidateArgs) -> ExitCode {
    match load_model(&args.model) {
        Ok(_) => {
            println!("ok: {}", args.model.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {e}", args.model.display());
            ExitCode::from(1)
        }
    }
}
