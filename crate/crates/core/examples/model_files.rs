//! Model files and declarative environments: save a model to JSON, load and
//! validate it, then run the loaded model against a simulator built from the
//! same file's arrays.
//!
//! Run with: cargo run --example model_files

use actinf::env::{EpistemicChamberEnv, TabularEnv};
use actinf::sim::LearnFlags;
use actinf::{load_model, run_simulation, save_model, AgentConfig, Result, SimOptions};

fn main() -> Result<()> {
    let dir = std::env::temp_dir();
    let path = dir.join("epistemic_chamber_model.json");

    let model = EpistemicChamberEnv::matching_model();
    save_model(&model, &path)?;
    println!("wrote {}", path.display());

    // load_model parses and validates; a broken column or missing array
    // would fail here with the offending coordinates.
    let loaded = load_model(&path)?;
    println!(
        "loaded: {} modalities, {} factors, controls {:?}",
        loaded.num_modalities(),
        loaded.num_factors(),
        loaded.num_controls()
    );

    // Interpreting the same arrays as the true process gives a declarative
    // POMDP simulator: useful for model-mismatch experiments where the
    // agent's file and the environment's file differ.
    let mut env = TabularEnv::new(loaded.clone(), 42)?;
    let opts = SimOptions {
        steps: 8,
        agent: AgentConfig {
            seed: 7,
            ..AgentConfig::default()
        },
        learn: LearnFlags::default(),
    };
    let mut trace = Vec::new();
    let summary = run_simulation(loaded, &mut env, &opts, &mut trace)?;
    println!(
        "ran {} steps, mean vfe {:.4}, location actions {:?}",
        summary.steps, summary.mean_vfe, summary.action_counts[0]
    );
    println!("first trace line:");
    let first = trace.split(|&b| b == b'\n').next().unwrap_or_default();
    println!("{}", String::from_utf8_lossy(first));
    Ok(())
}
