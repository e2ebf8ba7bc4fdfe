//! Perception-only loop: feed a sequence of observations to an agent and
//! watch the hidden-state posterior and variational free energy evolve.
//!
//! Run with: cargo run --example perception

use actinf::env::ThreeStateEnv;
use actinf::{Agent, AgentConfig, Categorical, Result};

fn main() -> Result<()> {
    // Start from a uniform prior so the beliefs below reflect only the
    // evidence in each observation.
    let model = ThreeStateEnv::matching_model().with_d(vec![Categorical::uniform(3)]);
    let mut agent = Agent::new(model, AgentConfig::default())?;

    // The third observation level is ambiguous between states: see how the
    // posterior spreads when it arrives and re-sharpens afterwards.
    let observations = [1, 1, 2, 2, 0, 1];
    println!("{:<4} {:<4} {:<30} vfe", "t", "obs", "posterior over states");
    for (t, &o) in observations.iter().enumerate() {
        let qs = agent.infer_states(&[o])?;
        let probs: Vec<String> = qs
            .factor(0)
            .probs()
            .iter()
            .map(|p| format!("{p:.3}"))
            .collect();
        println!(
            "{t:<4} {o:<4} [{:<25}] {:.4}",
            probs.join(", "),
            agent.last_vfe().expect("just inferred")
        );
    }
    Ok(())
}
