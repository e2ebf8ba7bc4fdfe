//! Seeded agent–environment simulation loop emitting one line-delimited
//! JSON record per timestep. A fixed (model, options, seeds, horizon) tuple
//! produces a byte-identical trace, which makes traces usable as golden
//! files in regression tests.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agent::{Agent, AgentConfig};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::control::EfeBreakdown;
use crate::model::GenerativeModel;

/// Which Dirichlet updates to apply after each timestep's inference.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LearnFlags {
    pub a: bool,
    pub b: bool,
    pub d: bool,
}

/// Options for [`run_simulation`].
#[derive(Debug, Clone, Default)]
pub struct SimOptions {
    pub steps: usize,
    pub agent: AgentConfig,
    pub learn: LearnFlags,
}

/// One timestep of a simulation. `qs` rows and `q_pi` each sum to one
/// within 1e-9; `g` holds the per-policy expected free energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub obs: Vec<usize>,
    pub qs: Vec<Vec<f64>>,
    pub vfe: f64,
    pub q_pi: Vec<f64>,
    #[serde(rename = "G")]
    pub g: Vec<f64>,
    pub efe_components: Vec<EfeBreakdown>,
    pub action: Vec<usize>,
    pub wall_ms: u64,
}

/// Aggregate statistics printed after a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub steps: usize,
    pub mean_vfe: f64,
    /// Per-factor histogram of sampled control indices.
    pub action_counts: Vec<Vec<usize>>,
}

impl RunSummary {
    fn from_trace(trace: &[TraceRecord], num_controls: &[usize]) -> Self {
        let mut action_counts: Vec<Vec<usize>> =
            num_controls.iter().map(|&n| vec![0; n]).collect();
        let mut vfe_sum = 0.0;
        for rec in trace {
            vfe_sum += rec.vfe;
            for (f, &u) in rec.action.iter().enumerate() {
                action_counts[f][u] += 1;
            }
        }
        Self {
            steps: trace.len(),
            mean_vfe: if trace.is_empty() {
                0.0
            } else {
                vfe_sum / trace.len() as f64
            },
            action_counts,
        }
    }
}

/// Runs `steps` iterations of observe → infer states → infer policies →
/// sample action (plus any enabled learning updates), writing each
/// [`TraceRecord`] to `out` as one JSON line. The first observation comes
/// from `env.reset()`; later ones from stepping the environment with the
/// sampled action. Runtime failures are tagged with the step they occurred
/// at.
pub fn run_simulation(
    model: GenerativeModel,
    env: &mut dyn Environment,
    opts: &SimOptions,
    out: &mut dyn Write,
) -> Result<RunSummary> {
    let num_controls = model.num_controls();
    let mut agent = Agent::new(model, opts.agent.clone())?;
    let mut trace = Vec::with_capacity(opts.steps);
    let mut obs = env.reset();
    for t in 0..opts.steps {
        let step = (|| -> Result<TraceRecord> {
            let started = Instant::now();
            agent.infer_states(&obs)?;
            if opts.learn.a {
                agent.update_a()?;
            }
            if opts.learn.b && t > 0 {
                agent.update_b()?;
            }
            if opts.learn.d && t == 0 {
                agent.update_d()?;
            }
            agent.infer_policies()?;
            let action = agent.sample_action()?;
            let q_pi = agent.q_pi().expect("policies just inferred");
            Ok(TraceRecord {
                t,
                obs: obs.clone(),
                qs: agent
                    .qs()
                    .marginals()
                    .iter()
                    .map(|m| m.probs().to_vec())
                    .collect(),
                vfe: agent.last_vfe().expect("states just inferred"),
                q_pi: q_pi.q_pi.probs().to_vec(),
                g: q_pi.g.clone(),
                efe_components: agent
                    .efe_breakdown()
                    .expect("policies just inferred")
                    .to_vec(),
                action,
                wall_ms: started.elapsed().as_millis() as u64,
            })
        })()
        .map_err(|e| Error::InvalidArgument(format!("step {t}: {e}")))?;
        let mut line = serde_json::to_vec(&step).map_err(Error::Parse)?;
        line.push(b'\n');
        out.write_all(&line)?;
        obs = env
            .step(&step.action)
            .map_err(|e| Error::InvalidArgument(format!("step {t}: {e}")))?;
        trace.push(step);
    }
    out.flush()?;
    Ok(RunSummary::from_trace(&trace, &num_controls))
}
