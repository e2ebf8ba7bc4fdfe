//! Discrete-state active inference: POMDP generative models, variational
//! state inference, expected-free-energy policy selection, Dirichlet
//! parameter learning, and seeded agent/environment simulation.
//!
//! The typical entry point is [`Agent`], which wraps a [`GenerativeModel`]
//! and exposes the perceive-plan-act cycle (`infer_states`, `infer_policies`,
//! `sample_action`) plus optional learning updates. The underlying free
//! functions in [`inference`], [`control`], and [`learning`] are public for
//! callers who want to drive each step directly. See the `examples/`
//! directory for runnable walkthroughs of each capability.

pub mod agent;
pub mod control;
pub mod env;
pub mod error;
pub mod inference;
pub mod learning;
pub mod math;
pub mod model;
pub mod sim;

pub use agent::{Agent, AgentConfig};
pub use control::{ActionSelection, EfeBreakdown, EfeFlags, PolicyPosterior};
pub use env::{EpistemicChamberEnv, Environment, TabularEnv, ThreeStateEnv};
pub use error::{Error, Result};
pub use inference::{InferenceOptions, InferenceResult};
pub use learning::{LearningOptions, Targets};
pub use math::{Categorical, ConditionalTensor, DirichletCounts, FactorizedBelief};
pub use model::{
    construct_policies, load_model, save_model, GenerativeModel, Labels, ModelSpecFile, Policy,
    Preferences, ValidationReport,
};
pub use sim::{run_simulation, LearnFlags, RunSummary, SimOptions, TraceRecord};
