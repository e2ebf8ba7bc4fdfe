//! Stateful facade binding inference, control, and learning into the
//! perceive-plan-act cycle, with automatic prior propagation between
//! timesteps.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::control::{
    sample_action, update_posterior_policies, ActionSelection, EfeBreakdown, EfeFlags,
    PolicyPosterior,
};
use crate::error::{Error, Result};
use crate::inference::{infer_states_fpi, InferenceOptions};
use crate::learning::{
    update_a_dirichlet, update_b_dirichlet, update_d_dirichlet, LearningOptions,
};
use crate::math::{Categorical, DirichletCounts, FactorizedBelief};
use crate::model::{construct_policies, dirichlet_mean, GenerativeModel, Policy};

/// Construction-time options for an [`Agent`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub policy_len: usize,
    /// Explicit policy set; constructed combinatorially when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<Policy>>,
    /// Factors under the agent's control; `None` means all of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controllable_factors: Option<Vec<usize>>,
    pub inference: InferenceOptions,
    pub efe: EfeFlags,
    pub gamma: f64,
    pub alpha: f64,
    pub action_selection: ActionSelection,
    pub learning: LearningOptions,
    pub seed: u64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            policy_len: 1,
            policies: None,
            controllable_factors: None,
            inference: InferenceOptions::default(),
            efe: EfeFlags::default(),
            gamma: 16.0,
            alpha: 16.0,
            action_selection: ActionSelection::Deterministic,
            learning: LearningOptions::default(),
            seed: 0,
        }
    }
}

/// An active-inference agent over a fixed generative model.
///
/// Per timestep the method order is `infer_states` then `infer_policies` then
/// `sample_action`; calling out of order is an error. A perception-only loop
/// that calls just `infer_states` is valid. Not safe for concurrent use;
/// distinct instances are independent.
#[derive(Debug, Clone)]
pub struct Agent {
    model: GenerativeModel,
    policies: Vec<Policy>,
    config: AgentConfig,
    qs: FactorizedBelief,
    qs_prev: Option<FactorizedBelief>,
    /// Action that carried `qs_prev` into `qs`, frozen at inference time so
    /// that transition learning stays correct after the next action is drawn.
    transition_action: Option<Vec<usize>>,
    qs_first: Option<FactorizedBelief>,
    last_obs: Option<Vec<usize>>,
    q_pi: Option<PolicyPosterior>,
    efe: Option<Vec<EfeBreakdown>>,
    last_action: Option<Vec<usize>>,
    last_vfe: Option<f64>,
    t: usize,
    states_current: bool,
    policies_current: bool,
    rng: ChaCha8Rng,
}

impl Agent {
    pub fn new(model: GenerativeModel, config: AgentConfig) -> Result<Self> {
        let model = model.validated()?;
        let policies = match &config.policies {
            Some(p) => p.clone(),
            None => construct_policies(
                &model.num_controls(),
                config.policy_len,
                config.controllable_factors.as_deref(),
            )?,
        };
        let qs = FactorizedBelief::new(model.d.clone())?;
        Ok(Self {
            model,
            policies,
            config,
            qs,
            qs_prev: None,
            transition_action: None,
            qs_first: None,
            last_obs: None,
            q_pi: None,
            efe: None,
            last_action: None,
            last_vfe: None,
            t: 0,
            states_current: false,
            policies_current: false,
            rng: ChaCha8Rng::seed_from_u64(0),
        }
        .seeded())
    }

    fn seeded(mut self) -> Self {
        self.rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        self
    }

    pub fn model(&self) -> &GenerativeModel {
        &self.model
    }

    pub fn policies(&self) -> &[Policy] {
        &self.policies
    }

    pub fn qs(&self) -> &FactorizedBelief {
        &self.qs
    }

    pub fn q_pi(&self) -> Option<&PolicyPosterior> {
        self.q_pi.as_ref()
    }

    pub fn efe_breakdown(&self) -> Option<&[EfeBreakdown]> {
        self.efe.as_deref()
    }

    pub fn last_action(&self) -> Option<&[usize]> {
        self.last_action.as_deref()
    }

    pub fn last_vfe(&self) -> Option<f64> {
        self.last_vfe
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// The prior over hidden states for the current timestep: the D vector at
    /// the start of an episode, otherwise the previous posterior pushed
    /// through the transition model under the last action.
    pub fn current_prior(&self) -> Result<FactorizedBelief> {
        match &self.last_action {
            None => FactorizedBelief::new(self.model.d.clone()),
            Some(action) => {
                let policy = Policy::new(vec![action.clone()]);
                let mut states =
                    crate::control::get_expected_states(&self.qs, &self.model.b, &policy)?;
                Ok(states.pop().expect("one-step rollout"))
            }
        }
    }

    /// Updates the posterior over hidden states from an observation and
    /// returns it. Also records the timestep's variational free energy.
    pub fn infer_states(&mut self, obs: &[usize]) -> Result<&FactorizedBelief> {
        let prior = self.current_prior()?;
        let result = infer_states_fpi(obs, &self.model.a, &prior, &self.config.inference)?;
        if self.last_action.is_some() {
            self.qs_prev = Some(self.qs.clone());
            self.transition_action = self.last_action.clone();
        }
        self.qs = result.posterior;
        self.last_vfe = Some(result.vfe);
        self.last_obs = Some(obs.to_vec());
        if self.qs_first.is_none() {
            self.qs_first = Some(self.qs.clone());
        }
        self.states_current = true;
        self.policies_current = false;
        Ok(&self.qs)
    }

    /// Computes the posterior over policies from the stored state posterior.
    pub fn infer_policies(&mut self) -> Result<&PolicyPosterior> {
        if !self.states_current {
            return Err(Error::CallOrder("no posterior available"));
        }
        let (posterior, breakdown) = update_posterior_policies(
            &self.qs,
            &self.model,
            &self.policies,
            &self.config.efe,
            self.config.gamma,
            None,
        )?;
        self.q_pi = Some(posterior);
        self.efe = Some(breakdown);
        self.policies_current = true;
        Ok(self.q_pi.as_ref().expect("just set"))
    }

    /// Samples an action from the policy posterior, stores it as the last
    /// action, and advances the timestep counter.
    pub fn sample_action(&mut self) -> Result<Vec<usize>> {
        if !self.policies_current {
            return Err(Error::CallOrder("no policy posterior available"));
        }
        let q_pi = &self.q_pi.as_ref().expect("policies_current implies q_pi").q_pi;
        let action = sample_action(
            q_pi,
            &self.policies,
            &self.model.num_controls(),
            self.config.action_selection,
            self.config.alpha,
            &mut self.rng,
        )?;
        self.last_action = Some(action.clone());
        self.t += 1;
        self.states_current = false;
        self.policies_current = false;
        Ok(action)
    }

    /// Scalar accessor for single-factor models.
    pub fn last_action_scalar(&self) -> Option<usize> {
        match self.last_action.as_deref() {
            Some([u]) => Some(*u),
            _ => None,
        }
    }

    /// Updates the observation-model Dirichlet counts from the stored
    /// observation and posterior, refreshing A via the Dirichlet mean.
    pub fn update_a(&mut self) -> Result<&[DirichletCounts]> {
        let pa = self
            .model
            .p_a
            .as_ref()
            .ok_or(Error::CallOrder("learning not enabled for A"))?;
        let obs = self
            .last_obs
            .as_ref()
            .ok_or(Error::CallOrder("no observation available"))?;
        let new = update_a_dirichlet(pa, obs, &self.qs, &self.config.learning)?;
        self.model.a = new
            .iter()
            .map(dirichlet_mean)
            .collect::<Result<Vec<_>>>()?;
        self.model.p_a = Some(new);
        Ok(self.model.p_a.as_deref().expect("just set"))
    }

    /// Updates the transition-model Dirichlet counts from the stored belief
    /// pair and last action; requires at least two inferred timesteps.
    pub fn update_b(&mut self) -> Result<&[DirichletCounts]> {
        let pb = self
            .model
            .p_b
            .as_ref()
            .ok_or(Error::CallOrder("learning not enabled for B"))?;
        let (qs_prev, action) = match (&self.qs_prev, &self.transition_action) {
            (Some(q), Some(a)) => (q, a),
            _ => {
                return Err(Error::CallOrder(
                    "transition learning needs beliefs from two timesteps",
                ))
            }
        };
        let new = update_b_dirichlet(pb, action, &self.qs, qs_prev, &self.config.learning)?;
        self.model.b = new
            .iter()
            .map(dirichlet_mean)
            .collect::<Result<Vec<_>>>()?;
        self.model.p_b = Some(new);
        Ok(self.model.p_b.as_deref().expect("just set"))
    }

    /// Updates the initial-state-prior Dirichlet counts from the episode's
    /// first-timestep posterior, refreshing D via the Dirichlet mean.
    pub fn update_d(&mut self) -> Result<&[DirichletCounts]> {
        let pd = self
            .model
            .p_d
            .as_ref()
            .ok_or(Error::CallOrder("learning not enabled for D"))?;
        let qs_first = self
            .qs_first
            .as_ref()
            .ok_or(Error::CallOrder("no first-timestep posterior available"))?;
        let new = update_d_dirichlet(pd, qs_first, &self.config.learning)?;
        self.model.d = new
            .iter()
            .map(|c| dirichlet_mean(c).and_then(|t| Categorical::new(t.values().to_vec())))
            .collect::<Result<Vec<_>>>()?;
        self.model.p_d = Some(new);
        Ok(self.model.p_d.as_deref().expect("just set"))
    }

    /// Returns to the start-of-episode state: beliefs at D, timestep zero,
    /// generator reseeded. Learned Dirichlet counts (and the refreshed
    /// arrays) are retained.
    pub fn reset(&mut self) -> Result<()> {
        self.qs = FactorizedBelief::new(self.model.d.clone())?;
        self.qs_prev = None;
        self.transition_action = None;
        self.qs_first = None;
        self.last_obs = None;
        self.q_pi = None;
        self.efe = None;
        self.last_action = None;
        self.last_vfe = None;
        self.t = 0;
        self.states_current = false;
        self.policies_current = false;
        self.rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        Ok(())
    }
}
