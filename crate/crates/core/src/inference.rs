//! Mean-field fixed-point variational inference over hidden states, and the
//! variational free energy evaluator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{
    likelihood_message, log_stable, softmax, Categorical, ConditionalTensor, FactorizedBelief,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferenceOptions {
    /// Maximum number of full coordinate sweeps.
    pub num_iter: usize,
    /// Convergence threshold on the change in free energy between sweeps.
    pub df_tol: f64,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            num_iter: 10,
            df_tol: 1e-4,
        }
    }
}

impl InferenceOptions {
    fn check(&self) -> Result<()> {
        if self.num_iter < 1 {
            return Err(Error::InvalidArgument("num_iter must be >= 1".into()));
        }
        if self.df_tol <= 0.0 {
            return Err(Error::InvalidArgument("df_tol must be > 0".into()));
        }
        Ok(())
    }
}

/// Outcome of a fixed-point inference run.
#[derive(Debug, Clone)]
pub struct InferenceResult {
    pub posterior: FactorizedBelief,
    /// Free energy at the returned posterior (nats).
    pub vfe: f64,
    /// Free energy after each completed sweep, in order.
    pub sweep_vfes: Vec<f64>,
}

/// Runs coordinate-wise fixed-point iteration on the mean-field posterior:
/// each factor's marginal is set to
/// `softmax(sum_m E_{q \ f}[ln P(o_m | s)] + ln prior_f)`,
/// sweeping factors in ascending order until the free energy change drops
/// below `df_tol` or `num_iter` sweeps have run.
pub fn infer_states_fpi(
    obs: &[usize],
    a: &[ConditionalTensor],
    prior: &FactorizedBelief,
    opts: &InferenceOptions,
) -> Result<InferenceResult> {
    opts.check()?;
    check_obs(obs, a)?;

    let log_priors: Vec<Vec<f64>> = prior
        .marginals()
        .iter()
        .map(|m| m.probs().iter().map(|&p| log_stable(p)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;

    // warm start at the prior
    let mut qs = prior.clone();
    let mut sweep_vfes = Vec::new();
    let mut last = vfe(&qs, obs, a, prior)?;
    for _ in 0..opts.num_iter {
        for f in 0..qs.num_factors() {
            let mut logits = log_priors[f].clone();
            for (m, am) in a.iter().enumerate() {
                let msg = likelihood_message(am, obs[m], &qs, f)?;
                for (l, m_val) in logits.iter_mut().zip(&msg) {
                    *l += m_val;
                }
            }
            let updated = softmax(&logits)?;
            let mut marginals = qs.marginals().to_vec();
            marginals[f] = updated;
            qs = FactorizedBelief::new(marginals)?;
        }
        let current = vfe(&qs, obs, a, prior)?;
        sweep_vfes.push(current);
        let converged = (last - current).abs() < opts.df_tol;
        last = current;
        if converged {
            break;
        }
    }
    Ok(InferenceResult {
        posterior: qs,
        vfe: last,
        sweep_vfes,
    })
}

/// Variational free energy of a belief `qs` given an observation:
/// `E_Q[ln Q] - E_Q[ln P(o|s)] - E_Q[ln prior]`, in nats.
pub fn vfe(
    qs: &FactorizedBelief,
    obs: &[usize],
    a: &[ConditionalTensor],
    prior: &FactorizedBelief,
) -> Result<f64> {
    check_obs(obs, a)?;
    if qs.num_factors() != prior.num_factors() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} factors", prior.num_factors()),
            actual: format!("{} factors", qs.num_factors()),
        });
    }

    let mut value = 0.0;
    for (q, p) in qs.marginals().iter().zip(prior.marginals()) {
        for (&qi, &pi) in q.probs().iter().zip(p.probs()) {
            value += qi * log_stable(qi)?; // E_Q[ln Q]
            value -= qi * log_stable(pi)?; // -E_Q[ln prior]
        }
    }
    // -E_Q[ln P(o|s)]: dot the factor-0 message with the factor-0 marginal to
    // recover the full expectation over the joint
    for (m, am) in a.iter().enumerate() {
        let msg = likelihood_message(am, obs[m], qs, 0)?;
        value -= qs
            .factor(0)
            .probs()
            .iter()
            .zip(&msg)
            .map(|(&q, &l)| q * l)
            .sum::<f64>();
    }
    Ok(value)
}

/// Policy-averaged belief: per-factor convex combination of the
/// policy-conditioned marginals, weighted by the policy posterior.
pub fn bayesian_model_average(
    qs_pi: &[FactorizedBelief],
    q_pi: &Categorical,
) -> Result<FactorizedBelief> {
    if qs_pi.len() != q_pi.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} beliefs", q_pi.len()),
            actual: format!("{} beliefs", qs_pi.len()),
        });
    }
    if qs_pi.is_empty() {
        return Err(Error::InvalidArgument("empty belief list".into()));
    }
    let num_factors = qs_pi[0].num_factors();
    let mut marginals = Vec::with_capacity(num_factors);
    for f in 0..num_factors {
        let len = qs_pi[0].factor(f).len();
        let mut avg = vec![0.0; len];
        for (belief, &w) in qs_pi.iter().zip(q_pi.probs()) {
            for (acc, &p) in avg.iter_mut().zip(belief.factor(f).probs()) {
                *acc += w * p;
            }
        }
        marginals.push(Categorical::from_weights(&avg)?);
    }
    FactorizedBelief::new(marginals)
}

fn check_obs(obs: &[usize], a: &[ConditionalTensor]) -> Result<()> {
    if obs.len() != a.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} observation indices", a.len()),
            actual: format!("{}", obs.len()),
        });
    }
    for (m, (&o, am)) in obs.iter().zip(a).enumerate() {
        if o >= am.support_size() {
            return Err(Error::IndexOutOfRange {
                what: "observation",
                index: o,
                limit: am.support_size(),
            });
        }
        let _ = m;
    }
    Ok(())
}
