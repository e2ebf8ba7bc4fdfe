//! Expected-free-energy evaluation per policy, policy posterior computation,
//! and action selection.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{
    entropy, expected_likelihood, for_each_multi_index, log_stable, softmax, Categorical,
    ConditionalTensor, DirichletCounts, FactorizedBelief,
};
use crate::model::{GenerativeModel, Policy, Preferences};

/// Which expected-free-energy components to accumulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfeFlags {
    pub use_utility: bool,
    pub use_states_info_gain: bool,
    pub use_param_info_gain: bool,
}

impl Default for EfeFlags {
    fn default() -> Self {
        Self {
            use_utility: true,
            use_states_info_gain: true,
            use_param_info_gain: false,
        }
    }
}

/// Per-policy decomposition of the expected free energy. `total_g` is the
/// negated sum of the enabled components, so lower G means a better policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfeBreakdown {
    pub utility: f64,
    pub state_info_gain: f64,
    pub pa_info_gain: f64,
    pub pb_info_gain: f64,
    pub total_g: f64,
}

/// Posterior over policies together with the per-policy expected free energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyPosterior {
    pub q_pi: Categorical,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionSelection {
    Deterministic,
    Stochastic,
}

/// Projects beliefs forward through the transition tensors along a policy:
/// `qs[t][f] = B[f][:, :, u_t^f] . qs[t-1][f]`, seeded with the current belief.
pub fn get_expected_states(
    qs: &FactorizedBelief,
    b: &[ConditionalTensor],
    policy: &Policy,
) -> Result<Vec<FactorizedBelief>> {
    if policy.num_factors() != b.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} control factors", b.len()),
            actual: format!("{}", policy.num_factors()),
        });
    }
    let mut out = Vec::with_capacity(policy.len());
    let mut current = qs.clone();
    for t in 0..policy.len() {
        let mut marginals = Vec::with_capacity(b.len());
        for (f, bf) in b.iter().enumerate() {
            let u = policy.control(t, f);
            let num_u = bf.dims()[2];
            if u >= num_u {
                return Err(Error::IndexOutOfRange {
                    what: "control",
                    index: u,
                    limit: num_u,
                });
            }
            let prev = current.factor(f).probs();
            let size = bf.support_size();
            let mut next = vec![0.0; size];
            for (i, n) in next.iter_mut().enumerate() {
                for (j, &p) in prev.iter().enumerate() {
                    *n += bf.value(i, &[j, u]) * p;
                }
            }
            marginals.push(Categorical::from_weights(&next)?);
        }
        current = FactorizedBelief::new(marginals)?;
        out.push(current.clone());
    }
    Ok(out)
}

/// Expected observation distributions per timestep and modality.
pub fn get_expected_obs(
    qs_pi: &[FactorizedBelief],
    a: &[ConditionalTensor],
) -> Result<Vec<Vec<Categorical>>> {
    qs_pi
        .iter()
        .map(|qs| a.iter().map(|am| expected_likelihood(am, qs)).collect())
        .collect()
}

/// Dot product of expected observations with the log-preference vectors,
/// summed over timesteps and modalities.
pub fn expected_utility(qo_pi: &[Vec<Categorical>], c: &[Preferences]) -> Result<f64> {
    let mut utility = 0.0;
    for (t, qo_t) in qo_pi.iter().enumerate() {
        if qo_t.len() != c.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} modalities", c.len()),
                actual: format!("{}", qo_t.len()),
            });
        }
        for (qo, cm) in qo_t.iter().zip(c) {
            let prefs = cm.at(t);
            if prefs.len() != qo.len() {
                return Err(Error::ShapeMismatch {
                    expected: format!("preference length {}", qo.len()),
                    actual: format!("{}", prefs.len()),
                });
            }
            utility += qo.probs().iter().zip(prefs).map(|(&q, &p)| q * p).sum::<f64>();
        }
    }
    Ok(utility)
}

/// Expected information gain about hidden states, summed over timesteps and
/// modalities. Uses the mutual-information form
/// `H(E_qs[P(o|s)]) - E_qs[H(P(o|s))]`, which equals the expected KL between
/// posterior and prior state beliefs under predicted observations.
pub fn states_info_gain(a: &[ConditionalTensor], qs_pi: &[FactorizedBelief]) -> Result<f64> {
    let mut gain = 0.0;
    for qs in qs_pi {
        for am in a {
            let qo = expected_likelihood(am, qs)?;
            let marginal_entropy = entropy(&qo);
            let mut conditional_entropy = 0.0;
            for_each_multi_index(am.cond_dims(), |cond| {
                let weight: f64 = cond
                    .iter()
                    .enumerate()
                    .map(|(f, &s)| qs.factor(f).probs()[s])
                    .product();
                if weight > 0.0 {
                    let mut h = 0.0;
                    for i in 0..am.support_size() {
                        let p = am.value(i, cond);
                        h -= p * p.max(crate::math::LOG_EPS).ln();
                    }
                    conditional_entropy += weight * h;
                }
            });
            gain += marginal_entropy - conditional_entropy;
        }
    }
    Ok(gain)
}

/// Expected reduction in uncertainty about the observation-model Dirichlet
/// parameters (the novelty term): the weighting `1/pA - 1/colsum`, contracted
/// with the predicted observation and state distributions.
pub fn pa_info_gain(
    pa: &[DirichletCounts],
    qo_pi: &[Vec<Categorical>],
    qs_pi: &[FactorizedBelief],
) -> Result<f64> {
    if qo_pi.len() != qs_pi.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} timesteps", qs_pi.len()),
            actual: format!("{}", qo_pi.len()),
        });
    }
    let mut gain = 0.0;
    for (qo_t, qs) in qo_pi.iter().zip(qs_pi) {
        for (pam, qo) in pa.iter().zip(qo_t) {
            let w = pam.novelty_weights();
            let dims = pam.dims().to_vec();
            let mut flat = 0usize;
            let mut acc = 0.0;
            for_each_multi_index(&dims, |idx| {
                let weight = qo.probs()[idx[0]]
                    * idx[1..]
                        .iter()
                        .enumerate()
                        .map(|(f, &s)| qs.factor(f).probs()[s])
                        .product::<f64>();
                acc += weight * w[flat];
                flat += 1;
            });
            gain += acc;
        }
    }
    Ok(gain)
}

/// Novelty term for the transition-model Dirichlet parameters, restricted to
/// the action slices the policy actually takes.
pub fn pb_info_gain(
    pb: &[DirichletCounts],
    qs_pi: &[FactorizedBelief],
    qs_prev: &FactorizedBelief,
    policy: &Policy,
) -> Result<f64> {
    let mut gain = 0.0;
    for (t, qs_t) in qs_pi.iter().enumerate() {
        let before = if t == 0 { qs_prev } else { &qs_pi[t - 1] };
        for (f, pbf) in pb.iter().enumerate() {
            let u = policy.control(t, f);
            let dims = pbf.dims();
            let (size, num_u) = (dims[0], dims[2]);
            if u >= num_u {
                return Err(Error::IndexOutOfRange {
                    what: "control",
                    index: u,
                    limit: num_u,
                });
            }
            let w = pbf.novelty_weights();
            let q_next = qs_t.factor(f).probs();
            let q_prev = before.factor(f).probs();
            for i in 0..size {
                for j in 0..size {
                    gain += q_next[i] * q_prev[j] * w[(i * size + j) * num_u + u];
                }
            }
        }
    }
    Ok(gain)
}

/// Rolls out every policy, accumulates the enabled EFE components into `G`,
/// and returns `q_pi = softmax(-gamma * G + ln E - F)` together with the
/// per-policy breakdown. `f_pi` defaults to the zero vector.
pub fn update_posterior_policies(
    qs: &FactorizedBelief,
    model: &GenerativeModel,
    policies: &[Policy],
    flags: &EfeFlags,
    gamma: f64,
    f_pi: Option<&[f64]>,
) -> Result<(PolicyPosterior, Vec<EfeBreakdown>)> {
    if policies.is_empty() {
        return Err(Error::InvalidArgument("empty policy set".into()));
    }
    if let Some(f) = f_pi {
        if f.len() != policies.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} policy free energies", policies.len()),
                actual: format!("{}", f.len()),
            });
        }
    }
    let e = match &model.e {
        Some(e) if e.len() != policies.len() => {
            return Err(Error::ShapeMismatch {
                expected: format!("habit vector of length {}", policies.len()),
                actual: format!("{}", e.len()),
            })
        }
        Some(e) => e.clone(),
        None => Categorical::uniform(policies.len()),
    };

    let mut breakdowns = Vec::with_capacity(policies.len());
    let mut g = Vec::with_capacity(policies.len());
    for policy in policies {
        let qs_pi = get_expected_states(qs, &model.b, policy)?;
        let qo_pi = get_expected_obs(&qs_pi, &model.a)?;
        let utility = if flags.use_utility {
            expected_utility(&qo_pi, &model.c)?
        } else {
            0.0
        };
        let state_ig = if flags.use_states_info_gain {
            states_info_gain(&model.a, &qs_pi)?
        } else {
            0.0
        };
        let (mut pa_ig, mut pb_ig) = (0.0, 0.0);
        if flags.use_param_info_gain {
            if let Some(pa) = &model.p_a {
                pa_ig = pa_info_gain(pa, &qo_pi, &qs_pi)?;
            }
            if let Some(pb) = &model.p_b {
                pb_ig = pb_info_gain(pb, &qs_pi, qs, policy)?;
            }
        }
        let total_g = -(utility + state_ig + pa_ig + pb_ig);
        breakdowns.push(EfeBreakdown {
            utility,
            state_info_gain: state_ig,
            pa_info_gain: pa_ig,
            pb_info_gain: pb_ig,
            total_g,
        });
        g.push(total_g);
    }

    let logits: Vec<f64> = g
        .iter()
        .enumerate()
        .map(|(i, &gi)| {
            let ln_e = log_stable(e.probs()[i])?;
            Ok(-gamma * gi + ln_e - f_pi.map_or(0.0, |f| f[i]))
        })
        .collect::<Result<_>>()?;
    let q_pi = softmax(&logits)?;
    Ok((PolicyPosterior { q_pi, g }, breakdowns))
}

/// Marginal posterior over first-step control states,
/// `Q(u_f) = sum_pi q_pi(pi) [policy takes u_f]`, one categorical per factor.
pub fn control_marginals(
    q_pi: &Categorical,
    policies: &[Policy],
    num_controls: &[usize],
) -> Result<Vec<Categorical>> {
    if q_pi.len() != policies.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} policies", q_pi.len()),
            actual: format!("{}", policies.len()),
        });
    }
    let mut marginals = Vec::with_capacity(num_controls.len());
    for (f, &nu) in num_controls.iter().enumerate() {
        let mut weights = vec![0.0; nu];
        for (policy, &w) in policies.iter().zip(q_pi.probs()) {
            weights[policy.control(0, f)] += w;
        }
        marginals.push(Categorical::from_weights(&weights)?);
    }
    Ok(marginals)
}

/// Samples one control index per factor from the marginal control posterior.
/// Deterministic mode takes the argmax (ties resolve to the lowest index);
/// stochastic mode samples `softmax(alpha * ln Q(u))` from the given generator.
pub fn sample_action(
    q_pi: &Categorical,
    policies: &[Policy],
    num_controls: &[usize],
    mode: ActionSelection,
    alpha: f64,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    if mode == ActionSelection::Stochastic && alpha <= 0.0 {
        return Err(Error::InvalidArgument(
            "alpha must be > 0 in stochastic mode".into(),
        ));
    }
    let marginals = control_marginals(q_pi, policies, num_controls)?;
    let mut action = Vec::with_capacity(marginals.len());
    for q_u in &marginals {
        let u = match mode {
            ActionSelection::Deterministic => q_u.argmax(),
            ActionSelection::Stochastic => {
                let logits: Vec<f64> = q_u
                    .probs()
                    .iter()
                    .map(|&p| log_stable(p).map(|l| alpha * l))
                    .collect::<Result<_>>()?;
                let dist = softmax(&logits)?;
                sample_index(&dist, rng)
            }
        };
        action.push(u);
    }
    Ok(action)
}

/// Inverse-CDF draw from a categorical distribution.
pub(crate) fn sample_index(dist: &Categorical, rng: &mut impl Rng) -> usize {
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in dist.probs().iter().enumerate() {
        acc += p;
        if x < acc {
            return i;
        }
    }
    dist.len() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    fn reference_b() -> ConditionalTensor {
        #[rustfmt::skip]
        let values = vec![
            0.5, 0.0, 0.5, 0.0, 0.5, 0.0,
            0.5, 0.0, 0.5, 0.0, 0.5, 0.0,
            0.0, 1.0, 0.0, 1.0, 0.0, 1.0,
        ];
        ConditionalTensor::new(vec![3, 3, 2], values).unwrap()
    }

    #[test]
    fn expected_states_jump_action() {
        let qs = FactorizedBelief::new(vec![Categorical::one_hot(0, 3)]).unwrap();
        let policy = Policy::new(vec![vec![1]]);
        let qs_pi = get_expected_states(&qs, &[reference_b()], &policy).unwrap();
        assert_eq!(qs_pi.len(), 1);
        assert_close(qs_pi[0].factor(0).probs()[2], 1.0, 1e-12);
    }

    #[test]
    fn expected_states_scatter_action() {
        let qs = FactorizedBelief::new(vec![Categorical::one_hot(2, 3)]).unwrap();
        let policy = Policy::new(vec![vec![0]]);
        let qs_pi = get_expected_states(&qs, &[reference_b()], &policy).unwrap();
        let probs = qs_pi[0].factor(0).probs();
        assert_close(probs[0], 0.5, 1e-12);
        assert_close(probs[1], 0.5, 1e-12);
        assert_close(probs[2], 0.0, 1e-12);
    }

    #[test]
    fn expected_states_identity_transitions() {
        let mut values = vec![0.0; 3 * 3 * 2];
        for i in 0..3 {
            for u in 0..2 {
                values[(i * 3 + i) * 2 + u] = 1.0;
            }
        }
        let b = ConditionalTensor::new(vec![3, 3, 2], values).unwrap();
        let qs =
            FactorizedBelief::new(vec![Categorical::new(vec![0.2, 0.3, 0.5]).unwrap()]).unwrap();
        let policy = Policy::new(vec![vec![0], vec![1], vec![0]]);
        let qs_pi = get_expected_states(&qs, &[b], &policy).unwrap();
        for t in 0..3 {
            for (x, y) in qs_pi[t].factor(0).probs().iter().zip(qs.factor(0).probs()) {
                assert_close(*x, *y, 1e-12);
            }
        }
    }

    #[test]
    fn expected_obs_identity() {
        let a = ConditionalTensor::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let qs = FactorizedBelief::new(vec![Categorical::new(vec![0.2, 0.8]).unwrap()]).unwrap();
        let qo = get_expected_obs(&[qs], &[a]).unwrap();
        assert_close(qo[0][0].probs()[0], 0.2, 1e-12);
        assert_close(qo[0][0].probs()[1], 0.8, 1e-12);
    }

    #[test]
    fn utility_zero_preferences() {
        let qo = vec![vec![Categorical::new(vec![0.3, 0.7]).unwrap()]];
        let c = vec![Preferences::zeros(2)];
        assert_eq!(expected_utility(&qo, &c).unwrap(), 0.0);
    }

    #[test]
    fn utility_dot_product() {
        let qo = vec![vec![Categorical::new(vec![1.0, 0.0]).unwrap()]];
        let c = vec![Preferences::Static(vec![2.0, 0.0])];
        assert_close(expected_utility(&qo, &c).unwrap(), 2.0, 1e-12);
    }

    #[test]
    fn utility_constant_shift() {
        let qo = vec![
            vec![Categorical::new(vec![0.3, 0.7]).unwrap()],
            vec![Categorical::new(vec![0.9, 0.1]).unwrap()],
        ];
        let base = expected_utility(&qo, &[Preferences::Static(vec![1.0, -2.0])]).unwrap();
        let c = 0.7;
        let shifted =
            expected_utility(&qo, &[Preferences::Static(vec![1.0 + c, -2.0 + c])]).unwrap();
        // 2 timesteps, 1 modality
        assert_close(shifted - base, c * 2.0, 1e-12);
    }

    #[test]
    fn states_info_gain_uniform_is_zero() {
        let a = ConditionalTensor::new(vec![2, 3], vec![0.5; 6]).unwrap();
        let qs = FactorizedBelief::new(vec![Categorical::new(vec![0.2, 0.3, 0.5]).unwrap()])
            .unwrap();
        assert_close(states_info_gain(&[a], &[qs]).unwrap(), 0.0, 1e-12);
    }

    #[test]
    fn states_info_gain_noiseless_channel() {
        let a = ConditionalTensor::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let qs = FactorizedBelief::uniform(&[2]);
        assert_close(states_info_gain(&[a], &[qs]).unwrap(), 2f64.ln(), 1e-10);
    }

    #[test]
    fn states_info_gain_certain_state_is_zero() {
        let a = ConditionalTensor::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let qs = FactorizedBelief::new(vec![Categorical::one_hot(1, 2)]).unwrap();
        assert!(states_info_gain(&[a], &[qs]).unwrap().abs() < 1e-10);
    }

    #[test]
    fn pa_info_gain_hand_evaluated() {
        // all-ones 2x2 counts: w = 1/1 - 1/2 = 0.5 everywhere; one-hot beliefs
        // pick out a single cell
        let pa = vec![DirichletCounts::ones(vec![2, 2])];
        let qo = vec![vec![Categorical::one_hot(0, 2)]];
        let qs = vec![FactorizedBelief::new(vec![Categorical::one_hot(1, 2)]).unwrap()];
        assert_close(pa_info_gain(&pa, &qo, &qs).unwrap(), 0.5, 1e-12);
    }

    #[test]
    fn pa_info_gain_vanishes_for_learned_model() {
        let pa = vec![DirichletCounts::new(vec![2, 2], vec![1e6; 4]).unwrap()];
        let qo = vec![vec![Categorical::new(vec![0.3, 0.7]).unwrap()]];
        let qs = vec![FactorizedBelief::uniform(&[2])];
        assert!(pa_info_gain(&pa, &qo, &qs).unwrap() < 1e-6);
    }

    #[test]
    fn pa_info_gain_decreases_with_counts() {
        let qo = vec![vec![Categorical::new(vec![0.6, 0.4]).unwrap()]];
        let qs = vec![FactorizedBelief::new(vec![
            Categorical::new(vec![0.2, 0.8]).unwrap(),
        ])
        .unwrap()];
        let base = DirichletCounts::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let doubled =
            DirichletCounts::new(vec![2, 2], base.values().iter().map(|v| v * 2.0).collect())
                .unwrap();
        let g1 = pa_info_gain(&[base], &qo, &qs).unwrap();
        let g2 = pa_info_gain(&[doubled], &qo, &qs).unwrap();
        assert!(g2 < g1);
        assert!(g1 >= 0.0 && g2 >= 0.0);
    }

    #[test]
    fn pb_info_gain_hand_evaluated() {
        // all-ones 2x2x1: column sums are 2, w = 0.5 everywhere
        let pb = vec![DirichletCounts::ones(vec![2, 2, 1])];
        let qs_prev = FactorizedBelief::new(vec![Categorical::one_hot(0, 2)]).unwrap();
        let qs_pi = vec![FactorizedBelief::new(vec![Categorical::one_hot(1, 2)]).unwrap()];
        let policy = Policy::new(vec![vec![0]]);
        assert_close(
            pb_info_gain(&pb, &qs_pi, &qs_prev, &policy).unwrap(),
            0.5,
            1e-12,
        );
    }

    #[test]
    fn pb_info_gain_additive_over_timesteps() {
        let pb = vec![DirichletCounts::ones(vec![2, 2, 2])];
        let b = FactorizedBelief::new(vec![Categorical::new(vec![0.4, 0.6]).unwrap()]).unwrap();
        let one = pb_info_gain(
            &pb,
            &[b.clone()],
            &b,
            &Policy::new(vec![vec![1]]),
        )
        .unwrap();
        let two = pb_info_gain(
            &pb,
            &[b.clone(), b.clone()],
            &b,
            &Policy::new(vec![vec![1], vec![1]]),
        )
        .unwrap();
        assert_close(two, 2.0 * one, 1e-12);
    }

    #[test]
    fn pb_info_gain_scaled_counts_vanish() {
        let pb = vec![DirichletCounts::new(vec![2, 2, 1], vec![1e6; 4]).unwrap()];
        let b = FactorizedBelief::uniform(&[2]);
        let g = pb_info_gain(&pb, &[b.clone()], &b, &Policy::new(vec![vec![0]])).unwrap();
        assert!(g < 1e-6);
    }

    fn simple_model() -> GenerativeModel {
        let a = ConditionalTensor::from_rows(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let mut values = vec![0.0; 2 * 2 * 2];
        // u=0 stays, u=1 flips
        for (i, j, u, p) in [
            (0, 0, 0, 1.0),
            (1, 1, 0, 1.0),
            (1, 0, 1, 1.0),
            (0, 1, 1, 1.0),
        ] {
            values[(i * 2 + j) * 2 + u] = p;
        }
        GenerativeModel::new(
            vec![a],
            vec![ConditionalTensor::new(vec![2, 2, 2], values).unwrap()],
        )
    }

    #[test]
    fn symmetric_policies_get_uniform_posterior() {
        // identical rollouts: identity transitions for both actions
        let a = ConditionalTensor::from_rows(&[vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        let mut values = vec![0.0; 8];
        for i in 0..2 {
            for u in 0..2 {
                values[(i * 2 + i) * 2 + u] = 1.0;
            }
        }
        let model = GenerativeModel::new(
            vec![a],
            vec![ConditionalTensor::new(vec![2, 2, 2], values).unwrap()],
        );
        let policies = crate::model::construct_policies(&[2], 1, None).unwrap();
        let qs = FactorizedBelief::uniform(&[2]);
        let (post, _) = update_posterior_policies(
            &qs,
            &model,
            &policies,
            &EfeFlags::default(),
            16.0,
            None,
        )
        .unwrap();
        assert_close(post.q_pi.probs()[0], 0.5, 1e-12);
    }

    #[test]
    fn gamma_zero_ignores_g() {
        let model = simple_model();
        let policies = crate::model::construct_policies(&[2], 1, None).unwrap();
        let qs = FactorizedBelief::new(vec![Categorical::new(vec![0.9, 0.1]).unwrap()]).unwrap();
        let (post, _) = update_posterior_policies(
            &qs,
            &model,
            &policies,
            &EfeFlags::default(),
            0.0,
            None,
        )
        .unwrap();
        assert_close(post.q_pi.probs()[0], 0.5, 1e-12);
    }

    #[test]
    fn single_policy_is_certain() {
        let model = simple_model();
        let policies = vec![Policy::new(vec![vec![1]])];
        let qs = FactorizedBelief::uniform(&[2]);
        let (post, _) = update_posterior_policies(
            &qs,
            &model,
            &policies,
            &EfeFlags::default(),
            16.0,
            None,
        )
        .unwrap();
        assert_eq!(post.q_pi.probs(), &[1.0]);
    }

    #[test]
    fn all_components_disabled_reduces_to_habit() {
        let mut model = simple_model();
        model.e = Some(Categorical::new(vec![0.8, 0.2]).unwrap());
        let policies = crate::model::construct_policies(&[2], 1, None).unwrap();
        let qs = FactorizedBelief::uniform(&[2]);
        let flags = EfeFlags {
            use_utility: false,
            use_states_info_gain: false,
            use_param_info_gain: false,
        };
        let (post, breakdown) =
            update_posterior_policies(&qs, &model, &policies, &flags, 16.0, None).unwrap();
        assert_close(post.q_pi.probs()[0], 0.8, 1e-10);
        assert!(breakdown.iter().all(|b| b.total_g == 0.0));
    }

    #[test]
    fn breakdown_total_matches_negated_sum() {
        let mut model = simple_model();
        model.c = vec![Preferences::Static(vec![1.5, -0.5])];
        model.p_a = Some(vec![DirichletCounts::ones(vec![2, 2])]);
        model.p_b = Some(vec![DirichletCounts::ones(vec![2, 2, 2])]);
        let policies = crate::model::construct_policies(&[2], 2, None).unwrap();
        let qs = FactorizedBelief::new(vec![Categorical::new(vec![0.7, 0.3]).unwrap()]).unwrap();
        let flags = EfeFlags {
            use_utility: true,
            use_states_info_gain: true,
            use_param_info_gain: true,
        };
        let (_, breakdowns) =
            update_posterior_policies(&qs, &model, &policies, &flags, 16.0, None).unwrap();
        for b in breakdowns {
            assert!(b.state_info_gain >= -1e-10);
            assert!(b.pa_info_gain >= -1e-10);
            assert!(b.pb_info_gain >= -1e-10);
            let sum = b.utility + b.state_info_gain + b.pa_info_gain + b.pb_info_gain;
            assert_close(b.total_g, -sum, 1e-12);
        }
    }

    #[test]
    fn deterministic_action_argmax() {
        let policies = vec![Policy::new(vec![vec![0]]), Policy::new(vec![vec![1]])];
        let q_pi = Categorical::new(vec![0.9, 0.1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let action = sample_action(
            &q_pi,
            &policies,
            &[2],
            ActionSelection::Deterministic,
            16.0,
            &mut rng,
        )
        .unwrap();
        assert_eq!(action, vec![0]);
    }

    #[test]
    fn shared_first_action_in_both_modes() {
        let policies = vec![
            Policy::new(vec![vec![1], vec![0]]),
            Policy::new(vec![vec![1], vec![1]]),
        ];
        let q_pi = Categorical::uniform(2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for mode in [ActionSelection::Deterministic, ActionSelection::Stochastic] {
            let action = sample_action(&q_pi, &policies, &[2], mode, 16.0, &mut rng).unwrap();
            assert_eq!(action, vec![1]);
        }
    }

    #[test]
    fn stochastic_requires_positive_alpha() {
        let policies = vec![Policy::new(vec![vec![0]])];
        let q_pi = Categorical::uniform(1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_action(
            &q_pi,
            &policies,
            &[1],
            ActionSelection::Stochastic,
            0.0,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn deterministic_tie_breaks_low_index() {
        let policies = vec![Policy::new(vec![vec![1]]), Policy::new(vec![vec![0]])];
        let q_pi = Categorical::uniform(2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let action = sample_action(
            &q_pi,
            &policies,
            &[2],
            ActionSelection::Deterministic,
            16.0,
            &mut rng,
        )
        .unwrap();
        assert_eq!(action, vec![0]);
    }
}
