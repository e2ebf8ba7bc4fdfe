//! Dirichlet hyperparameter updates for the observation model, transition
//! model, and initial-state prior.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{for_each_multi_index, outer, DirichletCounts, FactorizedBelief};

/// Which modalities (for A) or factors (for B/D) an update touches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Targets {
    All,
    Only(Vec<usize>),
}

impl Targets {
    fn selects(&self, i: usize) -> bool {
        match self {
            Targets::All => true,
            Targets::Only(idx) => idx.contains(&i),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearningOptions {
    pub lr: f64,
    pub targets: Targets,
}

impl Default for LearningOptions {
    fn default() -> Self {
        Self {
            lr: 1.0,
            targets: Targets::All,
        }
    }
}

impl LearningOptions {
    fn check(&self) -> Result<()> {
        if !(self.lr > 0.0) {
            return Err(Error::InvalidArgument("lr must be > 0".into()));
        }
        Ok(())
    }
}

/// Observation-model update: for each selected modality,
/// `pA'[m] = pA[m] + lr * onehot(obs_m) (x) qs[0] (x) ... (x) qs[F-1]`.
pub fn update_a_dirichlet(
    pa: &[DirichletCounts],
    obs: &[usize],
    qs: &FactorizedBelief,
    opts: &LearningOptions,
) -> Result<Vec<DirichletCounts>> {
    opts.check()?;
    if obs.len() != pa.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} observation indices", pa.len()),
            actual: format!("{}", obs.len()),
        });
    }
    let mut out = pa.to_vec();
    for (m, counts) in out.iter_mut().enumerate() {
        if !opts.targets.selects(m) {
            continue;
        }
        let support = counts.dims()[0];
        if obs[m] >= support {
            return Err(Error::IndexOutOfRange {
                what: "observation",
                index: obs[m],
                limit: support,
            });
        }
        if counts.dims()[1..] != qs.factor_sizes()[..] {
            return Err(Error::ShapeMismatch {
                expected: format!("conditioning dims {:?}", qs.factor_sizes()),
                actual: format!("{:?}", &counts.dims()[1..]),
            });
        }
        let mut one_hot = vec![0.0; support];
        one_hot[obs[m]] = 1.0;
        let mut vectors: Vec<&[f64]> = vec![&one_hot];
        vectors.extend(qs.marginals().iter().map(|q| q.probs()));
        let (dims, increment) = outer(&vectors)?;
        let mut flat = 0usize;
        for_each_multi_index(&dims, |idx| {
            if increment[flat] != 0.0 {
                counts.add_at(idx, opts.lr * increment[flat]);
            }
            flat += 1;
        });
    }
    Ok(out)
}

/// Transition-model update: for each selected factor, only the slice for the
/// action actually taken changes:
/// `pB'[f][:, :, u_f] += lr * qs[f] (x) qs_prev[f]`.
pub fn update_b_dirichlet(
    pb: &[DirichletCounts],
    action: &[usize],
    qs: &FactorizedBelief,
    qs_prev: &FactorizedBelief,
    opts: &LearningOptions,
) -> Result<Vec<DirichletCounts>> {
    opts.check()?;
    if action.len() != pb.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} control indices", pb.len()),
            actual: format!("{}", action.len()),
        });
    }
    let mut out = pb.to_vec();
    for (f, counts) in out.iter_mut().enumerate() {
        if !opts.targets.selects(f) {
            continue;
        }
        let dims = counts.dims().to_vec();
        let u = action[f];
        if u >= dims[2] {
            return Err(Error::IndexOutOfRange {
                what: "control",
                index: u,
                limit: dims[2],
            });
        }
        let q_next = qs.factor(f).probs();
        let q_prev = qs_prev.factor(f).probs();
        if q_next.len() != dims[0] || q_prev.len() != dims[1] {
            return Err(Error::ShapeMismatch {
                expected: format!("beliefs of length {} x {}", dims[0], dims[1]),
                actual: format!("{} x {}", q_next.len(), q_prev.len()),
            });
        }
        for (i, &qi) in q_next.iter().enumerate() {
            for (j, &qj) in q_prev.iter().enumerate() {
                let delta = opts.lr * qi * qj;
                if delta != 0.0 {
                    counts.add_at(&[i, j, u], delta);
                }
            }
        }
    }
    Ok(out)
}

/// Initial-state-prior update: `pD'[f] = pD[f] + lr * qs_t1[f]` for selected
/// factors, where `qs_t1` is the belief at the first timestep of the episode.
pub fn update_d_dirichlet(
    pd: &[DirichletCounts],
    qs_t1: &FactorizedBelief,
    opts: &LearningOptions,
) -> Result<Vec<DirichletCounts>> {
    opts.check()?;
    if qs_t1.num_factors() != pd.len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} factors", pd.len()),
            actual: format!("{}", qs_t1.num_factors()),
        });
    }
    let mut out = pd.to_vec();
    for (f, counts) in out.iter_mut().enumerate() {
        if !opts.targets.selects(f) {
            continue;
        }
        let q = qs_t1.factor(f).probs();
        if q.len() != counts.dims()[0] {
            return Err(Error::ShapeMismatch {
                expected: format!("belief of length {}", counts.dims()[0]),
                actual: format!("{}", q.len()),
            });
        }
        for (i, &qi) in q.iter().enumerate() {
            if qi != 0.0 {
                counts.add_at(&[i], opts.lr * qi);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::Categorical;

    fn belief(probs: &[f64]) -> FactorizedBelief {
        FactorizedBelief::new(vec![Categorical::new(probs.to_vec()).unwrap()]).unwrap()
    }

    #[test]
    fn a_update_hand_applied() {
        let pa = vec![DirichletCounts::ones(vec![2, 2])];
        let qs = belief(&[0.5, 0.5]);
        let out = update_a_dirichlet(&pa, &[0], &qs, &LearningOptions::default()).unwrap();
        // row 0 gains the outer product, row 1 unchanged
        assert_eq!(out[0].value(&[0, 0]), 1.5);
        assert_eq!(out[0].value(&[0, 1]), 1.5);
        assert_eq!(out[0].value(&[1, 0]), 1.0);
        assert_eq!(out[0].value(&[1, 1]), 1.0);
    }

    #[test]
    fn a_update_mass_scales_with_lr() {
        let pa = vec![DirichletCounts::ones(vec![2, 2])];
        let qs = belief(&[0.3, 0.7]);
        for lr in [1e-3, 0.5, 2.0] {
            let opts = LearningOptions {
                lr,
                targets: Targets::All,
            };
            let out = update_a_dirichlet(&pa, &[1], &qs, &opts).unwrap();
            let added = out[0].total_mass() - pa[0].total_mass();
            assert!((added - lr).abs() < 1e-12);
        }
    }

    #[test]
    fn a_update_empty_targets_is_identity() {
        let pa = vec![DirichletCounts::ones(vec![2, 2])];
        let qs = belief(&[0.5, 0.5]);
        let opts = LearningOptions {
            lr: 1.0,
            targets: Targets::Only(vec![]),
        };
        let out = update_a_dirichlet(&pa, &[0], &qs, &opts).unwrap();
        assert_eq!(out, pa);
    }

    #[test]
    fn a_update_targets_commute() {
        let pa = vec![
            DirichletCounts::ones(vec![2, 2]),
            DirichletCounts::ones(vec![3, 2]),
        ];
        let qs = belief(&[0.4, 0.6]);
        let obs = [1, 2];
        let only = |idx: Vec<usize>| LearningOptions {
            lr: 1.0,
            targets: Targets::Only(idx),
        };
        let sequential = {
            let step = update_a_dirichlet(&pa, &obs, &qs, &only(vec![0])).unwrap();
            update_a_dirichlet(&step, &obs, &qs, &only(vec![1])).unwrap()
        };
        let joint = update_a_dirichlet(&pa, &obs, &qs, &only(vec![0, 1])).unwrap();
        assert_eq!(sequential, joint);
    }

    #[test]
    fn b_update_single_cell() {
        let pb = vec![DirichletCounts::ones(vec![2, 2, 1])];
        let out = update_b_dirichlet(
            &pb,
            &[0],
            &belief(&[0.0, 1.0]),
            &belief(&[1.0, 0.0]),
            &LearningOptions::default(),
        )
        .unwrap();
        assert_eq!(out[0].value(&[1, 0, 0]), 2.0);
        assert_eq!(out[0].value(&[0, 0, 0]), 1.0);
        assert_eq!(out[0].value(&[0, 1, 0]), 1.0);
        assert_eq!(out[0].value(&[1, 1, 0]), 1.0);
    }

    #[test]
    fn b_update_uniform_outer_product() {
        let pb = vec![DirichletCounts::ones(vec![2, 2, 1])];
        let u = belief(&[0.5, 0.5]);
        let out = update_b_dirichlet(&pb, &[0], &u, &u, &LearningOptions::default()).unwrap();
        for v in out[0].values() {
            assert!((v - 1.25).abs() < 1e-12);
        }
    }

    #[test]
    fn b_update_leaves_untaken_slice_untouched() {
        let pb = vec![DirichletCounts::new(
            vec![2, 2, 2],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0],
        )
        .unwrap()];
        let out = update_b_dirichlet(
            &pb,
            &[1],
            &belief(&[0.3, 0.7]),
            &belief(&[0.6, 0.4]),
            &LearningOptions::default(),
        )
        .unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(out[0].value(&[i, j, 0]), pb[0].value(&[i, j, 0]));
                assert!(out[0].value(&[i, j, 1]) > pb[0].value(&[i, j, 1]));
            }
        }
    }

    #[test]
    fn d_update_vector_add() {
        let pd = vec![DirichletCounts::ones(vec![2])];
        let out =
            update_d_dirichlet(&pd, &belief(&[0.3, 0.7]), &LearningOptions::default()).unwrap();
        assert!((out[0].value(&[0]) - 1.3).abs() < 1e-12);
        assert!((out[0].value(&[1]) - 1.7).abs() < 1e-12);
    }

    #[test]
    fn d_update_one_hot_with_lr() {
        let pd = vec![DirichletCounts::ones(vec![2])];
        let opts = LearningOptions {
            lr: 2.0,
            targets: Targets::All,
        };
        let out = update_d_dirichlet(&pd, &belief(&[1.0, 0.0]), &opts).unwrap();
        assert_eq!(out[0].value(&[0]), 3.0);
        assert_eq!(out[0].value(&[1]), 1.0);
    }

    #[test]
    fn d_update_excluded_factor_unchanged() {
        let pd = vec![DirichletCounts::ones(vec![2]), DirichletCounts::ones(vec![3])];
        let qs = FactorizedBelief::new(vec![
            Categorical::new(vec![0.5, 0.5]).unwrap(),
            Categorical::new(vec![0.2, 0.3, 0.5]).unwrap(),
        ])
        .unwrap();
        let opts = LearningOptions {
            lr: 1.0,
            targets: Targets::Only(vec![0]),
        };
        let out = update_d_dirichlet(&pd, &qs, &opts).unwrap();
        assert_ne!(out[0], pd[0]);
        assert_eq!(out[1], pd[1]);
    }

    #[test]
    fn updates_are_monotone() {
        let pa = vec![DirichletCounts::ones(vec![3, 2])];
        let out = update_a_dirichlet(&pa, &[2], &belief(&[0.1, 0.9]), &LearningOptions::default())
            .unwrap();
        for (new, old) in out[0].values().iter().zip(pa[0].values()) {
            assert!(new >= old);
        }
    }

    #[test]
    fn repeated_updates_approach_observed_outcome() {
        // driving the same (obs, qs) update concentrates the mean toward the
        // observed one-hot on the supported column
        let mut pa = vec![DirichletCounts::ones(vec![2, 2])];
        let qs = belief(&[1.0, 0.0]);
        let n = 1000;
        for _ in 0..n {
            pa = update_a_dirichlet(&pa, &[0], &qs, &LearningOptions::default()).unwrap();
        }
        let mean = crate::model::dirichlet_mean(&pa[0]).unwrap();
        let dist = (mean.value(0, &[0]) - 1.0).abs();
        assert!(dist < 10.0 / (n as f64 + 2.0), "distance {dist}");
    }

    #[test]
    fn zero_lr_rejected() {
        let pa = vec![DirichletCounts::ones(vec![2, 2])];
        let opts = LearningOptions {
            lr: 0.0,
            targets: Targets::All,
        };
        assert!(update_a_dirichlet(&pa, &[0], &belief(&[0.5, 0.5]), &opts).is_err());
    }
}
