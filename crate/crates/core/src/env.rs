//! Environments (generative processes) that close the action–perception
//! loop. An environment owns its own seeded randomness, independent of the
//! agent's, and its true state is never exposed except through its emission
//! rule. An environment need not match the agent's generative model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::math::{Categorical, ConditionalTensor};
use crate::model::GenerativeModel;

/// Behavioral contract for a generative process: `reset` starts an episode
/// and returns the initial observation vector; `step` applies an action
/// vector, updates the true hidden state, and returns the next observation.
///
/// Observation indices must lie within the modality supports the paired
/// generative model declares. One instance per simulation; single-threaded
/// use, with instances independent across threads.
pub trait Environment {
    fn reset(&mut self) -> Vec<usize>;
    fn step(&mut self, action: &[usize]) -> Result<Vec<usize>>;
}

/// Three-state, two-action reference environment. Action 0 scatters the
/// state uniformly over {0, 1}; action 1 jumps to state 2. States 0 and 1
/// are observed directly; state 2 emits a uniform observation over {0, 1, 2}.
#[derive(Debug, Clone)]
pub struct ThreeStateEnv {
    state: usize,
    rng: ChaCha8Rng,
    seed: u64,
}

impl ThreeStateEnv {
    pub fn new(seed: u64) -> Self {
        Self {
            state: 1,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    /// The generative model whose A/B/D arrays describe this environment
    /// (with a slightly softened likelihood column for the noisy state).
    pub fn matching_model() -> GenerativeModel {
        let noisy = crate::math::softmax(&[0.0, 0.0, 0.5]).expect("finite logits");
        let a = ConditionalTensor::from_rows(&[
            vec![1.0, 0.0, noisy.probs()[0]],
            vec![0.0, 1.0, noisy.probs()[1]],
            vec![0.0, 0.0, noisy.probs()[2]],
        ])
        .expect("valid likelihood");
        #[rustfmt::skip]
        let b = ConditionalTensor::new(
            vec![3, 3, 2],
            vec![
                0.5, 0.0, 0.5, 0.0, 0.5, 0.0,
                0.5, 0.0, 0.5, 0.0, 0.5, 0.0,
                0.0, 1.0, 0.0, 1.0, 0.0, 1.0,
            ],
        )
        .expect("valid transitions");
        GenerativeModel::new(vec![a], vec![b]).with_d(vec![Categorical::one_hot(1, 3)])
    }

    fn emit(&mut self) -> Vec<usize> {
        let obs = match self.state {
            2 => self.rng.gen_range(0..3),
            s => s,
        };
        vec![obs]
    }
}

impl Environment for ThreeStateEnv {
    fn reset(&mut self) -> Vec<usize> {
        self.state = 1;
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.emit()
    }

    fn step(&mut self, action: &[usize]) -> Result<Vec<usize>> {
        let u = match action {
            [u] if *u < 2 => *u,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "expected one control index in 0..2, got {action:?}"
                )))
            }
        };
        self.state = match u {
            0 => self.rng.gen_range(0..2),
            _ => 2,
        };
        Ok(self.emit())
    }
}

/// Two-site environment with a latent coin fixed per episode. Site A (0)
/// emits nothing about the coin; site B (1) reveals it noiselessly. Built to
/// exercise the epistemic term of policy selection: with flat preferences,
/// only information gain distinguishes the two sites.
///
/// Factors: location {A, B} (controllable: 0 = go to A, 1 = go to B) and
/// coin {heads, tails} (uncontrollable). Modalities: location observation
/// {A, B} and coin observation {heads, tails, null}.
#[derive(Debug, Clone)]
pub struct EpistemicChamberEnv {
    location: usize,
    coin: usize,
    rng: ChaCha8Rng,
    seed: u64,
}

/// Coin-observation index emitted at site A, where the coin is hidden.
pub const COIN_OBS_NULL: usize = 2;

impl EpistemicChamberEnv {
    pub fn new(seed: u64) -> Self {
        Self {
            location: 0,
            coin: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    /// The generative model that correctly describes this environment:
    /// location moves deterministically under control, the coin persists,
    /// and the coin modality reads null at site A and the coin at site B.
    pub fn matching_model() -> GenerativeModel {
        // location obs: O=2, conditioned on (location=2, coin=2)
        let a_loc = ConditionalTensor::new(
            vec![2, 2, 2],
            vec![
                1.0, 1.0, 0.0, 0.0, // obs A given location A, either coin
                0.0, 0.0, 1.0, 1.0, // obs B given location B, either coin
            ],
        )
        .expect("valid likelihood");
        // coin obs: O=3 {heads, tails, null}, conditioned on (location, coin)
        let a_coin = ConditionalTensor::new(
            vec![3, 2, 2],
            vec![
                0.0, 0.0, 1.0, 0.0, // heads: only at B with heads
                0.0, 0.0, 0.0, 1.0, // tails: only at B with tails
                1.0, 1.0, 0.0, 0.0, // null: anywhere at A
            ],
        )
        .expect("valid likelihood");
        // location: action u moves to site u regardless of origin
        let b_loc = ConditionalTensor::new(
            vec![2, 2, 2],
            vec![
                1.0, 0.0, 1.0, 0.0, // to A under u=0
                0.0, 1.0, 0.0, 1.0, // to B under u=1
            ],
        )
        .expect("valid transitions");
        // coin: uncontrollable, persists
        let b_coin = ConditionalTensor::new(vec![2, 2, 1], vec![1.0, 0.0, 0.0, 1.0])
            .expect("valid transitions");
        GenerativeModel::new(vec![a_loc, a_coin], vec![b_loc, b_coin]).with_d(vec![
            Categorical::one_hot(0, 2),
            Categorical::uniform(2),
        ])
    }

    fn emit(&self) -> Vec<usize> {
        let coin_obs = if self.location == 1 {
            self.coin
        } else {
            COIN_OBS_NULL
        };
        vec![self.location, coin_obs]
    }
}

impl Environment for EpistemicChamberEnv {
    fn reset(&mut self) -> Vec<usize> {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.location = 0;
        self.coin = self.rng.gen_range(0..2);
        self.emit()
    }

    fn step(&mut self, action: &[usize]) -> Result<Vec<usize>> {
        let u = match action {
            // the coin factor has a single trivial control, so accept either
            // a location-only action or the full two-factor vector
            [u] | [u, 0] if *u < 2 => *u,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "expected location control in 0..2 (coin uncontrollable), got {action:?}"
                )))
            }
        };
        self.location = u;
        Ok(self.emit())
    }
}

/// Declarative POMDP simulator driven by a model's own arrays: states are
/// sampled from the true D at reset and pushed through the true B per step,
/// observations sampled from the true A. Pairing it with a different agent
/// model enables model-mismatch experiments.
#[derive(Debug, Clone)]
pub struct TabularEnv {
    model: GenerativeModel,
    state: Vec<usize>,
    rng: ChaCha8Rng,
    seed: u64,
}

impl TabularEnv {
    pub fn new(model: GenerativeModel, seed: u64) -> Result<Self> {
        let model = model.validated()?;
        Ok(Self {
            state: vec![0; model.num_factors()],
            model,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        })
    }

    fn sample(&mut self, dist: &[f64]) -> usize {
        let x: f64 = self.rng.gen();
        let mut acc = 0.0;
        for (i, &p) in dist.iter().enumerate() {
            acc += p;
            if x < acc {
                return i;
            }
        }
        dist.len() - 1
    }

}

impl Environment for TabularEnv {
    fn reset(&mut self) -> Vec<usize> {
        self.rng = ChaCha8Rng::seed_from_u64(self.seed);
        self.state = self
            .model
            .d
            .iter()
            .map(|d| d.probs().to_vec())
            .collect::<Vec<_>>()
            .iter()
            .map(|p| self.sample(p))
            .collect();
        let cols: Vec<Vec<f64>> = self
            .model
            .a
            .iter()
            .map(|a| {
                (0..a.support_size())
                    .map(|o| a.value(o, &self.state))
                    .collect()
            })
            .collect();
        cols.iter().map(|c| self.sample(c)).collect()
    }

    fn step(&mut self, action: &[usize]) -> Result<Vec<usize>> {
        let num_controls = self.model.num_controls();
        if action.len() != num_controls.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} control indices", num_controls.len()),
                actual: format!("{}", action.len()),
            });
        }
        for (f, (&u, &n)) in action.iter().zip(&num_controls).enumerate() {
            if u >= n {
                return Err(Error::IndexOutOfRange {
                    what: "control",
                    index: u,
                    limit: n,
                });
            }
            let b = &self.model.b[f];
            let s = self.state[f];
            let col: Vec<f64> = (0..b.support_size()).map(|i| b.value(i, &[s, u])).collect();
            self.state[f] = self.sample(&col);
        }
        let cols: Vec<Vec<f64>> = self
            .model
            .a
            .iter()
            .map(|a| {
                (0..a.support_size())
                    .map(|o| a.value(o, &self.state))
                    .collect()
            })
            .collect();
        Ok(cols.iter().map(|c| self.sample(c)).collect())
    }
}
