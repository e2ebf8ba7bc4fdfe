//! Numerically stable primitives for categorical/Dirichlet arithmetic and
//! factorized tensor contractions.
//!
//! All log quantities are in nats. Tensors are dense, row-major, with the
//! support dimension first and conditioning dimensions trailing.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor applied inside `log_stable` so that log of a zero probability stays finite.
pub const LOG_EPS: f64 = 1e-16;

/// Tolerance for normalization checks at validation boundaries.
pub const NORM_TOL: f64 = 1e-10;

/// A normalized probability vector over a finite set of outcome levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Categorical {
    probs: Vec<f64>,
}

impl Categorical {
    /// Validates non-negativity and unit mass (within `NORM_TOL`).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty probability vector".into()));
        }
        for &p in &probs {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::NegativeProbability(p));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidArgument(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(Self { probs })
    }

    /// Normalizes a vector of non-negative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidArgument("empty weight vector".into()));
        }
        for &w in weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::NegativeProbability(w));
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("zero total weight".into()));
        }
        Ok(Self {
            probs: weights.iter().map(|w| w / total).collect(),
        })
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn one_hot(index: usize, n: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[index] = 1.0;
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Index of the largest entry; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}

/// One categorical marginal per hidden-state factor (mean-field belief).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FactorizedBelief {
    marginals: Vec<Categorical>,
}

impl FactorizedBelief {
    pub fn new(marginals: Vec<Categorical>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::InvalidArgument("no factors in belief".into()));
        }
        Ok(Self { marginals })
    }

    pub fn uniform(sizes: &[usize]) -> Self {
        Self {
            marginals: sizes.iter().map(|&s| Categorical::uniform(s)).collect(),
        }
    }

    pub fn marginals(&self) -> &[Categorical] {
        &self.marginals
    }

    pub fn factor(&self, f: usize) -> &Categorical {
        &self.marginals[f]
    }

    pub fn num_factors(&self) -> usize {
        self.marginals.len()
    }

    pub fn factor_sizes(&self) -> Vec<usize> {
        self.marginals.iter().map(|m| m.len()).collect()
    }
}

/// Dense conditional tensor `P(x | c1, ..., cK)` with column-stochastic columns.
///
/// `dims[0]` is the support size; `dims[1..]` are the conditioning sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalTensor {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl ConditionalTensor {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || expected != values.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{dims:?} ({expected} values)"),
                actual: format!("{} values", values.len()),
            });
        }
        let t = Self { dims, values };
        for (cond, col) in t.columns() {
            let sum: f64 = col.iter().sum();
            if col.iter().any(|&v| !v.is_finite() || v < 0.0) || (sum - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "column {cond:?} is not a valid categorical (sum {sum})"
                )));
            }
        }
        Ok(t)
    }

    /// 2-D convenience constructor from rows of a `support x cond` matrix.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let support = rows.len();
        let cond = rows.first().map_or(0, |r| r.len());
        let mut values = Vec::with_capacity(support * cond);
        for r in rows {
            if r.len() != cond {
                return Err(Error::InvalidArgument("ragged rows".into()));
            }
            values.extend_from_slice(r);
        }
        Self::new(vec![support, cond], values)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn support_size(&self) -> usize {
        self.dims[0]
    }

    pub fn cond_dims(&self) -> &[usize] {
        &self.dims[1..]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Entry `P(x = i | cond)`.
    pub fn value(&self, i: usize, cond: &[usize]) -> f64 {
        debug_assert_eq!(cond.len(), self.dims.len() - 1);
        let mut flat = i;
        for (k, &c) in cond.iter().enumerate() {
            flat = flat * self.dims[k + 1] + c;
        }
        self.values[flat]
    }

    /// Iterates `(conditioning multi-index, column)` pairs.
    pub fn columns(&self) -> impl Iterator<Item = (Vec<usize>, Vec<f64>)> + '_ {
        let mut out = Vec::new();
        for_each_multi_index(self.cond_dims(), |cond| {
            let col: Vec<f64> = (0..self.support_size())
                .map(|i| self.value(i, cond))
                .collect();
            out.push((cond.to_vec(), col));
        });
        out.into_iter()
    }
}

/// Positive pseudo-count array mirroring the shape of the distribution it
/// parameterizes (the Dirichlet parameters of an A/B/D array).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirichletCounts {
    dims: Vec<usize>,
    values: Vec<f64>,
}

impl DirichletCounts {
    pub fn new(dims: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if dims.is_empty() || expected != values.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{dims:?} ({expected} values)"),
                actual: format!("{} values", values.len()),
            });
        }
        if values.iter().any(|&v| !v.is_finite() || v <= 0.0) {
            return Err(Error::InvalidArgument(
                "Dirichlet counts must be strictly positive".into(),
            ));
        }
        Ok(Self { dims, values })
    }

    pub fn ones(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self {
            dims,
            values: vec![1.0; n],
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.values[flat_index(&self.dims, idx)]
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    pub(crate) fn add_at(&mut self, idx: &[usize], delta: f64) {
        let flat = flat_index(&self.dims, idx);
        self.values[flat] += delta;
    }

    /// Per-column sums over the support dimension, indexed by conditioning multi-index.
    pub fn column_sums(&self) -> Vec<f64> {
        let cond_len: usize = self.dims[1..].iter().product();
        let mut sums = vec![0.0; cond_len];
        for (flat, &v) in self.values.iter().enumerate() {
            sums[flat % cond_len] += v;
        }
        sums
    }

    /// The novelty weighting `1/counts - 1/(column sum)`, elementwise (non-negative).
    pub fn novelty_weights(&self) -> Vec<f64> {
        let cond_len: usize = self.dims[1..].iter().product();
        let sums = self.column_sums();
        self.values
            .iter()
            .enumerate()
            .map(|(flat, &v)| 1.0 / v - 1.0 / sums[flat % cond_len])
            .collect()
    }
}

/// Row-major flat offset of a multi-index.
pub(crate) fn flat_index(dims: &[usize], idx: &[usize]) -> usize {
    debug_assert_eq!(dims.len(), idx.len());
    let mut flat = 0;
    for (k, &i) in idx.iter().enumerate() {
        debug_assert!(i < dims[k]);
        flat = flat * dims[k] + i;
    }
    flat
}

/// Visits every multi-index of `dims` in row-major order (last index fastest).
/// Empty `dims` yields the single empty index.
pub(crate) fn for_each_multi_index(dims: &[usize], mut f: impl FnMut(&[usize])) {
    if dims.iter().any(|&d| d == 0) {
        return;
    }
    let mut idx = vec![0usize; dims.len()];
    loop {
        f(&idx);
        let mut k = dims.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Normalized exponential with max-subtraction for stability.
pub fn softmax(v: &[f64]) -> Result<Categorical> {
    if v.is_empty() {
        return Err(Error::InvalidArgument("empty logit vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteLogits);
    }
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(Categorical {
        probs: exps.iter().map(|e| e / total).collect(),
    })
}

/// `ln(max(p, LOG_EPS))`; rejects negative probabilities.
pub fn log_stable(p: f64) -> Result<f64> {
    if !p.is_finite() || p < 0.0 {
        return Err(Error::NegativeProbability(p));
    }
    Ok(p.max(LOG_EPS).ln())
}

/// Expected observation distribution `Q(o) = E_{Q(s)}[P(o|s)]` for one modality:
/// contracts every conditioning dimension of `a` with the matching belief marginal.
pub fn expected_likelihood(a: &ConditionalTensor, qs: &FactorizedBelief) -> Result<Categorical> {
    check_cond_dims(a, qs)?;
    let mut out = vec![0.0; a.support_size()];
    for_each_multi_index(a.cond_dims(), |cond| {
        let weight: f64 = cond
            .iter()
            .enumerate()
            .map(|(f, &s)| qs.factor(f).probs()[s])
            .product();
        if weight > 0.0 {
            for (i, o) in out.iter_mut().enumerate() {
                *o += weight * a.value(i, cond);
            }
        }
    });
    // renormalize to absorb rounding drift from the contraction
    Categorical::from_weights(&out)
}

/// Log-domain evidence message for one factor:
/// `m[x] = sum_{s: s_f = x} [ prod_{i != f} q(s_i) ] * ln P(obs | s)`.
pub fn likelihood_message(
    a: &ConditionalTensor,
    obs: usize,
    qs: &FactorizedBelief,
    target_factor: usize,
) -> Result<Vec<f64>> {
    check_cond_dims(a, qs)?;
    if obs >= a.support_size() {
        return Err(Error::IndexOutOfRange {
            what: "observation",
            index: obs,
            limit: a.support_size(),
        });
    }
    if target_factor >= qs.num_factors() {
        return Err(Error::IndexOutOfRange {
            what: "factor",
            index: target_factor,
            limit: qs.num_factors(),
        });
    }
    let mut msg = vec![0.0; qs.factor(target_factor).len()];
    let mut err = None;
    for_each_multi_index(a.cond_dims(), |cond| {
        let weight: f64 = cond
            .iter()
            .enumerate()
            .filter(|(f, _)| *f != target_factor)
            .map(|(f, &s)| qs.factor(f).probs()[s])
            .product();
        match log_stable(a.value(obs, cond)) {
            Ok(lp) => msg[cond[target_factor]] += weight * lp,
            Err(e) => err = Some(e),
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(msg),
    }
}

/// Outer product of one or more vectors; returns `(dims, row-major values)`.
pub fn outer(vs: &[&[f64]]) -> Result<(Vec<usize>, Vec<f64>)> {
    if vs.is_empty() {
        return Err(Error::InvalidArgument("outer product of no vectors".into()));
    }
    let dims: Vec<usize> = vs.iter().map(|v| v.len()).collect();
    let mut values = Vec::with_capacity(dims.iter().product());
    for_each_multi_index(&dims, |idx| {
        values.push(idx.iter().enumerate().map(|(k, &i)| vs[k][i]).product());
    });
    Ok((dims, values))
}

/// Shannon entropy in nats, `-sum p ln p`, with the stable log.
pub fn entropy(p: &Categorical) -> f64 {
    -p.probs()
        .iter()
        .map(|&x| x * x.max(LOG_EPS).ln())
        .sum::<f64>()
}

fn check_cond_dims(a: &ConditionalTensor, qs: &FactorizedBelief) -> Result<()> {
    let expected = qs.factor_sizes();
    if a.cond_dims() != expected.as_slice() {
        return Err(Error::ShapeMismatch {
            expected: format!("conditioning dims {expected:?}"),
            actual: format!("{:?}", a.cond_dims()),
        });
    }
    Ok(())
}
