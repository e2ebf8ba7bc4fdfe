//! Container, validator, serializer, and policy enumerator for the POMDP
//! generative model (the A, B, C, D, E arrays and their Dirichlet priors).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{Categorical, ConditionalTensor, DirichletCounts, NORM_TOL};

/// Log-preferences over one observation modality, either time-independent or
/// time-indexed. A single vector is broadcast over the planning horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Preferences {
    Static(Vec<f64>),
    TimeVarying(Vec<Vec<f64>>),
}

impl Preferences {
    pub fn zeros(len: usize) -> Self {
        Preferences::Static(vec![0.0; len])
    }

    /// Preference vector at planning step `t`; time-varying lists clamp to the
    /// last entry past their end.
    pub fn at(&self, t: usize) -> &[f64] {
        match self {
            Preferences::Static(v) => v,
            Preferences::TimeVarying(vs) => &vs[t.min(vs.len() - 1)],
        }
    }

    pub fn support_len(&self) -> usize {
        match self {
            Preferences::Static(v) => v.len(),
            Preferences::TimeVarying(vs) => vs.first().map_or(0, |v| v.len()),
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Preferences::Static(v) => v.iter().all(|x| x.is_finite()),
            Preferences::TimeVarying(vs) => {
                !vs.is_empty()
                    && vs
                        .iter()
                        .all(|v| v.len() == vs[0].len() && v.iter().all(|x| x.is_finite()))
            }
        }
    }
}

/// A sequence of control states: `controls[t][f]` is the control index taken
/// on factor `f` at planning step `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    controls: Vec<Vec<usize>>,
}

impl Policy {
    pub fn new(controls: Vec<Vec<usize>>) -> Self {
        Self { controls }
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }

    pub fn num_factors(&self) -> usize {
        self.controls.first().map_or(0, |c| c.len())
    }

    pub fn control(&self, t: usize, f: usize) -> usize {
        self.controls[t][f]
    }

    pub fn step(&self, t: usize) -> &[usize] {
        &self.controls[t]
    }
}

/// One invariant violation found by [`GenerativeModel::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub array: String,
    pub index: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, array: impl Into<String>, index: impl Into<String>, msg: impl Into<String>) {
        self.violations.push(Violation {
            array: array.into(),
            index: index.into(),
            message: msg.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{}[{}]: {}", v.array, v.index, v.message)?;
        }
        Ok(())
    }
}

/// The full POMDP generative model.
///
/// `a[m]` has dims `O_m x S_1 x ... x S_F`; `b[f]` has dims `S_f x S_f x U_f`.
/// `c` holds log-preferences per modality, `d` the initial-state prior per
/// factor, `e` an optional habit prior over policies. `p_a`/`p_b`/`p_d` are
/// optional Dirichlet pseudo-counts mirroring A/B/D.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeModel {
    pub a: Vec<ConditionalTensor>,
    pub b: Vec<ConditionalTensor>,
    pub c: Vec<Preferences>,
    pub d: Vec<Categorical>,
    pub e: Option<Categorical>,
    pub p_a: Option<Vec<DirichletCounts>>,
    pub p_b: Option<Vec<DirichletCounts>>,
    pub p_d: Option<Vec<DirichletCounts>>,
}

impl GenerativeModel {
    /// Builds a model from mandatory A and B arrays, with uniform defaults for
    /// C (zero log-preferences) and D.
    pub fn new(a: Vec<ConditionalTensor>, b: Vec<ConditionalTensor>) -> Self {
        let c = a.iter().map(|am| Preferences::zeros(am.support_size())).collect();
        let d = b.iter().map(|bf| Categorical::uniform(bf.support_size())).collect();
        Self {
            a,
            b,
            c,
            d,
            e: None,
            p_a: None,
            p_b: None,
            p_d: None,
        }
    }

    pub fn with_c(mut self, c: Vec<Preferences>) -> Self {
        self.c = c;
        self
    }

    pub fn with_d(mut self, d: Vec<Categorical>) -> Self {
        self.d = d;
        self
    }

    pub fn with_e(mut self, e: Categorical) -> Self {
        self.e = Some(e);
        self
    }

    pub fn with_dirichlet_a(mut self, p_a: Vec<DirichletCounts>) -> Self {
        self.p_a = Some(p_a);
        self
    }

    pub fn with_dirichlet_b(mut self, p_b: Vec<DirichletCounts>) -> Self {
        self.p_b = Some(p_b);
        self
    }

    pub fn with_dirichlet_d(mut self, p_d: Vec<DirichletCounts>) -> Self {
        self.p_d = Some(p_d);
        self
    }

    pub fn num_modalities(&self) -> usize {
        self.a.len()
    }

    pub fn num_factors(&self) -> usize {
        self.b.len()
    }

    pub fn num_obs(&self) -> Vec<usize> {
        self.a.iter().map(|am| am.support_size()).collect()
    }

    pub fn num_states(&self) -> Vec<usize> {
        self.b.iter().map(|bf| bf.support_size()).collect()
    }

    pub fn num_controls(&self) -> Vec<usize> {
        self.b
            .iter()
            .map(|bf| bf.dims().get(2).copied().unwrap_or(1))
            .collect()
    }

    /// Checks every structural invariant; the report is empty iff all hold.
    /// Column stochasticity of A and B is re-checked here even though the
    /// tensor constructors enforce it, so that models assembled from raw file
    /// payloads report coordinates rather than bare constructor errors.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let num_states = self.num_states();

        if self.a.is_empty() {
            report.push("A", "-", "at least one observation modality required");
        }
        if self.b.is_empty() {
            report.push("B", "-", "at least one hidden-state factor required");
        }

        for (f, bf) in self.b.iter().enumerate() {
            if bf.dims().len() != 3 {
                report.push(
                    "B",
                    f.to_string(),
                    format!(
                        "expected dims S_f x S_f x U_f, got {:?} (cross-factor dependencies are not representable)",
                        bf.dims()
                    ),
                );
                continue;
            }
            if bf.dims()[0] != bf.dims()[1] {
                report.push("B", f.to_string(), "square state dims required");
            }
            if bf.dims()[2] < 1 {
                report.push("B", f.to_string(), "at least one control level required");
            }
            check_columns(&mut report, "B", &f.to_string(), bf);
        }

        for (m, am) in self.a.iter().enumerate() {
            if am.cond_dims() != num_states.as_slice() {
                report.push(
                    "A",
                    m.to_string(),
                    format!(
                        "conditioning dims {:?} do not match state dims {:?}",
                        am.cond_dims(),
                        num_states
                    ),
                );
                continue;
            }
            check_columns(&mut report, "A", &m.to_string(), am);
        }

        for (m, cm) in self.c.iter().enumerate() {
            if !cm.is_finite() {
                report.push("C", m.to_string(), "entries must be finite");
            }
            if m < self.a.len() && cm.support_len() != self.a[m].support_size() {
                report.push(
                    "C",
                    m.to_string(),
                    format!(
                        "length {} does not match modality support {}",
                        cm.support_len(),
                        self.a[m].support_size()
                    ),
                );
            }
        }
        if self.c.len() != self.a.len() {
            report.push("C", "-", "one preference vector per modality required");
        }

        for (f, df) in self.d.iter().enumerate() {
            if f < num_states.len() && df.len() != num_states[f] {
                report.push(
                    "D",
                    f.to_string(),
                    format!("length {} does not match factor size {}", df.len(), num_states[f]),
                );
            }
        }
        if self.d.len() != self.b.len() {
            report.push("D", "-", "one prior per hidden-state factor required");
        }

        check_dirichlet_shapes(&mut report, "pA", &self.p_a, &|i| {
            self.a.get(i).map(|t| t.dims().to_vec())
        });
        check_dirichlet_shapes(&mut report, "pB", &self.p_b, &|i| {
            self.b.get(i).map(|t| t.dims().to_vec())
        });
        check_dirichlet_shapes(&mut report, "pD", &self.p_d, &|i| {
            self.d.get(i).map(|d| vec![d.len()])
        });

        report
    }

    /// Validates and returns the model, or the report wrapped in an error.
    pub fn validated(self) -> Result<Self> {
        let report = self.validate();
        if report.is_clean() {
            Ok(self)
        } else {
            Err(Error::InvalidModel(report))
        }
    }
}

fn check_columns(report: &mut ValidationReport, name: &str, index: &str, t: &ConditionalTensor) {
    for (cond, col) in t.columns() {
        let sum: f64 = col.iter().sum();
        if col.iter().any(|&v| v < 0.0) {
            report.push(name, format!("{index}]{cond:?}"), "negative entry".to_string());
        } else if (sum - 1.0).abs() > NORM_TOL {
            report.push(
                name,
                format!("{index}]{cond:?}"),
                format!("column sums to {sum} (deficit {})", 1.0 - sum),
            );
        }
    }
}

fn check_dirichlet_shapes(
    report: &mut ValidationReport,
    name: &str,
    counts: &Option<Vec<DirichletCounts>>,
    expected: &dyn Fn(usize) -> Option<Vec<usize>>,
) {
    let Some(counts) = counts else { return };
    for (i, c) in counts.iter().enumerate() {
        match expected(i) {
            Some(dims) if dims == c.dims() => {}
            Some(dims) => report.push(
                name,
                i.to_string(),
                format!("shape {:?} does not match {:?}", c.dims(), dims),
            ),
            None => report.push(name, i.to_string(), "no matching array".to_string()),
        }
        if c.values().iter().any(|&v| v <= 0.0) {
            report.push(name, i.to_string(), "counts must be strictly positive".to_string());
        }
    }
}

/// Enumerates every policy of length `policy_len` over the given control
/// factors, in lexicographic order (factor-major, time-minor). Factors not in
/// `controllable_factors` contribute a single trivial control level; `None`
/// leaves every factor's control count as given.
pub fn construct_policies(
    num_controls: &[usize],
    policy_len: usize,
    controllable_factors: Option<&[usize]>,
) -> Result<Vec<Policy>> {
    if num_controls.is_empty() {
        return Err(Error::InvalidArgument("empty control list".into()));
    }
    if policy_len == 0 {
        return Err(Error::InvalidArgument("policy_len must be >= 1".into()));
    }
    let num_factors = num_controls.len();
    let effective: Vec<usize> = num_controls
        .iter()
        .enumerate()
        .map(|(f, &u)| match controllable_factors {
            Some(idx) if !idx.contains(&f) => 1,
            _ => u.max(1),
        })
        .collect();

    // digits of a mixed-radix counter, keyed (factor, time) with the leftmost
    // digit most significant
    let radices: Vec<usize> = effective
        .iter()
        .flat_map(|&u| std::iter::repeat(u).take(policy_len))
        .collect();
    let total: usize = radices.iter().product();
    let mut policies = Vec::with_capacity(total);
    let mut digits = vec![0usize; radices.len()];
    for _ in 0..total {
        let controls: Vec<Vec<usize>> = (0..policy_len)
            .map(|t| (0..num_factors).map(|f| digits[f * policy_len + t]).collect())
            .collect();
        policies.push(Policy::new(controls));
        let mut k = digits.len();
        while k > 0 {
            k -= 1;
            digits[k] += 1;
            if digits[k] < radices[k] {
                break;
            }
            digits[k] = 0;
        }
    }
    Ok(policies)
}

/// Expected value of the Dirichlet distribution: each column of the counts,
/// normalized.
pub fn dirichlet_mean(counts: &DirichletCounts) -> Result<ConditionalTensor> {
    let dims = counts.dims().to_vec();
    let cond_len: usize = dims[1..].iter().product();
    let sums = counts.column_sums();
    let values: Vec<f64> = counts
        .values()
        .iter()
        .enumerate()
        .map(|(flat, &v)| v / sums[flat % cond_len])
        .collect();
    ConditionalTensor::new(dims, values)
}

/// Optional human-readable names for outcome, state, and control levels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Labels {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obs: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub controls: Option<Vec<Vec<String>>>,
}

/// On-disk model description: a self-describing JSON document with explicit
/// dimensions and dense row-major payloads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpecFile {
    pub version: u32,
    pub num_obs: Vec<usize>,
    pub num_states: Vec<usize>,
    pub num_controls: Vec<usize>,
    /// One flat row-major payload per modality, dims `O_m x S_1 x ... x S_F`.
    pub a: Vec<Vec<f64>>,
    /// One flat row-major payload per factor, dims `S_f x S_f x U_f`.
    pub b: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Preferences>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_b: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_d: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Labels>,
}

pub const MODEL_SPEC_VERSION: u32 = 1;

impl ModelSpecFile {
    pub fn from_model(model: &GenerativeModel) -> Self {
        Self {
            version: MODEL_SPEC_VERSION,
            num_obs: model.num_obs(),
            num_states: model.num_states(),
            num_controls: model.num_controls(),
            a: model.a.iter().map(|t| t.values().to_vec()).collect(),
            b: model.b.iter().map(|t| t.values().to_vec()).collect(),
            c: Some(model.c.clone()),
            d: Some(model.d.iter().map(|d| d.probs().to_vec()).collect()),
            e: model.e.as_ref().map(|e| e.probs().to_vec()),
            p_a: model
                .p_a
                .as_ref()
                .map(|pa| pa.iter().map(|c| c.values().to_vec()).collect()),
            p_b: model
                .p_b
                .as_ref()
                .map(|pb| pb.iter().map(|c| c.values().to_vec()).collect()),
            p_d: model
                .p_d
                .as_ref()
                .map(|pd| pd.iter().map(|c| c.values().to_vec()).collect()),
            labels: None,
        }
    }

    pub fn into_model(self) -> Result<GenerativeModel> {
        if self.version != MODEL_SPEC_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported model file version {} (expected {MODEL_SPEC_VERSION})",
                self.version
            )));
        }
        let f = self.num_states.len();
        if self.num_controls.len() != f {
            return Err(Error::InvalidArgument(
                "num_controls length does not match num_states".into(),
            ));
        }
        if self.a.len() != self.num_obs.len() {
            return Err(Error::InvalidArgument("A payload count does not match num_obs".into()));
        }
        if self.b.len() != f {
            return Err(Error::InvalidArgument("B payload count does not match num_states".into()));
        }

        let mut a = Vec::with_capacity(self.a.len());
        for (m, payload) in self.a.into_iter().enumerate() {
            let mut dims = vec![self.num_obs[m]];
            dims.extend_from_slice(&self.num_states);
            a.push(
                ConditionalTensor::new(dims, payload)
                    .map_err(|e| Error::InvalidArgument(format!("A[{m}]: {e}")))?,
            );
        }
        let mut b = Vec::with_capacity(f);
        for (fi, payload) in self.b.into_iter().enumerate() {
            let dims = vec![self.num_states[fi], self.num_states[fi], self.num_controls[fi]];
            b.push(
                ConditionalTensor::new(dims, payload)
                    .map_err(|e| Error::InvalidArgument(format!("B[{fi}]: {e}")))?,
            );
        }

        let mut model = GenerativeModel::new(a, b);
        if let Some(c) = self.c {
            model.c = c;
        }
        if let Some(d) = self.d {
            model.d = d
                .into_iter()
                .enumerate()
                .map(|(fi, v)| {
                    Categorical::new(v).map_err(|e| Error::InvalidArgument(format!("D[{fi}]: {e}")))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(e) = self.e {
            model.e =
                Some(Categorical::new(e).map_err(|e| Error::InvalidArgument(format!("E: {e}")))?);
        }
        model.p_a = counts_from_payload(self.p_a, "pA", &|m| {
            let mut dims = vec![self.num_obs[m]];
            dims.extend_from_slice(&self.num_states);
            dims
        })?;
        model.p_b = counts_from_payload(self.p_b, "pB", &|fi| {
            vec![self.num_states[fi], self.num_states[fi], self.num_controls[fi]]
        })?;
        model.p_d = counts_from_payload(self.p_d, "pD", &|fi| vec![self.num_states[fi]])?;
        Ok(model)
    }
}

fn counts_from_payload(
    payload: Option<Vec<Vec<f64>>>,
    name: &str,
    dims_of: &dyn Fn(usize) -> Vec<usize>,
) -> Result<Option<Vec<DirichletCounts>>> {
    let Some(payload) = payload else {
        return Ok(None);
    };
    let mut out = Vec::with_capacity(payload.len());
    for (i, values) in payload.into_iter().enumerate() {
        out.push(
            DirichletCounts::new(dims_of(i), values)
                .map_err(|e| Error::InvalidArgument(format!("{name}[{i}]: {e}")))?,
        );
    }
    Ok(Some(out))
}

/// Loads and validates a generative model from a model spec file.
pub fn load_model(path: impl AsRef<Path>) -> Result<GenerativeModel> {
    let text = std::fs::read_to_string(path)?;
    let spec: ModelSpecFile = serde_json::from_str(&text)?;
    spec.into_model()?.validated()
}

/// Serializes a model as a pretty-printed spec file. Numeric payloads use the
/// shortest decimal that round-trips the underlying binary value.
pub fn save_model(model: &GenerativeModel, path: impl AsRef<Path>) -> Result<()> {
    let spec = ModelSpecFile::from_model(model);
    let mut text = serde_json::to_string_pretty(&spec)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
