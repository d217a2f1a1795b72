//! JSON file formats for models, policies, teams, mixtures and fusion tables.
//!
//! Probabilities may be written as strings (`"4/5"`, `"0.2"`) or JSON
//! numbers; both are converted to exact rationals, numbers through their
//! shortest decimal form. Action labels in files are one-based.

use std::fmt;

use num_traits::{One, ToPrimitive};
use serde_json::{json, Map, Value};

use crate::fusion::FusionTable;
use crate::models::{Arithmetic, FiniteObservationModel, GaussianShift, Hypothesis, ObservationModel, Prior};
use crate::numeric::{self, Rational};
use crate::policies::{compile_threshold, SensorKernel, TeamMixture, TeamPolicy, ThresholdPolicy};

/// A problem in an input file, anchored to a line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for Diagnostic {}

type Parsed<T> = std::result::Result<T, Diagnostic>;

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    /// Position of the first `"key"` in the text, or the start of the file.
    fn at(&self, key: &str, message: impl Into<String>) -> Diagnostic {
        let needle = format!("\"{key}\"");
        let (line, column) = match self.text.find(&needle) {
            Some(offset) => {
                let before = &self.text[..offset];
                let line = before.matches('\n').count() + 1;
                let column = offset - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                (line, column)
            }
            None => (1, 1),
        };
        Diagnostic { line, column, message: message.into() }
    }

    fn parse(&self) -> Parsed<Value> {
        serde_json::from_str(self.text).map_err(|e| Diagnostic {
            line: e.line(),
            column: e.column(),
            message: format!("malformed JSON: {e}"),
        })
    }
}

fn rational_of(v: &Value) -> Option<(Rational, bool)> {
    match v {
        Value::String(s) => numeric::parse_rational(s).ok().map(|r| (r, false)),
        Value::Number(n) if n.is_i64() || n.is_u64() => numeric::parse_rational(&n.to_string()).ok().map(|r| (r, false)),
        Value::Number(n) => numeric::parse_rational(&n.to_string()).ok().map(|r| (r, true)),
        _ => None,
    }
}

fn real_of(v: &Value) -> Option<f64> {
    match v {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => numeric::parse_rational(s).ok().map(|r| numeric::to_f64(&r)),
        _ => None,
    }
}

fn symbol_of(v: &Value) -> Option<String> {
    match v {
        Value::String(s) => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn object<'v>(src: &Source, v: &'v Value, key: &str) -> Parsed<&'v Map<String, Value>> {
    v.as_object().ok_or_else(|| src.at(key, format!("\"{key}\" must be an object")))
}

fn array<'v>(src: &Source, v: Option<&'v Value>, key: &str) -> Parsed<&'v Vec<Value>> {
    v.and_then(Value::as_array)
        .ok_or_else(|| src.at(key, format!("\"{key}\" must be an array")))
}

fn rationals(src: &Source, v: Option<&Value>, key: &str) -> Parsed<(Vec<Rational>, bool)> {
    let mut any_float = false;
    let values = array(src, v, key)?
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let (r, float) = rational_of(x)
                .ok_or_else(|| src.at(key, format!("entry {} of \"{key}\" is not a number", i + 1)))?;
            any_float |= float;
            Ok(r)
        })
        .collect::<Parsed<Vec<_>>>()?;
    Ok((values, any_float))
}

fn parse_prior(src: &Source, v: &Value) -> Parsed<Prior> {
    let obj = object(src, v, "prior")?;
    let get = |k: &str| obj.get(k).map(|x| rational_of(x).map(|r| r.0).ok_or_else(|| src.at(k, format!("\"{k}\" is not a number"))));
    let prior = match (get("p1").transpose()?, get("p2").transpose()?) {
        (Some(p1), Some(p2)) => Prior::from_pair(p1, p2),
        (Some(p1), None) => Prior::new(p1),
        (None, Some(p2)) => Prior::new(Rational::one() - p2),
        (None, None) => return Err(src.at("prior", "\"prior\" needs \"p1\" or \"p2\"")),
    };
    prior.map_err(|e| src.at("prior", e.to_string()))
}

/// A parsed model file.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub model: ObservationModel,
    pub prior: Option<Prior>,
}

pub fn parse_model(text: &str) -> Parsed<ModelFile> {
    let src = Source { text };
    let root = src.parse()?;
    let obj = object(&src, &root, "model")?;
    let prior = obj.get("prior").map(|p| parse_prior(&src, p)).transpose()?;
    let model = match (obj.get("finite"), obj.get("gaussian")) {
        (Some(f), None) => {
            let f = object(&src, f, "finite")?;
            let (pmf1, float1) = rationals(&src, f.get("pmf1"), "pmf1")?;
            let (pmf2, float2) = rationals(&src, f.get("pmf2"), "pmf2")?;
            let alphabet = match f.get("alphabet") {
                Some(a) => array(&src, Some(a), "alphabet")?
                    .iter()
                    .map(|s| symbol_of(s).ok_or_else(|| src.at("alphabet", "alphabet entries must be strings or numbers")))
                    .collect::<Parsed<Vec<_>>>()?,
                None => (1..=pmf1.len()).map(|i| i.to_string()).collect(),
            };
            let arithmetic = if float1 || float2 { Arithmetic::Float } else { Arithmetic::ExactRational };
            let m = FiniteObservationModel::new(alphabet, pmf1, pmf2).map_err(|e| src.at("finite", e.to_string()))?;
            ObservationModel::Finite(m.with_arithmetic(arithmetic))
        }
        (None, Some(g)) => {
            let g = object(&src, g, "gaussian")?;
            let get = |k: &str| {
                g.get(k)
                    .and_then(real_of)
                    .ok_or_else(|| src.at(k, format!("\"{k}\" must be a number")))
            };
            let shift = GaussianShift::new(get("mean1")?, get("mean2")?, get("sigma")?)
                .map_err(|e| src.at("gaussian", e.to_string()))?;
            ObservationModel::Gaussian(shift)
        }
        (Some(_), Some(_)) => return Err(src.at("gaussian", "give either \"finite\" or \"gaussian\", not both")),
        (None, None) => return Err(src.at("", "model needs a \"finite\" or \"gaussian\" section")),
    };
    Ok(ModelFile { model, prior })
}

/// A policy as written in a file, before compilation against a model.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    Threshold(ThresholdPolicy),
    Kernel(Vec<Vec<Rational>>),
}

impl PolicySpec {
    /// Smallest action alphabet the policy fits in.
    pub fn min_actions(&self) -> usize {
        match self {
            PolicySpec::Threshold(p) => p.labels().iter().max().map_or(1, |m| m + 1),
            PolicySpec::Kernel(rows) => rows.first().map_or(0, Vec::len),
        }
    }
}

fn parse_policy_value(src: &Source, v: &Value) -> Parsed<PolicySpec> {
    let obj = object(src, v, "policy")?;
    match (obj.get("threshold"), obj.get("kernel")) {
        (Some(t), None) => {
            let t = object(src, t, "threshold")?;
            let (thresholds, _) = match t.get("thresholds") {
                Some(v) => rationals(src, Some(v), "thresholds")?,
                None => (Vec::new(), false),
            };
            let labels = array(src, t.get("labels"), "labels")?
                .iter()
                .map(|l| match l.as_u64() {
                    Some(l) if l >= 1 => Ok(l as usize - 1),
                    _ => Err(src.at("labels", "labels are positive integers (one-based)")),
                })
                .collect::<Parsed<Vec<_>>>()?;
            ThresholdPolicy::new(thresholds, labels)
                .map(PolicySpec::Threshold)
                .map_err(|e| src.at("threshold", e.to_string()))
        }
        (None, Some(k)) => {
            let rows = array(src, Some(k), "kernel")?
                .iter()
                .map(|row| rationals(src, Some(row), "kernel").map(|r| r.0))
                .collect::<Parsed<Vec<_>>>()?;
            SensorKernel::matrix(rows.clone()).map_err(|e| src.at("kernel", e.to_string()))?;
            Ok(PolicySpec::Kernel(rows))
        }
        _ => Err(src.at("", "a policy is {\"threshold\": {...}} or {\"kernel\": [...]}")),
    }
}

fn compile_spec(src: &Source, spec: &PolicySpec, model: &ObservationModel, actions: usize) -> Parsed<SensorKernel> {
    match spec {
        PolicySpec::Threshold(p) => compile_threshold(p, model, actions).map_err(|e| src.at("threshold", e.to_string())),
        PolicySpec::Kernel(rows) => {
            if rows[0].len() != actions {
                return Err(src.at("kernel", format!("kernel has {} actions, the team uses {actions}", rows[0].len())));
            }
            match model {
                ObservationModel::Finite(m) if m.len() != rows.len() => Err(src.at(
                    "kernel",
                    format!("kernel has {} rows for an alphabet of {}", rows.len(), m.len()),
                )),
                ObservationModel::Finite(_) => SensorKernel::matrix(rows.clone()).map_err(|e| src.at("kernel", e.to_string())),
                ObservationModel::Gaussian(_) => Err(src.at("kernel", "Gaussian models need threshold policies")),
            }
        }
    }
}

fn team_actions(specs: &[PolicySpec], actions: Option<usize>) -> usize {
    actions.unwrap_or_else(|| {
        let widest = specs.iter().map(PolicySpec::min_actions).max().unwrap_or(1);
        if specs.iter().any(|s| matches!(s, PolicySpec::Kernel(_))) {
            widest
        } else {
            widest.max(2)
        }
    })
}

fn build_team(src: &Source, specs: &[PolicySpec], model: &ObservationModel, actions: usize) -> Parsed<TeamPolicy> {
    if specs.is_empty() {
        return Err(src.at("", "a team needs at least one policy"));
    }
    let kernels = specs
        .iter()
        .map(|s| compile_spec(src, s, model, actions))
        .collect::<Parsed<Vec<_>>>()?;
    TeamPolicy::new(kernels).map_err(|e| src.at("", e.to_string()))
}

/// A single-policy file compiled against `model`. Without `actions` the
/// alphabet is the smallest one that fits (at least two).
pub fn parse_policy(text: &str, model: &ObservationModel, actions: Option<usize>) -> Parsed<SensorKernel> {
    let src = Source { text };
    let spec = parse_policy_value(&src, &src.parse()?)?;
    let actions = team_actions(std::slice::from_ref(&spec), actions);
    compile_spec(&src, &spec, model, actions)
}

fn team_specs(src: &Source, v: &Value) -> Parsed<Vec<PolicySpec>> {
    let items = v.as_array().ok_or_else(|| src.at("team", "a team is a JSON array of policies"))?;
    items.iter().map(|p| parse_policy_value(src, p)).collect()
}

/// A team file: a JSON array of policies.
pub fn parse_team(text: &str, model: &ObservationModel, actions: Option<usize>) -> Parsed<TeamPolicy> {
    let src = Source { text };
    let specs = team_specs(&src, &src.parse()?)?;
    build_team(&src, &specs, model, team_actions(&specs, actions))
}

/// A mixture file: `[{"weight": "1/2", "team": [...]}, ...]`.
pub fn parse_mixture(text: &str, model: &ObservationModel, actions: Option<usize>) -> Parsed<TeamMixture> {
    let src = Source { text };
    let root = src.parse()?;
    let items = root
        .as_array()
        .ok_or_else(|| src.at("weight", "a mixture is a JSON array of {\"weight\", \"team\"} objects"))?;
    let mut weighted = Vec::new();
    for item in items {
        let obj = object(&src, item, "weight")?;
        let weight = obj
            .get("weight")
            .and_then(rational_of)
            .ok_or_else(|| src.at("weight", "\"weight\" must be a number"))?
            .0;
        let specs = team_specs(&src, obj.get("team").ok_or_else(|| src.at("team", "missing \"team\""))?)?;
        weighted.push((weight, specs));
    }
    let all: Vec<PolicySpec> = weighted.iter().flat_map(|(_, s)| s.iter().cloned()).collect();
    let actions = team_actions(&all, actions);
    let atoms = weighted
        .into_iter()
        .map(|(w, specs)| Ok((w, build_team(&src, &specs, model, actions)?)))
        .collect::<Parsed<Vec<_>>>()?;
    TeamMixture::new(atoms).map_err(|e| src.at("weight", e.to_string()))
}

/// A fusion table: a JSON array of decisions (1 or 2) indexed by tuple rank,
/// sensor 1 most significant.
pub fn parse_fusion_table(text: &str, sensors: usize, actions: usize) -> Parsed<FusionTable> {
    let src = Source { text };
    let root = src.parse()?;
    let labels = root
        .as_array()
        .ok_or_else(|| src.at("", "a fusion table is a JSON array"))?
        .iter()
        .map(|v| v.as_u64().and_then(|x| x.to_u8()).ok_or_else(|| src.at("", "decisions are 1 or 2")))
        .collect::<Parsed<Vec<_>>>()?;
    FusionTable::from_labels(sensors, actions, &labels).map_err(|e| src.at("", e.to_string()))
}

pub fn fusion_table_to_json(table: &FusionTable) -> Value {
    json!(table.to_labels())
}

fn rational_json(r: &Rational) -> Value {
    Value::String(numeric::fmt_rational(r))
}

pub fn threshold_policy_to_json(p: &ThresholdPolicy) -> Value {
    json!({
        "threshold": {
            "thresholds": p.thresholds().iter().map(rational_json).collect::<Vec<_>>(),
            "labels": p.labels().iter().map(|l| l + 1).collect::<Vec<_>>(),
        }
    })
}

pub fn kernel_to_json(kernel: &SensorKernel) -> Value {
    match kernel {
        SensorKernel::Matrix { rows, .. } => json!({
            "kernel": rows
                .iter()
                .map(|r| r.iter().map(rational_json).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        }),
        SensorKernel::Threshold { policy, .. } => threshold_policy_to_json(policy),
    }
}

/// Team file contents, preferring threshold form where it is known.
pub fn team_to_json(team: &TeamPolicy, thresholds: &[Option<ThresholdPolicy>]) -> Value {
    Value::Array(
        team.kernels()
            .iter()
            .enumerate()
            .map(|(i, k)| match thresholds.get(i) {
                Some(Some(p)) => threshold_policy_to_json(p),
                _ => kernel_to_json(k),
            })
            .collect(),
    )
}

pub fn model_to_json(model: &ObservationModel, prior: Option<&Prior>) -> Value {
    let mut root = Map::new();
    if let Some(p) = prior {
        root.insert("prior".into(), json!({"p1": rational_json(p.p1()), "p2": rational_json(p.p2())}));
    }
    match model {
        ObservationModel::Finite(m) => {
            let pmf = |h| m.pmf(h).iter().map(rational_json).collect::<Vec<_>>();
            root.insert(
                "finite".into(),
                json!({"alphabet": m.alphabet(), "pmf1": pmf(Hypothesis::H1), "pmf2": pmf(Hypothesis::H2)}),
            );
        }
        ObservationModel::Gaussian(g) => {
            root.insert(
                "gaussian".into(),
                json!({"mean1": g.mean(Hypothesis::H1), "mean2": g.mean(Hypothesis::H2), "sigma": g.sigma}),
            );
        }
    }
    Value::Object(root)
}

/// JSON number for finite floats, `"inf"`/`"-inf"`/`"nan"` strings otherwise.
pub fn real_json(x: f64) -> Value {
    if x.is_finite() {
        json!(numeric::round_sig15(x))
    } else {
        Value::String(numeric::fmt_sig15(x))
    }
}
