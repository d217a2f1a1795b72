//! The three-symbol worked example: two sensors, two actions, and the
//! perfect-observation C/D variant.
//!
//! Under `H1` the symbols have probabilities `(4/5, 1/5, 0)`, under `H2`
//! `(1/3, 1/3, 1/3)`. Policy A sends symbol 1 to action 1 and symbols 2, 3 to
//! action 2; policy B sends symbols 1, 2 to action 1 and symbol 3 to action 2.

use crate::error::Result;
use crate::evaluate::{exact_risk, mixture_risk, Fusion, Prob};
use crate::fusion::{bayes_log_ratio, FusionInfo};
use crate::models::{FiniteObservationModel, ObservationModel, Prior};
use crate::numeric::{int, ratio, Rational};
use crate::policies::{compile_threshold, SensorKernel, TeamMixture, TeamPolicy, ThresholdPolicy};

pub fn model() -> ObservationModel {
    FiniteObservationModel::with_numbered_alphabet(
        vec![ratio(4, 5), ratio(1, 5), int(0)],
        vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)],
    )
    .expect("valid model")
    .into()
}

/// Threshold at 25/24, between the atoms 5/12 and 5/3.
pub fn policy_a() -> ThresholdPolicy {
    ThresholdPolicy::new(vec![ratio(25, 24)], vec![0, 1]).expect("valid policy")
}

/// Threshold at 8/3, separating the infinite atom.
pub fn policy_b() -> ThresholdPolicy {
    ThresholdPolicy::new(vec![ratio(8, 3)], vec![0, 1]).expect("valid policy")
}

pub fn kernel_a() -> SensorKernel {
    compile_threshold(&policy_a(), &model(), 2).expect("compiles")
}

pub fn kernel_b() -> SensorKernel {
    compile_threshold(&policy_b(), &model(), 2).expect("compiles")
}

/// Each sensor observes the hypothesis itself.
pub fn perfect_model() -> ObservationModel {
    FiniteObservationModel::with_numbered_alphabet(vec![int(1), int(0)], vec![int(0), int(1)])
        .expect("valid model")
        .into()
}

/// Reports the observation as the action.
pub fn kernel_c() -> SensorKernel {
    SensorKernel::deterministic(&[0, 1], 2).expect("valid kernel")
}

/// Ignores the observation and picks an action uniformly.
pub fn kernel_d() -> SensorKernel {
    SensorKernel::uniform(2, 2)
}

fn team(kernels: &[SensorKernel]) -> TeamPolicy {
    TeamPolicy::new(kernels.to_vec()).expect("valid team")
}

/// `1/2 (x, y) + 1/2 (y, x)`.
pub fn exchangeable_pair(x: SensorKernel, y: SensorKernel) -> TeamMixture {
    TeamMixture::new(vec![
        (ratio(1, 2), team(&[x.clone(), y.clone()])),
        (ratio(1, 2), team(&[y, x])),
    ])
    .expect("valid mixture")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Expectations only hold under the uniform prior.
    Skipped,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIPPED (non-default prior)",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expected {
    Exact(Rational),
    Positive,
}

impl std::fmt::Display for Expected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expected::Exact(r) => f.write_str(&crate::numeric::fmt_rational(r)),
            Expected::Positive => f.write_str("> 0"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: &'static str,
    pub value: Prob,
    pub expected: Expected,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub prior: Prior,
    pub rows: Vec<Row>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.status != Status::Fail)
    }
}

/// Recomputes every quantity of the example. Expectations are checked only
/// under the uniform prior.
pub fn report(prior: Option<Prior>) -> Result<Report> {
    let prior = prior.unwrap_or_else(Prior::uniform);
    let check = prior == Prior::uniform();
    let m = model();
    let (a, b) = (kernel_a(), kernel_b());
    let map_risk = |kernels: &[SensorKernel]| -> Result<Prob> {
        Ok(exact_risk(&team(kernels), &Fusion::Map, &m, &prior)?.risk)
    };
    let half = [(ratio(1, 2), a.clone()), (ratio(1, 2), b.clone())];
    let exchangeable = exchangeable_pair(a.clone(), b.clone());
    let cd = exchangeable_pair(kernel_c(), kernel_d());
    let perfect = perfect_model();

    let mut rows = Vec::new();
    let mut push = |name, value: Prob, expected: Expected| {
        let ok = match (&expected, &value) {
            (Expected::Exact(e), Prob::Exact(v)) => e == v,
            (Expected::Positive, v) => v.to_f64() > 0.0,
            _ => false,
        };
        let status = match (check, ok) {
            (false, _) => Status::Skipped,
            (true, true) => Status::Pass,
            (true, false) => Status::Fail,
        };
        rows.push(Row { name, value, expected, status });
    };
    push("J(A,B)", map_risk(&[a.clone(), b.clone()])?, Expected::Exact(ratio(19, 90)));
    push("J(A,A)", map_risk(&[a.clone(), a.clone()])?, Expected::Exact(ratio(53, 225)));
    push("J(B,B)", map_risk(&[b.clone(), b.clone()])?, Expected::Exact(ratio(2, 9)));
    push(
        "symmetric independent mixture, known randomization",
        mixture_risk(&TeamMixture::symmetric_independent(&half, 2)?, FusionInfo::KnownRandomization, &m, &prior)?.risk,
        Expected::Exact(ratio(11, 50)),
    );
    push(
        "exchangeable mixture, known randomization",
        mixture_risk(&exchangeable, FusionInfo::KnownRandomization, &m, &prior)?.risk,
        Expected::Exact(ratio(19, 90)),
    );
    push(
        "Bayesian log-ratio at u = (1,1)",
        Prob::Approx(bayes_log_ratio(&[0, 0], &exchangeable, &m)?),
        Expected::Positive,
    );
    push(
        "C/D mixture, known randomization",
        mixture_risk(&cd, FusionInfo::KnownRandomization, &perfect, &prior)?.risk,
        Expected::Exact(int(0)),
    );
    push(
        "C/D mixture, Bayesian",
        mixture_risk(&cd, FusionInfo::Bayesian, &perfect, &prior)?.risk,
        Expected::Exact(ratio(1, 4)),
    );
    Ok(Report { prior, rows })
}
