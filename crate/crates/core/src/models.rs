//! Hypotheses, priors and observation channels.
//!
//! A finite model carries one exact probability mass function per hypothesis
//! over an ordered alphabet. The Gaussian shift model has the same variance
//! under both hypotheses and only differs in the mean. The likelihood ratio
//! of an observation `y` is always `f(y | H2) / f(y | H1)`, so it is `+inf`
//! exactly when `y` is impossible under `H1` and possible under `H2`.

use std::cmp::Ordering;
use std::fmt;

use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_distr::{Distribution, Normal, weighted::WeightedIndex};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{self, Rational};

/// One of the two competing hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    H1,
    H2,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 2] = [Hypothesis::H1, Hypothesis::H2];

    pub fn index(self) -> usize {
        match self {
            Hypothesis::H1 => 0,
            Hypothesis::H2 => 1,
        }
    }

    /// The label used in files and on the command line (`1` or `2`).
    pub fn label(self) -> u8 {
        self.index() as u8 + 1
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H{}", self.label())
    }
}

/// Prior probabilities of the two hypotheses, both strictly positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Prior {
    p1: Rational,
    p2: Rational,
}

impl Prior {
    /// Builds the prior `(p1, 1 - p1)`.
    pub fn new(p1: Rational) -> Result<Self> {
        if !p1.is_positive() || p1 >= Rational::one() {
            return Err(Error::InvalidPrior(format!(
                "P(H1) = {} must lie strictly between 0 and 1",
                numeric::fmt_rational(&p1)
            )));
        }
        let p2 = Rational::one() - &p1;
        Ok(Prior { p1, p2 })
    }

    /// Builds a prior from both masses, checking that they sum to one.
    pub fn from_pair(p1: Rational, p2: Rational) -> Result<Self> {
        if &p1 + &p2 != Rational::one() {
            return Err(Error::InvalidPrior(format!(
                "P(H1) + P(H2) = {} != 1",
                numeric::fmt_rational(&(&p1 + &p2))
            )));
        }
        Prior::new(p1)
    }

    pub fn uniform() -> Self {
        Prior::new(numeric::ratio(1, 2)).expect("1/2 is a valid prior")
    }

    pub fn p1(&self) -> &Rational {
        &self.p1
    }

    pub fn p2(&self) -> &Rational {
        &self.p2
    }

    pub fn of(&self, h: Hypothesis) -> &Rational {
        match h {
            Hypothesis::H1 => &self.p1,
            Hypothesis::H2 => &self.p2,
        }
    }

    pub fn min(&self) -> &Rational {
        if self.p1 <= self.p2 { &self.p1 } else { &self.p2 }
    }
}

/// Whether the numbers of a finite model came in as exact fractions or as
/// decimal floats. Evaluation is exact either way; this only drives output
/// formatting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arithmetic {
    ExactRational,
    Float,
}

/// Finite observation alphabet with one pmf per hypothesis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteObservationModel {
    alphabet: Vec<String>,
    pmf1: Vec<Rational>,
    pmf2: Vec<Rational>,
    arithmetic: Arithmetic,
}

/// Lists every structural problem with a candidate finite model.
pub fn structural_violations(
    alphabet: &[String],
    pmf1: &[Rational],
    pmf2: &[Rational],
) -> Vec<String> {
    let mut out = Vec::new();
    if alphabet.is_empty() {
        out.push("alphabet is empty".to_string());
    }
    for (name, pmf) in [("pmf1", pmf1), ("pmf2", pmf2)] {
        if pmf.len() != alphabet.len() {
            out.push(format!(
                "{name} has {} entries for an alphabet of {}",
                pmf.len(),
                alphabet.len()
            ));
        }
        for (i, p) in pmf.iter().enumerate() {
            if p.is_negative() {
                let sym = alphabet.get(i).map(String::as_str).unwrap_or("?");
                out.push(format!(
                    "{name}[{sym}] = {} is negative",
                    numeric::fmt_rational(p)
                ));
            }
        }
        let total: Rational = pmf.iter().sum();
        if total != Rational::one() {
            out.push(format!(
                "{name} sums to {}, not 1",
                numeric::fmt_rational(&total)
            ));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for sym in alphabet {
        if !seen.insert(sym) {
            out.push(format!("symbol {sym} appears twice in the alphabet"));
        }
    }
    out
}

impl FiniteObservationModel {
    pub fn new(alphabet: Vec<String>, pmf1: Vec<Rational>, pmf2: Vec<Rational>) -> Result<Self> {
        let violations = structural_violations(&alphabet, &pmf1, &pmf2);
        if !violations.is_empty() {
            return Err(Error::InvalidModel(violations));
        }
        Ok(FiniteObservationModel {
            alphabet,
            pmf1,
            pmf2,
            arithmetic: Arithmetic::ExactRational,
        })
    }

    /// Model over the symbols `1..=k`.
    pub fn with_numbered_alphabet(pmf1: Vec<Rational>, pmf2: Vec<Rational>) -> Result<Self> {
        let alphabet = (1..=pmf1.len()).map(|i| i.to_string()).collect();
        Self::new(alphabet, pmf1, pmf2)
    }

    pub fn with_arithmetic(mut self, arithmetic: Arithmetic) -> Self {
        self.arithmetic = arithmetic;
        self
    }

    pub fn arithmetic(&self) -> Arithmetic {
        self.arithmetic
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn len(&self) -> usize {
        self.alphabet.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphabet.is_empty()
    }

    pub fn pmf(&self, h: Hypothesis) -> &[Rational] {
        match h {
            Hypothesis::H1 => &self.pmf1,
            Hypothesis::H2 => &self.pmf2,
        }
    }

    pub fn symbol_index(&self, symbol: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| s == symbol)
    }

    /// Symbols with positive mass under at least one hypothesis.
    pub fn is_realizable(&self, y: usize) -> bool {
        self.pmf1[y].is_positive() || self.pmf2[y].is_positive()
    }

    pub fn likelihood_ratio(&self, y: usize) -> Result<LikelihoodRatio> {
        let (p1, p2) = (&self.pmf1[y], &self.pmf2[y]);
        match (p1.is_zero(), p2.is_zero()) {
            (true, true) => Err(Error::ZeroProbabilityObservation(self.alphabet[y].clone())),
            (true, false) => Ok(LikelihoodRatio::Infinite),
            _ => Ok(LikelihoodRatio::Finite(p2 / p1)),
        }
    }

    /// Distinct likelihood-ratio values of realizable symbols, ascending.
    pub fn lr_atoms(&self) -> Vec<LikelihoodRatio> {
        let mut atoms: Vec<LikelihoodRatio> = (0..self.len())
            .filter_map(|y| self.likelihood_ratio(y).ok())
            .collect();
        atoms.sort();
        atoms.dedup();
        atoms
    }
}

/// Equal-variance Gaussian shift: `y ~ N(mean_h, sigma^2)` under `H_h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianShift {
    pub mean1: f64,
    pub mean2: f64,
    pub sigma: f64,
}

impl GaussianShift {
    pub fn new(mean1: f64, mean2: f64, sigma: f64) -> Result<Self> {
        let mut violations = Vec::new();
        if !(sigma > 0.0 && sigma.is_finite()) {
            violations.push(format!("sigma = {sigma} must be positive and finite"));
        }
        if !mean1.is_finite() || !mean2.is_finite() {
            violations.push("means must be finite".to_string());
        }
        if violations.is_empty() {
            Ok(GaussianShift { mean1, mean2, sigma })
        } else {
            Err(Error::InvalidModel(violations))
        }
    }

    pub fn mean(&self, h: Hypothesis) -> f64 {
        match h {
            Hypothesis::H1 => self.mean1,
            Hypothesis::H2 => self.mean2,
        }
    }

    pub fn density(&self, h: Hypothesis, y: f64) -> f64 {
        let z = (y - self.mean(h)) / self.sigma;
        (-0.5 * z * z).exp() / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    /// `log L(y)`, affine in `y`.
    pub fn log_lr(&self, y: f64) -> f64 {
        let d = self.mean2 - self.mean1;
        d * (y - 0.5 * (self.mean1 + self.mean2)) / (self.sigma * self.sigma)
    }

    /// Mean and standard deviation of `log L(y)` under `h`.
    pub fn log_lr_moments(&self, h: Hypothesis) -> (f64, f64) {
        let d = self.mean2 - self.mean1;
        let s2 = self.sigma * self.sigma;
        (
            d * (self.mean(h) - 0.5 * (self.mean1 + self.mean2)) / s2,
            d.abs() / self.sigma,
        )
    }

    /// The observation at which `log L(y) = log_lr`; `None` for equal means.
    pub fn observation_at_log_lr(&self, log_lr: f64) -> Option<f64> {
        let d = self.mean2 - self.mean1;
        if d == 0.0 {
            return None;
        }
        Some(0.5 * (self.mean1 + self.mean2) + log_lr * self.sigma * self.sigma / d)
    }
}

/// A per-hypothesis observation law.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservationModel {
    Finite(FiniteObservationModel),
    Gaussian(GaussianShift),
}

impl ObservationModel {
    pub fn as_finite(&self) -> Result<&FiniteObservationModel> {
        match self {
            ObservationModel::Finite(m) => Ok(m),
            ObservationModel::Gaussian(_) => Err(Error::Unsupported(
                "this operation needs a finite observation model".into(),
            )),
        }
    }
}

impl From<FiniteObservationModel> for ObservationModel {
    fn from(m: FiniteObservationModel) -> Self {
        ObservationModel::Finite(m)
    }
}

impl From<GaussianShift> for ObservationModel {
    fn from(m: GaussianShift) -> Self {
        ObservationModel::Gaussian(m)
    }
}

/// A single sensor observation: an alphabet index or a real sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Observation {
    Symbol(usize),
    Real(f64),
}

/// Extended nonnegative likelihood ratio.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LikelihoodRatio {
    Finite(Rational),
    Infinite,
}

impl LikelihoodRatio {
    pub fn to_f64(&self) -> f64 {
        match self {
            LikelihoodRatio::Finite(r) => numeric::to_f64(r),
            LikelihoodRatio::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, LikelihoodRatio::Infinite)
    }
}

impl Ord for LikelihoodRatio {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (LikelihoodRatio::Finite(a), LikelihoodRatio::Finite(b)) => a.cmp(b),
            (LikelihoodRatio::Finite(_), LikelihoodRatio::Infinite) => Ordering::Less,
            (LikelihoodRatio::Infinite, LikelihoodRatio::Finite(_)) => Ordering::Greater,
            (LikelihoodRatio::Infinite, LikelihoodRatio::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for LikelihoodRatio {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LikelihoodRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LikelihoodRatio::Finite(r) => f.write_str(&numeric::fmt_rational(r)),
            LikelihoodRatio::Infinite => f.write_str("inf"),
        }
    }
}

/// `f(y | H2) / f(y | H1)`.
pub fn likelihood_ratio(model: &ObservationModel, y: Observation) -> Result<LikelihoodRatio> {
    match (model, y) {
        (ObservationModel::Finite(m), Observation::Symbol(i)) => {
            if i >= m.len() {
                return Err(Error::ZeroProbabilityObservation(format!("#{i}")));
            }
            m.likelihood_ratio(i)
        }
        (ObservationModel::Gaussian(g), Observation::Real(v)) => {
            let l = g.log_lr(v).exp();
            if l.is_infinite() {
                return Ok(LikelihoodRatio::Infinite);
            }
            Rational::from_float(l)
                .map(LikelihoodRatio::Finite)
                .ok_or_else(|| Error::ZeroProbabilityObservation(v.to_string()))
        }
        _ => Err(Error::Unsupported(
            "observation kind does not match the model".into(),
        )),
    }
}

/// Outcome of checking a model against the moment condition on `log L`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub normalized: bool,
    /// `E[(log L)^2 | H_j]` for `j = 1, 2`; `inf` when a realizable symbol
    /// has `L = 0` or `L = inf`.
    pub second_moments: [f64; 2],
    /// Symbols with mass under exactly one hypothesis, as `(symbol, hypothesis
    /// whose moment they break)`.
    pub one_sided_symbols: Vec<(String, Hypothesis)>,
    pub messages: Vec<String>,
}

impl ValidationReport {
    pub fn second_moment_finite(&self, h: Hypothesis) -> bool {
        self.second_moments[h.index()].is_finite()
    }

    pub fn moment_condition_holds(&self) -> bool {
        self.second_moments.iter().all(|m| m.is_finite())
    }
}

/// Checks normalization and whether `log L` has finite second moments.
///
/// Violations of the moment condition are reported, not raised: finite-N
/// evaluation stays valid and only the exponent lower bound is affected.
pub fn validate_model(model: &ObservationModel) -> ValidationReport {
    match model {
        ObservationModel::Finite(m) => {
            let mut moments = [0.0f64; 2];
            let mut one_sided = Vec::new();
            let mut messages = Vec::new();
            for y in 0..m.len() {
                let Ok(lr) = m.likelihood_ratio(y) else { continue };
                for h in Hypothesis::ALL {
                    let mass = &m.pmf(h)[y];
                    if mass.is_zero() {
                        continue;
                    }
                    let log_l = match &lr {
                        LikelihoodRatio::Infinite => f64::INFINITY,
                        LikelihoodRatio::Finite(r) if r.is_zero() => f64::NEG_INFINITY,
                        LikelihoodRatio::Finite(r) => numeric::ln(r),
                    };
                    if log_l.is_infinite() {
                        one_sided.push((m.alphabet()[y].clone(), h));
                        moments[h.index()] = f64::INFINITY;
                    } else {
                        moments[h.index()] += numeric::to_f64(mass) * log_l * log_l;
                    }
                }
            }
            for h in Hypothesis::ALL {
                if !moments[h.index()].is_finite() {
                    messages.push(format!(
                        "second moment of log L is infinite under {h}; exponent lower bounds are void"
                    ));
                }
            }
            ValidationReport {
                normalized: true,
                second_moments: moments,
                one_sided_symbols: one_sided,
                messages,
            }
        }
        ObservationModel::Gaussian(g) => {
            let moments = Hypothesis::ALL.map(|h| {
                let (mean, sd) = g.log_lr_moments(h);
                mean * mean + sd * sd
            });
            ValidationReport {
                normalized: true,
                second_moments: moments,
                one_sided_symbols: Vec::new(),
                messages: Vec::new(),
            }
        }
    }
}

/// Draws observations under a fixed hypothesis.
#[derive(Debug, Clone)]
pub enum ObservationSampler {
    Finite([WeightedIndex<f64>; 2]),
    Gaussian([Normal<f64>; 2]),
}

impl ObservationSampler {
    pub fn new(model: &ObservationModel) -> Result<Self> {
        match model {
            ObservationModel::Finite(m) => {
                let build = |h: Hypothesis| {
                    WeightedIndex::new(m.pmf(h).iter().map(numeric::to_f64))
                        .map_err(|e| Error::InvalidModel(vec![e.to_string()]))
                };
                Ok(ObservationSampler::Finite([
                    build(Hypothesis::H1)?,
                    build(Hypothesis::H2)?,
                ]))
            }
            ObservationModel::Gaussian(g) => {
                let build = |h: Hypothesis| {
                    Normal::new(g.mean(h), g.sigma)
                        .map_err(|e| Error::InvalidModel(vec![e.to_string()]))
                };
                Ok(ObservationSampler::Gaussian([
                    build(Hypothesis::H1)?,
                    build(Hypothesis::H2)?,
                ]))
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, h: Hypothesis, rng: &mut R) -> Observation {
        match self {
            ObservationSampler::Finite(d) => Observation::Symbol(d[h.index()].sample(rng)),
            ObservationSampler::Gaussian(d) => Observation::Real(d[h.index()].sample(rng)),
        }
    }
}

/// One draw from the model under `h`. Zero-mass symbols are never produced.
pub fn sample_observation<R: Rng + ?Sized>(
    model: &ObservationModel,
    h: Hypothesis,
    rng: &mut R,
) -> Result<Observation> {
    Ok(ObservationSampler::new(model)?.sample(h, rng))
}

/// Law of the likelihood ratio under `h`, grouped by distinct value.
///
/// Atoms are sorted ascending with `+inf` last; an atom reachable only under
/// the other hypothesis appears with mass zero.
pub fn induced_lr_law(
    model: &FiniteObservationModel,
    h: Hypothesis,
) -> Vec<(LikelihoodRatio, Rational)> {
    let atoms = model.lr_atoms();
    let mut masses = vec![Rational::zero(); atoms.len()];
    for y in 0..model.len() {
        if let Ok(lr) = model.likelihood_ratio(y) {
            let k = atoms.binary_search(&lr).expect("atom list covers every symbol");
            masses[k] += &model.pmf(h)[y];
        }
    }
    atoms.into_iter().zip(masses).collect()
}
