//! Fusion-center statistics and decision rules.
//!
//! With a realized team the fusion center forms
//! `Delta_N(u) = (1/N) sum_i log(g_i(H1, u_i) / g_i(H2, u_i))` and decides
//! `H1` iff `Delta_N >= (1/N) log(p2/p1)`. In exact arithmetic the same rule
//! is evaluated without logarithms as `p1 prod g_i(H1,u_i) >= p2 prod
//! g_i(H2,u_i)`. Under the Bayesian regime only the mixture is known and the
//! joint action law is averaged over its atoms.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{Hypothesis, ObservationModel, Prior};
use crate::numeric::{self, Rational};
use crate::policies::{odometer, output_law, TeamMixture, TeamPolicy};

/// What the fusion center knows about the encoding randomization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FusionInfo {
    /// Realized sensor policies are known (or reconstructible).
    KnownRandomization,
    /// Only the actions and the mixture law are known.
    Bayesian,
}

/// A realized team or a mixture of teams.
#[derive(Debug, Clone, Copy)]
pub enum PolicyRef<'a> {
    Team(&'a TeamPolicy),
    Mixture(&'a TeamMixture),
}

/// Exact per-sensor output laws under both hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SensorLaws {
    pub h1: Vec<Rational>,
    pub h2: Vec<Rational>,
}

impl SensorLaws {
    pub fn of(&self, h: Hypothesis) -> &[Rational] {
        match h {
            Hypothesis::H1 => &self.h1,
            Hypothesis::H2 => &self.h2,
        }
    }

    pub fn actions(&self) -> usize {
        self.h1.len()
    }
}

/// Float per-sensor output laws (Gaussian models).
#[derive(Debug, Clone, PartialEq)]
pub struct SensorLawsF64 {
    pub h1: Vec<f64>,
    pub h2: Vec<f64>,
}

pub fn team_laws(team: &TeamPolicy, model: &ObservationModel) -> Result<Vec<SensorLaws>> {
    team.kernels()
        .iter()
        .map(|k| {
            Ok(SensorLaws {
                h1: output_law(k, model, Hypothesis::H1)?.exact()?,
                h2: output_law(k, model, Hypothesis::H2)?.exact()?,
            })
        })
        .collect()
}

pub fn team_laws_f64(team: &TeamPolicy, model: &ObservationModel) -> Result<Vec<SensorLawsF64>> {
    team.kernels()
        .iter()
        .map(|k| {
            Ok(SensorLawsF64 {
                h1: output_law(k, model, Hypothesis::H1)?.to_f64(),
                h2: output_law(k, model, Hypothesis::H2)?.to_f64(),
            })
        })
        .collect()
}

/// `prod_i g_i(h, u_i)`.
pub fn joint_mass(laws: &[SensorLaws], u: &[usize], h: Hypothesis) -> Rational {
    let mut acc = Rational::one();
    for (l, &ui) in laws.iter().zip(u) {
        let g = &l.of(h)[ui];
        if g.is_zero() {
            return Rational::zero();
        }
        acc *= g;
    }
    acc
}

fn check_tuple(u: &[usize], n: usize, actions: usize) -> Result<()> {
    if u.len() != n || u.iter().any(|&a| a >= actions) {
        return Err(Error::InvalidPolicy(format!(
            "action tuple {u:?} does not fit {n} sensors over {actions} actions"
        )));
    }
    Ok(())
}

fn log_term(g1: f64, g2: f64) -> f64 {
    match (g1 == 0.0, g2 == 0.0) {
        (false, true) => f64::INFINITY,
        (true, false) => f64::NEG_INFINITY,
        _ => g1.ln() - g2.ln(),
    }
}

/// `Delta_N(u)` for a realized team; `+inf` / `-inf` when one hypothesis
/// makes the tuple impossible.
pub fn delta_n(u: &[usize], team: &TeamPolicy, model: &ObservationModel) -> Result<f64> {
    check_tuple(u, team.len(), team.actions())?;
    let terms: Vec<(f64, f64)> = match model {
        ObservationModel::Finite(_) => team_laws(team, model)?
            .iter()
            .zip(u)
            .map(|(l, &a)| (numeric::to_f64(&l.h1[a]), numeric::to_f64(&l.h2[a])))
            .collect(),
        ObservationModel::Gaussian(_) => team_laws_f64(team, model)?
            .iter()
            .zip(u)
            .map(|(l, &a)| (l.h1[a], l.h2[a]))
            .collect(),
    };
    let impossible_h1 = terms.iter().any(|&(g1, _)| g1 == 0.0);
    let impossible_h2 = terms.iter().any(|&(_, g2)| g2 == 0.0);
    if impossible_h1 && impossible_h2 {
        return Err(Error::UnreachableTuple(u.to_vec()));
    }
    let sum: f64 = terms.iter().map(|&(g1, g2)| log_term(g1, g2)).sum();
    Ok(sum / u.len() as f64)
}

/// Mixture-averaged joint masses `(sum_a w_a P^a(u|H1), sum_a w_a P^a(u|H2))`.
pub fn mixture_joint_masses(
    u: &[usize],
    mix: &TeamMixture,
    model: &ObservationModel,
) -> Result<(Rational, Rational)> {
    check_tuple(u, mix.sensors(), mix.actions())?;
    let mut m1 = Rational::zero();
    let mut m2 = Rational::zero();
    for (w, team) in mix.atoms() {
        let laws = team_laws(team, model)?;
        m1 += w * joint_mass(&laws, u, Hypothesis::H1);
        m2 += w * joint_mass(&laws, u, Hypothesis::H2);
    }
    Ok((m1, m2))
}

/// `log( sum_a w_a P^a(u|H1) / sum_a w_a P^a(u|H2) )`: the joint log-ratio
/// available to a fusion center that only knows the mixture.
///
/// For a point mass this is `N * delta_n(u)`.
pub fn bayes_log_ratio(u: &[usize], mix: &TeamMixture, model: &ObservationModel) -> Result<f64> {
    let (m1, m2) = mixture_joint_masses(u, mix, model)?;
    match (m1.is_zero(), m2.is_zero()) {
        (true, true) => Err(Error::UnreachableTuple(u.to_vec())),
        (false, true) => Ok(f64::INFINITY),
        (true, false) => Ok(f64::NEG_INFINITY),
        _ => Ok(numeric::ln(&m1) - numeric::ln(&m2)),
    }
}

/// MAP threshold rule for `N` sensors under a prior; ties go to `H1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapRule {
    prior: Prior,
    sensors: usize,
}

impl MapRule {
    pub fn new(prior: Prior, sensors: usize) -> Self {
        MapRule { prior, sensors }
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    /// `t = (1/N) log(p2 / p1)`.
    pub fn threshold(&self) -> f64 {
        (numeric::ln(self.prior.p2()) - numeric::ln(self.prior.p1())) / self.sensors as f64
    }

    pub fn decide_statistic(&self, delta: f64) -> Hypothesis {
        if delta >= self.threshold() {
            Hypothesis::H1
        } else {
            Hypothesis::H2
        }
    }

    /// Log-free form: `H1` iff `p1 * m1 >= p2 * m2`.
    pub fn decide_masses(&self, m1: &Rational, m2: &Rational) -> Hypothesis {
        map_from_masses(&self.prior, m1, m2)
    }
}

pub(crate) fn map_from_masses(prior: &Prior, m1: &Rational, m2: &Rational) -> Hypothesis {
    if prior.p1() * m1 >= prior.p2() * m2 {
        Hypothesis::H1
    } else {
        Hypothesis::H2
    }
}

/// MAP decision for one action tuple.
///
/// `KnownRandomization` needs a realized team. `Bayesian` accepts a mixture
/// (a realized team is treated as a point mass).
pub fn map_decide(
    u: &[usize],
    policy: PolicyRef<'_>,
    model: &ObservationModel,
    prior: &Prior,
    info: FusionInfo,
) -> Result<Hypothesis> {
    let (m1, m2) = match (policy, info) {
        (PolicyRef::Mixture(_), FusionInfo::KnownRandomization) => {
            return Err(Error::Unsupported(
                "known-randomization fusion decides on a realized team".into(),
            ))
        }
        (PolicyRef::Team(team), _) => {
            check_tuple(u, team.len(), team.actions())?;
            if let ObservationModel::Gaussian(_) = model {
                let rule = MapRule::new(prior.clone(), team.len());
                return Ok(rule.decide_statistic(delta_n(u, team, model)?));
            }
            let laws = team_laws(team, model)?;
            (joint_mass(&laws, u, Hypothesis::H1), joint_mass(&laws, u, Hypothesis::H2))
        }
        (PolicyRef::Mixture(mix), FusionInfo::Bayesian) => mixture_joint_masses(u, mix, model)?,
    };
    if m1.is_zero() && m2.is_zero() {
        return Err(Error::UnreachableTuple(u.to_vec()));
    }
    Ok(map_from_masses(prior, &m1, &m2))
}

/// Uniform cost: 1 iff the decision is wrong.
pub fn uca_cost(h: Hypothesis, decision: Hypothesis) -> u8 {
    u8::from(h != decision)
}

/// Explicit decision for every action tuple, indexed by mixed-radix rank
/// with sensor 1 as the most significant digit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionTable {
    sensors: usize,
    actions: usize,
    decisions: Vec<Hypothesis>,
}

impl FusionTable {
    pub fn new(sensors: usize, actions: usize, decisions: Vec<Hypothesis>) -> Result<Self> {
        let expected = (actions as u128).checked_pow(sensors as u32);
        if expected != Some(decisions.len() as u128) {
            return Err(Error::InvalidPolicy(format!(
                "fusion table has {} entries, expected {actions}^{sensors}",
                decisions.len()
            )));
        }
        Ok(FusionTable { sensors, actions, decisions })
    }

    pub fn rank(&self, u: &[usize]) -> usize {
        u.iter().fold(0, |acc, &a| acc * self.actions + a)
    }

    pub fn decide(&self, u: &[usize]) -> Hypothesis {
        self.decisions[self.rank(u)]
    }

    pub fn decisions(&self) -> &[Hypothesis] {
        &self.decisions
    }

    pub fn sensors(&self) -> usize {
        self.sensors
    }

    pub fn actions(&self) -> usize {
        self.actions
    }

    /// Hypothesis labels (`1`/`2`) in rank order.
    pub fn to_labels(&self) -> Vec<u8> {
        self.decisions.iter().map(|h| h.label()).collect()
    }

    pub fn from_labels(sensors: usize, actions: usize, labels: &[u8]) -> Result<Self> {
        let decisions = labels
            .iter()
            .map(|&l| match l {
                1 => Ok(Hypothesis::H1),
                2 => Ok(Hypothesis::H2),
                _ => Err(Error::Parse(format!("fusion decision {l} is not 1 or 2"))),
            })
            .collect::<Result<Vec<_>>>()?;
        FusionTable::new(sensors, actions, decisions)
    }

    /// Table of the MAP rule for a realized team.
    pub fn from_map(team: &TeamPolicy, model: &ObservationModel, prior: &Prior) -> Result<Self> {
        let (n, m) = (team.len(), team.actions());
        enumeration_size(n, m, TABLE_CAP)?;
        let laws = team_laws(team, model)?;
        let mut decisions = Vec::new();
        let mut u = vec![0usize; n];
        loop {
            let m1 = joint_mass(&laws, &u, Hypothesis::H1);
            let m2 = joint_mass(&laws, &u, Hypothesis::H2);
            decisions.push(map_from_masses(prior, &m1, &m2));
            if !odometer(&mut u, m) {
                break;
            }
        }
        FusionTable::new(n, m, decisions)
    }
}

/// Largest `|U|^N` for which explicit fusion tables are built.
pub const TABLE_CAP: u128 = 1 << 20;

pub(crate) fn enumeration_size(sensors: usize, actions: usize, cap: u128) -> Result<u128> {
    match (actions as u128).checked_pow(sensors as u32) {
        Some(n) if n <= cap => Ok(n),
        Some(n) => Err(Error::EnumerationCap { needed: n, cap }),
        None => Err(Error::EnumerationCap { needed: u128::MAX, cap }),
    }
}

/// Best fusion table by brute force over the joint law.
///
/// Works directly from the observation pmfs and kernel rows: for every
/// observation tuple and action tuple it accumulates `P(y|h) prod
/// gamma_i(u_i|y_i)`, then picks, per action tuple, the hypothesis with the
/// larger posterior mass (ties to `H1`). This does not use the output-law
/// factorization, so it independently checks the MAP rule.
pub fn exhaustive_best_fusion(
    team: &TeamPolicy,
    model: &ObservationModel,
    prior: &Prior,
) -> Result<(FusionTable, Rational)> {
    let fm = model.as_finite()?;
    let (n, m) = (team.len(), team.actions());
    let tuples = enumeration_size(n, m, TABLE_CAP)? as usize;
    enumeration_size(n, fm.len() * m, TABLE_CAP * 4)?;
    let rows: Vec<&Vec<Vec<Rational>>> = team
        .kernels()
        .iter()
        .map(|k| match k {
            crate::policies::SensorKernel::Matrix { rows, .. } if rows.len() == fm.len() => Ok(rows),
            _ => Err(Error::Unsupported(
                "brute-force fusion needs matrix kernels over the model alphabet".into(),
            )),
        })
        .collect::<Result<_>>()?;

    let mut posterior = vec![[Rational::zero(), Rational::zero()]; tuples];
    let mut y = vec![0usize; n];
    loop {
        for h in Hypothesis::ALL {
            let py: Rational = y.iter().map(|&yi| &fm.pmf(h)[yi]).product::<Rational>() * prior.of(h);
            if py.is_zero() {
                continue;
            }
            let mut u = vec![0usize; n];
            let mut rank = 0usize;
            loop {
                let mut p = py.clone();
                for (i, &ui) in u.iter().enumerate() {
                    p *= &rows[i][y[i]][ui];
                    if p.is_zero() {
                        break;
                    }
                }
                posterior[rank][h.index()] += p;
                rank += 1;
                if !odometer(&mut u, m) {
                    break;
                }
            }
        }
        if !odometer(&mut y, fm.len()) {
            break;
        }
    }

    let mut decisions = Vec::with_capacity(tuples);
    let mut risk = Rational::zero();
    for [q1, q2] in posterior {
        if q1 >= q2 {
            decisions.push(Hypothesis::H1);
            risk += q2;
        } else {
            decisions.push(Hypothesis::H2);
            risk += q1;
        }
    }
    Ok((FusionTable::new(n, m, decisions)?, risk))
}
