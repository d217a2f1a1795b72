//! Sensor policy design: exhaustive and brute-force searches, person-by-person
//! best responses, exponent-optimal symmetric kernels and two-group designs.

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluate::{map_error_masses, ENUMERATION_CAP};
use crate::exponent::{chernoff_exponent, golden_section_min};
use crate::fusion::{enumeration_size, joint_mass, map_from_masses, team_laws, SensorLaws};
use crate::models::{Hypothesis, LikelihoodRatio, ObservationModel, Prior};
use crate::numeric::{self, Rational};
use crate::policies::{
    combinations, compile_threshold, cut_between, enumerate_threshold_policies, odometer, output_law,
    SensorKernel, TeamPolicy, ThresholdPolicy,
};

/// Default cap on evaluation units for exhaustive searches.
pub const DEFAULT_BUDGET: u128 = 1 << 32;

#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    Risk(Rational),
    Exponent(f64),
}

impl Objective {
    pub fn to_f64(&self) -> f64 {
        match self {
            Objective::Risk(r) => numeric::to_f64(r),
            Objective::Exponent(e) => *e,
        }
    }

    pub fn risk(&self) -> Option<&Rational> {
        match self {
            Objective::Risk(r) => Some(r),
            Objective::Exponent(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Optimality {
    /// Exact optimum over the searched class.
    Global,
    /// No single sensor can improve alone; not necessarily a global optimum.
    PersonByPerson,
    /// Best point found by a continuous search.
    BestFound { converged: bool },
}

/// A two-group design: the first `k` sensors use candidate `first`, the rest
/// use candidate `second` (indices into the canonical enumeration).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Split {
    pub k: usize,
    pub first: usize,
    pub second: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignResult {
    pub team: TeamPolicy,
    /// Threshold form of each sensor's kernel, when known.
    pub thresholds: Vec<Option<ThresholdPolicy>>,
    pub objective: Objective,
    pub candidates: u128,
    pub method: &'static str,
    pub optimality: Optimality,
    pub split: Option<Split>,
    pub notes: Vec<String>,
}

fn check_budget(needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        Err(Error::BudgetExceeded { needed, budget })
    } else {
        Ok(())
    }
}

fn threshold_candidates(
    model: &ObservationModel,
    actions: usize,
) -> Result<(Vec<ThresholdPolicy>, Vec<SensorKernel>, Vec<SensorLaws>)> {
    let fm = model.as_finite()?;
    let policies = enumerate_threshold_policies(fm, actions);
    let kernels = policies
        .iter()
        .map(|p| compile_threshold(p, model, actions))
        .collect::<Result<Vec<_>>>()?;
    let laws = kernels
        .iter()
        .map(|k| team_laws(&TeamPolicy::homogeneous(k.clone(), 1)?, model).map(|mut l| l.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    Ok((policies, kernels, laws))
}

fn risk_of(laws: &[SensorLaws], prior: &Prior) -> Rational {
    let (e1, e2) = map_error_masses(laws, prior);
    prior.p1() * e1 + prior.p2() * e2
}

/// Index of the first strict minimum.
fn argmin(values: &[Rational]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if v < &values[best] {
            best = i;
        }
    }
    best
}

/// Nondecreasing index tuples of length `n` over `0..p`, in lexicographic order.
fn multisets(p: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut t = vec![0usize; n];
    loop {
        out.push(t.clone());
        let Some(i) = (0..n).rev().find(|&i| t[i] + 1 < p) else {
            return out;
        };
        let v = t[i] + 1;
        for slot in &mut t[i..] {
            *slot = v;
        }
    }
}

/// Minimum exact MAP risk over all N-tuples of canonical threshold policies.
///
/// Ties go to the lexicographically first tuple. Since the MAP risk is
/// invariant under reordering the sensors, that tuple is sorted, so only
/// nondecreasing tuples are evaluated.
pub fn best_team_exhaustive(
    model: &ObservationModel,
    n: usize,
    actions: usize,
    prior: &Prior,
    budget: u128,
) -> Result<DesignResult> {
    if n == 0 {
        return Err(Error::Unsupported("a team needs at least one sensor".into()));
    }
    let outcomes = enumeration_size(n, actions, ENUMERATION_CAP)?;
    let (policies, kernels, laws) = threshold_candidates(model, actions)?;
    let count = numeric::binomial(policies.len() + n - 1, n);
    let count = u128::try_from(count).unwrap_or(u128::MAX);
    check_budget(count.saturating_mul(outcomes), budget)?;
    let tuples = multisets(policies.len(), n);
    let risks: Vec<Rational> = tuples
        .par_iter()
        .map(|t| {
            let team: Vec<SensorLaws> = t.iter().map(|&i| laws[i].clone()).collect();
            risk_of(&team, prior)
        })
        .collect();
    let best = argmin(&risks);
    let t = &tuples[best];
    Ok(DesignResult {
        team: TeamPolicy::new(t.iter().map(|&i| kernels[i].clone()).collect())?,
        thresholds: t.iter().map(|&i| Some(policies[i].clone())).collect(),
        objective: Objective::Risk(risks[best].clone()),
        candidates: count,
        method: "exhaustive-threshold",
        optimality: Optimality::Global,
        split: None,
        notes: Vec::new(),
    })
}

/// Minimum exact MAP risk over every deterministic map `Y -> U` per sensor,
/// threshold or not, by plain tuple enumeration.
pub fn best_team_all_maps_oracle(
    model: &ObservationModel,
    n: usize,
    actions: usize,
    prior: &Prior,
    budget: u128,
) -> Result<DesignResult> {
    let fm = model.as_finite()?;
    if n == 0 || actions == 0 {
        return Err(Error::Unsupported("need at least one sensor and one action".into()));
    }
    let maps_per_sensor = enumeration_size(fm.len(), actions, budget)?;
    let teams = maps_per_sensor
        .checked_pow(n as u32)
        .ok_or(Error::BudgetExceeded { needed: u128::MAX, budget })?;
    let outcomes = enumeration_size(n, actions, ENUMERATION_CAP)?;
    check_budget(teams.saturating_mul(outcomes), budget)?;

    let mut maps = Vec::new();
    let mut map = vec![0usize; fm.len()];
    loop {
        maps.push(map.clone());
        if !odometer(&mut map, actions) {
            break;
        }
    }
    let kernels = maps
        .iter()
        .map(|m| SensorKernel::deterministic(m, actions))
        .collect::<Result<Vec<_>>>()?;
    let laws = kernels
        .iter()
        .map(|k| {
            Ok(SensorLaws {
                h1: output_law(k, model, Hypothesis::H1)?.exact()?,
                h2: output_law(k, model, Hypothesis::H2)?.exact()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let team_index = |mut rank: usize| -> Vec<usize> {
        let mut idx = vec![0; n];
        for slot in idx.iter_mut().rev() {
            *slot = rank % maps.len();
            rank /= maps.len();
        }
        idx
    };
    let risks: Vec<Rational> = (0..teams as usize)
        .into_par_iter()
        .map(|rank| {
            let team: Vec<SensorLaws> = team_index(rank).iter().map(|&i| laws[i].clone()).collect();
            let mut risk = Rational::zero();
            let mut u = vec![0usize; n];
            loop {
                let m1 = joint_mass(&team, &u, Hypothesis::H1);
                let m2 = joint_mass(&team, &u, Hypothesis::H2);
                risk += match map_from_masses(prior, &m1, &m2) {
                    Hypothesis::H1 => prior.p2() * m2,
                    Hypothesis::H2 => prior.p1() * m1,
                };
                if !odometer(&mut u, actions) {
                    break;
                }
            }
            risk
        })
        .collect();
    let best = argmin(&risks);
    let idx = team_index(best);
    Ok(DesignResult {
        team: TeamPolicy::new(idx.iter().map(|&i| kernels[i].clone()).collect())?,
        thresholds: vec![None; n],
        objective: Objective::Risk(risks[best].clone()),
        candidates: teams,
        method: "all-maps-oracle",
        optimality: Optimality::Global,
        split: None,
        notes: Vec::new(),
    })
}

/// Per-action error coefficients `g^i(H_j, u)` for sensor `i` with every
/// other sensor and the current team's MAP fusion rule held fixed.
pub fn best_response_coefficients(
    i: usize,
    team: &TeamPolicy,
    model: &ObservationModel,
    prior: &Prior,
) -> Result<[Vec<Rational>; 2]> {
    model.as_finite()?;
    let n = team.len();
    if i >= n {
        return Err(Error::InvalidPolicy(format!("sensor {} is not in a team of {n}", i + 1)));
    }
    let actions = team.actions();
    enumeration_size(n, actions, ENUMERATION_CAP)?;
    let laws = team_laws(team, model)?;
    let mut coef = [vec![Rational::zero(); actions], vec![Rational::zero(); actions]];
    let mut u = vec![0usize; n];
    loop {
        let decision = map_from_masses(
            prior,
            &joint_mass(&laws, &u, Hypothesis::H1),
            &joint_mass(&laws, &u, Hypothesis::H2),
        );
        for h in Hypothesis::ALL {
            if decision == h {
                continue;
            }
            let mut others = Rational::one();
            for (k, (l, &uk)) in laws.iter().zip(&u).enumerate() {
                if k != i {
                    others *= &l.of(h)[uk];
                }
            }
            coef[h.index()][u[i]] += others;
        }
        if !odometer(&mut u, actions) {
            break;
        }
    }
    Ok(coef)
}

/// Best threshold policy for sensor `i` given the others and the current
/// MAP fusion rule.
///
/// Action `u` costs `p1 g(H1,u) + p2 g(H2,u) l` at likelihood ratio `l`; each
/// likelihood-ratio atom takes the cheapest action (ties: smaller slope, then
/// smaller index; at `l = inf` the smallest slope wins). Consecutive atoms
/// with the same action form one bin.
pub fn best_response(i: usize, team: &TeamPolicy, model: &ObservationModel, prior: &Prior) -> Result<ThresholdPolicy> {
    let fm = model.as_finite()?;
    let [g1, g2] = best_response_coefficients(i, team, model, prior)?;
    let actions = team.actions();
    let intercept: Vec<Rational> = g1.iter().map(|g| prior.p1() * g).collect();
    let slope: Vec<Rational> = g2.iter().map(|g| prior.p2() * g).collect();
    if (1..actions).all(|u| intercept[u] == intercept[0] && slope[u] == slope[0]) {
        return Ok(ThresholdPolicy::constant(0));
    }
    let atoms = fm.lr_atoms();
    let choice: Vec<usize> = atoms
        .iter()
        .map(|lr| match lr {
            LikelihoodRatio::Finite(l) => (0..actions)
                .min_by(|&a, &b| {
                    let va = &intercept[a] + &slope[a] * l;
                    let vb = &intercept[b] + &slope[b] * l;
                    va.cmp(&vb).then(slope[a].cmp(&slope[b])).then(a.cmp(&b))
                })
                .expect("at least one action"),
            LikelihoodRatio::Infinite => (0..actions)
                .min_by(|&a, &b| slope[a].cmp(&slope[b]).then(intercept[a].cmp(&intercept[b])).then(a.cmp(&b)))
                .expect("at least one action"),
        })
        .collect();
    let mut thresholds = Vec::new();
    let mut labels = vec![choice[0]];
    for j in 1..choice.len() {
        if choice[j] != choice[j - 1] {
            thresholds.push(cut_between(&atoms, j - 1));
            labels.push(choice[j]);
        }
    }
    ThresholdPolicy::new(thresholds, labels)
}

/// Cycles best responses over the sensors until a full round brings no
/// strict risk improvement or `max_rounds` is reached. Returns the design and
/// the risk after every accepted step (starting with the initial risk).
pub fn coordinate_descent(
    initial: &TeamPolicy,
    model: &ObservationModel,
    prior: &Prior,
    max_rounds: usize,
) -> Result<(DesignResult, Vec<Rational>)> {
    let actions = initial.actions();
    let mut team = initial.clone();
    let mut thresholds: Vec<Option<ThresholdPolicy>> = vec![None; team.len()];
    let mut risk = risk_of(&team_laws(&team, model)?, prior);
    let mut trace = vec![risk.clone()];
    let mut evaluated = 0u128;
    let mut converged = false;
    for _ in 0..max_rounds {
        let mut improved = false;
        for (i, slot) in thresholds.iter_mut().enumerate() {
            let policy = best_response(i, &team, model, prior)?;
            let candidate = team.with_kernel(i, compile_threshold(&policy, model, actions)?)?;
            let candidate_risk = risk_of(&team_laws(&candidate, model)?, prior);
            evaluated += 1;
            if candidate_risk < risk {
                team = candidate;
                *slot = Some(policy);
                risk = candidate_risk;
                trace.push(risk.clone());
                improved = true;
            }
        }
        if !improved {
            converged = true;
            break;
        }
    }
    let mut notes = Vec::new();
    if !converged {
        notes.push(format!("stopped after {max_rounds} rounds without reaching a fixpoint"));
    }
    Ok((
        DesignResult {
            team,
            thresholds,
            objective: Objective::Risk(risk),
            candidates: evaluated,
            method: "coordinate-descent",
            optimality: Optimality::PersonByPerson,
            split: None,
            notes,
        },
        trace,
    ))
}

fn exponent_or_separating(kernel: &SensorKernel, model: &ObservationModel) -> Result<f64> {
    match chernoff_exponent(kernel, model) {
        Ok(r) => Ok(r.value),
        Err(Error::DegenerateObjective(_)) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

const GAUSSIAN_GRID: usize = 401;
const COORDINATE_ROUNDS: usize = 50;

fn gaussian_policy(log_thresholds: &[f64]) -> Result<ThresholdPolicy> {
    let thresholds = log_thresholds
        .iter()
        .map(|x| {
            Rational::from_float(x.exp())
                .filter(|t| t > &Rational::zero())
                .ok_or_else(|| Error::Unsupported(format!("log-threshold {x} is out of range")))
        })
        .collect::<Result<Vec<_>>>()?;
    ThresholdPolicy::new(thresholds, (0..=log_thresholds.len()).collect())
}

/// Kernel with the most negative Chernoff exponent, used identically by all
/// sensors.
///
/// Finite models: exact search over the canonical threshold policies (ties
/// to the first). Gaussian models: thresholds on `log l` found by a grid scan
/// and golden-section refinement, one coordinate at a time for more than two
/// actions. Mixtures over kernels never beat the best point mass because the
/// objective is linear in the mixture.
pub fn best_symmetric_exponent(model: &ObservationModel, actions: usize) -> Result<DesignResult> {
    if actions == 0 {
        return Err(Error::Unsupported("need at least one action".into()));
    }
    let reduction = "a point mass on this kernel is optimal among mixtures".to_string();
    match model {
        ObservationModel::Finite(fm) => {
            let policies = enumerate_threshold_policies(fm, actions);
            let kernels = policies
                .iter()
                .map(|p| compile_threshold(p, model, actions))
                .collect::<Result<Vec<_>>>()?;
            let values = kernels
                .iter()
                .map(|k| exponent_or_separating(k, model))
                .collect::<Result<Vec<_>>>()?;
            let mut best = 0;
            for (i, v) in values.iter().enumerate() {
                if *v < values[best] {
                    best = i;
                }
            }
            Ok(DesignResult {
                team: TeamPolicy::homogeneous(kernels[best].clone(), 1)?,
                thresholds: vec![Some(policies[best].clone())],
                objective: Objective::Exponent(values[best]),
                candidates: policies.len() as u128,
                method: "symmetric-exponent-enumeration",
                optimality: Optimality::Global,
                split: None,
                notes: vec![reduction],
            })
        }
        ObservationModel::Gaussian(g) => {
            if actions == 1 {
                let policy = ThresholdPolicy::constant(0);
                let kernel = compile_threshold(&policy, model, 1)?;
                let value = exponent_or_separating(&kernel, model)?;
                return Ok(DesignResult {
                    team: TeamPolicy::homogeneous(kernel, 1)?,
                    thresholds: vec![Some(policy)],
                    objective: Objective::Exponent(value),
                    candidates: 1,
                    method: "symmetric-exponent-search",
                    optimality: Optimality::Global,
                    split: None,
                    notes: vec![reduction],
                });
            }
            // log l ~ N(-/+ d^2/2, d^2) under H1/H2.
            let (mu, sd) = g.log_lr_moments(Hypothesis::H2);
            let reach = mu.abs() + 6.0 * sd.max(1e-3);
            let (lo, hi) = (-reach, reach);
            let cuts = actions - 1;
            let evaluations = std::cell::Cell::new(0u128);
            let value_at = |xs: &[f64]| -> f64 {
                evaluations.set(evaluations.get() + 1);
                if xs.windows(2).any(|w| w[0] >= w[1]) {
                    return f64::INFINITY;
                }
                gaussian_policy(xs)
                    .and_then(|p| compile_threshold(&p, model, actions))
                    .and_then(|k| exponent_or_separating(&k, model))
                    .unwrap_or(f64::INFINITY)
            };
            let step = (hi - lo) / (GAUSSIAN_GRID - 1) as f64;
            let mut xs: Vec<f64> = (1..=cuts).map(|j| lo + (hi - lo) * j as f64 / actions as f64).collect();
            let mut current = value_at(&xs);
            let mut converged = false;
            for _ in 0..COORDINATE_ROUNDS {
                let before = current;
                for j in 0..cuts {
                    let left = if j == 0 { lo } else { xs[j - 1] + 1e-9 };
                    let right = if j + 1 == cuts { hi } else { xs[j + 1] - 1e-9 };
                    let mut trial = xs.clone();
                    let mut best = (xs[j], current);
                    for i in 0..GAUSSIAN_GRID {
                        let x = lo + step * i as f64;
                        if x < left || x > right {
                            continue;
                        }
                        trial[j] = x;
                        let v = value_at(&trial);
                        if v < best.1 {
                            best = (x, v);
                        }
                    }
                    let (a, b) = ((best.0 - step).max(left), (best.0 + step).min(right));
                    let (x, v) = golden_section_min(
                        |x| {
                            let mut t = xs.clone();
                            t[j] = x;
                            value_at(&t)
                        },
                        a,
                        b,
                        1e-9,
                    );
                    if v < best.1 {
                        best = (x, v);
                    }
                    if best.1 < current {
                        xs[j] = best.0;
                        current = best.1;
                    }
                }
                if cuts == 1 || before - current <= 1e-12 {
                    converged = true;
                    break;
                }
            }
            let policy = gaussian_policy(&xs)?;
            let kernel = compile_threshold(&policy, model, actions)?;
            let value = exponent_or_separating(&kernel, model)?;
            let mut notes = vec![reduction];
            if !converged {
                notes.push(format!("coordinate search did not settle within {COORDINATE_ROUNDS} rounds"));
            }
            Ok(DesignResult {
                team: TeamPolicy::homogeneous(kernel, 1)?,
                thresholds: vec![Some(policy)],
                objective: Objective::Exponent(value),
                candidates: evaluations.get(),
                method: "symmetric-exponent-search",
                optimality: Optimality::BestFound { converged },
                split: None,
                notes,
            })
        }
    }
}

/// Which splits a two-group search considers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitRule {
    /// Every `(first, second, k)`, including the symmetric designs.
    Any,
    /// Two distinct policies, each used by at least one sensor.
    Proper,
    /// Exactly `k` sensors on the first policy.
    Fixed(usize),
}

/// Best design of the form "the first `k` sensors use one threshold policy,
/// the remaining `N - k` another", with MAP fusion and exact risk.
pub fn best_two_group(
    model: &ObservationModel,
    n: usize,
    actions: usize,
    prior: &Prior,
    rule: SplitRule,
    budget: u128,
) -> Result<DesignResult> {
    if n == 0 {
        return Err(Error::Unsupported("a team needs at least one sensor".into()));
    }
    enumeration_size(n, actions, ENUMERATION_CAP)?;
    let (policies, kernels, laws) = threshold_candidates(model, actions)?;
    let p = policies.len();
    let mut splits = Vec::new();
    match rule {
        SplitRule::Any => {
            for first in 0..p {
                for second in first..p {
                    let ks: Vec<usize> = if first == second { vec![0] } else { (0..=n).collect() };
                    splits.extend(ks.into_iter().map(|k| Split { k, first, second }));
                }
            }
        }
        SplitRule::Proper => {
            for pair in combinations(p, 2) {
                splits.extend((1..n).map(|k| Split { k, first: pair[0], second: pair[1] }));
            }
        }
        SplitRule::Fixed(k) => {
            if k > n {
                return Err(Error::Unsupported(format!("cannot put {k} of {n} sensors in one group")));
            }
            for first in 0..p {
                for second in 0..p {
                    splits.push(Split { k, first, second });
                }
            }
        }
    }
    if splits.is_empty() {
        return Err(Error::Unsupported("no admissible split for this model and team size".into()));
    }
    check_budget(splits.len() as u128, budget)?;
    let risks: Vec<Rational> = splits
        .par_iter()
        .map(|s| {
            let mut team = vec![laws[s.first].clone(); s.k];
            team.extend(std::iter::repeat_n(laws[s.second].clone(), n - s.k));
            risk_of(&team, prior)
        })
        .collect();
    let best = argmin(&risks);
    let s = splits[best];
    let mut members = vec![s.first; s.k];
    members.extend(std::iter::repeat_n(s.second, n - s.k));
    Ok(DesignResult {
        team: TeamPolicy::new(members.iter().map(|&i| kernels[i].clone()).collect())?,
        thresholds: members.iter().map(|&i| Some(policies[i].clone())).collect(),
        objective: Objective::Risk(risks[best].clone()),
        candidates: splits.len() as u128,
        method: "two-group",
        optimality: Optimality::Global,
        split: Some(s),
        notes: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{exact_risk, Fusion, Prob};
    use crate::models::{FiniteObservationModel, GaussianShift};
    use crate::numeric::{int, ratio};

    fn example1() -> ObservationModel {
        FiniteObservationModel::with_numbered_alphabet(
            vec![ratio(4, 5), ratio(1, 5), int(0)],
            vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)],
        )
        .unwrap()
        .into()
    }

    fn flat() -> ObservationModel {
        FiniteObservationModel::with_numbered_alphabet(vec![ratio(1, 3), ratio(2, 3)], vec![ratio(1, 3), ratio(2, 3)])
            .unwrap()
            .into()
    }

    fn maps(d: &DesignResult) -> Vec<Vec<usize>> {
        d.team.kernels().iter().map(|k| k.as_map().unwrap()).collect()
    }

    fn reevaluate(d: &DesignResult, m: &ObservationModel, p: &Prior) -> Prob {
        exact_risk(&d.team, &Fusion::Map, m, p).unwrap().risk
    }

    #[test]
    fn exhaustive_example1() {
        let m = example1();
        let p = Prior::uniform();
        let d = best_team_exhaustive(&m, 2, 2, &p, DEFAULT_BUDGET).unwrap();
        assert_eq!(d.objective, Objective::Risk(ratio(19, 90)));
        assert_eq!(maps(&d), vec![vec![0, 1, 1], vec![0, 0, 1]]);
        assert_eq!(reevaluate(&d, &m, &p), Prob::Exact(ratio(19, 90)));
        // N = 1: min of the single-sensor MAP risks of A and B.
        let one = best_team_exhaustive(&m, 1, 2, &p, DEFAULT_BUDGET).unwrap();
        let single = |t: i64| {
            let k = compile_threshold(&ThresholdPolicy::new(vec![ratio(t, 24)], vec![0, 1]).unwrap(), &m, 2).unwrap();
            exact_risk(&TeamPolicy::homogeneous(k, 1).unwrap(), &Fusion::Map, &m, &p).unwrap().risk
        };
        let (ra, rb) = (single(25), single(64));
        let expected = if ra.to_f64() <= rb.to_f64() { ra } else { rb };
        assert_eq!(Prob::Exact(one.objective.risk().unwrap().clone()), expected);
    }

    #[test]
    fn exhaustive_uninformative_returns_first_team() {
        let p = Prior::new(ratio(2, 5)).unwrap();
        let d = best_team_exhaustive(&flat(), 3, 2, &p, DEFAULT_BUDGET).unwrap();
        assert_eq!(d.objective, Objective::Risk(ratio(2, 5)));
        assert!(d.thresholds.iter().all(|t| t.as_ref().unwrap() == &ThresholdPolicy::constant(0)));
    }

    #[test]
    fn budget_is_enforced() {
        let m = example1();
        assert!(matches!(
            best_team_exhaustive(&m, 4, 2, &Prior::uniform(), 10),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            best_team_all_maps_oracle(&m, 2, 2, &Prior::uniform(), 100),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn all_maps_oracle_agrees_on_example1() {
        let m = example1();
        let p = Prior::uniform();
        let d = best_team_all_maps_oracle(&m, 2, 2, &p, DEFAULT_BUDGET).unwrap();
        assert_eq!(d.candidates, 64);
        assert_eq!(d.objective, Objective::Risk(ratio(19, 90)));
        assert_eq!(reevaluate(&d, &m, &p), Prob::Exact(ratio(19, 90)));
        let single_action = best_team_all_maps_oracle(&m, 2, 1, &Prior::new(ratio(1, 3)).unwrap(), DEFAULT_BUDGET).unwrap();
        assert_eq!(single_action.objective, Objective::Risk(ratio(1, 3)));
    }

    #[test]
    fn best_response_against_b() {
        let m = example1();
        let p = Prior::uniform();
        let (_, kernels, _) = threshold_candidates(&m, 2).unwrap();
        let team = TeamPolicy::homogeneous(kernels[2].clone(), 2).unwrap();
        let before = risk_of(&team_laws(&team, &m).unwrap(), &p);
        let br = best_response(0, &team, &m, &p).unwrap();
        let after_team = team.with_kernel(0, compile_threshold(&br, &m, 2).unwrap()).unwrap();
        let after = risk_of(&team_laws(&after_team, &m).unwrap(), &p);
        assert!(after <= before);
        assert_eq!(after, ratio(19, 90));
    }

    #[test]
    fn best_response_single_sensor_is_the_lrt() {
        // With fusion "u = 0 -> H1, u = 1 -> H2" the lines are p2 l and p1,
        // so the response splits the atoms at l = p1 / p2.
        let m = example1();
        let p = Prior::uniform();
        let b = compile_threshold(&ThresholdPolicy::new(vec![int(2)], vec![0, 1]).unwrap(), &m, 2).unwrap();
        let br = best_response(0, &TeamPolicy::homogeneous(b, 1).unwrap(), &m, &p).unwrap();
        assert_eq!(compile_threshold(&br, &m, 2).unwrap().as_map().unwrap(), vec![0, 1, 1]);
        let skewed = Prior::new(ratio(1, 10)).unwrap();
        let br = best_response(0, &TeamPolicy::homogeneous(compile_threshold(&br, &m, 2).unwrap(), 1).unwrap(), &m, &skewed)
            .unwrap();
        // Under this prior MAP ignores the sensor, so the response is constant.
        assert_eq!(br, ThresholdPolicy::constant(0));
        let k = compile_threshold(&br, &m, 2).unwrap();
        let r = exact_risk(&TeamPolicy::homogeneous(k, 1).unwrap(), &Fusion::Map, &m, &skewed).unwrap();
        assert_eq!(r.risk, Prob::Exact(ratio(1, 10)));
    }

    #[test]
    fn best_response_with_identical_lines_is_constant() {
        let m = flat();
        let team = TeamPolicy::homogeneous(SensorKernel::uniform(2, 2), 2).unwrap();
        assert_eq!(best_response(1, &team, &m, &Prior::uniform()).unwrap(), ThresholdPolicy::constant(0));
    }

    #[test]
    fn coordinate_descent_from_bb() {
        let m = example1();
        let p = Prior::uniform();
        let b = compile_threshold(&ThresholdPolicy::new(vec![ratio(8, 3)], vec![0, 1]).unwrap(), &m, 2).unwrap();
        let (d, trace) = coordinate_descent(&TeamPolicy::homogeneous(b, 2).unwrap(), &m, &p, 10).unwrap();
        assert!(trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(d.optimality, Optimality::PersonByPerson);
        let risk = d.objective.risk().unwrap().clone();
        assert!(risk >= ratio(19, 90));
        assert_eq!(Prob::Exact(risk), reevaluate(&d, &m, &p));
    }

    #[test]
    fn coordinate_descent_fixpoints() {
        let m = example1();
        let p = Prior::uniform();
        let opt = best_team_exhaustive(&m, 2, 2, &p, DEFAULT_BUDGET).unwrap();
        let (d, trace) = coordinate_descent(&opt.team, &m, &p, 5).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(d.team, opt.team);
        let (d, trace) = coordinate_descent(&TeamPolicy::homogeneous(SensorKernel::uniform(2, 2), 3).unwrap(), &flat(), &p, 5)
            .unwrap();
        assert_eq!(trace, vec![ratio(1, 2)]);
        assert!(d.notes.is_empty());
    }

    #[test]
    fn symmetric_exponent_example1_prefers_b() {
        let m = example1();
        let d = best_symmetric_exponent(&m, 2).unwrap();
        assert_eq!(d.thresholds[0].as_ref().unwrap().thresholds(), &[ratio(8, 3)]);
        let Objective::Exponent(v) = d.objective else { panic!() };
        assert_eq!(v, chernoff_exponent(&d.team.kernels()[0], &m).unwrap().value);
        assert!((v - (2.0f64 / 3.0).ln()).abs() < 1e-12);
        let u = best_symmetric_exponent(&flat(), 2).unwrap();
        assert_eq!(u.objective, Objective::Exponent(0.0));
    }

    #[test]
    fn symmetric_exponent_gaussian() {
        let g: ObservationModel = GaussianShift::new(0.0, 1.0, 1.0).unwrap().into();
        let d = best_symmetric_exponent(&g, 2).unwrap();
        let Objective::Exponent(v) = d.objective else { panic!() };
        assert_eq!(v, chernoff_exponent(&d.team.kernels()[0], &g).unwrap().value);
        assert!(matches!(d.optimality, Optimality::BestFound { converged: true }));
        let t = numeric::to_f64(&d.thresholds[0].as_ref().unwrap().thresholds()[0]);
        assert!(t.ln().abs() < 1e-3, "threshold {t}");
        // Dense grid over log-thresholds as oracle.
        let mut oracle = f64::INFINITY;
        for i in 0..=10_000 {
            let x = -3.0 + 6.0 * i as f64 / 10_000.0;
            let k = compile_threshold(&gaussian_policy(&[x]).unwrap(), &g, 2).unwrap();
            let (g1, g2) = (
                output_law(&k, &g, Hypothesis::H1).unwrap().to_f64(),
                output_law(&k, &g, Hypothesis::H2).unwrap().to_f64(),
            );
            oracle = oracle.min(crate::exponent::chernoff_exponent_of_laws(&g1, &g2).unwrap().value);
        }
        assert!((v - oracle).abs() < 1e-4);
        assert!(v <= oracle + 1e-12);
    }

    #[test]
    fn symmetric_exponent_gaussian_three_actions() {
        let g: ObservationModel = GaussianShift::new(0.0, 2.0, 1.0).unwrap().into();
        let two = best_symmetric_exponent(&g, 2).unwrap().objective.to_f64();
        let three = best_symmetric_exponent(&g, 3).unwrap();
        assert!(three.objective.to_f64() <= two + 1e-9);
        assert_eq!(three.thresholds[0].as_ref().unwrap().bins(), 3);
    }

    #[test]
    fn two_group_example1() {
        let m = example1();
        let p = Prior::uniform();
        let d = best_two_group(&m, 2, 2, &p, SplitRule::Any, DEFAULT_BUDGET).unwrap();
        assert_eq!(d.objective, Objective::Risk(ratio(19, 90)));
        assert_eq!(d.split.unwrap().k, 1);
        let sym = best_two_group(&m, 2, 2, &p, SplitRule::Fixed(0), DEFAULT_BUDGET).unwrap();
        assert_eq!(sym.objective, Objective::Risk(ratio(2, 9)));
        assert_eq!(reevaluate(&sym, &m, &p), Prob::Exact(ratio(2, 9)));
    }

    #[test]
    fn two_group_at_sixteen_sensors() {
        let m = example1();
        let p = Prior::uniform();
        let any = best_two_group(&m, 16, 2, &p, SplitRule::Any, DEFAULT_BUDGET).unwrap();
        let sym = best_two_group(&m, 16, 2, &p, SplitRule::Fixed(0), DEFAULT_BUDGET).unwrap();
        assert!(any.objective.risk().unwrap() <= sym.objective.risk().unwrap());
        assert_eq!(reevaluate(&any, &m, &p), Prob::Exact(any.objective.risk().unwrap().clone()));
    }

    #[test]
    fn multiset_enumeration() {
        assert_eq!(multisets(3, 2), vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 1], vec![1, 2], vec![2, 2]]);
        assert_eq!(multisets(1, 3), vec![vec![0, 0, 0]]);
    }
}
