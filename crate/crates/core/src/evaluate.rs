//! Bayes risk and empirical error exponents, exact and Monte Carlo.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, weighted::WeightedIndex};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fusion::{
    enumeration_size, joint_mass, map_from_masses, team_laws, FusionInfo, FusionTable, SensorLaws,
    TABLE_CAP,
};
use crate::models::{Hypothesis, Observation, ObservationModel, ObservationSampler, Prior};
use crate::numeric::{self, Rational};
use crate::policies::{odometer, SensorKernel, TeamMixture, TeamPolicy};

/// Largest number of joint action outcomes evaluated exactly.
pub const ENUMERATION_CAP: u128 = 1 << 24;

/// A probability that is either exact or an estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum Prob {
    Exact(Rational),
    Approx(f64),
}

impl Prob {
    pub fn to_f64(&self) -> f64 {
        match self {
            Prob::Exact(r) => numeric::to_f64(r),
            Prob::Approx(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Prob::Exact(r) => Some(r),
            Prob::Approx(_) => None,
        }
    }

    pub fn ln(&self) -> f64 {
        match self {
            Prob::Exact(r) => numeric::ln(r),
            Prob::Approx(x) => x.ln(),
        }
    }
}

impl std::fmt::Display for Prob {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Prob::Exact(r) => f.write_str(&numeric::fmt_rational(r)),
            Prob::Approx(x) => f.write_str(&numeric::fmt_sig15(*x)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Exact,
    MonteCarlo { samples: u64, seed: u64, workers: usize },
}

/// Bayes risk of a team with its conditional error probabilities.
///
/// In exact mode `risk = p1 * err_given_h1 + p2 * err_given_h2` holds
/// exactly. Monte Carlo reports carry conditional frequencies instead.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub sensors: usize,
    pub risk: Prob,
    pub err_given_h1: Prob,
    pub err_given_h2: Prob,
    pub exponent: f64,
    pub stderr: Option<f64>,
    pub method: Method,
}

impl RiskReport {
    fn exact(sensors: usize, prior: &Prior, err1: Rational, err2: Rational) -> Self {
        let risk = prior.p1() * &err1 + prior.p2() * &err2;
        let exponent = error_exponent_value(numeric::ln(&risk), sensors);
        RiskReport {
            sensors,
            risk: Prob::Exact(risk),
            err_given_h1: Prob::Exact(err1),
            err_given_h2: Prob::Exact(err2),
            exponent,
            stderr: None,
            method: Method::Exact,
        }
    }
}

/// Fusion rule used when evaluating a team.
#[derive(Debug, Clone, PartialEq)]
pub enum Fusion {
    /// MAP rule for the evaluation prior.
    Map,
    Table(FusionTable),
}

fn error_exponent_value(ln_risk: f64, sensors: usize) -> f64 {
    ln_risk / sensors as f64
}

/// `log(risk) / N`; `-inf` for zero risk.
pub fn error_exponent_empirical(report: &RiskReport, sensors: usize) -> f64 {
    assert!(sensors >= 1, "exponent needs at least one sensor");
    error_exponent_value(report.risk.ln(), sensors)
}

/// Conditional error masses `(P(decide H2 | H1), P(decide H1 | H2))` of the
/// MAP rule, grouping sensors that share an output law.
///
/// Sensors with identical laws are exchangeable for the MAP statistic, so
/// the sum runs over per-group action counts weighted by multinomial
/// coefficients instead of over all `|U|^N` tuples.
pub(crate) fn map_error_masses(laws: &[SensorLaws], prior: &Prior) -> (Rational, Rational) {
    let mut groups: BTreeMap<&SensorLaws, usize> = BTreeMap::new();
    for l in laws {
        *groups.entry(l).or_insert(0) += 1;
    }
    let groups: Vec<(&SensorLaws, usize)> = groups.into_iter().collect();
    let actions = laws[0].actions();

    // Per group: every count vector with its multinomial weight and the
    // per-hypothesis probability of one matching tuple.
    struct Profile {
        weight: BigInt,
        mass: [Rational; 2],
    }
    let per_group: Vec<Vec<Profile>> = groups
        .iter()
        .map(|(law, n)| {
            let powers: Vec<Vec<[Rational; 2]>> = (0..actions)
                .map(|a| {
                    let mut p = vec![[Rational::one(), Rational::one()]];
                    for k in 1..=*n {
                        let prev = &p[k - 1];
                        p.push([&prev[0] * &law.h1[a], &prev[1] * &law.h2[a]]);
                    }
                    p
                })
                .collect();
            compositions(*n, actions)
                .into_iter()
                .map(|counts| {
                    let mut weight = numeric::binomial(*n, 0);
                    let mut left = *n;
                    let mut mass = [Rational::one(), Rational::one()];
                    for (a, &c) in counts.iter().enumerate() {
                        weight *= numeric::binomial(left, c);
                        left -= c;
                        for h in 0..2 {
                            mass[h] *= &powers[a][c][h];
                        }
                    }
                    Profile { weight, mass }
                })
                .collect()
        })
        .collect();

    let mut err = [Rational::zero(), Rational::zero()];
    let mut index = vec![0usize; per_group.len()];
    loop {
        let mut weight = BigInt::one();
        let mut mass = [Rational::one(), Rational::one()];
        for (g, &i) in per_group.iter().zip(&index) {
            weight *= &g[i].weight;
            for (m, gm) in mass.iter_mut().zip(&g[i].mass) {
                if !m.is_zero() {
                    *m *= gm;
                }
            }
        }
        match map_from_masses(prior, &mass[0], &mass[1]) {
            Hypothesis::H1 => err[1] += Rational::from_integer(weight) * &mass[1],
            Hypothesis::H2 => err[0] += Rational::from_integer(weight) * &mass[0],
        }
        if !advance(&mut index, &per_group) {
            break;
        }
    }
    let [e1, e2] = err;
    (e1, e2)
}

fn advance<T>(index: &mut [usize], radices: &[Vec<T>]) -> bool {
    for (digit, r) in index.iter_mut().zip(radices).rev() {
        *digit += 1;
        if *digit < r.len() {
            return true;
        }
        *digit = 0;
    }
    false
}

/// All vectors of `parts` nonnegative integers summing to `n`.
fn compositions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Conditional error masses by enumerating every action tuple.
pub(crate) fn tuple_error_masses(
    laws: &[SensorLaws],
    decide: impl Fn(&[usize], &Rational, &Rational) -> Hypothesis,
) -> (Rational, Rational) {
    let actions = laws[0].actions();
    let mut err = [Rational::zero(), Rational::zero()];
    let mut u = vec![0usize; laws.len()];
    loop {
        let m1 = joint_mass(laws, &u, Hypothesis::H1);
        let m2 = joint_mass(laws, &u, Hypothesis::H2);
        match decide(&u, &m1, &m2) {
            Hypothesis::H1 => err[1] += m2,
            Hypothesis::H2 => err[0] += m1,
        }
        if !odometer(&mut u, actions) {
            break;
        }
    }
    let [e1, e2] = err;
    (e1, e2)
}

/// Exact Bayes risk of a team on a finite model.
pub fn exact_risk(
    team: &TeamPolicy,
    fusion: &Fusion,
    model: &ObservationModel,
    prior: &Prior,
) -> Result<RiskReport> {
    model.as_finite()?;
    enumeration_size(team.len(), team.actions(), ENUMERATION_CAP)?;
    let laws = team_laws(team, model)?;
    let (e1, e2) = match fusion {
        Fusion::Map => map_error_masses(&laws, prior),
        Fusion::Table(table) => {
            if table.sensors() != team.len() || table.actions() != team.actions() {
                return Err(Error::InvalidPolicy("fusion table does not match the team".into()));
            }
            tuple_error_masses(&laws, |u, _, _| table.decide(u))
        }
    };
    Ok(RiskReport::exact(team.len(), prior, e1, e2))
}

/// Exact MAP risk by plain tuple enumeration, without grouping sensors.
pub fn exact_risk_enumerated(team: &TeamPolicy, model: &ObservationModel, prior: &Prior) -> Result<RiskReport> {
    model.as_finite()?;
    enumeration_size(team.len(), team.actions(), ENUMERATION_CAP)?;
    let laws = team_laws(team, model)?;
    let (e1, e2) = tuple_error_masses(&laws, |_, m1, m2| map_from_masses(prior, m1, m2));
    Ok(RiskReport::exact(team.len(), prior, e1, e2))
}

/// Exact risk of a randomized team.
///
/// With known randomization each atom is fused by its own MAP rule and the
/// risks are averaged. In the Bayesian regime a single MAP rule acts on the
/// mixture-averaged joint action law.
pub fn mixture_risk(
    mix: &TeamMixture,
    info: FusionInfo,
    model: &ObservationModel,
    prior: &Prior,
) -> Result<RiskReport> {
    model.as_finite()?;
    let (n, actions) = (mix.sensors(), mix.actions());
    enumeration_size(n, actions, ENUMERATION_CAP)?;
    let (e1, e2) = match info {
        FusionInfo::KnownRandomization => {
            let mut acc = (Rational::zero(), Rational::zero());
            for (w, team) in mix.atoms() {
                let (a, b) = map_error_masses(&team_laws(team, model)?, prior);
                acc.0 += w * a;
                acc.1 += w * b;
            }
            acc
        }
        FusionInfo::Bayesian => {
            let atoms: Vec<(Rational, Vec<SensorLaws>)> = mix
                .atoms()
                .iter()
                .map(|(w, t)| Ok((w.clone(), team_laws(t, model)?)))
                .collect::<Result<_>>()?;
            let mut err = (Rational::zero(), Rational::zero());
            let mut u = vec![0usize; n];
            loop {
                let mut m1 = Rational::zero();
                let mut m2 = Rational::zero();
                for (w, laws) in &atoms {
                    m1 += w * joint_mass(laws, &u, Hypothesis::H1);
                    m2 += w * joint_mass(laws, &u, Hypothesis::H2);
                }
                match map_from_masses(prior, &m1, &m2) {
                    Hypothesis::H1 => err.1 += m2,
                    Hypothesis::H2 => err.0 += m1,
                }
                if !odometer(&mut u, actions) {
                    break;
                }
            }
            err
        }
    };
    Ok(RiskReport::exact(n, prior, e1, e2))
}

/// Monte Carlo settings. Samples are split into contiguous index ranges, one
/// per worker, and worker `w` draws from ChaCha stream `w` of `seed`, so the
/// estimate depends only on `(samples, seed, workers)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        McConfig { samples, seed, workers: 1 }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }
}

enum KernelSampler {
    Rows(Vec<Option<WeightedIndex<f64>>>, Vec<Option<usize>>),
    Threshold(crate::policies::ThresholdPolicy),
}

impl KernelSampler {
    fn new(kernel: &SensorKernel) -> Result<Self> {
        match kernel {
            SensorKernel::Matrix { rows, .. } => {
                let mut fixed = Vec::new();
                let mut dists = Vec::new();
                for row in rows {
                    let nonzero: Vec<usize> = (0..row.len()).filter(|&a| !row[a].is_zero()).collect();
                    if nonzero.len() == 1 {
                        fixed.push(Some(nonzero[0]));
                        dists.push(None);
                    } else {
                        fixed.push(None);
                        dists.push(Some(
                            WeightedIndex::new(row.iter().map(numeric::to_f64))
                                .map_err(|e| Error::InvalidPolicy(e.to_string()))?,
                        ));
                    }
                }
                Ok(KernelSampler::Rows(dists, fixed))
            }
            SensorKernel::Threshold { policy, .. } => Ok(KernelSampler::Threshold(policy.clone())),
        }
    }

    fn act<R: Rng>(&self, y: Observation, model: &ObservationModel, rng: &mut R) -> usize {
        match (self, y) {
            (KernelSampler::Rows(dists, fixed), Observation::Symbol(i)) => match fixed[i] {
                Some(a) => a,
                None => dists[i].as_ref().expect("stochastic row").sample(rng),
            },
            (KernelSampler::Threshold(p), Observation::Real(v)) => {
                let ObservationModel::Gaussian(g) = model else { unreachable!() };
                p.labels()[p.bin_of_f64(g.log_lr(v).exp())]
            }
            (KernelSampler::Threshold(p), Observation::Symbol(i)) => {
                let lr = model.as_finite().expect("finite").likelihood_ratio(i).expect("realizable");
                p.action_of(&lr)
            }
            (KernelSampler::Rows(..), Observation::Real(_)) => unreachable!("validated kernel/model pair"),
        }
    }
}

enum Decider {
    Table(FusionTable),
    LogSum { log_ratio: Vec<Vec<f64>>, threshold: f64 },
}

impl Decider {
    fn decide(&self, u: &[usize]) -> Hypothesis {
        match self {
            Decider::Table(t) => t.decide(u),
            Decider::LogSum { log_ratio, threshold } => {
                let s: f64 = u.iter().enumerate().map(|(i, &a)| log_ratio[i][a]).sum();
                // +inf and -inf together cannot be observed.
                if s >= *threshold { Hypothesis::H1 } else { Hypothesis::H2 }
            }
        }
    }
}

/// Monte Carlo estimate of the Bayes risk.
pub fn mc_risk(
    team: &TeamPolicy,
    fusion: &Fusion,
    model: &ObservationModel,
    prior: &Prior,
    config: McConfig,
) -> Result<RiskReport> {
    if config.samples == 0 {
        return Err(Error::Unsupported("Monte Carlo needs at least one sample".into()));
    }
    let n = team.len();
    let decider = match fusion {
        Fusion::Table(t) => Decider::Table(t.clone()),
        Fusion::Map => match model {
            ObservationModel::Finite(_) if enumeration_size(n, team.actions(), TABLE_CAP).is_ok() => {
                Decider::Table(FusionTable::from_map(team, model, prior)?)
            }
            _ => {
                let laws = crate::fusion::team_laws_f64(team, model)?;
                let log_ratio = laws
                    .iter()
                    .map(|l| {
                        l.h1.iter()
                            .zip(&l.h2)
                            .map(|(&a, &b)| match (a == 0.0, b == 0.0) {
                                (false, true) => f64::INFINITY,
                                (true, false) => f64::NEG_INFINITY,
                                (true, true) => 0.0,
                                _ => a.ln() - b.ln(),
                            })
                            .collect()
                    })
                    .collect();
                Decider::LogSum {
                    log_ratio,
                    threshold: numeric::ln(prior.p2()) - numeric::ln(prior.p1()),
                }
            }
        },
    };
    let sampler = ObservationSampler::new(model)?;
    let kernels = team
        .kernels()
        .iter()
        .map(KernelSampler::new)
        .collect::<Result<Vec<_>>>()?;
    let p1 = numeric::to_f64(prior.p1());
    let workers = config.workers.max(1);

    let run = |w: usize| -> [u64; 4] {
        let start = config.samples * w as u64 / workers as u64;
        let end = config.samples * (w as u64 + 1) / workers as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(w as u64);
        // [draws under H1, errors under H1, draws under H2, errors under H2]
        let mut counts = [0u64; 4];
        let mut u = vec![0usize; n];
        for _ in start..end {
            let h = if rng.random::<f64>() < p1 { Hypothesis::H1 } else { Hypothesis::H2 };
            for (slot, k) in u.iter_mut().zip(&kernels) {
                let y = sampler.sample(h, &mut rng);
                *slot = k.act(y, model, &mut rng);
            }
            let base = 2 * h.index();
            counts[base] += 1;
            if decider.decide(&u) != h {
                counts[base + 1] += 1;
            }
        }
        counts
    };

    let per_worker: Vec<[u64; 4]> = if workers == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..workers).map(|w| scope.spawn(move || run(w))).collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        })
    };
    let mut c = [0u64; 4];
    for counts in per_worker {
        for (acc, v) in c.iter_mut().zip(counts) {
            *acc += v;
        }
    }
    let total = config.samples as f64;
    let risk = (c[1] + c[3]) as f64 / total;
    let ratio = |e: u64, d: u64| if d == 0 { 0.0 } else { e as f64 / d as f64 };
    Ok(RiskReport {
        sensors: n,
        risk: Prob::Approx(risk),
        err_given_h1: Prob::Approx(ratio(c[1], c[0])),
        err_given_h2: Prob::Approx(ratio(c[3], c[2])),
        exponent: error_exponent_value(risk.ln(), n),
        stderr: Some((risk * (1.0 - risk) / total).sqrt()),
        method: Method::MonteCarlo {
            samples: config.samples,
            seed: config.seed,
            workers,
        },
    })
}

/// How a sweep instantiates a team for each sensor count.
#[derive(Debug, Clone, PartialEq)]
pub enum TeamSpec {
    /// Every sensor uses the same kernel.
    AllSame(SensorKernel),
    /// The first `floor(N/2)` sensors use the first kernel, the rest the second.
    Halves(SensorKernel, SensorKernel),
}

impl TeamSpec {
    pub fn team(&self, n: usize) -> Result<TeamPolicy> {
        match self {
            TeamSpec::AllSame(k) => TeamPolicy::homogeneous(k.clone(), n),
            TeamSpec::Halves(a, b) => {
                let mut kernels = vec![a.clone(); n / 2];
                kernels.extend(std::iter::repeat_n(b.clone(), n - n / 2));
                TeamPolicy::new(kernels)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub sensors: usize,
    pub report: RiskReport,
    pub exponent: f64,
    pub reference: f64,
    /// `exponent - reference`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Evaluates a team family over increasing sensor counts. Counts above the
/// enumeration cap fall back to Monte Carlo with `fallback`.
pub fn sweep_n(
    spec: &TeamSpec,
    model: &ObservationModel,
    prior: &Prior,
    sensor_counts: &[usize],
    reference: f64,
    fallback: McConfig,
) -> Result<SweepResult> {
    if sensor_counts.is_empty() || sensor_counts[0] == 0 {
        return Err(Error::Unsupported("sensor counts must be positive".into()));
    }
    if sensor_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Unsupported("sensor counts must be strictly increasing".into()));
    }
    let rows = sensor_counts
        .iter()
        .map(|&n| {
            let team = spec.team(n)?;
            let exact_ok = matches!(model, ObservationModel::Finite(_))
                && enumeration_size(n, team.actions(), ENUMERATION_CAP).is_ok();
            let report = if exact_ok {
                exact_risk(&team, &Fusion::Map, model, prior)?
            } else {
                mc_risk(&team, &Fusion::Map, model, prior, fallback)?
            };
            let exponent = error_exponent_empirical(&report, n);
            Ok(SweepRow {
                sensors: n,
                report,
                exponent,
                reference,
                gap: exponent - reference,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FiniteObservationModel, GaussianShift};
    use crate::numeric::{int, ratio};
    use crate::policies::{compile_threshold, ThresholdPolicy};

    fn example1() -> ObservationModel {
        FiniteObservationModel::with_numbered_alphabet(
            vec![ratio(4, 5), ratio(1, 5), int(0)],
            vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)],
        )
        .unwrap()
        .into()
    }

    fn ab(m: &ObservationModel) -> (SensorKernel, SensorKernel) {
        (
            compile_threshold(&ThresholdPolicy::new(vec![int(1)], vec![0, 1]).unwrap(), m, 2).unwrap(),
            compile_threshold(&ThresholdPolicy::new(vec![int(2)], vec![0, 1]).unwrap(), m, 2).unwrap(),
        )
    }

    #[test]
    fn example1_exact_risks() {
        let m = example1();
        let p = Prior::uniform();
        let (a, b) = ab(&m);
        let risk = |ks: Vec<SensorKernel>| {
            exact_risk(&TeamPolicy::new(ks).unwrap(), &Fusion::Map, &m, &p).unwrap().risk
        };
        assert_eq!(risk(vec![a.clone(), b.clone()]), Prob::Exact(ratio(19, 90)));
        assert_eq!(risk(vec![a.clone(), a.clone()]), Prob::Exact(ratio(53, 225)));
        assert_eq!(risk(vec![b.clone(), b.clone()]), Prob::Exact(ratio(2, 9)));
    }

    #[test]
    fn risk_decomposes_by_hypothesis() {
        let m = example1();
        let p = Prior::new(ratio(3, 5)).unwrap();
        let (a, b) = ab(&m);
        let r = exact_risk(&TeamPolicy::new(vec![a, b, SensorKernel::uniform(3, 2)]).unwrap(), &Fusion::Map, &m, &p)
            .unwrap();
        let (Prob::Exact(e1), Prob::Exact(e2), Prob::Exact(risk)) = (&r.err_given_h1, &r.err_given_h2, &r.risk)
        else {
            panic!()
        };
        assert_eq!(*risk, p.p1() * e1 + p.p2() * e2);
    }

    #[test]
    fn uninformative_model_risk_is_min_prior() {
        let m: ObservationModel = FiniteObservationModel::with_numbered_alphabet(
            vec![ratio(1, 4), ratio(3, 4)],
            vec![ratio(1, 4), ratio(3, 4)],
        )
        .unwrap()
        .into();
        let p = Prior::new(ratio(3, 10)).unwrap();
        let k = SensorKernel::deterministic(&[0, 1], 2).unwrap();
        for n in 1..4 {
            let r = exact_risk(&TeamPolicy::homogeneous(k.clone(), n).unwrap(), &Fusion::Map, &m, &p).unwrap();
            assert_eq!(r.risk, Prob::Exact(ratio(3, 10)));
        }
    }

    #[test]
    fn grouped_and_enumerated_agree() {
        let m = example1();
        let p = Prior::new(ratio(2, 5)).unwrap();
        let (a, b) = ab(&m);
        let team = TeamPolicy::new(vec![a.clone(), b.clone(), a, b.clone(), b]).unwrap();
        assert_eq!(
            exact_risk(&team, &Fusion::Map, &m, &p).unwrap(),
            exact_risk_enumerated(&team, &m, &p).unwrap()
        );
    }

    #[test]
    fn explicit_tables() {
        let m = example1();
        let p = Prior::uniform();
        let (a, b) = ab(&m);
        let team = TeamPolicy::new(vec![a, b]).unwrap();
        let always_h1 = FusionTable::from_labels(2, 2, &[1, 1, 1, 1]).unwrap();
        let r = exact_risk(&team, &Fusion::Table(always_h1), &m, &p).unwrap();
        assert_eq!(r.risk, Prob::Exact(ratio(1, 2)));
        let map = FusionTable::from_map(&team, &m, &p).unwrap();
        assert_eq!(exact_risk(&team, &Fusion::Table(map), &m, &p).unwrap().risk, Prob::Exact(ratio(19, 90)));
    }

    #[test]
    fn cap_refuses_large_enumerations() {
        let m = example1();
        let team = TeamPolicy::homogeneous(SensorKernel::uniform(3, 2), 25).unwrap();
        assert!(matches!(
            exact_risk(&team, &Fusion::Map, &m, &Prior::uniform()),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn exponents() {
        let one = RiskReport::exact(3, &Prior::uniform(), int(1), int(1));
        assert_eq!(error_exponent_empirical(&one, 3), 0.0);
        let r = RiskReport::exact(2, &Prior::uniform(), ratio(19, 90), ratio(19, 90));
        assert!((error_exponent_empirical(&r, 2) - (19.0f64 / 90.0).ln() / 2.0).abs() < 1e-15);
        assert!((error_exponent_empirical(&r, 2) + 0.777_685).abs() < 1e-6);
        let zero = RiskReport::exact(2, &Prior::uniform(), int(0), int(0));
        assert_eq!(error_exponent_empirical(&zero, 2), f64::NEG_INFINITY);
    }

    #[test]
    fn monte_carlo_is_reproducible_and_consistent() {
        let m = example1();
        let p = Prior::uniform();
        let (a, b) = ab(&m);
        let team = TeamPolicy::new(vec![a, b]).unwrap();
        let cfg = McConfig::new(200_000, 11).with_workers(3);
        let r1 = mc_risk(&team, &Fusion::Map, &m, &p, cfg).unwrap();
        let r2 = mc_risk(&team, &Fusion::Map, &m, &p, cfg).unwrap();
        assert_eq!(r1, r2);
        let se = r1.stderr.unwrap();
        assert!((r1.risk.to_f64() - 19.0 / 90.0).abs() < 4.0 * se);
    }

    #[test]
    fn monte_carlo_uninformative() {
        let m: ObservationModel = FiniteObservationModel::with_numbered_alphabet(
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 2), ratio(1, 2)],
        )
        .unwrap()
        .into();
        let team = TeamPolicy::homogeneous(SensorKernel::uniform(2, 2), 3).unwrap();
        let r = mc_risk(&team, &Fusion::Map, &m, &Prior::uniform(), McConfig::new(100_000, 5)).unwrap();
        assert!((r.risk.to_f64() - 0.5).abs() < 4.0 * r.stderr.unwrap());
    }

    #[test]
    fn monte_carlo_gaussian_single_sensor() {
        // Threshold l <= 1 iff y <= 1/2; MAP decides H1 on u = 1.
        // Error = 1/2 (P(y > 1/2 | H1) + P(y <= 1/2 | H2)) = Phi(-1/2).
        let g: ObservationModel = GaussianShift::new(0.0, 1.0, 1.0).unwrap().into();
        let k = compile_threshold(&ThresholdPolicy::new(vec![int(1)], vec![0, 1]).unwrap(), &g, 2).unwrap();
        let team = TeamPolicy::homogeneous(k, 1).unwrap();
        let r = mc_risk(&team, &Fusion::Map, &g, &Prior::uniform(), McConfig::new(400_000, 3).with_workers(2))
            .unwrap();
        let oracle = 0.5 * statrs::function::erf::erfc(0.5 / std::f64::consts::SQRT_2);
        assert!((r.risk.to_f64() - oracle).abs() < 4.0 * r.stderr.unwrap(), "{} vs {oracle}", r.risk);
    }

    #[test]
    fn sweep_all_b_tracks_closed_form() {
        let m = example1();
        let (_, b) = ab(&m);
        let reference = (2.0f64 / 3.0).ln();
        let sweep = sweep_n(&TeamSpec::AllSame(b), &m, &Prior::uniform(), &[2, 4, 8, 16], reference, McConfig::new(1, 0))
            .unwrap();
        for row in &sweep.rows {
            // risk = (1/2)(2/3)^N: H1 never errs, H2 errs only on all-ones.
            let n = row.sensors as i32;
            let expected = ratio(1, 2) * Rational::new(2.into(), 3.into()).pow(n);
            assert_eq!(row.report.risk, Prob::Exact(expected));
            assert!((row.gap - 0.5f64.ln() / row.sensors as f64).abs() < 1e-12);
        }
        assert!(sweep_n(&TeamSpec::AllSame(SensorKernel::uniform(3, 2)), &m, &Prior::uniform(), &[2, 2], 0.0, McConfig::new(1, 0)).is_err());
    }

    #[test]
    fn sweep_uninformative_exponent_is_log_half_over_n() {
        let m = example1();
        let flat = SensorKernel::uniform(3, 2);
        let s = sweep_n(&TeamSpec::AllSame(flat), &m, &Prior::uniform(), &[1, 2, 4], 0.0, McConfig::new(1, 0)).unwrap();
        for row in s.rows {
            assert_eq!(row.report.risk, Prob::Exact(ratio(1, 2)));
        }
    }

    #[test]
    fn compositions_cover_the_simplex() {
        assert_eq!(compositions(3, 2).len(), 4);
        assert_eq!(compositions(4, 3).len(), 15);
        assert!(compositions(4, 3).iter().all(|c| c.iter().sum::<usize>() == 4));
    }
}
