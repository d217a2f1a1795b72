//! Sensor encoding policies.
//!
//! A [`ThresholdPolicy`] cuts the likelihood-ratio axis into consecutive
//! right-closed bins `[0, t_1], (t_1, t_2], ..., (t_{m-1}, inf]` and emits one
//! action label per bin. On a finite model it compiles to a deterministic
//! [`SensorKernel::Matrix`]; on the Gaussian model it stays in threshold form
//! and its output law comes from normal CDF differences.
//!
//! Teams are ordered tuples of kernels. A [`TeamMixture`] is a finite-support
//! distribution over teams, which is how jointly randomized (and in
//! particular exchangeable) encodings are represented.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{FiniteObservationModel, GaussianShift, Hypothesis, LikelihoodRatio, ObservationModel};
use crate::numeric::{self, Rational};

/// Monotone partition of the likelihood-ratio axis with one label per bin.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThresholdPolicy {
    thresholds: Vec<Rational>,
    labels: Vec<usize>,
}

impl ThresholdPolicy {
    /// `labels` are zero-based action indices; there must be one more label
    /// than thresholds.
    pub fn new(thresholds: Vec<Rational>, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != thresholds.len() + 1 {
            return Err(Error::InvalidPolicy(format!(
                "{} thresholds need {} labels, got {}",
                thresholds.len(),
                thresholds.len() + 1,
                labels.len()
            )));
        }
        if thresholds.iter().any(|t| !t.is_positive()) {
            return Err(Error::InvalidPolicy("thresholds must be positive".into()));
        }
        if thresholds.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPolicy(
                "thresholds must be strictly increasing".into(),
            ));
        }
        let mut sorted = labels.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPolicy("bin labels must be distinct".into()));
        }
        Ok(ThresholdPolicy { thresholds, labels })
    }

    /// The single-bin policy that always emits `label`.
    pub fn constant(label: usize) -> Self {
        ThresholdPolicy {
            thresholds: Vec::new(),
            labels: vec![label],
        }
    }

    pub fn thresholds(&self) -> &[Rational] {
        &self.thresholds
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn bins(&self) -> usize {
        self.labels.len()
    }

    /// Index of the bin containing `lr`.
    pub fn bin_of(&self, lr: &LikelihoodRatio) -> usize {
        match lr {
            LikelihoodRatio::Infinite => self.bins() - 1,
            LikelihoodRatio::Finite(l) => self.thresholds.partition_point(|t| t < l),
        }
    }

    pub fn bin_of_f64(&self, l: f64) -> usize {
        self.thresholds.partition_point(|t| numeric::to_f64(t) < l)
    }

    pub fn action_of(&self, lr: &LikelihoodRatio) -> usize {
        self.labels[self.bin_of(lr)]
    }
}

/// Row-stochastic channel from observations to actions, or a threshold
/// policy kept in threshold form for continuous models.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SensorKernel {
    Matrix { rows: Vec<Vec<Rational>>, actions: usize },
    Threshold { policy: ThresholdPolicy, actions: usize },
}

impl SensorKernel {
    /// Builds and validates a kernel matrix (one row per observation symbol).
    pub fn matrix(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let actions = rows.first().map(Vec::len).unwrap_or(0);
        if actions == 0 {
            return Err(Error::InvalidPolicy("kernel has no rows or no actions".into()));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != actions {
                return Err(Error::InvalidPolicy(format!(
                    "kernel row {} has {} entries, expected {actions}",
                    i + 1,
                    row.len()
                )));
            }
            if row.iter().any(|p| p.is_negative()) {
                return Err(Error::InvalidPolicy(format!("kernel row {} has a negative entry", i + 1)));
            }
            if row.iter().sum::<Rational>() != Rational::one() {
                return Err(Error::InvalidPolicy(format!("kernel row {} does not sum to 1", i + 1)));
            }
        }
        Ok(SensorKernel::Matrix { rows, actions })
    }

    /// Deterministic kernel sending symbol `y` to action `map[y]`.
    pub fn deterministic(map: &[usize], actions: usize) -> Result<Self> {
        if let Some(&bad) = map.iter().find(|&&u| u >= actions) {
            return Err(Error::InvalidPolicy(format!(
                "action {} outside an alphabet of {actions}",
                bad + 1
            )));
        }
        let rows = map
            .iter()
            .map(|&u| {
                (0..actions)
                    .map(|a| if a == u { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Ok(SensorKernel::Matrix { rows, actions })
    }

    /// Kernel that ignores the observation and picks an action uniformly.
    pub fn uniform(observations: usize, actions: usize) -> Self {
        let row = vec![numeric::ratio(1, actions as i64); actions];
        SensorKernel::Matrix {
            rows: vec![row; observations],
            actions,
        }
    }

    pub fn actions(&self) -> usize {
        match self {
            SensorKernel::Matrix { actions, .. } | SensorKernel::Threshold { actions, .. } => *actions,
        }
    }

    pub fn is_deterministic(&self) -> bool {
        match self {
            SensorKernel::Matrix { rows, .. } => rows
                .iter()
                .all(|r| r.iter().filter(|p| !p.is_zero()).count() == 1),
            SensorKernel::Threshold { .. } => true,
        }
    }

    /// For deterministic matrix kernels, the action chosen for each symbol.
    pub fn as_map(&self) -> Option<Vec<usize>> {
        match self {
            SensorKernel::Matrix { rows, .. } if self.is_deterministic() => Some(
                rows.iter()
                    .map(|r| r.iter().position(|p| p.is_one()).expect("deterministic row"))
                    .collect(),
            ),
            _ => None,
        }
    }
}

/// Compiles a threshold policy against a model.
///
/// Finite models yield a deterministic matrix mapping each symbol to the
/// label of the bin holding its likelihood ratio. Gaussian models keep the
/// threshold form.
pub fn compile_threshold(
    policy: &ThresholdPolicy,
    model: &ObservationModel,
    actions: usize,
) -> Result<SensorKernel> {
    if let Some(&bad) = policy.labels().iter().find(|&&l| l >= actions) {
        return Err(Error::InvalidPolicy(format!(
            "label {} outside an action alphabet of {actions}",
            bad + 1
        )));
    }
    match model {
        ObservationModel::Finite(m) => {
            let map: Vec<usize> = (0..m.len())
                .map(|y| match m.likelihood_ratio(y) {
                    Ok(lr) => policy.action_of(&lr),
                    // Unreachable symbols never influence any probability.
                    Err(_) => policy.labels()[0],
                })
                .collect();
            SensorKernel::deterministic(&map, actions)
        }
        ObservationModel::Gaussian(_) => Ok(SensorKernel::Threshold {
            policy: policy.clone(),
            actions,
        }),
    }
}

/// An output law `g(h, .)` over the action alphabet.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionLaw {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl ActionLaw {
    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            ActionLaw::Exact(v) => v.iter().map(numeric::to_f64).collect(),
            ActionLaw::Float(v) => v.clone(),
        }
    }

    pub fn exact(self) -> Result<Vec<Rational>> {
        match self {
            ActionLaw::Exact(v) => Ok(v),
            ActionLaw::Float(_) => Err(Error::Unsupported("output law is not exact".into())),
        }
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / std::f64::consts::SQRT_2)
}

fn gaussian_bin_masses(policy: &ThresholdPolicy, g: &GaussianShift, h: Hypothesis) -> Vec<f64> {
    let (mu, sd) = g.log_lr_moments(h);
    let bins = policy.bins();
    if sd == 0.0 {
        // log L is identically zero.
        let mut out = vec![0.0; bins];
        out[policy.bin_of_f64(1.0)] = 1.0;
        return out;
    }
    // P(L <= t) = P(log L <= ln t); log L ~ N(mu, sd^2) under h.
    let mut cdf: Vec<f64> = policy
        .thresholds()
        .iter()
        .map(|t| normal_cdf((numeric::ln(t) - mu) / sd))
        .collect();
    cdf.insert(0, 0.0);
    cdf.push(1.0);
    cdf.windows(2).map(|w| (w[1] - w[0]).max(0.0)).collect()
}

/// `g(h, u) = P(U = u | H = h)` for one sensor.
pub fn output_law(kernel: &SensorKernel, model: &ObservationModel, h: Hypothesis) -> Result<ActionLaw> {
    match (kernel, model) {
        (SensorKernel::Matrix { rows, actions }, ObservationModel::Finite(m)) => {
            if rows.len() != m.len() {
                return Err(Error::InvalidPolicy(format!(
                    "kernel has {} rows for an alphabet of {}",
                    rows.len(),
                    m.len()
                )));
            }
            let mut law = vec![Rational::zero(); *actions];
            for (row, p) in rows.iter().zip(m.pmf(h)) {
                if p.is_zero() {
                    continue;
                }
                for (acc, k) in law.iter_mut().zip(row) {
                    if !k.is_zero() {
                        *acc += k * p;
                    }
                }
            }
            Ok(ActionLaw::Exact(law))
        }
        (SensorKernel::Threshold { policy, actions }, ObservationModel::Finite(_)) => {
            output_law(&compile_threshold(policy, model, *actions)?, model, h)
        }
        (SensorKernel::Threshold { policy, actions }, ObservationModel::Gaussian(g)) => {
            let mut law = vec![0.0; *actions];
            for (bin, mass) in gaussian_bin_masses(policy, g, h).into_iter().enumerate() {
                law[policy.labels()[bin]] += mass;
            }
            Ok(ActionLaw::Float(law))
        }
        (SensorKernel::Matrix { .. }, ObservationModel::Gaussian(_)) => Err(Error::Unsupported(
            "matrix kernels need a finite observation model".into(),
        )),
    }
}

/// An ordered tuple of sensor kernels sharing one action alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TeamPolicy {
    kernels: Vec<SensorKernel>,
}

impl TeamPolicy {
    pub fn new(kernels: Vec<SensorKernel>) -> Result<Self> {
        let Some(first) = kernels.first() else {
            return Err(Error::InvalidPolicy("a team needs at least one sensor".into()));
        };
        let actions = first.actions();
        if kernels.iter().any(|k| k.actions() != actions) {
            return Err(Error::InvalidPolicy(
                "all sensors must share the action alphabet".into(),
            ));
        }
        Ok(TeamPolicy { kernels })
    }

    /// `n` copies of one kernel.
    pub fn homogeneous(kernel: SensorKernel, n: usize) -> Result<Self> {
        TeamPolicy::new(vec![kernel; n])
    }

    pub fn kernels(&self) -> &[SensorKernel] {
        &self.kernels
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn actions(&self) -> usize {
        self.kernels[0].actions()
    }

    pub fn with_kernel(&self, i: usize, kernel: SensorKernel) -> Result<Self> {
        let mut kernels = self.kernels.clone();
        kernels[i] = kernel;
        TeamPolicy::new(kernels)
    }
}

fn check_permutation(sigma: &[usize], n: usize) -> Result<()> {
    if sigma.len() != n {
        return Err(Error::InvalidPermutation(format!(
            "length {} for {n} sensors",
            sigma.len()
        )));
    }
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || std::mem::replace(&mut seen[s], true) {
            return Err(Error::InvalidPermutation(format!("{sigma:?} is not a bijection")));
        }
    }
    Ok(())
}

/// Sensor `i` of the result runs the kernel of sensor `sigma[i]` (zero-based).
pub fn permute_team(team: &TeamPolicy, sigma: &[usize]) -> Result<TeamPolicy> {
    check_permutation(sigma, team.len())?;
    Ok(TeamPolicy {
        kernels: sigma.iter().map(|&s| team.kernels[s].clone()).collect(),
    })
}

/// Finite-support distribution over teams of a common size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TeamMixture {
    atoms: Vec<(Rational, TeamPolicy)>,
}

/// Maximum sensor count for the naive `S_N` average in [`symmetrize_naive`].
pub const MAX_NAIVE_SYMMETRIZE: usize = 8;

impl TeamMixture {
    pub fn new(atoms: Vec<(Rational, TeamPolicy)>) -> Result<Self> {
        let Some((_, first)) = atoms.first() else {
            return Err(Error::InvalidMixture("empty support".into()));
        };
        let (n, actions) = (first.len(), first.actions());
        if atoms.iter().any(|(w, _)| !w.is_positive()) {
            return Err(Error::InvalidMixture("weights must be positive".into()));
        }
        let total: Rational = atoms.iter().map(|(w, _)| w).sum();
        if total != Rational::one() {
            return Err(Error::InvalidMixture(format!(
                "weights sum to {}",
                numeric::fmt_rational(&total)
            )));
        }
        if atoms.iter().any(|(_, t)| t.len() != n || t.actions() != actions) {
            return Err(Error::InvalidMixture(
                "all teams must have the same size and action alphabet".into(),
            ));
        }
        Ok(TeamMixture { atoms })
    }

    pub fn point_mass(team: TeamPolicy) -> Self {
        TeamMixture {
            atoms: vec![(Rational::one(), team)],
        }
    }

    /// Every sensor independently draws its kernel from `per_sensor`.
    pub fn symmetric_independent(per_sensor: &[(Rational, SensorKernel)], n: usize) -> Result<Self> {
        if per_sensor.is_empty() || n == 0 {
            return Err(Error::InvalidMixture("empty per-sensor law".into()));
        }
        let mut atoms = Vec::new();
        let mut index = vec![0usize; n];
        loop {
            let weight: Rational = index.iter().map(|&i| &per_sensor[i].0).product();
            let kernels = index.iter().map(|&i| per_sensor[i].1.clone()).collect();
            atoms.push((weight, TeamPolicy::new(kernels)?));
            if !odometer(&mut index, per_sensor.len()) {
                break;
            }
        }
        TeamMixture::new(atoms).map(|m| m.merged())
    }

    pub fn atoms(&self) -> &[(Rational, TeamPolicy)] {
        &self.atoms
    }

    pub fn sensors(&self) -> usize {
        self.atoms[0].1.len()
    }

    pub fn actions(&self) -> usize {
        self.atoms[0].1.actions()
    }

    /// Atom-weight map with duplicate teams merged.
    pub fn distribution(&self) -> BTreeMap<TeamPolicy, Rational> {
        let mut out: BTreeMap<TeamPolicy, Rational> = BTreeMap::new();
        for (w, t) in &self.atoms {
            *out.entry(t.clone()).or_insert_with(Rational::zero) += w;
        }
        out
    }

    /// Same law with duplicates merged and atoms in canonical order.
    pub fn merged(&self) -> Self {
        TeamMixture {
            atoms: self.distribution().into_iter().map(|(t, w)| (w, t)).collect(),
        }
    }

    pub fn same_law(&self, other: &TeamMixture) -> bool {
        self.distribution() == other.distribution()
    }

    /// True when the law is invariant under every permutation of sensors.
    ///
    /// Invariance under a transposition and an `N`-cycle implies invariance
    /// under all of `S_N`, so the check is exact for any `N`.
    pub fn is_exchangeable(&self) -> bool {
        let n = self.sensors();
        if n < 2 {
            return true;
        }
        let mut swap: Vec<usize> = (0..n).collect();
        swap.swap(0, 1);
        let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let base = self.distribution();
        [swap, cycle].iter().all(|sigma| {
            permute_mixture(self, sigma).expect("valid permutation").distribution() == base
        })
    }

    /// True when sensors draw kernels i.i.d. from a common law.
    pub fn is_symmetric_independent(&self) -> bool {
        let law = self.distribution();
        let n = self.sensors();
        let mut marginal: BTreeMap<&SensorKernel, Rational> = BTreeMap::new();
        for (t, w) in &law {
            *marginal.entry(&t.kernels[0]).or_insert_with(Rational::zero) += w;
        }
        let full_support = (marginal.len() as u128).checked_pow(n as u32);
        if full_support != Some(law.len() as u128) {
            return false;
        }
        law.iter().all(|(t, w)| {
            let product: Option<Rational> = t
                .kernels
                .iter()
                .map(|k| marginal.get(k).cloned())
                .product();
            product.as_ref() == Some(w)
        })
    }
}

/// Relabels sensors of every atom.
pub fn permute_mixture(mix: &TeamMixture, sigma: &[usize]) -> Result<TeamMixture> {
    let atoms = mix
        .atoms
        .iter()
        .map(|(w, t)| Ok((w.clone(), permute_team(t, sigma)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TeamMixture { atoms })
}

/// Average of the mixture over all sensor permutations, duplicates merged.
///
/// Each atom spreads its weight evenly over the distinct rearrangements of
/// its kernel multiset, which equals the `S_N` average without enumerating
/// `N!` permutations.
pub fn symmetrize(mix: &TeamMixture) -> TeamMixture {
    let mut out: BTreeMap<TeamPolicy, Rational> = BTreeMap::new();
    for (w, team) in &mix.atoms {
        let arrangements = distinct_arrangements(&team.kernels);
        let share = w / Rational::from_integer(arrangements.len().into());
        for kernels in arrangements {
            *out.entry(TeamPolicy { kernels }).or_insert_with(Rational::zero) += &share;
        }
    }
    TeamMixture {
        atoms: out.into_iter().map(|(t, w)| (w, t)).collect(),
    }
}

/// `(1/N!) sum_sigma permute_mixture(mix, sigma)` by direct enumeration of `S_N`.
pub fn symmetrize_naive(mix: &TeamMixture) -> Result<TeamMixture> {
    let n = mix.sensors();
    if n > MAX_NAIVE_SYMMETRIZE {
        return Err(Error::Unsupported(format!(
            "naive symmetrization enumerates {n}! permutations"
        )));
    }
    let perms = all_permutations(n);
    let share = Rational::one() / Rational::from_integer(perms.len().into());
    let mut atoms = Vec::new();
    for sigma in &perms {
        for (w, t) in &permute_mixture(mix, sigma)?.atoms {
            atoms.push((w * &share, t.clone()));
        }
    }
    Ok(TeamMixture { atoms }.merged())
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut current: Vec<usize> = (0..n).collect();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    out
}

fn next_permutation<T: Ord>(v: &mut [T]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn distinct_arrangements<T: Ord + Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut current = items.to_vec();
    current.sort();
    let mut out = vec![current.clone()];
    while next_permutation(&mut current) {
        out.push(current.clone());
    }
    out
}

/// Advances a mixed-radix counter with uniform radix; false on wrap-around.
pub(crate) fn odometer(index: &mut [usize], radix: usize) -> bool {
    for digit in index.iter_mut().rev() {
        *digit += 1;
        if *digit < radix {
            return true;
        }
        *digit = 0;
    }
    false
}

/// Threshold separating sorted atoms `after` and `after + 1`.
pub(crate) fn cut_between(atoms: &[LikelihoodRatio], after: usize) -> Rational {
    match (&atoms[after], &atoms[after + 1]) {
        (LikelihoodRatio::Finite(a), LikelihoodRatio::Finite(b)) => (a + b) / numeric::int(2),
        (LikelihoodRatio::Finite(a), LikelihoodRatio::Infinite) => a + Rational::one(),
        _ => unreachable!("+inf is always the last atom"),
    }
}

/// Canonical threshold policies of a finite model.
///
/// Every partition of the sorted likelihood-ratio atoms into at most
/// `actions` nonempty consecutive bins, labelled `0, 1, ...` in increasing
/// order. Thresholds sit between neighbouring atoms (midpoint, or one past
/// the last finite atom when the next atom is `+inf`). Order: fewer bins
/// first, then cut positions lexicographically; the constant policy leads.
pub fn enumerate_threshold_policies(
    model: &FiniteObservationModel,
    actions: usize,
) -> Vec<ThresholdPolicy> {
    let atoms = model.lr_atoms();
    let k = atoms.len();
    let cut_value = |after: usize| cut_between(&atoms, after);
    let mut out = Vec::new();
    for bins in 1..=actions.min(k).max(1) {
        for cuts in combinations(k.saturating_sub(1), bins - 1) {
            let thresholds = cuts.iter().map(|&c| cut_value(c)).collect();
            out.push(ThresholdPolicy {
                thresholds,
                labels: (0..bins).collect(),
            });
        }
    }
    out
}

/// Number of threshold policies when label permutations are counted as
/// distinct: `sum_m C(k-1, m-1) * actions!/(actions-m)!`.
pub fn labeled_policy_count(atoms: usize, actions: usize) -> u128 {
    (1..=actions.min(atoms).max(1))
        .map(|m| {
            let cuts: u128 = numeric::binomial(atoms.saturating_sub(1), m - 1)
                .try_into()
                .unwrap_or(u128::MAX);
            let labelings: u128 = (0..m).map(|i| (actions - i) as u128).product();
            cuts.saturating_mul(labelings)
        })
        .sum()
}

pub(crate) fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut c: Vec<usize> = (0..r).collect();
    loop {
        out.push(c.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] != i + n - r {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        c[i] += 1;
        for j in i + 1..r {
            c[j] = c[j - 1] + 1;
        }
    }
}

/// Serializable summary of a threshold policy (labels one-based).
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdSummary {
    pub thresholds: Vec<String>,
    pub labels: Vec<usize>,
}

impl From<&ThresholdPolicy> for ThresholdSummary {
    fn from(p: &ThresholdPolicy) -> Self {
        ThresholdSummary {
            thresholds: p.thresholds.iter().map(numeric::fmt_rational).collect(),
            labels: p.labels.iter().map(|l| l + 1).collect(),
        }
    }
}
