//! Chernoff error exponents for a representative sensor and the finite-N
//! lower bound.
//!
//! For output laws `g1 = g(H1, .)` and `g2 = g(H2, .)` the objective is
//! `F(s) = log sum_u g2(u)^(1-s) g1(u)^s` on `[0, 1]`. The exponent is its
//! infimum. Read literally with `0^0 = 1`, `F` can jump at the endpoints
//! when the supports differ; the minimization uses the continuous extension
//! (the sum over the common support), whose endpoint values are the
//! one-sided limits of the interior.

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{Hypothesis, ObservationModel, Prior};
use crate::numeric::{self, Rational};
use crate::policies::{output_law, SensorKernel, TeamPolicy};

/// Search tolerance on `s`.
pub const S_TOLERANCE: f64 = 1e-9;

/// Finite-difference step for second derivatives.
pub const FD_STEP: f64 = 1e-4;

const GRID_POINTS: usize = 1001;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChernoffResult {
    pub s_star: f64,
    pub value: f64,
    /// `(s, F(s))` samples, when requested.
    pub trace: Option<Vec<(f64, f64)>>,
}

fn pow0(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if x == 0.0 {
        0.0
    } else {
        x.powf(e)
    }
}

fn check_laws(g1: &[f64], g2: &[f64]) -> Result<()> {
    if g1.len() != g2.len() || g1.is_empty() {
        return Err(Error::InvalidPolicy("output laws must have equal, nonzero length".into()));
    }
    if g1.iter().chain(g2).any(|&g| !(0.0..=1.0 + 1e-12).contains(&g)) {
        return Err(Error::InvalidPolicy("output law entries must lie in [0, 1]".into()));
    }
    if g1.iter().zip(g2).all(|(&a, &b)| a == 0.0 && b == 0.0) {
        return Err(Error::DegenerateObjective("both laws vanish everywhere".into()));
    }
    Ok(())
}

fn check_s(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("s = {s} lies outside [0, 1]")))
    }
}

/// `log sum_u g2(u)^(1-s) g1(u)^s` with `0^0 = 1` and `0^e = 0` for `e > 0`.
pub fn chernoff_objective(g1: &[f64], g2: &[f64], s: f64) -> Result<f64> {
    check_laws(g1, g2)?;
    check_s(s)?;
    Ok(g1.iter().zip(g2).map(|(&a, &b)| pow0(b, 1.0 - s) * pow0(a, s)).sum::<f64>().ln())
}

/// The objective restricted to the common support, continuous on `[0, 1]`.
/// Equal to [`chernoff_objective`] for `0 < s < 1`.
pub fn continuous_objective(g1: &[f64], g2: &[f64], s: f64) -> f64 {
    g1.iter()
        .zip(g2)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| ((1.0 - s) * b.ln() + s * a.ln()).exp())
        .sum::<f64>()
        .ln()
}

/// Golden-section search for the minimum of a unimodal function on `[a, b]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = (a + b) / 2.0;
    (x, f(x))
}

/// Minimizes `f` on `[0, 1]`, preferring an endpoint when it is no worse
/// than the interior optimum.
fn minimize_unit(f: impl Fn(f64) -> f64) -> (f64, f64) {
    let (x, fx) = golden_section_min(&f, 0.0, 1.0, S_TOLERANCE);
    let (f0, f1) = (f(0.0), f(1.0));
    if f0 <= fx && f0 <= f1 {
        (0.0, f0)
    } else if f1 <= fx {
        (1.0, f1)
    } else {
        (x, fx)
    }
}

/// Chernoff exponent of a pair of output laws.
pub fn chernoff_exponent_of_laws(g1: &[f64], g2: &[f64]) -> Result<ChernoffResult> {
    check_laws(g1, g2)?;
    if !g1.iter().zip(g2).any(|(&a, &b)| a > 0.0 && b > 0.0) {
        return Err(Error::DegenerateObjective(
            "the laws have disjoint supports, so errors vanish faster than any exponential".into(),
        ));
    }
    let (s_star, value) = minimize_unit(|s| continuous_objective(g1, g2, s));
    Ok(ChernoffResult { s_star, value, trace: None })
}

fn laws_f64(kernel: &SensorKernel, model: &ObservationModel) -> Result<(Vec<f64>, Vec<f64>)> {
    Ok((
        output_law(kernel, model, Hypothesis::H1)?.to_f64(),
        output_law(kernel, model, Hypothesis::H2)?.to_f64(),
    ))
}

/// Chernoff exponent of one sensor kernel.
pub fn chernoff_exponent(kernel: &SensorKernel, model: &ObservationModel) -> Result<ChernoffResult> {
    let (g1, g2) = laws_f64(kernel, model)?;
    chernoff_exponent_of_laws(&g1, &g2)
}

/// Samples the continuous objective at `points` evenly spaced values of `s`.
pub fn objective_trace(g1: &[f64], g2: &[f64], points: usize) -> Vec<(f64, f64)> {
    let last = points.max(2) - 1;
    (0..=last)
        .map(|i| {
            let s = i as f64 / last as f64;
            (s, continuous_objective(g1, g2, s))
        })
        .collect()
}

impl ChernoffResult {
    pub fn with_trace(mut self, g1: &[f64], g2: &[f64], points: usize) -> Self {
        self.trace = Some(objective_trace(g1, g2, points));
        self
    }
}

/// Exponent of a finite mixture over representative-sensor kernels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureExponent {
    pub result: ChernoffResult,
    /// Index of the component with the smallest individual exponent.
    pub best_component: usize,
    pub best_component_value: f64,
    /// The best single component does at least as well as the mixture.
    pub point_mass_suffices: bool,
}

/// Minimizes the weighted average of the components' objectives over `s`.
/// Since the objective is linear in the mixture, a point mass on the best
/// component is always at least as good.
pub fn mixture_exponent(
    components: &[(Rational, SensorKernel)],
    model: &ObservationModel,
) -> Result<MixtureExponent> {
    if components.is_empty() {
        return Err(Error::InvalidMixture("a mixture needs at least one component".into()));
    }
    let total: Rational = components.iter().map(|(w, _)| w.clone()).sum();
    if components.iter().any(|(w, _)| w < &Rational::zero()) || total != numeric::int(1) {
        return Err(Error::InvalidMixture("weights must be nonnegative and sum to 1".into()));
    }
    let laws: Vec<(f64, Vec<f64>, Vec<f64>)> = components
        .iter()
        .filter(|(w, _)| !w.is_zero())
        .map(|(w, k)| {
            let (g1, g2) = laws_f64(k, model)?;
            Ok((numeric::to_f64(w), g1, g2))
        })
        .collect::<Result<_>>()?;
    let mut best = (0, f64::INFINITY);
    for (i, (w, k)) in components.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let v = chernoff_exponent(k, model)?.value;
        if v < best.1 {
            best = (i, v);
        }
    }
    let (s_star, value) = minimize_unit(|s| {
        laws.iter().map(|(w, g1, g2)| w * continuous_objective(g1, g2, s)).sum()
    });
    Ok(MixtureExponent {
        result: ChernoffResult { s_star, value, trace: None },
        best_component: best.0,
        best_component_value: best.1,
        point_mass_suffices: best.1 <= value + 1e-12,
    })
}

/// `sum_j P(H_j) E[exp(s log(g1(U)/g2(U))) | H_j]`, summed exactly over the
/// action alphabet. Terms with an infinite log-ratio contribute `+inf` for
/// `s > 0`; `0 * inf` is taken as `0` at `s = 0`.
pub fn characteristic_diagnostic(
    kernel: &SensorKernel,
    model: &ObservationModel,
    prior: &Prior,
    s: f64,
) -> Result<f64> {
    check_s(s)?;
    let (g1, g2) = laws_f64(kernel, model)?;
    let weights = [numeric::to_f64(prior.p1()), numeric::to_f64(prior.p2())];
    let mut total = 0.0;
    for (j, g) in [&g1, &g2].into_iter().enumerate() {
        for u in 0..g.len() {
            if g[u] == 0.0 {
                continue;
            }
            let log_ratio = match (g1[u] == 0.0, g2[u] == 0.0) {
                (false, true) => f64::INFINITY,
                (true, false) => f64::NEG_INFINITY,
                _ => g1[u].ln() - g2[u].ln(),
            };
            let e = if s == 0.0 { 1.0 } else { (s * log_ratio).exp() };
            total += weights[j] * g[u] * e;
        }
    }
    Ok(total)
}

/// Central second difference of `f` at `s`.
pub fn second_difference(f: impl Fn(f64) -> f64, s: f64, h: f64) -> f64 {
    (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub lower_bound: f64,
    pub kappa: f64,
    pub s_at_bound: f64,
    /// `(1/N) sum_i F_i(s)` at `s_at_bound`.
    pub main_term: f64,
    /// Some sensor's output law puts mass where the other hypothesis puts
    /// none, so the second-moment condition behind the bound fails.
    pub void: bool,
}

/// Finite-N lower bound on `log(risk)/N` for a deterministic team:
/// `min_s (1/N) sum_i F_i(s) - (1/N) sqrt(sum_i F_i''(s))` over
/// `s` in `[h, 1-h]`, with `F_i''` by central differences of step `h`.
pub fn exponent_lower_bound(team: &TeamPolicy, model: &ObservationModel) -> Result<BoundReport> {
    if !team.kernels().iter().all(SensorKernel::is_deterministic) {
        return Err(Error::Unsupported("the lower bound needs a deterministic team".into()));
    }
    let n = team.len() as f64;
    let mut laws = Vec::with_capacity(team.len());
    let mut void = false;
    for k in team.kernels() {
        let (g1, g2) = laws_f64(k, model)?;
        if !g1.iter().zip(&g2).any(|(&a, &b)| a > 0.0 && b > 0.0) {
            return Err(Error::DegenerateObjective("a sensor separates the hypotheses perfectly".into()));
        }
        void |= g1.iter().zip(&g2).any(|(&a, &b)| (a == 0.0) != (b == 0.0));
        laws.push((g1, g2));
    }
    let terms = |s: f64| -> (f64, f64) {
        let mut main = 0.0;
        let mut curvature = 0.0;
        for (g1, g2) in &laws {
            let f = |t: f64| continuous_objective(g1, g2, t);
            main += f(s);
            curvature += second_difference(f, s, FD_STEP).max(0.0);
        }
        (main / n, curvature.sqrt() / n)
    };
    let objective = |s: f64| {
        let (m, k) = terms(s);
        m - k
    };
    let (lo, hi) = (FD_STEP, 1.0 - FD_STEP);
    let step = (hi - lo) / (GRID_POINTS - 1) as f64;
    let mut best = (lo, objective(lo));
    for i in 1..GRID_POINTS {
        let s = lo + step * i as f64;
        let v = objective(s);
        if v < best.1 {
            best = (s, v);
        }
    }
    let (a, b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let (s, v) = golden_section_min(objective, a, b, S_TOLERANCE);
    let s_at_bound = if v < best.1 { s } else { best.0 };
    let (main_term, kappa) = terms(s_at_bound);
    Ok(BoundReport {
        lower_bound: main_term - kappa,
        kappa,
        s_at_bound,
        main_term,
        void,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{FiniteObservationModel, GaussianShift};
    use crate::numeric::{int, ratio};
    use crate::policies::{compile_threshold, ThresholdPolicy};

    const A1: [f64; 2] = [0.8, 0.2];
    const A2: [f64; 2] = [1.0 / 3.0, 2.0 / 3.0];
    const B1: [f64; 2] = [1.0, 0.0];
    const B2: [f64; 2] = [2.0 / 3.0, 1.0 / 3.0];

    fn example1() -> ObservationModel {
        FiniteObservationModel::with_numbered_alphabet(
            vec![ratio(4, 5), ratio(1, 5), int(0)],
            vec![ratio(1, 3), ratio(1, 3), ratio(1, 3)],
        )
        .unwrap()
        .into()
    }

    fn threshold(m: &ObservationModel, t: i64) -> SensorKernel {
        compile_threshold(&ThresholdPolicy::new(vec![int(t)], vec![0, 1]).unwrap(), m, 2).unwrap()
    }

    fn grid_min(f: impl Fn(f64) -> f64, points: usize) -> f64 {
        (0..=points).map(|i| f(i as f64 / points as f64)).fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn objective_values() {
        assert!(chernoff_objective(&A1, &A1, 0.3).unwrap().abs() < 1e-15);
        let mid = chernoff_objective(&A1, &A2, 0.5).unwrap();
        let oracle = ((4.0f64 / 15.0).sqrt() + (2.0f64 / 15.0).sqrt()).ln();
        assert!((mid - oracle).abs() < 1e-15);
        // Literal convention: B's objective is 0 at both endpoints.
        assert!(chernoff_objective(&B1, &B2, 0.0).unwrap().abs() < 1e-15);
        assert_eq!(chernoff_objective(&B1, &B2, 1.0).unwrap(), 0.0);
        let s = 0.25;
        assert!((chernoff_objective(&B1, &B2, s).unwrap() - (1.0 - s) * (2.0f64 / 3.0).ln()).abs() < 1e-15);
        assert!(chernoff_objective(&[0.0, 0.0], &[0.0, 0.0], 0.5).is_err());
        assert!(chernoff_objective(&A1, &A2, 1.5).is_err());
    }

    #[test]
    fn policy_b_exponent_is_log_two_thirds() {
        let r = chernoff_exponent_of_laws(&B1, &B2).unwrap();
        assert_eq!(r.value, (2.0f64 / 3.0).ln());
        assert_eq!(r.s_star, 0.0);
        let m = example1();
        let via_kernel = chernoff_exponent(&threshold(&m, 2), &m).unwrap();
        assert!((via_kernel.value + 0.405_465).abs() < 1e-6);
    }

    #[test]
    fn policy_a_matches_grid() {
        let r = chernoff_exponent_of_laws(&A1, &A2).unwrap();
        let grid = grid_min(|s| continuous_objective(&A1, &A2, s), 10_000);
        assert!(r.value < 0.0);
        assert!((r.value - grid).abs() < 1e-6);
        assert!(r.value <= grid + 1e-15);
    }

    #[test]
    fn uninformative_kernel_has_zero_exponent() {
        let m = example1();
        let r = chernoff_exponent(&SensorKernel::uniform(3, 2), &m).unwrap();
        assert!(r.value.abs() < 1e-15);
    }

    #[test]
    fn disjoint_supports_are_degenerate() {
        assert!(matches!(
            chernoff_exponent_of_laws(&[1.0, 0.0], &[0.0, 1.0]),
            Err(Error::DegenerateObjective(_))
        ));
    }

    #[test]
    fn mixtures() {
        let m = example1();
        let (a, b) = (threshold(&m, 1), threshold(&m, 2));
        let point = mixture_exponent(&[(int(1), b.clone())], &m).unwrap();
        assert_eq!(point.result.value, chernoff_exponent(&b, &m).unwrap().value);
        let half = mixture_exponent(&[(ratio(1, 2), a.clone()), (ratio(1, 2), b.clone())], &m).unwrap();
        let ea = chernoff_exponent(&a, &m).unwrap().value;
        let eb = chernoff_exponent(&b, &m).unwrap().value;
        assert!(half.result.value >= ea.min(eb));
        assert!(half.point_mass_suffices);
        assert_eq!(half.best_component, 1);
        let flat = SensorKernel::uniform(3, 2);
        let both_flat = mixture_exponent(&[(ratio(1, 3), flat.clone()), (ratio(2, 3), flat)], &m).unwrap();
        assert!(both_flat.result.value.abs() < 1e-15);
        assert!(mixture_exponent(&[(ratio(1, 3), a)], &m).is_err());
    }

    #[test]
    fn characteristic_function() {
        let m = example1();
        let a = threshold(&m, 1);
        let p = Prior::uniform();
        assert!((characteristic_diagnostic(&a, &m, &p, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let flat = SensorKernel::uniform(3, 2);
        assert!((characteristic_diagnostic(&flat, &m, &Prior::new(ratio(1, 5)).unwrap(), 0.7).unwrap() - 1.0).abs() < 1e-15);
        // Direct summation for A at s = 1/2.
        let mut oracle = 0.0;
        for j in 0..2 {
            let g = if j == 0 { A1 } else { A2 };
            for u in 0..2 {
                oracle += 0.5 * g[u] * (A1[u] / A2[u]).sqrt();
            }
        }
        assert!((characteristic_diagnostic(&a, &m, &p, 0.5).unwrap() - oracle).abs() < 1e-12);
        // Policy B only loses mass to -inf log-ratios.
        assert!(characteristic_diagnostic(&threshold(&m, 2), &m, &p, 0.5).unwrap().is_finite());
        let one_sided: ObservationModel =
            FiniteObservationModel::with_numbered_alphabet(vec![ratio(1, 2), ratio(1, 2)], vec![int(1), int(0)])
                .unwrap()
                .into();
        let identity = SensorKernel::deterministic(&[0, 1], 2).unwrap();
        assert_eq!(characteristic_diagnostic(&identity, &one_sided, &p, 0.5).unwrap(), f64::INFINITY);
        assert_eq!(characteristic_diagnostic(&identity, &one_sided, &p, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn second_difference_matches_analytic() {
        let f = |s: f64| continuous_objective(&A1, &A2, s);
        let s = 0.37;
        let terms: Vec<(f64, f64)> = (0..2)
            .map(|u| (A2[u].powf(1.0 - s) * A1[u].powf(s), (A1[u] / A2[u]).ln()))
            .collect();
        let z: f64 = terms.iter().map(|t| t.0).sum();
        let m1: f64 = terms.iter().map(|t| t.0 * t.1).sum::<f64>() / z;
        let m2: f64 = terms.iter().map(|t| t.0 * t.1 * t.1).sum::<f64>() / z;
        assert!((second_difference(f, s, FD_STEP) - (m2 - m1 * m1)).abs() < 1e-6);
    }

    #[test]
    fn lower_bound_all_a() {
        let m = example1();
        let a = threshold(&m, 1);
        let mut kappas = Vec::new();
        for (n, kappa, bound) in [(2, 0.732, -0.856), (4, 0.517, -0.642), (8, 0.365, -0.490), (16, 0.258, -0.384)] {
            let r = exponent_lower_bound(&TeamPolicy::homogeneous(a.clone(), n).unwrap(), &m).unwrap();
            assert!(!r.void);
            assert!((r.kappa - kappa).abs() < 1e-3, "N={n}: {}", r.kappa);
            assert!((r.lower_bound - bound).abs() < 1e-3, "N={n}: {}", r.lower_bound);
            assert!((r.lower_bound - (r.main_term - r.kappa)).abs() < 1e-15);
            kappas.push(r.kappa);
        }
        assert!(kappas.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn lower_bound_flags() {
        let m = example1();
        let b = TeamPolicy::homogeneous(threshold(&m, 2), 4).unwrap();
        assert!(exponent_lower_bound(&b, &m).unwrap().void);
        let constant = SensorKernel::deterministic(&[0, 0, 0], 2).unwrap();
        let flat = exponent_lower_bound(&TeamPolicy::homogeneous(constant, 4).unwrap(), &m).unwrap();
        assert!(!flat.void);
        assert!(flat.main_term.abs() < 1e-12 && flat.kappa.abs() < 1e-6 && flat.lower_bound <= 0.0);
        let stochastic = SensorKernel::matrix(vec![vec![ratio(1, 2), ratio(1, 2)]; 3]).unwrap();
        let team = TeamPolicy::homogeneous(stochastic, 2).unwrap();
        assert!(exponent_lower_bound(&team, &m).is_err());
    }

    #[test]
    fn gaussian_threshold_exponent() {
        // At l = 1 each bin has mass Phi(-1/2) or Phi(1/2); the optimum is s = 1/2
        // by symmetry, so the exponent is log(2 sqrt(Phi(1/2) Phi(-1/2))).
        let g: ObservationModel = GaussianShift::new(0.0, 1.0, 1.0).unwrap().into();
        let k = compile_threshold(&ThresholdPolicy::new(vec![int(1)], vec![0, 1]).unwrap(), &g, 2).unwrap();
        let r = chernoff_exponent(&k, &g).unwrap();
        let lo = 0.5 * statrs::function::erf::erfc(0.5 / std::f64::consts::SQRT_2);
        let oracle = (2.0 * (lo * (1.0 - lo)).sqrt()).ln();
        assert!((r.value - oracle).abs() < 1e-12);
        assert!((r.s_star - 0.5).abs() < 1e-6);
    }
}
