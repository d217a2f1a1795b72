//! Worked-example values recomputed by a brute-force oracle that walks
//! observation tuples directly, with no output laws and no MAP helper.

use detkit::example1::{self, kernel_a, kernel_b, kernel_c, kernel_d};
use detkit::numeric::{int, ratio, Rational};
use detkit::{exact_risk, mixture_risk, Fusion, FusionInfo, Prior, Prob, TeamMixture, TeamPolicy};

type Kernel = Vec<Vec<Rational>>;

fn rows(k: &detkit::SensorKernel) -> Kernel {
    match k {
        detkit::SensorKernel::Matrix { rows, .. } => rows.clone(),
        other => {
            let map = other.as_map().expect("deterministic");
            let m = other.actions();
            map.iter().map(|&u| (0..m).map(|a| int((a == u) as i64)).collect()).collect()
        }
    }
}

fn tuples(n: usize, base: usize) -> Vec<Vec<usize>> {
    (0..base.pow(n as u32))
        .map(|mut r| {
            let mut t = vec![0; n];
            for slot in t.iter_mut().rev() {
                *slot = r % base;
                r /= base;
            }
            t
        })
        .collect()
}

/// `P(u | H_j)` for every action tuple of a mixture, marginalizing
/// observation tuples and team atoms by hand.
fn joint(pmf: &[Rational], atoms: &[(Rational, Vec<Kernel>)], actions: usize) -> Vec<Rational> {
    let n = atoms[0].1.len();
    let ys = tuples(n, pmf.len());
    tuples(n, actions)
        .iter()
        .map(|u| {
            let mut total = int(0);
            for (w, kernels) in atoms {
                for y in &ys {
                    let mut p = w.clone();
                    for i in 0..n {
                        p *= &pmf[y[i]] * &kernels[i][y[i]][u[i]];
                    }
                    total += p;
                }
            }
            total
        })
        .collect()
}

fn bayes_risk(q1: &[Rational], q2: &[Rational]) -> Rational {
    let half = ratio(1, 2);
    q1.iter().zip(q2).map(|(a, b)| &half * if a >= b { b } else { a }).sum()
}

fn oracle(pmfs: (&[Rational], &[Rational]), atoms: &[(Rational, Vec<Kernel>)], known: bool) -> Rational {
    let actions = atoms[0].1[0][0].len();
    if known {
        atoms
            .iter()
            .map(|(w, k)| {
                let single = [(int(1), k.clone())];
                w * bayes_risk(&joint(pmfs.0, &single, actions), &joint(pmfs.1, &single, actions))
            })
            .sum()
    } else {
        bayes_risk(&joint(pmfs.0, atoms, actions), &joint(pmfs.1, atoms, actions))
    }
}

fn example_pmfs() -> (Vec<Rational>, Vec<Rational>) {
    (vec![ratio(4, 5), ratio(1, 5), int(0)], vec![ratio(1, 3); 3])
}

#[test]
fn deterministic_teams_match_the_oracle() {
    let (p1, p2) = example_pmfs();
    let model = example1::model();
    let cases = [
        (vec![kernel_a(), kernel_b()], Some(ratio(19, 90))),
        (vec![kernel_a(), kernel_a()], Some(ratio(53, 225))),
        (vec![kernel_b(), kernel_b()], Some(ratio(2, 9))),
        (vec![kernel_a(), kernel_b(), kernel_b()], None),
    ];
    for (kernels, expected) in cases {
        let want = oracle((&p1, &p2), &[(int(1), kernels.iter().map(rows).collect())], true);
        if let Some(expected) = expected {
            assert_eq!(want, expected);
        }
        let team = TeamPolicy::new(kernels).unwrap();
        let got = exact_risk(&team, &Fusion::Map, &model, &Prior::uniform()).unwrap();
        assert_eq!(got.risk, Prob::Exact(want));
    }
}

#[test]
fn mixtures_match_the_oracle() {
    let (p1, p2) = example_pmfs();
    let model = example1::model();
    let prior = Prior::uniform();
    let half = [(ratio(1, 2), kernel_a()), (ratio(1, 2), kernel_b())];
    let iid = TeamMixture::symmetric_independent(&half, 2).unwrap();
    let exch = example1::exchangeable_pair(kernel_a(), kernel_b());
    for (mix, known_value) in [(iid, ratio(11, 50)), (exch, ratio(19, 90))] {
        let atoms: Vec<(Rational, Vec<Kernel>)> = mix
            .atoms()
            .iter()
            .map(|(w, t)| (w.clone(), t.kernels().iter().map(rows).collect()))
            .collect();
        for (info, known) in [(FusionInfo::KnownRandomization, true), (FusionInfo::Bayesian, false)] {
            let want = oracle((&p1, &p2), &atoms, known);
            if known {
                assert_eq!(want, known_value);
            }
            assert_eq!(mixture_risk(&mix, info, &model, &prior).unwrap().risk, Prob::Exact(want));
        }
    }
}

#[test]
fn perfect_observation_pair() {
    let (p1, p2) = (vec![int(1), int(0)], vec![int(0), int(1)]);
    let mix = example1::exchangeable_pair(kernel_c(), kernel_d());
    let atoms: Vec<(Rational, Vec<Kernel>)> = mix
        .atoms()
        .iter()
        .map(|(w, t)| (w.clone(), t.kernels().iter().map(rows).collect()))
        .collect();
    assert_eq!(oracle((&p1, &p2), &atoms, true), int(0));
    assert_eq!(oracle((&p1, &p2), &atoms, false), ratio(1, 4));
    let model = example1::perfect_model();
    let prior = Prior::uniform();
    let bayes = mixture_risk(&mix, FusionInfo::Bayesian, &model, &prior).unwrap();
    assert_eq!(bayes.risk, Prob::Exact(ratio(1, 4)));
}

#[test]
fn bayesian_statistic_at_the_all_ones_tuple() {
    let mix = example1::exchangeable_pair(kernel_a(), kernel_b());
    let stat = detkit::fusion::bayes_log_ratio(&[0, 0], &mix, &example1::model()).unwrap();
    // P(u=(1,1)|H1) = 4/5, P(u=(1,1)|H2) = 2/9 for both orderings.
    assert!((stat - (18.0f64 / 5.0).ln()).abs() < 1e-12);
    assert!(stat > 0.0);
}
