mod common;

use common::square;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use pcbounds::alphabet::{Alphabet, BoundaryProfile};
use pcbounds::iterate::{exact_apply_f, exact_mix};
use pcbounds::mc::{
    check_properties, classify_realization, connectivity, estimate, simulate_k, simulate_trial, Realization,
    Statistic,
};
use pcbounds::wordcode::{DirectCoder, PlanOptions};
use pcbounds::{CodeKind, CompositionPlan};

const GOLDEN: &str = include_str!("golden/realization_m2_p085_n3_seed42.pbm");

#[test]
fn golden_realization_is_stable() {
    assert_eq!(simulate_k(2, 0.85, 3, 42).unwrap().to_pbm(), GOLDEN);
}

#[test]
fn diagonal_halves_do_not_percolate() {
    // [0,1/2]² ∪ [1/2,1]²
    let r = Realization::from_levels(2, vec![vec![(0, 0)], vec![(0, 0), (1, 1)]]).unwrap();
    assert!(!connectivity(&r).percolates);
}

#[test]
fn upper_right_quarter_is_max_under_the_two_letter_code() {
    let a = Alphabet::extremes(square());
    let plan = CompositionPlan::build(&a, 2, CodeKind::Weak, &PlanOptions::default()).unwrap();
    let r = Realization::from_levels(2, vec![vec![(0, 0)], vec![(1, 1)]]).unwrap();
    assert_eq!(classify_realization(&r, &a, &plan).unwrap(), a.max());
}

#[test]
fn full_realizations_classify_as_max() {
    let a = Alphabet::enumerate(square()).unwrap();
    for code in [CodeKind::Weak, CodeKind::Strong] {
        let plan = CompositionPlan::build(&a, 2, code, &PlanOptions::default()).unwrap();
        for n in 0..4 {
            let r = Realization::full(2, n).unwrap();
            assert_eq!(classify_realization(&r, &a, &plan).unwrap(), a.max());
        }
    }
    let empty = simulate_k(2, 0.0, 3, 1).unwrap();
    let plan = CompositionPlan::build(&a, 2, CodeKind::Weak, &PlanOptions::default()).unwrap();
    assert_eq!(classify_realization(&empty, &a, &plan).unwrap(), a.min());
}

fn pi1(m: usize, p: f64) -> f64 {
    match m {
        2 => 1.0 - (1.0 - p).powi(4),
        3 => 1.0 + (1.0 - p).powi(4) * (p.powi(5) + 4.0 * p.powi(4) * (1.0 - p) + 6.0 * p.powi(3) * (1.0 - p).powi(2) - 1.0),
        _ => unreachable!(),
    }
}

#[test]
fn confidence_intervals_cover_first_level_closed_forms() {
    for m in [2, 3] {
        for (i, p) in [0.3, 0.5, 0.7].into_iter().enumerate() {
            let e = estimate(m, p, 1, 20_000, Statistic::Pi, 100 + i as u64).unwrap();
            assert!(e.covers(pi1(m, p)), "{e:?} vs {}", pi1(m, p));
        }
    }
    let e = estimate(3, 1.0, 2, 100, Statistic::Theta, 0).unwrap();
    assert_eq!((e.mean, e.successes), (1.0, 100));
}

#[test]
fn estimates_are_reproducible() {
    let a = estimate(2, 0.7, 3, 2000, Statistic::Theta, 5).unwrap();
    let b = estimate(2, 0.7, 3, 2000, Statistic::Theta, 5).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.csv_row().split(',').count(), 8);
}

#[test]
fn classifications_satisfy_both_properties_and_the_sandwich() {
    let a = Alphabet::enumerate(square()).unwrap();
    for m in [2, 3] {
        let weak = CompositionPlan::build(&a, m, CodeKind::Weak, &PlanOptions::default()).unwrap();
        let strong = CompositionPlan::build(&a, m, CodeKind::Strong, &PlanOptions::default()).unwrap();
        for p in [0.4, 0.6, 0.8] {
            for n in 1..=3 {
                for t in 0..1000 {
                    let r = simulate_trial(m, p, n, 77, t).unwrap();
                    let c = check_properties(&r, &a, &weak, &strong).unwrap();
                    assert!(c.weak_holds && c.strong_holds && c.sandwich_holds(), "M={m} p={p} n={n} trial {t}: {c:?}");
                }
            }
        }
    }
}

#[test]
fn refined_profile_classifications_satisfy_both_properties() {
    let a = Alphabet::enumerate(BoundaryProfile::uniform(2).unwrap()).unwrap();
    let weak = DirectCoder::new(&a, CodeKind::Weak).unwrap();
    let strong = DirectCoder::new(&a, CodeKind::Strong).unwrap();
    for p in [0.6, 0.8] {
        for n in 1..=3 {
            for t in 0..150 {
                let r = simulate_trial(2, p, n, 78, t).unwrap();
                let c = check_properties(&r, &a, &weak, &strong).unwrap();
                assert!(c.weak_holds && c.strong_holds, "p={p} n={n} trial {t}: {c:?}");
            }
        }
    }
}

#[test]
fn letter_frequencies_match_the_exact_recursion() {
    let a = Alphabet::enumerate(square()).unwrap();
    let plan = CompositionPlan::build(&a, 2, CodeKind::Weak, &PlanOptions::default()).unwrap();
    let p = BigRational::new(7.into(), 10.into());
    let mut exact = vec![BigRational::zero(); a.len()];
    exact[a.max() as usize] = BigRational::one();
    for _ in 0..3 {
        exact = exact_apply_f(&plan, &exact_mix(&exact, &p, a.min()));
    }
    let trials = 100_000u64;
    let mut counts = vec![0u64; a.len()];
    for t in 0..trials {
        let r = simulate_trial(2, 0.7, 3, 2024, t).unwrap();
        counts[classify_realization(&r, &a, &plan).unwrap() as usize] += 1;
    }
    for (id, (c, e)) in counts.iter().zip(&exact).enumerate() {
        let e = e.to_f64().unwrap();
        let freq = *c as f64 / trials as f64;
        let sigma = (e * (1.0 - e) / trials as f64).sqrt();
        assert!((freq - e).abs() <= 4.0 * sigma + 1e-12, "letter {id}: {freq} vs {e}");
    }
}

#[test]
fn two_sides_probability_decreases_with_depth_below_criticality() {
    let means: Vec<(f64, f64)> = (1..=5)
        .map(|n| {
            let e = estimate(2, 0.5, n, 20_000, Statistic::Pi, 9).unwrap();
            (e.mean, (e.mean * (1.0 - e.mean) / 20_000.0).sqrt())
        })
        .collect();
    for w in means.windows(2) {
        let (a, sa) = w[0];
        let (b, sb) = w[1];
        assert!(b <= a + 4.0 * (sa * sa + sb * sb).sqrt(), "{means:?}");
    }
    assert!(means[4].0 < means[0].0);
}
