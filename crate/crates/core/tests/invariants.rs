use allmatch_core::closed_forms::{self, CoefficientPlan};
use allmatch_core::ensembles::{self, EnsembleSpec};
use allmatch_core::estimator::{self, Algorithm};
use allmatch_core::exact;
use allmatch_core::verify::composition_sum;
use allmatch_core::{rng, ExactRational, ZeroOneMatrix};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q(v: impl Into<BigInt>) -> ExactRational {
    ExactRational::from_integer(v.into())
}

fn matrix(max_rows: usize, max_cols: usize) -> impl Strategy<Value = ZeroOneMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(m, n)| {
        proptest::collection::vec(any::<bool>(), m * n)
            .prop_map(move |bits| ZeroOneMatrix::from_fn(m, n, |i, j| bits[i * n + j]))
    })
}

fn wide(max: usize) -> impl Strategy<Value = ZeroOneMatrix> {
    matrix(max, max).prop_filter("m <= n", |a| a.rows() <= a.cols())
}

fn square(max: usize) -> impl Strategy<Value = ZeroOneMatrix> {
    (1..=max).prop_flat_map(|n| {
        proptest::collection::vec(any::<bool>(), n * n)
            .prop_map(move |bits| ZeroOneMatrix::from_fn(n, n, |i, j| bits[i * n + j]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dp_matches_recursion(a in wide(7)) {
        prop_assert_eq!(exact::am_dp(&a).unwrap(), exact::am_recursive(&a).unwrap());
    }

    #[test]
    fn dp_is_transpose_invariant(a in matrix(8, 8)) {
        prop_assert_eq!(exact::am_dp(&a).unwrap(), exact::am_dp(&a.transpose()).unwrap());
    }

    #[test]
    fn dp_is_monotone(a in matrix(6, 6), i in 0usize..6, j in 0usize..6) {
        let (i, j) = (i % a.rows(), j % a.cols());
        let base = exact::am_dp(&a).unwrap();
        prop_assert!(base >= BigUint::one());
        prop_assert!(exact::am_dp(&a.with_entry(i, j, true)).unwrap() >= base);
    }

    #[test]
    fn permanent_counts_perfect_matchings(a in square(7)) {
        let per = exact::permanent(&a).unwrap();
        prop_assert_eq!(per, exact::matching_vector(&a).unwrap().get(a.rows()));
    }

    #[test]
    fn amm_samples_are_positive_and_bounded(a in wide(7), seed in any::<u64>()) {
        let mut bound = BigUint::one();
        for i in 0..a.rows() {
            bound *= BigUint::from((0..a.cols()).filter(|&j| a.get(i, j)).count() + 1);
        }
        let x = estimator::amm_sample(&a, &mut rng::stream(seed, 0)).unwrap();
        prop_assert!(x >= BigUint::one() && x <= bound);
    }

    #[test]
    fn batch_sums_satisfy_cauchy_schwarz(a in square(6), seed in any::<u64>()) {
        for alg in [Algorithm::Amm, Algorithm::Rm] {
            let s = estimator::run_batch(&a, alg, 64, seed).unwrap();
            prop_assert!(&s.sum * &s.sum <= BigUint::from(s.n_samples) * &s.sum_sq);
        }
    }

    #[test]
    fn second_moment_matches_paths(a in wide(5)) {
        let d = estimator::path_distribution(&a, Algorithm::Amm).unwrap();
        let (mean, second) = estimator::distribution_moments(&d);
        prop_assert_eq!(mean, q(exact::am_dp(&a).unwrap()));
        prop_assert_eq!(second, q(estimator::exact_second_moment(&a, Algorithm::Amm).unwrap()));
    }

    #[test]
    fn mean_plan_matches_sum_formula(n in 0usize..30, m_frac in 0usize..=100) {
        let m = n * m_frac / 100;
        let dp = closed_forms::lemma1_eval(m, n, &CoefficientPlan::mean_plan(n)).unwrap();
        prop_assert_eq!(dp, closed_forms::t3_mean(m, n).unwrap());
    }

    #[test]
    fn fixed_ones_samples_have_m_ones(n in 1usize..8, frac in 0usize..=100, seed in any::<u64>()) {
        let m = n * n * frac / 100;
        let spec = EnsembleSpec::fixed_ones(m, n, n).unwrap();
        let a = ensembles::sample(&spec, &mut rng::stream(seed, 0)).unwrap();
        prop_assert_eq!(a.count_ones(), m);
    }
}

#[test]
fn recursion_matches_path_expansion_for_both_plans() {
    let a1 = |_: usize| q(1);
    let c1 = |l: usize| q(l) / q(2);
    let a2 = |l: usize| q(l + 2) / q(2);
    let c2 = |l: usize| q(l * l + 3 * l) / q(4);
    for n in 0..=6 {
        for m in 0..=n {
            let mean = CoefficientPlan::mean_plan(n);
            let second = CoefficientPlan::second_moment_plan(n);
            assert_eq!(closed_forms::lemma1_eval(m, n, &mean).unwrap(), composition_sum(m, n, a1, c1));
            assert_eq!(closed_forms::lemma1_eval(m, n, &second).unwrap(), composition_sum(m, n, a2, c2));
        }
    }
}

#[test]
fn fixed_edge_second_moment_small_example() {
    let mats: Vec<_> = ensembles::enumerate(&EnsembleSpec::fixed_ones(2, 2, 2).unwrap()).unwrap().collect();
    assert_eq!(mats.len(), 6);
    let second: ExactRational = mats
        .iter()
        .map(|a| {
            let v = q(exact::am_dp(a).unwrap());
            &v * &v
        })
        .sum::<ExactRational>()
        / q(6);
    assert_eq!(closed_forms::t8_moments(2, 2).unwrap().second, second);
    assert_eq!(closed_forms::lemma2_ratio(4, 2).unwrap(), ExactRational::one());
    for n in 1..5 {
        assert_eq!(closed_forms::lemma2_ratio(0, n).unwrap(), ExactRational::one());
    }
}

#[test]
fn ratio_over_uniform_ensemble_is_nondecreasing() {
    let mut prev = ExactRational::zero();
    for n in 1..=40 {
        let r = closed_forms::t6_ratio(n).unwrap().ratio;
        assert!(r >= ExactRational::one() && r >= prev, "n = {n}");
        prev = r;
    }
}

#[test]
fn extended_matrix_identity_random_sizes() {
    use rand::Rng;
    for i in 0..50u64 {
        let mut g = rng::stream(99, i);
        let n = g.random_range(1..=7);
        let a = ZeroOneMatrix::from_fn(n, n, |_, _| g.random_bool(0.4));
        assert!(exact::verify_corollary3(&a).unwrap().holds);
    }
}
