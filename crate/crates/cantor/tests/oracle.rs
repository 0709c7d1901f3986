mod common;

use cantor::intervals::{intersect_level, intersect_shift, DEFAULT_BUDGET};
use cantor::kernel::{ell, sigma_trace};
use cantor::radix::{value_of, Alphabet};
use cantor::Error;
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tight_pairs(il: &cantor::intervals::IntervalSet) -> Vec<(cantor::Rational, cantor::Rational)> {
    il.intervals.iter().map(|iv| (iv.lo.clone(), iv.hi.clone())).collect()
}

#[test]
fn pair_refinement_matches_brute_force_on_random_shifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..150 {
        let d = random_sparse(&mut rng, 9);
        let k = depth_for(&d, 5, 800);
        let num: i64 = rand::Rng::random_range(&mut rng, -60..=60);
        let t = r(num, 37);
        let got = intersect_shift(&d, &t, k, DEFAULT_BUDGET).unwrap().tight;
        assert_eq!(tight_pairs(&got), brute_tight(&d, &t, k), "D={:?} t={t} k={k}", d.digits());
    }
}

#[test]
fn nonsparse_sets_match_brute_force() {
    for (n, digits) in [(10, vec![0, 1, 2, 6, 8]), (7, vec![0, 1, 3]), (5, vec![0, 1])] {
        let d = ds(n, &digits);
        for num in 0..12 {
            let t = r(num, 11);
            let got = intersect_shift(&d, &t, 3, DEFAULT_BUDGET).unwrap().tight;
            assert_eq!(tight_pairs(&got), brute_tight(&d, &t, 3));
        }
    }
}

/// Counts, lengths and case table against `σ`, `μ`, `ℓ` on random sparse systems.
#[test]
fn kernel_agrees_with_geometry() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100 {
        let d = random_sparse(&mut rng, 12);
        let c = random_delta_plus(&mut rng, &d, 3, 4);
        let k = depth_for(&d, 10, 20_000);
        let trace = sigma_trace(&d, &c, k).unwrap();
        let il = intersect_level(&d, &c, k, DEFAULT_BUDGET).unwrap();
        let digits = c.digits(k);
        for level in 0..=k {
            let bc = brute_cases(&d, &digits, level);
            let lc = &il.cases[level];
            assert_eq!((lc.interval, lc.potential_interval, lc.potentially_empty), bc);
            assert_eq!(sigma_from_cases(bc), trace.values[level].symbol(), "{c} level {level}");
        }
        let brute = brute_tight(&d, &value_of(&c), k);
        assert_eq!(tight_pairs(&il.tight), brute);
        let lens = positive_components(&brute);
        match (&trace.mu[k], ell(&d, &c, k)) {
            (Some(mu), Ok(l)) => {
                assert_eq!(lens.len() as u64, u64::try_from(mu.clone()).unwrap(), "{c} D={:?}", d.digits());
                assert!(lens.iter().all(|x| *x == l));
            }
            (_, Err(Error::FiniteRepresentation)) => assert!(lens.is_empty()),
            (m, e) => panic!("unexpected {m:?} {e:?} for {c}"),
        }
    }
}

#[test]
fn nary_codes_agree_too() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..60 {
        let d = random_sparse(&mut rng, 10);
        let c = random_nary(&mut rng, d.base(), 2, 3);
        let k = depth_for(&d, 7, 5_000);
        let il = intersect_level(&d, &c, k, DEFAULT_BUDGET).unwrap();
        assert_eq!(tight_pairs(&il.tight), brute_tight(&d, &value_of(&c), k));
        let trace = sigma_trace(&d, &c, k).unwrap();
        let digits = c.digits(k);
        for level in 0..=k {
            assert_eq!(sigma_from_cases(brute_cases(&d, &digits, level)), trace.values[level].symbol());
        }
    }
}

#[test]
fn budget_is_enforced() {
    let d = ds(3, &[0, 2]);
    let e = intersect_level(&d, &code("(0)", 3, Alphabet::Nary), 12, 100).unwrap_err();
    assert!(matches!(e, Error::BudgetExceeded { .. }));
    assert_eq!(e.exit_code(), 3);
}
