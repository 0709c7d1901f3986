#![allow(dead_code)]

use std::collections::HashSet;

use cantor::radix::{parse_code, Alphabet, PeriodicCode, Rational};
use cantor::DigitSet;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub fn r(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

pub fn ds(n: i64, d: &[i64]) -> DigitSet {
    DigitSet::new(n, d.to_vec()).unwrap()
}

pub fn code(s: &str, n: i64, a: Alphabet) -> PeriodicCode {
    parse_code(s, n, a).unwrap()
}

/// Left endpoints of `C_k` in units of `n^{-k}`, by direct enumeration.
pub fn cells(d: &DigitSet, k: usize) -> Vec<i64> {
    let mut v = vec![0i64];
    for _ in 0..k {
        v = v.iter().flat_map(|a| d.digits().iter().map(move |x| a * d.base() + x)).collect();
    }
    v.sort_unstable();
    v
}

fn npow(n: i64, k: usize) -> Rational {
    Rational::from_integer(BigInt::from(n).pow(k as u32))
}

/// Merged components of `C_k ∩ (C_k + t)` from cell-by-cell interval intersection.
pub fn brute_tight(d: &DigitSet, t: &Rational, k: usize) -> Vec<(Rational, Rational)> {
    let a = cells(d, k);
    let set: HashSet<i64> = a.iter().copied().collect();
    let s = t * npow(d.base(), k);
    let mut pieces = Vec::new();
    for &x in &a {
        let xr = Rational::from_integer(x.into());
        let lo_b = (&xr - Rational::one() - &s).ceil().to_integer();
        let hi_b = (&xr + Rational::one() - &s).floor().to_integer();
        let mut b = lo_b;
        while b <= hi_b {
            let bi: i64 = b.clone().try_into().unwrap();
            if set.contains(&bi) {
                let left = Rational::from_integer(b.clone()) + &s;
                let lo = if left > xr { left.clone() } else { xr.clone() };
                let right = &left + Rational::one();
                let xr1 = &xr + Rational::one();
                let hi = if right < xr1 { right } else { xr1 };
                if lo <= hi {
                    pieces.push((lo, hi));
                }
            }
            b += 1;
        }
    }
    pieces.sort();
    let mut out: Vec<(Rational, Rational)> = Vec::new();
    for (lo, hi) in pieces {
        match out.last_mut() {
            Some(last) if lo <= last.1 => {
                if hi > last.1 {
                    last.1 = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    let scale = npow(d.base(), k);
    out.into_iter().map(|(a, b)| (a / &scale, b / &scale)).collect()
}

/// `(interval, potential interval, potentially empty)` cell counts at level `k`.
pub fn brute_cases(d: &DigitSet, digits: &[i64], k: usize) -> (u64, u64, u64) {
    let a = cells(d, k);
    let h: i64 = digits[..k].iter().fold(0, |acc, x| acc * d.base() + x);
    let t: HashSet<i64> = a.iter().map(|x| x + h).collect();
    let mut c = (0, 0, 0);
    for x in &a {
        c.0 += t.contains(x) as u64;
        c.1 += t.contains(&(x - 1)) as u64;
        c.2 += t.contains(&(x + 1)) as u64;
    }
    c
}

pub fn sigma_from_cases(c: (u64, u64, u64)) -> &'static str {
    match (c.0 > 0, c.1 > 0) {
        (true, false) => "1",
        (false, true) => "-1",
        (true, true) => "i",
        (false, false) => "0",
    }
}

pub fn positive_components(v: &[(Rational, Rational)]) -> Vec<Rational> {
    v.iter().filter(|(a, b)| a < b).map(|(a, b)| b - a).collect()
}

pub fn random_sparse<R: Rng>(rng: &mut R, nmax: i64) -> DigitSet {
    loop {
        let n = rng.random_range(3..=nmax);
        let mmax = (n - 1).min(4) as usize;
        let m = rng.random_range(2..=mmax.max(2));
        let mut pool: Vec<i64> = (1..n).collect();
        pool.shuffle(rng);
        let mut digits = vec![0];
        digits.extend(pool.into_iter().take(m - 1));
        if let Ok(d) = DigitSet::new(n, digits) {
            if d.is_sparse() {
                return d;
            }
        }
    }
}

pub fn random_delta_plus<R: Rng>(rng: &mut R, d: &DigitSet, max_pre: usize, max_per: usize) -> PeriodicCode {
    let dp = d.differences().deltas_nonneg;
    let pre = (0..rng.random_range(0..=max_pre)).map(|_| *dp.choose(rng).unwrap()).collect();
    let per = (0..rng.random_range(1..=max_per)).map(|_| *dp.choose(rng).unwrap()).collect();
    PeriodicCode::new(d.base(), Alphabet::DeltaPlus, pre, per).unwrap()
}

pub fn random_nary<R: Rng>(rng: &mut R, n: i64, max_pre: usize, max_per: usize) -> PeriodicCode {
    let pre = (0..rng.random_range(0..=max_pre)).map(|_| rng.random_range(0..n)).collect();
    let per = (0..rng.random_range(1..=max_per)).map(|_| rng.random_range(0..n)).collect();
    PeriodicCode::new(n, Alphabet::Nary, pre, per).unwrap()
}

/// Largest depth with at most `cap` cells.
pub fn depth_for(d: &DigitSet, kmax: usize, cap: usize) -> usize {
    (0..=kmax).rev().find(|k| d.m().pow(*k as u32) <= cap).unwrap_or(0)
}

pub fn is_zero(x: &Rational) -> bool {
    x.is_zero()
}

/// Whether `h = Σ_{j≤k} δ_j n^{k-j}` for some `δ_j ∈ D − D`, by carry recursion from the low digit.
pub fn in_level_differences(d: &DigitSet, k: usize, h: i128) -> bool {
    let n = d.base() as i128;
    let mut delta: Vec<i128> = d.digits().iter().flat_map(|a| d.digits().iter().map(move |b| (a - b) as i128)).collect();
    delta.sort_unstable();
    delta.dedup();
    let mut frontier: HashSet<i128> = HashSet::from([h]);
    for _ in 0..k {
        frontier = frontier
            .iter()
            .flat_map(|x| {
                delta
                    .iter()
                    .filter(move |dl| (x - *dl).rem_euclid(n) == 0)
                    .map(move |dl| (x - dl) / n)
            })
            .collect();
    }
    frontier.contains(&0)
}

/// `σ_t(k)` symbol from the difference-set membership of `⌊t⌋_k` and `⌊t⌋_k + 1`.
pub fn sigma_by_differences(d: &DigitSet, digits: &[i64], k: usize) -> &'static str {
    let h: i128 = digits[..k].iter().fold(0, |acc, x| acc * d.base() as i128 + *x as i128);
    let c = (in_level_differences(d, k, h) as u64, in_level_differences(d, k, h + 1) as u64, 0);
    sigma_from_cases(c)
}

/// Distinct differences at least two apart.
pub fn sparse_by_definition(digits: &[i64]) -> bool {
    let mut diffs: Vec<i64> = Vec::new();
    for a in digits {
        for b in digits {
            diffs.push(a - b);
        }
    }
    diffs.sort_unstable();
    diffs.dedup();
    (1..diffs.len()).all(|i| diffs[i] - diffs[i - 1] >= 2)
}
