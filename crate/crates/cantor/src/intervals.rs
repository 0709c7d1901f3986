//! Geometric oracle: explicit levels `C_k` and the exact sets `C_k ∩ (C_k + t)`.
//!
//! Cells are handled as integer indices `J` (the interval `[J, J+1]·n^{-k}`).
//! Two cells of level `k` can only meet if their parents met at level `k−1`,
//! so touching pairs are refined level by level instead of enumerating `C_k`
//! twice.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::digitset::DigitSet;
use crate::error::{Error, Result};
use crate::kernel::{self, CaseCounts, CaseTable, SigmaValue};
use crate::radix::{self, rational_to_f64, PeriodicCode, Rational};

pub const DEFAULT_BUDGET: u64 = 2_000_000;

/// Closed interval with exact endpoints; `lo == hi` is a point.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Interval {
    #[serde(with = "radix::rat_serde")]
    pub lo: Rational,
    #[serde(with = "radix::rat_serde")]
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn meets(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn contains_point(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn map(&self, ratio: &Rational, offset: &Rational) -> Interval {
        Interval::new(&self.lo * ratio + offset, &self.hi * ratio + offset)
    }
}

/// Sorted list of closed intervals at a level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalSet {
    pub level: usize,
    #[serde(with = "radix::rat_serde")]
    pub scale: Rational,
    pub intervals: Vec<Interval>,
}

impl IntervalSet {
    /// Sorts and fuses overlapping or touching intervals, giving the point set's components.
    pub fn merged(level: usize, scale: Rational, mut intervals: Vec<Interval>) -> Self {
        intervals.sort();
        let mut out: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match out.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => out.push(iv),
            }
        }
        IntervalSet {
            level,
            scale,
            intervals: out,
        }
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Shared length of all components, if there is one.
    pub fn common_length(&self) -> Option<Rational> {
        let first = self.intervals.first()?.length();
        self.intervals.iter().all(|iv| iv.length() == first).then_some(first)
    }

    pub fn lefts(&self) -> Vec<Rational> {
        self.intervals.iter().map(|iv| iv.lo.clone()).collect()
    }

    /// Image under `x ↦ ratio·x + offset` (ratio > 0).
    pub fn map(&self, ratio: &Rational, offset: &Rational) -> Self {
        IntervalSet::merged(
            self.level,
            &self.scale * ratio,
            self.intervals.iter().map(|iv| iv.map(ratio, offset)).collect(),
        )
    }

    pub fn translate(&self, offset: &Rational) -> Self {
        self.map(&Rational::one(), offset)
    }

    pub fn union(sets: &[IntervalSet]) -> Self {
        let level = sets.first().map_or(0, |s| s.level);
        let scale = sets.first().map_or_else(Rational::one, |s| s.scale.clone());
        IntervalSet::merged(level, scale, sets.iter().flat_map(|s| s.intervals.iter().cloned()).collect())
    }

    pub fn contains_point(&self, x: &Rational) -> bool {
        let idx = self.intervals.partition_point(|iv| &iv.hi < x);
        self.intervals.get(idx).is_some_and(|iv| iv.contains_point(x))
    }

    /// Point-set inclusion `other ⊆ self`.
    pub fn contains_set(&self, other: &IntervalSet) -> bool {
        other.intervals.iter().all(|iv| {
            let idx = self.intervals.partition_point(|s| s.hi < iv.lo);
            self.intervals.get(idx).is_some_and(|s| s.contains(iv))
        })
    }

    pub fn meets(&self, iv: &Interval) -> bool {
        let idx = self.intervals.partition_point(|s| s.hi < iv.lo);
        self.intervals.get(idx).is_some_and(|s| s.meets(iv))
    }
}

fn budget_error(needed: impl ToString, budget: u64) -> Error {
    Error::BudgetExceeded {
        needed: needed.to_string(),
        budget,
    }
}

fn base_pow_u128(n: i64, k: usize, budget: u64) -> Result<u128> {
    (0..k).try_fold(1u128, |acc, _| acc.checked_mul(n as u128)).ok_or_else(|| budget_error(format!("{n}^{k}"), budget))
}

fn cell(j: u128, k_scale: &BigInt, lo_frac: &Rational, hi_frac: &Rational) -> Interval {
    let j = Rational::from_integer(BigInt::from(j));
    let s = Rational::new(BigInt::one(), k_scale.clone());
    Interval::new((&j + lo_frac) * &s, (j + hi_frac) * s)
}

/// The level `C_k` as `m^k` cells.
pub fn build_level(ds: &DigitSet, k: usize, budget: u64) -> Result<IntervalSet> {
    let count = (ds.m() as u128).checked_pow(k as u32);
    match count {
        Some(c) if c <= budget as u128 => {}
        _ => return Err(budget_error(format!("{}^{k}", ds.m()), budget)),
    }
    base_pow_u128(ds.base(), k, budget)?;
    let mut lefts: Vec<u128> = vec![0];
    for _ in 0..k {
        lefts = lefts
            .iter()
            .flat_map(|a| ds.digits().iter().map(move |d| a * ds.base() as u128 + *d as u128))
            .collect();
    }
    let nk = radix::pow_int(ds.base(), k);
    let (zero, one) = (Rational::zero(), Rational::one());
    Ok(IntervalSet {
        level: k,
        scale: radix::scale(ds.base(), k),
        intervals: lefts.into_iter().map(|a| cell(a, &nk, &zero, &one)).collect(),
    })
}

/// A touching pair of cells: `J` in `C_k`, `K` in `C_k`, `d = J − K − H_k ∈ {−1,0,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Pair {
    j: u128,
    k: u128,
    d: i8,
}

fn case_counts(level: usize, pairs: &[Pair], m: usize) -> CaseCounts {
    let (mut interval, mut potential, mut pe, mut touched) = (0u64, 0u64, 0u64, 0u64);
    let mut idx = 0;
    while idx < pairs.len() {
        let j = pairs[idx].j;
        let (mut a, mut b, mut c) = (false, false, false);
        while idx < pairs.len() && pairs[idx].j == j {
            match pairs[idx].d {
                0 => a = true,
                1 => b = true,
                _ => c = true,
            }
            idx += 1;
        }
        interval += a as u64;
        potential += b as u64;
        pe += c as u64;
        touched += 1;
    }
    let total = num_traits::pow(num_bigint::BigUint::from(m), level);
    CaseCounts {
        level,
        interval,
        potential_interval: potential,
        potentially_empty: pe,
        empty: (total - touched).to_string(),
    }
}

/// Refines touching pairs for the translation with integer part `h0` and
/// base-n digits `digits`; returns the final pairs and per-level case counts.
fn refine(ds: &DigitSet, h0: i64, digits: &[i64], budget: u64) -> Result<(Vec<Pair>, CaseTable)> {
    let n = ds.base();
    base_pow_u128(n, digits.len() + 1, budget)?;
    let mut pairs = if h0.abs() <= 1 {
        vec![Pair { j: 0, k: 0, d: -h0 as i8 }]
    } else {
        Vec::new()
    };
    let mut table = vec![case_counts(0, &pairs, ds.m())];
    for (level, &a) in digits.iter().enumerate() {
        let mut next = Vec::new();
        for p in &pairs {
            for &x in ds.digits() {
                for &y in ds.digits() {
                    let d = n * p.d as i64 + x - y - a;
                    if d.abs() <= 1 {
                        next.push(Pair {
                            j: p.j * n as u128 + x as u128,
                            k: p.k * n as u128 + y as u128,
                            d: d as i8,
                        });
                    }
                }
            }
            if next.len() as u64 > budget {
                return Err(budget_error(format!("more than {}", next.len()), budget));
            }
        }
        next.sort_unstable();
        pairs = next;
        table.push(case_counts(level + 1, &pairs, ds.m()));
    }
    Ok((pairs, table))
}

/// Which pair kind a tight piece came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    Interval,
    PotentialInterval,
    PotentiallyEmpty,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Interval => "interval",
            CaseKind::PotentialInterval => "potential_interval",
            CaseKind::PotentiallyEmpty => "potentially_empty",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    pub interval: Interval,
    pub case: CaseKind,
}

/// `C_k ∩ (C_k + s)` for an exact shift `s`, as raw pieces and merged components.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TightLevel {
    pub pieces: Vec<Piece>,
    pub tight: IntervalSet,
}

fn split_shift(shift: &Rational) -> (i64, Rational) {
    let h0 = shift.floor();
    let frac = shift - &h0;
    (h0.to_integer().to_i64().unwrap_or(i64::MAX), frac)
}

fn digits_of_frac(frac: &Rational, base: i64, k: usize) -> (Vec<i64>, Rational) {
    let mut digits = Vec::with_capacity(k);
    let mut r = frac.clone();
    let nb = Rational::from_integer(BigInt::from(base));
    for _ in 0..k {
        r *= &nb;
        let d = r.floor();
        r -= &d;
        digits.push(d.to_integer().to_i64().expect("digit"));
    }
    (digits, r)
}

pub fn intersect_shift(ds: &DigitSet, shift: &Rational, k: usize, budget: u64) -> Result<TightLevel> {
    let (h0, frac) = split_shift(shift);
    let (digits, eps) = digits_of_frac(&frac, ds.base(), k);
    let (pairs, _) = refine(ds, h0, &digits, budget)?;
    Ok(tight_from_pairs(ds, k, &pairs, &eps))
}

fn tight_from_pairs(ds: &DigitSet, k: usize, pairs: &[Pair], eps: &Rational) -> TightLevel {
    let nk = radix::pow_int(ds.base(), k);
    let (zero, one) = (Rational::zero(), Rational::one());
    let mut pieces = Vec::new();
    for p in pairs {
        let piece = match p.d {
            0 => Some((cell(p.j, &nk, eps, &one), CaseKind::Interval)),
            1 => Some((cell(p.j, &nk, &zero, eps), CaseKind::PotentialInterval)),
            _ if eps.is_zero() => Some((cell(p.j, &nk, &one, &one), CaseKind::PotentiallyEmpty)),
            _ => None,
        };
        if let Some((interval, case)) = piece {
            pieces.push(Piece { interval, case });
        }
    }
    pieces.sort_by(|a, b| a.interval.cmp(&b.interval));
    let tight = IntervalSet::merged(k, radix::scale(ds.base(), k), pieces.iter().map(|p| p.interval.clone()).collect());
    TightLevel { pieces, tight }
}

/// Case table for levels `0..=k` plus the exact tightened set at level `k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectLevel {
    pub cases: CaseTable,
    pub pieces: Vec<Piece>,
    pub tight: IntervalSet,
}

fn code_digits(code: &PeriodicCode, k: usize) -> Result<Vec<i64>> {
    let digits = code.digits(k);
    if digits.iter().any(|d| *d < 0) {
        return Err(Error::InvalidCode("oracle needs nonnegative digits".into()));
    }
    Ok(digits)
}

pub fn intersect_level(ds: &DigitSet, code: &PeriodicCode, k: usize, budget: u64) -> Result<IntersectLevel> {
    code.validate_for(ds)?;
    let digits = code_digits(code, k)?;
    let (pairs, cases) = refine(ds, 0, &digits, budget)?;
    let t = radix::value_of(code);
    let (h0, frac) = split_shift(&t);
    let (floor_digits, eps) = digits_of_frac(&frac, ds.base(), digits.len());
    let tl = if h0 == 0 && floor_digits == digits {
        tight_from_pairs(ds, digits.len(), &pairs, &eps)
    } else {
        let (p2, _) = refine(ds, h0, &floor_digits, budget)?;
        tight_from_pairs(ds, digits.len(), &p2, &eps)
    };
    Ok(IntersectLevel {
        cases,
        pieces: tl.pieces,
        tight: tl.tight,
    })
}

/// Offsets `η` of the `μ_t(k)` copies of `n^{-k}[C ∩ (C + ·)]` at level `k`.
pub fn offsets(ds: &DigitSet, code: &PeriodicCode, k: usize, budget: u64) -> Result<Vec<Rational>> {
    let trace = kernel::sigma_trace(ds, code, k)?;
    if trace.values.len() <= k {
        return Err(Error::UndecidedPrefix);
    }
    let sigma = trace.sigma(k);
    let digits = code_digits(code, k)?;
    let (pairs, _) = refine(ds, 0, &digits, budget)?;
    let nk = Rational::from_integer(radix::pow_int(ds.base(), k));
    let tail = radix::tail(code, k);
    let mut out: Vec<Rational> = match sigma {
        SigmaValue::PlusOne => pairs
            .iter()
            .filter(|p| p.d == 0)
            .map(|p| Rational::from_integer(BigInt::from(p.j)) / &nk)
            .collect(),
        SigmaValue::MinusOne => pairs
            .iter()
            .filter(|p| p.d == 1)
            .map(|p| (Rational::from_integer(BigInt::from(p.j)) - Rational::one() + &tail) / &nk)
            .collect(),
        _ => return Err(Error::SigmaNotPM(k)),
    };
    out.sort();
    out.dedup();
    Ok(out)
}

pub fn ln_rational(r: &Rational) -> f64 {
    fn ln_big(b: &BigInt) -> f64 {
        let bits = b.bits();
        if bits < 1000 {
            b.to_f64().unwrap().ln()
        } else {
            let shift = bits - 60;
            (b >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
        }
    }
    ln_big(r.numer()) - ln_big(r.denom())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxRow {
    pub k: usize,
    #[serde(with = "radix::count_serde")]
    pub count: num_bigint::BigUint,
    #[serde(with = "radix::rat_serde")]
    pub ell: Rational,
    /// Tight-interval count from the oracle, when within budget.
    pub oracle_count: Option<u64>,
    /// `log(count) / −log(ell)`; absent at `k = 0`.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCount {
    pub rows: Vec<BoxRow>,
    /// Least-squares slope of `log count` against `−log ell` over `k ∈ [⌈kmax/2⌉, kmax]`.
    pub regression_slope: f64,
}

pub fn boxcount_curve(ds: &DigitSet, code: &PeriodicCode, kmax: usize, budget: u64) -> Result<BoxCount> {
    let trace = kernel::sigma_trace(ds, code, kmax)?;
    if trace.values.len() <= kmax {
        return Err(Error::UndecidedPrefix);
    }
    let mut rows = Vec::new();
    for k in 0..=kmax {
        let count = trace.mu[k].clone().ok_or(Error::SigmaNotPM(k))?;
        let ell = kernel::ell(ds, code, k)?;
        let oracle_count = match intersect_level(ds, code, k, budget) {
            Ok(il) => Some(il.tight.intervals.iter().filter(|iv| !iv.is_point()).count() as u64),
            Err(Error::BudgetExceeded { .. }) => None,
            Err(e) => return Err(e),
        };
        let slope = (k > 0).then(|| ln_big_uint(&count) / -ln_rational(&ell));
        rows.push(BoxRow {
            k,
            count,
            ell,
            oracle_count,
            slope,
        });
    }
    let lo = kmax.div_ceil(2).max(1);
    let pts: Vec<(f64, f64)> = rows[lo..]
        .iter()
        .map(|r| (-ln_rational(&r.ell), ln_big_uint(&r.count)))
        .collect();
    Ok(BoxCount {
        rows,
        regression_slope: least_squares_slope(&pts),
    })
}

fn ln_big_uint(b: &num_bigint::BigUint) -> f64 {
    ln_rational(&Rational::from_integer(BigInt::from(b.clone())))
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    if pts.len() < 2 {
        return pts.first().map_or(f64::NAN, |(x, y)| y / x);
    }
    let nf = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Float view used by emitters.
pub fn interval_floats(iv: &Interval) -> (f64, f64) {
    (rational_to_f64(&iv.lo), rational_to_f64(&iv.hi))
}
