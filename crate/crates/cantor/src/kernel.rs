//! The interval-case automaton: `ξ`, `σ_t`, `μ_t`, `ℓ_k` and the recoding `ψ`.
//!
//! At level `k` every interval `J` of `C_k` is compared with the translate
//! `C_k + ⌊t⌋_k`. Writing `ε = t − ⌊t⌋_k ∈ [0, n^{-k})`, the exact translate
//! `C_k + t` sits `ε` to the right, so only two kinds of cell pairs can
//! overlap in positive length: `J` itself in the translate (interval case) and
//! `J − n^{-k}` in the translate (potential interval case). `σ_t(k)` records
//! which kinds occur: `1` interval only, `−1` potential only, `i` both, `0`
//! neither.

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::digitset::DigitSet;
use crate::error::{Error, Result};
use crate::radix::{self, Alphabet, PeriodicCode, Rational};

/// A value in `{0, ±1, ±i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SigmaValue {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    PlusOne,
    #[serde(rename = "-1")]
    MinusOne,
    #[serde(rename = "i")]
    I,
    #[serde(rename = "-i")]
    MinusI,
}

impl SigmaValue {
    fn to_complex(self) -> (i8, i8) {
        match self {
            SigmaValue::Zero => (0, 0),
            SigmaValue::PlusOne => (1, 0),
            SigmaValue::MinusOne => (-1, 0),
            SigmaValue::I => (0, 1),
            SigmaValue::MinusI => (0, -1),
        }
    }

    fn from_complex(c: (i8, i8)) -> Self {
        match c {
            (0, 0) => SigmaValue::Zero,
            (1, 0) => SigmaValue::PlusOne,
            (-1, 0) => SigmaValue::MinusOne,
            (0, 1) => SigmaValue::I,
            (0, -1) => SigmaValue::MinusI,
            _ => unreachable!("product of units stays a unit"),
        }
    }

    pub fn mul(self, other: SigmaValue) -> SigmaValue {
        let (a, b) = self.to_complex();
        let (c, d) = other.to_complex();
        SigmaValue::from_complex((a * c - b * d, a * d + b * c))
    }

    pub fn is_pm_one(self) -> bool {
        matches!(self, SigmaValue::PlusOne | SigmaValue::MinusOne)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            SigmaValue::Zero => "0",
            SigmaValue::PlusOne => "1",
            SigmaValue::MinusOne => "-1",
            SigmaValue::I => "i",
            SigmaValue::MinusI => "-i",
        }
    }
}

impl fmt::Display for SigmaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Transition table; `h` is used through `|h|`.
pub fn xi(state: SigmaValue, digit: i64, ds: &DigitSet) -> SigmaValue {
    let h = digit.abs();
    let n = ds.base();
    let in_d = |x: i64| ds.in_delta(x);
    let pick = |a: bool, b: bool, only_a: SigmaValue, only_b: SigmaValue, both: SigmaValue| match (a, b) {
        (true, false) => only_a,
        (false, true) => only_b,
        (true, true) => both,
        (false, false) => SigmaValue::Zero,
    };
    use SigmaValue::*;
    match state {
        Zero => Zero,
        PlusOne => pick(in_d(h), in_d(h + 1), PlusOne, MinusOne, I),
        MinusOne => pick(in_d(n - h), in_d(n - 1 - h), MinusOne, PlusOne, MinusI),
        I | MinusI => {
            debug_assert_eq!(state, I, "sigma never reaches -i");
            pick(in_d(h) || in_d(n - h), in_d(h + 1) || in_d(n - 1 - h), MinusI, I, PlusOne)
        }
    }
}

/// Growth factor of `μ` from level `k` to `k+1`.
pub fn mu_factor(state: SigmaValue, digit: i64, ds: &DigitSet) -> Option<u64> {
    let n = ds.base();
    let count = |f: &dyn Fn(i64) -> bool| ds.digits().iter().filter(|d| f(**d)).count() as u64;
    match state {
        SigmaValue::PlusOne => Some(count(&|d| {
            let x = d - digit;
            ds.contains(x) || ds.contains(x - 1)
        })),
        SigmaValue::MinusOne => Some(count(&|d| {
            let x = d - n + digit;
            ds.contains(x) || ds.contains(x + 1)
        })),
        _ => None,
    }
}

/// Per-level counts of the four ways a cell of `C_k` meets the translate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseCounts {
    pub level: usize,
    pub interval: u64,
    pub potential_interval: u64,
    pub potentially_empty: u64,
    /// Cells meeting nothing; `m^k` minus the touched cells.
    pub empty: String,
}

impl CaseCounts {
    /// The `σ` value these counts imply.
    pub fn implied_sigma(&self) -> SigmaValue {
        match (self.interval > 0, self.potential_interval > 0) {
            (true, false) => SigmaValue::PlusOne,
            (false, true) => SigmaValue::MinusOne,
            (true, true) => SigmaValue::I,
            (false, false) => SigmaValue::Zero,
        }
    }
}

pub type CaseTable = Vec<CaseCounts>;

/// `σ_t(0..=K)` and `μ_t(0..=K)` with period information.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SigmaTrace {
    pub values: Vec<SigmaValue>,
    /// `None` once an earlier level left `{±1}`.
    #[serde(with = "radix::count_serde::opt_vec")]
    pub mu: Vec<Option<BigUint>>,
    /// `(k₀, q)`: minimal start and minimal period of the eventually periodic `σ`.
    pub eventual_period: Option<(usize, usize)>,
    /// `p` or `2p` (`p` the code period) when one of them is a period of `σ` from `k₀` on.
    pub certified_period: Option<usize>,
    /// Over every level for complete codes, over the computed depth for prefixes.
    pub all_pm_one: bool,
}

impl SigmaTrace {
    pub fn sigma(&self, k: usize) -> SigmaValue {
        self.values[k]
    }
}

fn require_nonneg(code: &PeriodicCode) -> Result<()> {
    if code.preperiod().iter().chain(code.period()).any(|d| *d < 0) {
        return Err(Error::InvalidCode(
            "sigma needs nonnegative digits; take absolute values of a delta code first".into(),
        ));
    }
    Ok(())
}

fn sigma_values(ds: &DigitSet, code: &PeriodicCode, upto: usize) -> Vec<SigmaValue> {
    let mut values = Vec::with_capacity(upto + 1);
    let mut s = SigmaValue::PlusOne;
    values.push(s);
    for j in 1..=upto {
        let Some(d) = code.digit_at(j) else { break };
        s = xi(s, d, ds).mul(s);
        assert_ne!(s, SigmaValue::MinusI, "sigma left its state set");
        values.push(s);
    }
    values
}

/// Exact periodic structure of `σ` for a complete code.
struct SigmaPeriod {
    repeat_start: usize,
    min_start: usize,
    min_period: usize,
    certified: Option<usize>,
}

fn sigma_period(ds: &DigitSet, code: &PeriodicCode) -> (Vec<SigmaValue>, SigmaPeriod) {
    let a = code.preperiod().len();
    let p = code.period().len();
    let horizon = a + 10 * p + 2;
    let values = sigma_values(ds, code, horizon);
    let mut seen = std::collections::HashMap::new();
    let (mut k1, mut len) = (a, p);
    for k in a..=horizon {
        if let Some(&prev) = seen.get(&(values[k], (k - a) % p)) {
            k1 = prev;
            len = k - prev;
            break;
        }
        seen.insert((values[k], (k - a) % p), k);
    }
    let is_period = |q: usize, from: usize| (from..from + len).all(|k| values[k] == values[k + q]);
    let min_period = (1..=len).find(|q| len % q == 0 && is_period(*q, k1)).unwrap_or(len);
    let mut min_start = k1;
    while min_start > 0 && values[min_start - 1] == values[min_start - 1 + min_period] {
        min_start -= 1;
    }
    let certified = [p, 2 * p].into_iter().find(|q| is_period(*q, k1));
    (
        values,
        SigmaPeriod {
            repeat_start: k1,
            min_start,
            min_period,
            certified,
        },
    )
}

pub fn sigma_trace(ds: &DigitSet, code: &PeriodicCode, depth: usize) -> Result<SigmaTrace> {
    code.validate_for(ds)?;
    require_nonneg(code)?;
    let (mut values, period) = if code.is_prefix() {
        (sigma_values(ds, code, depth), None)
    } else {
        let (v, p) = sigma_period(ds, code);
        (v, Some(p))
    };
    let depth = if code.is_prefix() {
        depth.min(values.len() - 1)
    } else {
        depth
    };
    if values.len() <= depth {
        values = sigma_values(ds, code, depth);
    }
    let all_pm_one = match &period {
        Some(p) => values[..p.min_start + p.min_period].iter().all(|s| s.is_pm_one()),
        None => values[..=depth].iter().all(|s| s.is_pm_one()),
    };
    values.truncate(depth + 1);
    let mut mu = Vec::with_capacity(depth + 1);
    let mut cur = Some(BigUint::one());
    mu.push(cur.clone());
    for k in 0..depth {
        cur = match (cur, mu_factor(values[k], code.digit_at(k + 1).unwrap(), ds)) {
            (Some(m), Some(f)) => Some(m * f),
            _ => None,
        };
        mu.push(cur.clone());
    }
    Ok(SigmaTrace {
        values,
        mu,
        eventual_period: period.as_ref().map(|p| (p.min_start, p.min_period)),
        certified_period: period.as_ref().and_then(|p| p.certified),
        all_pm_one,
    })
}

/// Common length of the surviving intervals at level `k`.
pub fn ell(ds: &DigitSet, code: &PeriodicCode, k: usize) -> Result<Rational> {
    let trace = sigma_trace(ds, code, k)?;
    if trace.values.len() <= k {
        return Err(Error::UndecidedPrefix);
    }
    let eps = radix::tail(code, k) * radix::scale(ds.base(), k);
    let len = match trace.sigma(k) {
        SigmaValue::PlusOne => radix::scale(ds.base(), k) - eps,
        SigmaValue::MinusOne => eps,
        _ => return Err(Error::SigmaNotPM(k)),
    };
    if len.is_zero() {
        return Err(Error::FiniteRepresentation);
    }
    Ok(len)
}

/// `ψ(t)` and the offset `c` with `C∩(C+t) = C∩(C+ψ(t)) − c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiResult {
    pub y: PeriodicCode,
    #[serde(with = "radix::rat_serde::opt")]
    pub offset: Option<Rational>,
    pub sigma_period: Option<usize>,
}

fn psi_digit(prev: SigmaValue, cur: SigmaValue, t: i64, n: i64) -> i64 {
    use SigmaValue::*;
    match (prev, cur) {
        (PlusOne, PlusOne) => t,
        (PlusOne, MinusOne) => t + 1,
        (MinusOne, MinusOne) => n - 1 - t,
        (MinusOne, PlusOne) => n - t,
        _ => unreachable!("checked to be +-1"),
    }
}

/// Contribution of a sign change at level `k` to the offset `c`.
fn change_term(code: &PeriodicCode, k: usize, now: SigmaValue) -> Rational {
    let t_k = radix::tail(code, k);
    let s = radix::scale(code.base(), k);
    match now {
        SigmaValue::MinusOne => s * (Rational::one() - t_k),
        _ => s * t_k,
    }
}

pub fn psi(ds: &DigitSet, code: &PeriodicCode) -> Result<PsiResult> {
    code.validate_for(ds)?;
    require_nonneg(code)?;
    let n = ds.base();
    if code.is_prefix() {
        let values = sigma_values(ds, code, code.preperiod().len());
        if let Some(k) = values.iter().position(|s| !s.is_pm_one()) {
            return Err(Error::SigmaNotPM(k));
        }
        let digits = (1..values.len())
            .map(|j| psi_digit(values[j - 1], values[j], code.digit_at(j).unwrap(), n))
            .collect();
        return Ok(PsiResult {
            y: PeriodicCode::prefix(n, Alphabet::DeltaPlus, digits)?,
            offset: None,
            sigma_period: None,
        });
    }
    if code.is_finite() {
        return Err(Error::FiniteRepresentation);
    }
    let (values, period) = sigma_period(ds, code);
    let q = period.certified.ok_or(Error::SigmaNotPM(period.repeat_start))?;
    let s = period.repeat_start;
    if let Some(k) = values[..=s + q].iter().position(|v| !v.is_pm_one()) {
        return Err(Error::SigmaNotPM(k));
    }
    let y_at = |j: usize| psi_digit(values[j - 1], values[j], code.digit_at(j).unwrap(), n);
    let pre: Vec<i64> = (1..=s).map(y_at).collect();
    let per: Vec<i64> = (s + 1..=s + q).map(y_at).collect();
    let y = PeriodicCode::new(n, Alphabet::DeltaPlus, pre, per)?;

    let mut head = Rational::zero();
    let mut window = Rational::zero();
    for k in 1..=s + q {
        if values[k] != values[k - 1] {
            let term = change_term(code, k, values[k]);
            if k <= s {
                head += term;
            } else {
                window += term;
            }
        }
    }
    let ratio = Rational::one() - radix::scale(n, q);
    let offset = head + window / ratio;
    Ok(PsiResult {
        y,
        offset: Some(offset),
        sigma_period: Some(q),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radix::parse_code;
    use SigmaValue::*;

    fn ds(n: i64, d: &[i64]) -> DigitSet {
        DigitSet::new(n, d.to_vec()).unwrap()
    }

    fn code(s: &str, n: i64) -> PeriodicCode {
        parse_code(s, n, Alphabet::Nary).unwrap()
    }

    fn r(p: i64, q: i64) -> Rational {
        Rational::new(p.into(), q.into())
    }

    #[test]
    fn xi_table() {
        let mtc = ds(3, &[0, 2]);
        assert_eq!(xi(PlusOne, 2, &mtc), PlusOne);
        assert_eq!(xi(PlusOne, 1, &mtc), MinusOne);
        assert_eq!(xi(PlusOne, -2, &mtc), PlusOne);
        for h in -2..=2 {
            assert_eq!(xi(Zero, h, &mtc), Zero);
        }
        let e312 = ds(17, &[0, 2, 4, 7, 10, 13]);
        assert_eq!(xi(PlusOne, 2, &e312), I);
        assert_eq!(xi(I, 2, &e312), PlusOne);
    }

    #[test]
    fn units() {
        assert_eq!(I.mul(I), MinusOne);
        assert_eq!(MinusOne.mul(MinusI), I);
        assert_eq!(Zero.mul(I), Zero);
    }

    #[test]
    fn trace_examples() {
        let mtc = ds(3, &[0, 2]);
        let tr = sigma_trace(&mtc, &code("(20)", 3), 4).unwrap();
        assert!(tr.values.iter().all(|s| *s == PlusOne));
        assert_eq!(tr.mu[1], Some(BigUint::one()));
        assert_eq!(tr.mu[2], Some(BigUint::from(2u32)));
        assert_eq!(tr.certified_period, Some(2));
        assert_eq!(tr.eventual_period, Some((0, 1)));
        let tr = sigma_trace(&ds(10, &[0, 1, 2, 6, 8]), &code("(2)", 10), 6).unwrap();
        assert!(tr.values.iter().all(|s| *s == PlusOne) && tr.all_pm_one);
        let tr = sigma_trace(&mtc, &code("(0)", 3), 5).unwrap();
        for k in 0..=5 {
            assert_eq!(tr.mu[k], Some(BigUint::from(1u32 << k)));
        }
    }

    #[test]
    fn example_with_i_states() {
        let d = ds(17, &[0, 2, 4, 7, 10, 13]);
        let tr = sigma_trace(&d, &code("(2)", 17), 8).unwrap();
        assert!(tr.values[1..].iter().all(|s| *s == I));
        assert_eq!(tr.mu[2], None);
        assert!(!tr.all_pm_one);
    }

    #[test]
    fn ell_examples() {
        assert_eq!(ell(&ds(3, &[0, 2]), &code("(20)", 3), 2).unwrap(), r(1, 36));
        assert_eq!(ell(&ds(10, &[0, 1, 2, 6, 8]), &code("(2)", 10), 1).unwrap(), r(7, 90));
        let d = ds(17, &[0, 2, 4, 7, 10, 13]);
        assert_eq!(ell(&d, &code("(2)", 17), 1), Err(Error::SigmaNotPM(1)));
    }

    #[test]
    fn psi_golden() {
        let d = ds(10, &[0, 2, 7, 9]);
        let res = psi(&d, &code("54(4728)", 10)).unwrap();
        assert_eq!(res.y.to_string(), "55(5272)");
        let c = res.offset.unwrap();
        assert!(c >= Rational::zero() && c <= r(1, 9));
        let tr = sigma_trace(&d, &res.y, 30).unwrap();
        assert!(tr.values.iter().all(|s| *s == PlusOne));
    }

    #[test]
    fn psi_identity_when_sigma_is_one() {
        let mtc = ds(3, &[0, 2]);
        let res = psi(&mtc, &code("(20)", 3)).unwrap();
        assert_eq!(res.y.to_string(), "(20)");
        assert_eq!(res.offset, Some(Rational::zero()));
    }

    #[test]
    fn psi_mtc_with_minus_states() {
        let mtc = ds(3, &[0, 2]);
        let t = code("(21)", 3);
        let tr = sigma_trace(&mtc, &t, 8).unwrap();
        assert!(tr.all_pm_one);
        let res = psi(&mtc, &t).unwrap();
        let back = sigma_trace(&mtc, &res.y, 16).unwrap();
        assert!(back.values.iter().all(|s| *s == PlusOne));
        assert!(psi(&mtc, &code("1(0)", 3)).is_err());
    }
}
