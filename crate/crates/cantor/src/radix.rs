//! Eventually periodic base-n digit strings and their exact values.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::digitset::DigitSet;
use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Digit alphabet a code is drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alphabet {
    Nary,
    Delta,
    DeltaPlus,
    DOnly,
}

impl Alphabet {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "nary" => Ok(Alphabet::Nary),
            "delta" => Ok(Alphabet::Delta),
            "delta_plus" => Ok(Alphabet::DeltaPlus),
            "d_only" => Ok(Alphabet::DOnly),
            other => Err(Error::Parse(format!("unknown alphabet '{other}'"))),
        }
    }

    fn allows_negative(self) -> bool {
        self == Alphabet::Delta
    }
}

/// `0.t_1…t_a (t_{a+1}…t_{a+p})` in base `n`.
///
/// An empty period marks a prefix-only code standing for an unknown
/// continuation (used for irrational inputs).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawCode", into = "RawCode")]
pub struct PeriodicCode {
    base: i64,
    alphabet: Alphabet,
    preperiod: Vec<i64>,
    period: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct RawCode {
    base: i64,
    alphabet: Alphabet,
    preperiod: Vec<i64>,
    period: Vec<i64>,
    #[serde(default = "yes")]
    complete: bool,
}

fn yes() -> bool {
    true
}

impl TryFrom<RawCode> for PeriodicCode {
    type Error = Error;
    fn try_from(raw: RawCode) -> Result<Self> {
        if raw.period.is_empty() {
            PeriodicCode::prefix(raw.base, raw.alphabet, raw.preperiod)
        } else {
            PeriodicCode::new(raw.base, raw.alphabet, raw.preperiod, raw.period)
        }
    }
}

impl From<PeriodicCode> for RawCode {
    fn from(c: PeriodicCode) -> Self {
        let complete = !c.period.is_empty();
        RawCode {
            base: c.base,
            alphabet: c.alphabet,
            preperiod: c.preperiod,
            period: c.period,
            complete,
        }
    }
}

impl PeriodicCode {
    /// Builds the canonical form: primitive period, minimal preperiod and,
    /// for n-ary codes, no trailing run of `n−1` unless the value is 1.
    pub fn new(base: i64, alphabet: Alphabet, preperiod: Vec<i64>, period: Vec<i64>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidCode("empty period; use a prefix code".into()));
        }
        let mut code = PeriodicCode {
            base,
            alphabet,
            preperiod,
            period,
        };
        code.check_range()?;
        code.normalize();
        Ok(code)
    }

    /// A finite prefix of an unknown infinite expansion.
    pub fn prefix(base: i64, alphabet: Alphabet, digits: Vec<i64>) -> Result<Self> {
        let code = PeriodicCode {
            base,
            alphabet,
            preperiod: digits,
            period: Vec::new(),
        };
        code.check_range()?;
        Ok(code)
    }

    fn check_range(&self) -> Result<()> {
        if self.base < 3 {
            return Err(Error::InvalidCode(format!("base {} < 3", self.base)));
        }
        let lo = if self.alphabet.allows_negative() {
            -(self.base - 1)
        } else {
            0
        };
        for &d in self.preperiod.iter().chain(&self.period) {
            if d < lo || d > self.base - 1 {
                return Err(Error::InvalidCode(format!(
                    "digit {d} outside the {:?} range for base {}",
                    self.alphabet, self.base
                )));
            }
        }
        Ok(())
    }

    fn normalize(&mut self) {
        let p = self.period.len();
        if let Some(d) = (1..=p).find(|d| p % d == 0 && (0..p).all(|i| self.period[i] == self.period[i % d])) {
            self.period.truncate(d);
        }
        while let Some(&last) = self.preperiod.last() {
            if last != *self.period.last().unwrap() {
                break;
            }
            self.preperiod.pop();
            self.period.rotate_right(1);
        }
        if self.alphabet == Alphabet::Nary && self.period == [self.base - 1] {
            if let Some(i) = self.preperiod.iter().rposition(|&d| d < self.base - 1) {
                self.preperiod.truncate(i + 1);
                self.preperiod[i] += 1;
                self.period = vec![0];
                while self.preperiod.last() == Some(&0) {
                    self.preperiod.pop();
                }
            }
        }
    }

    /// Checks alphabet membership against a digit set.
    pub fn validate_for(&self, ds: &DigitSet) -> Result<()> {
        if ds.base() != self.base {
            return Err(Error::InvalidCode(format!(
                "code base {} differs from digit set base {}",
                self.base,
                ds.base()
            )));
        }
        let ok = |d: i64| match self.alphabet {
            Alphabet::Nary => (0..ds.base()).contains(&d),
            Alphabet::Delta => ds.in_delta(d),
            Alphabet::DeltaPlus => d >= 0 && ds.in_delta(d),
            Alphabet::DOnly => ds.contains(d),
        };
        match self.preperiod.iter().chain(&self.period).find(|d| !ok(**d)) {
            Some(d) => Err(Error::InvalidCode(format!("digit {d} not in the {:?} alphabet", self.alphabet))),
            None => Ok(()),
        }
    }

    pub fn base(&self) -> i64 {
        self.base
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn preperiod(&self) -> &[i64] {
        &self.preperiod
    }

    pub fn period(&self) -> &[i64] {
        &self.period
    }

    pub fn is_prefix(&self) -> bool {
        self.period.is_empty()
    }

    /// Terminating n-ary expansion (period `0`).
    pub fn is_finite(&self) -> bool {
        self.period == [0]
    }

    /// Number of digits known: infinite codes report `None`.
    pub fn known_len(&self) -> Option<usize> {
        self.is_prefix().then_some(self.preperiod.len())
    }

    /// Digit `t_j` for `j ≥ 1`; `None` past the end of a prefix code.
    pub fn digit_at(&self, j: usize) -> Option<i64> {
        assert!(j >= 1, "digits are indexed from 1");
        if j <= self.preperiod.len() {
            Some(self.preperiod[j - 1])
        } else if self.period.is_empty() {
            None
        } else {
            Some(self.period[(j - self.preperiod.len() - 1) % self.period.len()])
        }
    }

    /// The first `k` digits, unrolling the period.
    pub fn digits(&self, k: usize) -> Vec<i64> {
        (1..=k).map_while(|j| self.digit_at(j)).collect()
    }

    pub fn with_alphabet(&self, alphabet: Alphabet) -> Result<Self> {
        if self.is_prefix() {
            PeriodicCode::prefix(self.base, alphabet, self.preperiod.clone())
        } else {
            PeriodicCode::new(self.base, alphabet, self.preperiod.clone(), self.period.clone())
        }
    }

    /// Applies `f` to every digit.
    pub fn map_digits(&self, alphabet: Alphabet, f: impl Fn(i64) -> i64) -> Result<Self> {
        let pre = self.preperiod.iter().map(|d| f(*d)).collect();
        if self.is_prefix() {
            PeriodicCode::prefix(self.base, alphabet, pre)
        } else {
            PeriodicCode::new(self.base, alphabet, pre, self.period.iter().map(|d| f(*d)).collect())
        }
    }
}

fn digits_to_string(digits: &[i64], dotted: bool) -> String {
    let parts: Vec<String> = digits.iter().map(|d| d.to_string()).collect();
    parts.join(if dotted { "." } else { "" })
}

impl fmt::Display for PeriodicCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dotted = self.preperiod.iter().chain(&self.period).any(|d| !(0..10).contains(d));
        write!(f, "{}", digits_to_string(&self.preperiod, dotted))?;
        if !self.period.is_empty() {
            write!(f, "({})", digits_to_string(&self.period, dotted))?;
        }
        Ok(())
    }
}

fn parse_digits(s: &str, dotted: bool) -> Result<Vec<i64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if dotted {
        s.split('.')
            .map(|tok| {
                tok.trim()
                    .parse::<i64>()
                    .map_err(|_| Error::Parse(format!("bad digit '{tok}'")))
            })
            .collect()
    } else {
        s.chars()
            .map(|c| {
                c.to_digit(10)
                    .map(i64::from)
                    .ok_or_else(|| Error::Parse(format!("bad digit '{c}'")))
            })
            .collect()
    }
}

/// Parses `PREPERIOD(PERIOD)`; without parentheses the digits form a prefix code.
pub fn parse_code(s: &str, base: i64, alphabet: Alphabet) -> Result<PeriodicCode> {
    let s = s.trim();
    let dotted = s.contains('.') || s.contains('-');
    match s.find('(') {
        None => PeriodicCode::prefix(base, alphabet, parse_digits(s, dotted)?),
        Some(open) => {
            let rest = &s[open + 1..];
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| Error::Parse(format!("missing ')' in '{s}'")))?;
            let pre = parse_digits(s[..open].trim_end_matches('.'), dotted)?;
            let per = parse_digits(inner, dotted)?;
            if per.is_empty() {
                return Err(Error::Parse("empty period".into()));
            }
            PeriodicCode::new(base, alphabet, pre, per)
        }
    }
}

/// A parsed translation amount; negative rationals are folded to `|t|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedNumber {
    pub code: PeriodicCode,
    pub negative: bool,
}

/// Accepts either the digit grammar or a rational `p/q`.
pub fn parse_number(s: &str, ds: &DigitSet, alphabet: Alphabet) -> Result<ParsedNumber> {
    let s = s.trim();
    if s.contains('/') {
        let value = parse_rational(s)?;
        let negative = value.is_negative();
        let code = code_from_rational(&value.abs(), ds.base(), alphabet, Some(ds))?;
        Ok(ParsedNumber { code, negative })
    } else {
        let code = parse_code(s, ds.base(), alphabet)?;
        code.validate_for(ds)?;
        Ok(ParsedNumber {
            code,
            negative: false,
        })
    }
}

pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::Parse(format!("bad rational '{s}'"));
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(Rational::new(p, q))
}

/// `p/q`, or `p` for integers.
pub fn fmt_rational(r: &Rational) -> String {
    r.to_string()
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            let shift = r.denom().bits().max(r.numer().bits()) as i64 - 60;
            let shift = shift.max(0) as usize;
            let a = (r.numer() >> shift).to_f64().unwrap_or(0.0);
            let b = (r.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
            a / b
        }
    }
}

pub fn pow_int(base: i64, k: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), k)
}

/// `n^{-k}` exactly.
pub fn scale(base: i64, k: usize) -> Rational {
    Rational::new(BigInt::one(), pow_int(base, k))
}

fn digits_value(base: i64, digits: &[i64]) -> BigInt {
    digits
        .iter()
        .fold(BigInt::zero(), |acc, d| acc * base + BigInt::from(*d))
}

/// Exact value `Σ t_k n^{-k}`; for a prefix code, the value of the prefix.
pub fn value_of(code: &PeriodicCode) -> Rational {
    let n = code.base;
    let a = code.preperiod.len();
    let pre = Rational::new(digits_value(n, &code.preperiod), pow_int(n, a));
    if code.period.is_empty() {
        return pre;
    }
    let p = code.period.len();
    let per = Rational::new(
        digits_value(n, &code.period),
        (pow_int(n, p) - 1) * pow_int(n, a),
    );
    pre + per
}

/// `⌊t⌋_k = Σ_{j≤k} t_j n^{-j}`.
pub fn truncate(code: &PeriodicCode, k: usize) -> Rational {
    let digits = code.digits(k);
    Rational::new(digits_value(code.base, &digits), pow_int(code.base, digits.len()))
}

/// Integer `n^k ⌊t⌋_k`.
pub fn truncate_int(code: &PeriodicCode, k: usize) -> BigInt {
    digits_value(code.base, &code.digits(k))
}

/// Tail value `n^k (t − ⌊t⌋_k)`, i.e. the value of the shifted code.
pub fn tail(code: &PeriodicCode, k: usize) -> Rational {
    let t = value_of(code);
    (t - truncate(code, k)) * Rational::from_integer(pow_int(code.base, k))
}

/// The code shifted left by `k` digits.
pub fn shift(code: &PeriodicCode, k: usize) -> PeriodicCode {
    if k <= code.preperiod.len() {
        let mut c = code.clone();
        c.preperiod.drain(..k);
        return c;
    }
    if code.period.is_empty() {
        return PeriodicCode::prefix(code.base, code.alphabet, Vec::new()).expect("empty prefix");
    }
    let r = (k - code.preperiod.len()) % code.period.len();
    let mut period = code.period.clone();
    period.rotate_left(r);
    PeriodicCode::new(code.base, code.alphabet, Vec::new(), period).expect("rotation of a valid period")
}

/// Canonical code for a rational value in the requested alphabet.
pub fn code_from_rational(value: &Rational, base: i64, alphabet: Alphabet, ds: Option<&DigitSet>) -> Result<PeriodicCode> {
    if base < 3 {
        return Err(Error::InvalidCode(format!("base {base} < 3")));
    }
    match alphabet {
        Alphabet::Nary => nary_code(value, base),
        _ => {
            let ds = ds.ok_or_else(|| Error::NotRepresentable("restricted alphabet needs a digit set".into()))?;
            let allowed: Vec<i64> = match alphabet {
                Alphabet::Delta => ds.differences().deltas,
                Alphabet::DeltaPlus => ds.differences().deltas_nonneg,
                _ => ds.digits().to_vec(),
            };
            search_code(value, base, alphabet, &allowed)
        }
    }
}

fn nary_code(value: &Rational, base: i64) -> Result<PeriodicCode> {
    if value.is_negative() || *value > Rational::one() {
        return Err(Error::NotRepresentable(format!("{value} outside [0,1]")));
    }
    if value.is_one() {
        return PeriodicCode::new(base, Alphabet::Nary, vec![], vec![base - 1]);
    }
    let den = value.denom().clone();
    let mut r = value.numer().clone();
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let mut digits = Vec::new();
    loop {
        if let Some(&start) = seen.get(&r) {
            let period = digits.split_off(start);
            return PeriodicCode::new(base, Alphabet::Nary, digits, period);
        }
        seen.insert(r.clone(), digits.len());
        let (d, rem) = (r * base).div_rem(&den);
        digits.push(d.to_i64().expect("digit below base"));
        r = rem;
    }
}

const SEARCH_LIMIT: usize = 1_000_000;

/// Depth-first search over allowed digits with tail-range pruning; a state is
/// the scaled remainder, so a repeated state on the current path closes a cycle.
fn search_code(value: &Rational, base: i64, alphabet: Alphabet, allowed: &[i64]) -> Result<PeriodicCode> {
    let mut order = allowed.to_vec();
    order.sort_by_key(|a| (a.abs(), *a < 0));
    let nm1 = Rational::from_integer(BigInt::from(base - 1));
    let lo = Rational::from_integer(BigInt::from(*allowed.iter().min().unwrap())) / &nm1;
    let hi = Rational::from_integer(BigInt::from(*allowed.iter().max().unwrap())) / &nm1;
    let fail = || Error::NotRepresentable(format!("{value} has no {alphabet:?} expansion in base {base}"));
    if *value < lo || *value > hi {
        return Err(fail());
    }
    let nb = Rational::from_integer(BigInt::from(base));
    let mut on_path: HashMap<Rational, usize> = HashMap::new();
    let mut dead: std::collections::HashSet<Rational> = std::collections::HashSet::new();
    // (state, next index into `order`, digit chosen to reach the state)
    let mut stack: Vec<(Rational, usize)> = vec![(value.clone(), 0)];
    let mut path_digits: Vec<i64> = Vec::new();
    on_path.insert(value.clone(), 0);
    let mut visited = 0usize;
    while let Some((state, idx)) = stack.last().cloned() {
        visited += 1;
        if visited > SEARCH_LIMIT {
            return Err(Error::NotRepresentable("search limit reached".into()));
        }
        if idx >= order.len() {
            stack.pop();
            on_path.remove(&state);
            dead.insert(state);
            path_digits.pop();
            continue;
        }
        stack.last_mut().unwrap().1 += 1;
        let a = order[idx];
        let next = &state * &nb - Rational::from_integer(BigInt::from(a));
        if next < lo || next > hi || dead.contains(&next) {
            continue;
        }
        if let Some(&start) = on_path.get(&next) {
            let mut digits = path_digits.clone();
            digits.push(a);
            let period = digits.split_off(start);
            return PeriodicCode::new(base, alphabet, digits, period);
        }
        on_path.insert(next.clone(), stack.len());
        path_digits.push(a);
        stack.push((next, 0));
    }
    Err(fail())
}

/// Digitwise absolute value of a Δ code.
pub fn abs_canonicalize(ds: &DigitSet, code: &PeriodicCode) -> Result<PeriodicCode> {
    ds.require_sparse()?;
    code.validate_for(ds)?;
    code.map_digits(Alphabet::DeltaPlus, |d| d.abs())
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod rat_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(fmt_rational))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod opt {
        use super::*;
        pub fn serialize<S: Serializer>(v: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
            match v {
                Some(r) => s.serialize_some(&fmt_rational(r)),
                None => s.serialize_none(),
            }
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
            Option::<String>::deserialize(d)?
                .map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
                .transpose()
        }
    }

    pub mod opt_vec {
        use super::*;
        pub fn serialize<S: Serializer>(v: &Option<Vec<Rational>>, s: S) -> std::result::Result<S::Ok, S::Error> {
            match v {
                Some(v) => s.serialize_some(&v.iter().map(fmt_rational).collect::<Vec<_>>()),
                None => s.serialize_none(),
            }
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Rational>>, D::Error> {
            Option::<Vec<String>>::deserialize(d)?
                .map(|v| {
                    v.iter()
                        .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                        .collect()
                })
                .transpose()
        }
    }
}

/// Serde adapters writing big counts as decimal strings.
pub mod count_serde {
    use num_bigint::BigUint;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigUint, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }

    pub mod opt_vec {
        use super::*;
        pub fn serialize<S: Serializer>(v: &[Option<BigUint>], s: S) -> std::result::Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|x| x.as_ref().map(|b| b.to_string())))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Option<BigUint>>, D::Error> {
            Vec::<Option<String>>::deserialize(d)?
                .into_iter()
                .map(|x| x.map(|s| s.parse().map_err(serde::de::Error::custom)).transpose())
                .collect()
        }
    }
}
