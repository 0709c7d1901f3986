//! Exact dimensions `log_N r` and measures `c·A^s`.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::intervals::ln_rational;
use crate::radix::{self, fmt_rational, Rational};

/// `s = log_base(count)`, stored with the largest common perfect-power root removed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDimension", into = "RawDimension")]
pub struct DimensionValue {
    count: BigUint,
    base: BigUint,
}

#[derive(Serialize, Deserialize)]
struct RawDimension {
    exact: String,
    #[serde(with = "radix::count_serde")]
    count: BigUint,
    #[serde(with = "radix::count_serde")]
    base: BigUint,
    float: f64,
}

impl TryFrom<RawDimension> for DimensionValue {
    type Error = String;
    fn try_from(raw: RawDimension) -> std::result::Result<Self, String> {
        if raw.count.is_zero() || raw.base < BigUint::from(2u8) {
            return Err("dimension needs count ≥ 1 and base ≥ 2".into());
        }
        Ok(DimensionValue::new(raw.count, raw.base))
    }
}

impl From<DimensionValue> for RawDimension {
    fn from(d: DimensionValue) -> Self {
        RawDimension {
            exact: d.exact(),
            float: d.float(),
            count: d.count,
            base: d.base,
        }
    }
}

/// `(root, exponent)` with `x = root^exponent` and `exponent` maximal.
fn perfect_power(x: &BigUint) -> (BigUint, u32) {
    if *x <= BigUint::one() {
        return (x.clone(), 1);
    }
    let bits = x.bits() as u32;
    for e in (2..=bits).rev() {
        let r = x.nth_root(e);
        if num_traits::pow(r.clone(), e as usize) == *x {
            return (r, e);
        }
    }
    (x.clone(), 1)
}

impl DimensionValue {
    pub fn new(count: impl Into<BigUint>, base: impl Into<BigUint>) -> Self {
        let (count, base) = (count.into(), base.into());
        assert!(!count.is_zero() && base >= BigUint::from(2u8));
        if count.is_one() {
            return DimensionValue {
                count,
                base: BigUint::from(2u8),
            };
        }
        let (r0, a) = perfect_power(&count);
        let (n0, b) = perfect_power(&base);
        let g = a.gcd(&b);
        DimensionValue {
            count: num_traits::pow(r0, (a / g) as usize),
            base: num_traits::pow(n0, (b / g) as usize),
        }
    }

    pub fn zero() -> Self {
        DimensionValue::new(1u32, 2u32)
    }

    pub fn count(&self) -> &BigUint {
        &self.count
    }

    pub fn base(&self) -> &BigUint {
        &self.base
    }

    /// `s` as a fraction when it is rational.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.count.is_one() {
            return Some(Rational::zero());
        }
        let (r0, a) = perfect_power(&self.count);
        let (n0, b) = perfect_power(&self.base);
        (r0 == n0).then(|| Rational::new(BigInt::from(a), BigInt::from(b)))
    }

    pub fn float(&self) -> f64 {
        let c = Rational::from_integer(BigInt::from(self.count.clone()));
        let b = Rational::from_integer(BigInt::from(self.base.clone()));
        ln_rational(&c) / ln_rational(&b)
    }

    pub fn exact(&self) -> String {
        match self.as_rational() {
            Some(r) => fmt_rational(&r),
            None => format!("log_{}({})", self.base, self.count),
        }
    }
}

impl std::fmt::Display for DimensionValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.exact())
    }
}

/// `coef · a^s` with `a > 0`, `coef > 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasure", into = "RawMeasure")]
pub struct MeasureValue {
    coef: Rational,
    a: Rational,
    s: DimensionValue,
}

#[derive(Serialize, Deserialize)]
struct RawMeasure {
    exact: String,
    #[serde(with = "radix::rat_serde")]
    coef: Rational,
    #[serde(with = "radix::rat_serde")]
    a: Rational,
    s: DimensionValue,
    float: f64,
}

impl TryFrom<RawMeasure> for MeasureValue {
    type Error = String;
    fn try_from(raw: RawMeasure) -> std::result::Result<Self, String> {
        if !raw.coef.is_positive() || !raw.a.is_positive() {
            return Err("measure parts must be positive".into());
        }
        Ok(MeasureValue::new(raw.coef, raw.a, raw.s))
    }
}

impl From<MeasureValue> for RawMeasure {
    fn from(m: MeasureValue) -> Self {
        RawMeasure {
            exact: m.exact(),
            float: m.float(),
            coef: m.coef,
            a: m.a,
            s: m.s,
        }
    }
}

fn strip_factor(x: &mut BigInt, p: &BigInt) -> i64 {
    let mut e = 0;
    while !x.is_zero() && (&*x % p).is_zero() {
        *x /= p;
        e += 1;
    }
    e
}

impl MeasureValue {
    /// Canonical form: every integer power of the dimension's base is moved out of `a`,
    /// using `N^{e·log_N r} = r^e`.
    pub fn new(coef: Rational, a: Rational, s: DimensionValue) -> Self {
        let n = BigInt::from(s.base.clone());
        let r = Rational::from_integer(BigInt::from(s.count.clone()));
        let (mut num, mut den) = (a.numer().clone(), a.denom().clone());
        let e = strip_factor(&mut num, &n) - strip_factor(&mut den, &n);
        let coef = coef * pow_signed(&r, e);
        let mut a = Rational::new(num, den);
        if s.count.is_one() {
            a = Rational::one();
        }
        if let Some(q) = s.as_rational().filter(|q| q.is_integer()) {
            let k = q.to_integer().to_i64().expect("small exponent");
            return MeasureValue {
                coef: coef * pow_signed(&a, k),
                a: Rational::one(),
                s,
            };
        }
        MeasureValue { coef, a, s }
    }

    pub fn coef(&self) -> &Rational {
        &self.coef
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn s(&self) -> &DimensionValue {
        &self.s
    }

    /// The value when it is rational in this form.
    pub fn as_rational(&self) -> Option<Rational> {
        self.a.is_one().then(|| self.coef.clone())
    }

    pub fn float(&self) -> f64 {
        (ln_rational(&self.coef) + self.s.float() * ln_rational(&self.a)).exp()
    }

    pub fn exact(&self) -> String {
        if self.a.is_one() {
            return fmt_rational(&self.coef);
        }
        let power = format!("({})^({})", fmt_rational(&self.a), self.s.exact());
        if self.coef.is_one() {
            power
        } else {
            format!("{}*{}", fmt_rational(&self.coef), power)
        }
    }
}

impl std::fmt::Display for MeasureValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.exact())
    }
}

fn pow_signed(x: &Rational, e: i64) -> Rational {
    let p = num_traits::pow(x.clone(), e.unsigned_abs() as usize);
    if e < 0 {
        p.recip()
    } else {
        p
    }
}

/// `H^s(C_{n,{a,b}}) = ((b−a)/(n−1))^s`, `s = log_n 2`.
pub fn measure_two_digit(n: u64, a: u64, b: u64) -> MeasureValue {
    assert!(n >= 3 && a < b && b < n);
    MeasureValue::new(
        Rational::one(),
        Rational::new(BigInt::from(b - a), BigInt::from(n - 1)),
        DimensionValue::new(2u32, n),
    )
}

/// `μ` disjoint copies of `scale · B`: `μ · scale^s · H^s(B)`.
pub fn measure_scaled(mu: &BigUint, scale: &Rational, base: &MeasureValue) -> MeasureValue {
    MeasureValue::new(
        &base.coef * Rational::from_integer(BigInt::from(mu.clone())),
        &base.a * scale,
        base.s.clone(),
    )
}
