//! Digit-preserving transport `g_β(Σ γ_k N^{-k}) = Σ γ_k β^k` and the attractor `Γ_{β,Ω}`.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::digitset::DigitSet;
use crate::equivalence::{self, set_is_sparse, Verdict};
use crate::error::{Error, Result};
use crate::radix::{self, Alphabet, PeriodicCode, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BetaSystem {
    #[serde(rename = "N")]
    n: i64,
    omega: Vec<i64>,
    #[serde(with = "radix::rat_serde")]
    beta: Rational,
}

fn int(x: i64) -> Rational {
    Rational::from_integer(BigInt::from(x))
}

impl BetaSystem {
    pub fn new(n: i64, omega: Vec<i64>, beta: Rational) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDigitSet(format!("N = {n} < 2")));
        }
        let mut sorted = omega.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != omega.len() || sorted.len() < 2 || sorted[0] < 0 || *sorted.last().unwrap() >= n {
            return Err(Error::InvalidDigitSet("omega needs at least two distinct digits in 0..N".into()));
        }
        if !beta.is_positive() || beta > Rational::new(BigInt::one(), BigInt::from(n)) {
            return Err(Error::NotApplicable(format!("beta = {beta} outside (0, 1/{n}]")));
        }
        Ok(BetaSystem { n, omega: sorted, beta })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn omega(&self) -> &[i64] {
        &self.omega
    }

    pub fn beta(&self) -> &Rational {
        &self.beta
    }

    fn check_code(&self, code: &PeriodicCode) -> Result<()> {
        if code.base() != self.n {
            return Err(Error::InvalidCode(format!("code base {} differs from N = {}", code.base(), self.n)));
        }
        if code.is_prefix() {
            return Err(Error::UndecidedPrefix);
        }
        Ok(())
    }
}

/// `Σ γ_k r^k` for an eventually periodic digit sequence.
fn series(code: &PeriodicCode, r: &Rational) -> Rational {
    let poly = |digits: &[i64]| {
        digits
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, d| (acc + int(*d)) * r)
    };
    let a = code.preperiod().len();
    let p = code.period().len();
    let head = poly(code.preperiod());
    let ra = num_traits::pow(r.clone(), a);
    let rp = num_traits::pow(r.clone(), p);
    head + ra * poly(code.period()) / (Rational::one() - rp)
}

pub fn g_beta(sys: &BetaSystem, code: &PeriodicCode) -> Result<Rational> {
    sys.check_code(code)?;
    Ok(series(code, &sys.beta))
}

/// `(1−β) / (β(N−1))`.
pub fn gamma_scale(sys: &BetaSystem) -> Rational {
    (Rational::one() - &sys.beta) / (&sys.beta * int(sys.n - 1))
}

/// Smallest `d ≥ 1` with `d·Ω` sparse inside `0..N`.
pub fn sparse_multiplier(sys: &BetaSystem) -> Result<i64> {
    let top = *sys.omega.last().unwrap();
    (1..=(sys.n - 1) / top.max(1))
        .find(|d| set_is_sparse(&sys.omega.iter().map(|w| w * d).collect::<Vec<_>>()))
        .ok_or_else(|| Error::NotApplicable("no multiple of omega is sparse below N".into()))
}

/// The point of `Γ_{β,Ω}` with address `code`, as the fixed point of composed `φ_d(x) = βx + d(1−β)/(N−1)`.
pub fn gamma_point(sys: &BetaSystem, code: &PeriodicCode) -> Result<Rational> {
    sys.check_code(code)?;
    let unit = (Rational::one() - &sys.beta) / int(sys.n - 1);
    let compose = |digits: &[i64]| {
        digits.iter().fold((Rational::one(), Rational::zero()), |(r, c), d| {
            (&r * &sys.beta, c + &r * int(*d) * &unit)
        })
    };
    let (rp, cp) = compose(code.period());
    let fixed = cp / (Rational::one() - rp);
    let (ra, ca) = compose(code.preperiod());
    Ok(ca + ra * fixed)
}

/// Evenly spread sample points of `C_{N,D}`: index `i` written in base `m` over `D`, then zeros.
pub fn sample_codes(ds: &DigitSet, count: usize) -> Result<Vec<PeriodicCode>> {
    let m = ds.m();
    let mut len = 1;
    while m.pow(len as u32) < count {
        len += 1;
    }
    (0..count)
        .map(|i| {
            let mut x = i;
            let mut digits = vec![0; len + 1];
            for slot in digits.iter_mut().take(len).rev() {
                *slot = ds.digits()[x % m];
                x /= m;
            }
            digits[len] = ds.digits()[i % m];
            PeriodicCode::new(ds.base(), Alphabet::DOnly, digits, vec![ds.digits()[(i / m) % m]])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransportReport {
    pub preserved: bool,
    pub pairs_checked: usize,
    pub monotone_violations: usize,
    /// Verdict from the digits alone, shared by every `β`.
    pub verdict: Verdict,
    pub copies: usize,
    #[serde(with = "radix::rat_serde")]
    pub scale_beta: Rational,
    /// `Σ_{j≤k} u_j β^j` over the Δ⁺ preperiod choices.
    #[serde(with = "radix::rat_serde::vec")]
    pub offsets_beta: Vec<Rational>,
}

pub fn transport_report(sys: &BetaSystem, ds: &DigitSet, code: &PeriodicCode, samples: usize) -> Result<TransportReport> {
    if ds.base() != sys.n {
        return Err(Error::InvalidCode("digit set base differs from N".into()));
    }
    let pts = sample_codes(ds, samples)?;
    let vals: Vec<(Rational, Rational)> = pts
        .iter()
        .map(|c| Ok((radix::value_of(c), g_beta(sys, c)?)))
        .collect::<Result<_>>()?;
    let mut pairs = 0;
    let mut bad = 0;
    for i in 0..vals.len() {
        for j in i + 1..vals.len() {
            pairs += 1;
            if vals[i].0.cmp(&vals[j].0) != vals[i].1.cmp(&vals[j].1) {
                bad += 1;
            }
        }
    }
    let report = equivalence::self_similar_report(ds, code)?;
    let y = &report.y;
    let mut offsets = vec![Rational::zero()];
    let mut w = Rational::one();
    for d in y.preperiod() {
        w *= &sys.beta;
        let choices = ds.intersect_shift(*d);
        offsets = offsets
            .iter()
            .flat_map(|o| choices.iter().map(|u| o + int(*u) * &w).collect::<Vec<_>>())
            .collect();
    }
    offsets.sort();
    Ok(TransportReport {
        preserved: bad == 0,
        pairs_checked: pairs,
        monotone_violations: bad,
        verdict: report.verdict,
        copies: offsets.len(),
        scale_beta: w,
        offsets_beta: offsets,
    })
}
