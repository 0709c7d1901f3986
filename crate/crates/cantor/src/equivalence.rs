//! Translation equivalence through slice sequences `D_{α_k}`.
//!
//! For a Δ⁺ code `α` and sparse `D`,
//! `C ∩ (C + α) = { Σ x_k n^{-k} : x_k ∈ D ∩ (D + α_k) }`, so the normalized set
//! `C(α)` depends only on the slices. Every decision procedure here works on
//! those slices.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::digitset::{sumset_decompose, DigitSet, SliceSet};
use crate::error::{Error, Result};
use crate::kernel;
use crate::measure::{self, DimensionValue, MeasureValue};
use crate::radix::{self, code_from_rational, Alphabet, PeriodicCode, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceSequence {
    pub preperiod: Vec<SliceSet>,
    /// Empty for a prefix code.
    pub period: Vec<SliceSet>,
    /// `Σ min(D ∩ (D+α_k)) n^{-k}`; for a prefix, the sum over known digits.
    #[serde(with = "radix::rat_serde")]
    pub inf: Rational,
}

impl SliceSequence {
    pub fn is_prefix(&self) -> bool {
        self.period.is_empty()
    }

    /// `D_{α_j}` for `j ≥ 1`.
    pub fn at(&self, j: usize) -> Option<&SliceSet> {
        let a = self.preperiod.len();
        if j <= a {
            self.preperiod.get(j - 1)
        } else if self.period.is_empty() {
            None
        } else {
            Some(&self.period[(j - a - 1) % self.period.len()])
        }
    }

    pub fn known_len(&self) -> Option<usize> {
        self.is_prefix().then_some(self.preperiod.len())
    }
}

fn same_members(a: &SliceSet, b: &SliceSet) -> bool {
    a.members == b.members
}

/// Shortest period and preperiod of an eventually periodic list.
fn minimize<T: Clone>(mut pre: Vec<T>, mut per: Vec<T>, eq: impl Fn(&T, &T) -> bool) -> (Vec<T>, Vec<T>) {
    let p = per.len();
    if let Some(d) = (1..=p).find(|d| p % d == 0 && (0..p).all(|i| eq(&per[i], &per[i % d]))) {
        per.truncate(d);
    }
    while let (Some(last), Some(tail)) = (pre.last(), per.last()) {
        if !eq(last, tail) {
            break;
        }
        pre.pop();
        per.rotate_right(1);
    }
    (pre, per)
}

fn require_nonneg_digits(code: &PeriodicCode) -> Result<()> {
    if code.preperiod().iter().chain(code.period()).any(|d| *d < 0) {
        return Err(Error::InvalidCode("expected a nonnegative digit code".into()));
    }
    Ok(())
}

pub fn slice_sequence(ds: &DigitSet, alpha: &PeriodicCode) -> Result<SliceSequence> {
    ds.require_sparse()?;
    if alpha.base() != ds.base() {
        return Err(Error::InvalidCode("base mismatch".into()));
    }
    require_nonneg_digits(alpha)?;
    let slice = |d: &i64| -> Result<SliceSet> {
        let s = ds.slice(*d);
        if s.is_empty() {
            Err(Error::NotInF(format!("D ∩ (D+{d}) is empty")))
        } else {
            Ok(s)
        }
    };
    let pre = alpha.preperiod().iter().map(slice).collect::<Result<Vec<_>>>()?;
    let per = alpha.period().iter().map(slice).collect::<Result<Vec<_>>>()?;
    let mins = |v: &[SliceSet]| v.iter().map(|s| s.min.unwrap()).collect::<Vec<_>>();
    let inf = if per.is_empty() {
        radix::value_of(&PeriodicCode::prefix(ds.base(), Alphabet::DeltaPlus, mins(&pre))?)
    } else {
        radix::value_of(&PeriodicCode::new(ds.base(), Alphabet::DeltaPlus, mins(&pre), mins(&per))?)
    };
    let (preperiod, period) = if per.is_empty() {
        (pre, per)
    } else {
        minimize(pre, per, same_members)
    };
    Ok(SliceSequence {
        preperiod,
        period,
        inf,
    })
}

/// How a code was brought to the Δ⁺ alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    DeltaPlus,
    Abs,
    Psi,
    DeltaSearch,
}

/// A Δ⁺ code `y` with `C ∩ (C+t) = C ∩ (C+y) + shift`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaPlusForm {
    pub y: PeriodicCode,
    #[serde(with = "radix::rat_serde")]
    pub shift: Rational,
    pub route: Route,
}

fn abs_form(ds: &DigitSet, code: &PeriodicCode, route: Route) -> Result<DeltaPlusForm> {
    let y = radix::abs_canonicalize(ds, code)?;
    let negatives = code.map_digits(Alphabet::Delta, |d| d.min(0))?;
    Ok(DeltaPlusForm {
        y,
        shift: radix::value_of(&negatives),
        route,
    })
}

pub fn to_delta_plus(ds: &DigitSet, code: &PeriodicCode) -> Result<DeltaPlusForm> {
    ds.require_sparse()?;
    code.validate_for(ds)?;
    let direct = |route| -> Result<DeltaPlusForm> {
        Ok(DeltaPlusForm {
            y: code.with_alphabet(Alphabet::DeltaPlus)?,
            shift: Rational::zero(),
            route,
        })
    };
    match code.alphabet() {
        Alphabet::DeltaPlus | Alphabet::DOnly => direct(Route::DeltaPlus),
        Alphabet::Delta => abs_form(ds, code, Route::Abs),
        Alphabet::Nary => match kernel::psi(ds, code) {
            Ok(p) => Ok(DeltaPlusForm {
                y: p.y,
                shift: -p.offset.unwrap_or_default(),
                route: Route::Psi,
            }),
            Err(_) if code.with_alphabet(Alphabet::DeltaPlus).and_then(|c| c.validate_for(ds)).is_ok() => direct(Route::DeltaPlus),
            Err(Error::FiniteRepresentation) => {
                let found = code_from_rational(&radix::value_of(code), ds.base(), Alphabet::Delta, Some(ds))?;
                abs_form(ds, &found, Route::DeltaSearch)
            }
            Err(e) => Err(e),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equivalence {
    pub equal: bool,
    /// First index with `D_{α_k} ≠ D_{γ_k}`.
    pub witness_k: Option<usize>,
    /// Set when a prefix code limited the comparison.
    pub undecided_prefix: bool,
}

pub fn equivalent(ds: &DigitSet, alpha: &PeriodicCode, gamma: &PeriodicCode) -> Result<Equivalence> {
    let a = slice_sequence(ds, &to_delta_plus(ds, alpha)?.y)?;
    let g = slice_sequence(ds, &to_delta_plus(ds, gamma)?.y)?;
    let horizon = match (a.known_len(), g.known_len()) {
        (None, None) => {
            let l = num_integer::lcm(a.period.len(), g.period.len());
            a.preperiod.len().max(g.preperiod.len()) + l
        }
        (x, y) => x.into_iter().chain(y).min().unwrap(),
    };
    let witness_k = (1..=horizon).find(|j| !same_members(a.at(*j).unwrap(), g.at(*j).unwrap()));
    Ok(Equivalence {
        equal: witness_k.is_none(),
        witness_k,
        undecided_prefix: a.is_prefix() || g.is_prefix(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Finite,
    StronglyPeriodic,
    RationalEquivalent,
    NotEquivalent,
    UndecidedPrefix,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QViolation {
    pub q: usize,
    /// Largest `j` in the prefix with `D_{α_j} ⊄ D_{α_{j+q}}`.
    pub last_violation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalEquivalence {
    /// `RATIONAL_EQUIVALENT` or `UNDECIDED_PREFIX`.
    pub verdict: Verdict,
    pub k: Option<usize>,
    pub q: Option<usize>,
    pub gamma: Option<PeriodicCode>,
    /// Smallest `q` with `D_{α_j} ⊆ D_{α_{j+q}}` for every `j ≥ 1`.
    pub subset_all_j: Option<usize>,
    /// Per-`q` audit for prefix codes.
    pub violations: Vec<QViolation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub kmax: usize,
    pub qmax: usize,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds { kmax: 20, qmax: 12 }
    }
}

/// Multiples of the period that can witness a shift condition; larger multiples repeat these.
fn candidate_shifts(seq: &SliceSequence) -> Vec<usize> {
    let (a, p) = (seq.preperiod.len(), seq.period.len());
    let top = a.div_ceil(p).max(1) * p + p;
    (1..=top / p).map(|h| h * p).collect()
}

fn subset_all_j(seq: &SliceSequence) -> Option<usize> {
    let a = seq.preperiod.len();
    candidate_shifts(seq)
        .into_iter()
        .find(|&q| (1..=a).all(|j| seq.at(j).unwrap().is_subset_of(seq.at(j + q).unwrap())))
}

pub fn rational_equivalent(ds: &DigitSet, alpha: &PeriodicCode, bounds: SearchBounds) -> Result<RationalEquivalence> {
    let form = to_delta_plus(ds, alpha)?;
    let seq = slice_sequence(ds, &form.y)?;
    if let Some(len) = seq.known_len() {
        let mut violations = Vec::new();
        let mut best: Option<(usize, usize)> = None;
        for q in 1..=bounds.qmax {
            let last = (1..=len.saturating_sub(q))
                .rev()
                .find(|&j| !seq.at(j).unwrap().is_subset_of(seq.at(j + q).unwrap()));
            let k = last.unwrap_or(0);
            if k <= bounds.kmax && len > k + q && best.is_none_or(|(bk, _)| k < bk) {
                best = Some((k, q));
            }
            violations.push(QViolation { q, last_violation: last });
        }
        return Ok(RationalEquivalence {
            verdict: Verdict::UndecidedPrefix,
            k: best.map(|b| b.0),
            q: best.map(|b| b.1),
            gamma: None,
            subset_all_j: None,
            violations,
        });
    }
    Ok(RationalEquivalence {
        verdict: Verdict::RationalEquivalent,
        k: Some(seq.preperiod.len()),
        q: Some(seq.period.len()),
        gamma: Some(form.y.clone()),
        subset_all_j: subset_all_j(&seq),
        violations: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finiteness {
    pub finite: bool,
    /// Points of `C ∩ (C + t)` for the input `t`.
    #[serde(with = "radix::rat_serde::opt_vec")]
    pub points: Option<Vec<Rational>>,
    /// Points outside the digitwise description, reached only through a carry.
    #[serde(with = "radix::rat_serde::opt_vec")]
    pub carry_points: Option<Vec<Rational>>,
    pub gamma: Option<PeriodicCode>,
}

const CARRIES: [i64; 4] = [-1, 0, 1, 2];

/// All of `C ∩ (C+t)` when it is finite, `None` when it is infinite.
///
/// Solves `x = y + t` digit by digit over `x, y ∈ D` with a bounded carry, so
/// points that only exist through a carry are included.
pub fn exact_points(ds: &DigitSet, t: &PeriodicCode) -> Result<Option<Vec<Rational>>> {
    if t.is_prefix() {
        return Err(Error::UndecidedPrefix);
    }
    let v = radix::value_of(t);
    let mag = v.abs();
    if mag > Rational::one() {
        return Ok(Some(Vec::new()));
    }
    let n = ds.base();
    let code = code_from_rational(&mag, n, Alphabet::Nary, None)?;
    let (a, len) = (code.preperiod().len(), code.preperiod().len() + code.period().len());
    let id = |pos: usize, c: i64| pos * CARRIES.len() + (c + 1) as usize;
    let nodes = len * CARRIES.len();
    let mut out: Vec<Vec<(i64, usize)>> = vec![Vec::new(); nodes];
    for pos in 0..len {
        let next = if pos + 1 < len { pos + 1 } else { a };
        let td = code.digit_at(pos + 1).unwrap();
        for c in CARRIES {
            for &x in ds.digits() {
                for &y in ds.digits() {
                    let c2 = x + n * c - y - td;
                    if CARRIES.contains(&c2) {
                        out[id(pos, c)].push((x, id(next, c2)));
                    }
                }
            }
        }
    }
    let mut live = vec![true; nodes];
    loop {
        let dead: Vec<usize> = (0..nodes)
            .filter(|v| live[*v] && !out[*v].iter().any(|(_, w)| live[*w]))
            .collect();
        if dead.is_empty() {
            break;
        }
        dead.into_iter().for_each(|v| live[v] = false);
    }
    for e in out.iter_mut() {
        e.retain(|(_, w)| live[*w]);
        e.sort_unstable();
        e.dedup();
    }
    let start = id(0, 0);
    if !live[start] {
        return Ok(Some(Vec::new()));
    }
    let reach = |from: usize| {
        let mut seen = vec![false; nodes];
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            for &(_, w) in &out[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    };
    let from_start = reach(start);
    let reachable = |v: usize| v == start || from_start[v];
    if (0..nodes).any(|v| reachable(v) && out[v].len() > 1 && reach(v)[v]) {
        return Ok(None);
    }
    let mut points = Vec::new();
    let mut path = Vec::new();
    let mut labels = Vec::new();
    lassos(&out, start, &mut path, &mut labels, &mut |pre, per| {
        let c = PeriodicCode::new(n, Alphabet::DOnly, pre.to_vec(), per.to_vec()).expect("digits of D");
        points.push(radix::value_of(&c) + if v.is_negative() { v.clone() } else { Rational::zero() });
    });
    points.sort();
    points.dedup();
    Ok(Some(points))
}

fn lassos(
    out: &[Vec<(i64, usize)>],
    v: usize,
    path: &mut Vec<usize>,
    labels: &mut Vec<i64>,
    emit: &mut dyn FnMut(&[i64], &[i64]),
) {
    if let Some(i) = path.iter().position(|u| *u == v) {
        emit(&labels[..i], &labels[i..]);
        return;
    }
    path.push(v);
    for &(x, w) in &out[v] {
        labels.push(x);
        lassos(out, w, path, labels, emit);
        labels.pop();
    }
    path.pop();
}

pub fn is_finite(ds: &DigitSet, alpha: &PeriodicCode) -> Result<Finiteness> {
    let form = to_delta_plus(ds, alpha)?;
    let seq = slice_sequence(ds, &form.y)?;
    if seq.is_prefix() {
        return Err(Error::UndecidedPrefix);
    }
    if seq.period.iter().any(|s| s.is_branching()) {
        return Ok(Finiteness {
            finite: false,
            points: None,
            carry_points: None,
            gamma: None,
        });
    }
    let n = ds.base();
    let mut points = vec![&seq.inf + &form.shift];
    for (j, s) in seq.preperiod.iter().enumerate() {
        if s.is_branching() {
            let w = &radix::scale(n, j + 1);
            points = points
                .iter()
                .flat_map(|p| s.members.iter().map(move |x| p + Rational::from_integer(BigInt::from(*x)) * w))
                .collect();
        }
    }
    points.sort();
    let last = seq.preperiod.iter().rposition(|s| s.is_branching()).map_or(0, |i| i + 1);
    let gamma = PeriodicCode::new(n, Alphabet::DeltaPlus, form.y.digits(last), vec![ds.max_digit()])?;
    let exact = exact_points(ds, alpha)?.ok_or_else(|| Error::NotApplicable("carry points are not finite".into()))?;
    let carry = exact.into_iter().filter(|x| points.binary_search(x).is_err()).collect();
    Ok(Finiteness {
        finite: true,
        points: Some(points),
        carry_points: Some(carry),
        gamma: Some(gamma),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrongPeriodicity {
    pub sp: bool,
    pub q: Option<usize>,
    /// Witnesses `D̃_{α_j}` for `j = 1..=q + preperiod`, with `D_{α_j} + D̃ = D_{α_{j+q}}`.
    pub tilde: Option<Vec<Vec<i64>>>,
}

fn tilde_for(seq: &SliceSequence, q: usize) -> Option<Vec<Vec<i64>>> {
    let a = seq.preperiod.len();
    let p = seq.period.len();
    (1..=a + p)
        .map(|j| sumset_decompose(seq.at(j + q).unwrap(), seq.at(j).unwrap()))
        .collect()
}

fn strong_from_seq(seq: &SliceSequence) -> StrongPeriodicity {
    for q in candidate_shifts(seq) {
        if let Some(t) = tilde_for(seq, q) {
            return StrongPeriodicity {
                sp: true,
                q: Some(q),
                tilde: Some(t),
            };
        }
    }
    StrongPeriodicity {
        sp: false,
        q: None,
        tilde: None,
    }
}

pub fn strongly_periodic(ds: &DigitSet, alpha: &PeriodicCode) -> Result<StrongPeriodicity> {
    let seq = slice_sequence(ds, &to_delta_plus(ds, alpha)?.y)?;
    if seq.is_prefix() {
        return Err(Error::UndecidedPrefix);
    }
    Ok(strong_from_seq(&seq))
}

/// `x ↦ ratio·x + offset`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SimilarityMap {
    #[serde(with = "radix::rat_serde")]
    pub ratio: Rational,
    #[serde(with = "radix::rat_serde")]
    pub offset: Rational,
}

fn cartesian(sets: &[(Vec<i64>, Rational)], cap: usize) -> Result<Vec<Rational>> {
    let mut out = vec![Rational::zero()];
    for (members, w) in sets {
        if members.len() > 1 && out.len() * members.len() > cap {
            return Err(Error::BudgetExceeded {
                needed: format!("more than {cap} combinations"),
                budget: cap as u64,
            });
        }
        out = out
            .iter()
            .flat_map(|acc| members.iter().map(move |x| acc + Rational::from_integer(BigInt::from(*x)) * w))
            .collect();
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Maps `f_b(x) = n^{-Q}x + b` generating `C(α)` for strongly periodic `α`.
pub fn similarity_maps(ds: &DigitSet, seq: &SliceSequence, q: usize, cap: usize) -> Result<(usize, Vec<SimilarityMap>)> {
    let a = seq.preperiod.len();
    let big_q = a.div_ceil(q).max(1) * q;
    let tilde = (1..=a)
        .map(|j| sumset_decompose(seq.at(j + big_q).unwrap(), seq.at(j).unwrap()))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::NotApplicable("shift is not a strong period".into()))?;
    let n = ds.base();
    let ratio = radix::scale(n, big_q);
    let mut parts: Vec<(Vec<i64>, Rational)> = (1..=big_q)
        .map(|k| (seq.at(k).unwrap().members.clone(), radix::scale(n, k)))
        .collect();
    parts.extend(tilde.into_iter().enumerate().map(|(i, z)| (z, radix::scale(n, big_q + i + 1))));
    let offsets = cartesian(&parts, cap)?;
    Ok((
        big_q,
        offsets
            .into_iter()
            .map(|b| SimilarityMap {
                ratio: ratio.clone(),
                offset: b,
            })
            .collect(),
    ))
}

/// `[0, Σ max(D_{α_k}) n^{-k}]`, the convex hull of `C(α)`.
pub fn hull(ds: &DigitSet, seq: &SliceSequence) -> Result<Rational> {
    let maxes = |v: &[SliceSet]| v.iter().map(|s| *s.members.last().unwrap()).collect::<Vec<_>>();
    Ok(radix::value_of(&PeriodicCode::new(
        ds.base(),
        Alphabet::DeltaPlus,
        maxes(&seq.preperiod),
        maxes(&seq.period),
    )?))
}

/// True when the images of the hull under the maps are pairwise disjoint.
pub fn hull_images_disjoint(maps: &[SimilarityMap], hull_len: &Rational) -> bool {
    let mut iv: Vec<(Rational, Rational)> = maps
        .iter()
        .map(|m| (m.offset.clone(), &m.offset + &m.ratio * hull_len))
        .collect();
    iv.sort();
    iv.windows(2).all(|w| w[0].1 < w[1].0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseDigits {
    #[serde(with = "radix::count_serde")]
    pub base: BigUint,
    pub digits: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfSimilarReport {
    pub verdict: Verdict,
    pub input: PeriodicCode,
    pub route: Route,
    /// Δ⁺ form with `C ∩ (C+t) = C ∩ (C+y) + shift`.
    pub y: PeriodicCode,
    #[serde(with = "radix::rat_serde")]
    pub shift: Rational,
    pub k: usize,
    pub q: usize,
    pub e: BaseDigits,
    pub e_sparse: bool,
    /// `E·n^q + E` in base `n^{2q}` when `q` equals the input period.
    pub e_2p: Option<BaseDigits>,
    #[serde(with = "radix::count_serde")]
    pub mu: BigUint,
    #[serde(with = "radix::rat_serde")]
    pub scale: Rational,
    /// `C ∩ (C+t) = ⋃ (η + scale · C_{n^q,E})`.
    #[serde(with = "radix::rat_serde::vec")]
    pub offsets: Vec<Rational>,
    #[serde(with = "radix::rat_serde")]
    pub inf: Rational,
    pub dimension: DimensionValue,
    pub measure: Option<MeasureValue>,
    pub measure_reason: Option<String>,
    pub strong: Option<StrongPeriodicity>,
    pub subset_all_j: Option<usize>,
    pub similarity_q: Option<usize>,
    pub similarity_maps: Option<Vec<SimilarityMap>>,
    pub osc_hull_disjoint: Option<bool>,
    #[serde(with = "radix::rat_serde::opt_vec")]
    pub finite_points: Option<Vec<Rational>>,
    #[serde(with = "radix::rat_serde::opt_vec")]
    pub carry_points: Option<Vec<Rational>>,
}

fn product_digits(n: i64, sets: &[Vec<i64>], cap: usize) -> Result<(BigUint, Vec<i64>)> {
    let q = sets.len();
    let base = num_traits::pow(BigUint::from(n as u64), q);
    if base.bits() > 62 {
        return Err(Error::NotApplicable(format!("base {n}^{q} too large")));
    }
    let mut out = vec![0i64];
    for s in sets {
        if out.len() * s.len() > cap {
            return Err(Error::BudgetExceeded {
                needed: "digit set E".into(),
                budget: cap as u64,
            });
        }
        out = out.iter().flat_map(|acc| s.iter().map(move |u| acc * n + u)).collect();
    }
    out.sort_unstable();
    Ok((base, out))
}

/// Sparse: distinct differences at least 2 apart.
pub fn set_is_sparse(digits: &[i64]) -> bool {
    let mut d: Vec<i64> = digits.iter().flat_map(|a| digits.iter().map(move |b| a - b)).collect();
    d.sort_unstable();
    d.dedup();
    d.windows(2).all(|w| w[1] - w[0] >= 2)
}

pub const REPORT_CAP: usize = 1 << 20;

pub fn self_similar_report(ds: &DigitSet, code: &PeriodicCode) -> Result<SelfSimilarReport> {
    ds.require_sparse()?;
    let form = to_delta_plus(ds, code)?;
    let seq = slice_sequence(ds, &form.y)?;
    if seq.is_prefix() {
        return Err(Error::UndecidedPrefix);
    }
    let n = ds.base();
    let y = &form.y;
    let (k, q) = (y.preperiod().len(), y.period().len());
    let raw = |d: &i64| ds.intersect_shift(*d);
    let x_sets: Vec<Vec<i64>> = y.period().iter().map(raw).collect();
    let (e_base, e) = product_digits(n, &x_sets, REPORT_CAP)?;
    let e_sparse = set_is_sparse(&e);
    let e_2p = (q == code.period().len()).then(|| {
        let nq = e_base.to_i64().unwrap();
        let mut d: Vec<i64> = e.iter().flat_map(|a| e.iter().map(move |b| a * nq + b)).collect();
        d.sort_unstable();
        BaseDigits {
            base: &e_base * &e_base,
            digits: d,
        }
    });
    let pre_sets: Vec<(Vec<i64>, Rational)> = y
        .preperiod()
        .iter()
        .enumerate()
        .map(|(j, d)| (raw(d), radix::scale(n, j + 1)))
        .collect();
    let mut offsets = cartesian(&pre_sets, REPORT_CAP)?;
    for o in offsets.iter_mut() {
        *o += &form.shift;
    }
    let mu = BigUint::from(offsets.len());
    let scale = radix::scale(n, k);
    let dimension = DimensionValue::new(BigUint::from(e.len()), e_base.clone());

    let finite = is_finite(ds, code)?;
    let strong = strong_from_seq(&seq);
    let subset = subset_all_j(&seq);
    let (similarity_q, similarity_maps, osc) = match strong.q {
        Some(sq) => {
            let step = num_integer::lcm(sq, y.period().len());
            let (big_q, maps) = similarity_maps(ds, &seq, step, REPORT_CAP)?;
            let disjoint = hull_images_disjoint(&maps, &hull(ds, &seq)?);
            (Some(big_q), Some(maps), Some(disjoint))
        }
        None => (None, None, None),
    };
    let verdict = if finite.finite {
        Verdict::Finite
    } else if strong.sp {
        Verdict::StronglyPeriodic
    } else {
        Verdict::RationalEquivalent
    };
    let (measure, measure_reason) = if e.len() == 2 {
        let b = measure::measure_two_digit(e_base.to_u64().unwrap(), e[0] as u64, e[1] as u64);
        (Some(measure::measure_scaled(&mu, &scale, &b)), None)
    } else if finite.finite {
        (None, Some("finite set".to_string()))
    } else {
        (None, Some(format!("no closed form for a {}-digit base set", e.len())))
    };
    Ok(SelfSimilarReport {
        verdict,
        input: code.clone(),
        route: form.route,
        y: y.clone(),
        shift: form.shift.clone(),
        k,
        q,
        e: BaseDigits { base: e_base, digits: e },
        e_sparse,
        e_2p,
        mu,
        scale,
        offsets,
        inf: &seq.inf + &form.shift,
        dimension,
        measure,
        measure_reason,
        strong: Some(strong),
        subset_all_j: subset,
        similarity_q,
        similarity_maps,
        osc_hull_disjoint: osc,
        finite_points: finite.points,
        carry_points: finite.carry_points,
    })
}

/// `log_{n^q} Π #(D ∩ (D + x_j))` over the period of the Δ⁺ form.
pub fn dimension(ds: &DigitSet, code: &PeriodicCode) -> Result<DimensionValue> {
    let form = to_delta_plus(ds, code)?;
    if form.y.is_prefix() {
        return Err(Error::UndecidedPrefix);
    }
    let count: BigUint = form
        .y
        .period()
        .iter()
        .map(|d| BigUint::from(ds.intersect_shift(*d).len()))
        .product();
    if count.is_zero() {
        return Err(Error::NotInF(code.to_string()));
    }
    Ok(DimensionValue::new(count, num_traits::pow(BigUint::from(ds.base() as u64), form.y.period().len())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NonEquivalent {
    pub gamma: PeriodicCode,
    /// First substituted position `i`, then every `i + h·p`.
    pub index: usize,
    pub period: usize,
    /// `{h : bit_h = 1}`, the slots keeping `α`.
    pub audit: Vec<usize>,
}

pub fn thue_morse(len: usize) -> Vec<bool> {
    (0..len).map(|i: usize| i.count_ones() % 2 == 1).collect()
}

pub fn generate_nonequivalent(
    ds: &DigitSet,
    alpha: &PeriodicCode,
    delta: i64,
    bits: &[bool],
    depth: usize,
) -> Result<NonEquivalent> {
    let form = to_delta_plus(ds, alpha)?;
    let seq = slice_sequence(ds, &form.y)?;
    if seq.is_prefix() {
        return Err(Error::UndecidedPrefix);
    }
    if delta < 0 || !ds.in_delta(delta) {
        return Err(Error::BadDelta(format!("{delta} is not in the nonnegative difference set")));
    }
    let d_delta = ds.slice(delta);
    let y = &form.y;
    let (a, p) = (y.preperiod().len(), y.period().len());
    let i = (a + 1..=a + p)
        .find(|&i| {
            let s = seq.at(i).unwrap();
            s.is_branching() && !s.is_subset_of(&d_delta)
        })
        .ok_or_else(|| Error::BadDelta(format!("every branching slice lies inside D_{delta}")))?;
    let slots = if depth >= i { (depth - i) / p + 1 } else { 0 };
    if bits.len() < slots {
        return Err(Error::BadDelta(format!("need {slots} bits, got {}", bits.len())));
    }
    let digits: Vec<i64> = (1..=depth)
        .map(|j| {
            let d = y.digit_at(j).unwrap();
            if j >= i && (j - i) % p == 0 && !bits[(j - i) / p] {
                delta
            } else {
                d
            }
        })
        .collect();
    Ok(NonEquivalent {
        gamma: PeriodicCode::prefix(ds.base(), Alphabet::DeltaPlus, digits)?,
        index: i,
        period: p,
        audit: (0..slots).filter(|h| bits[*h]).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub p: usize,
    pub u: Vec<i64>,
    pub v: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniformHat {
    pub hat: PeriodicCode,
    /// `α̂ = 0.u (v)` with `u, v ∈ D^p` and `u ≤ v` componentwise.
    pub alignment: Option<Alignment>,
}

pub fn uniform_hat(ds: &DigitSet, alpha: &PeriodicCode) -> Result<UniformHat> {
    if !ds.classify().uniform {
        return Err(Error::NotUniform);
    }
    alpha.validate_for(ds)?;
    if alpha.is_prefix() {
        return Err(Error::UndecidedPrefix);
    }
    let dm = ds.max_digit();
    let hat = alpha.map_digits(Alphabet::DOnly, |d| dm - d.abs())?;
    let (a, p0) = (hat.preperiod().len(), hat.period().len());
    let p = a.div_ceil(p0).max(1) * p0;
    let u = hat.digits(p);
    let v: Vec<i64> = (p + 1..=2 * p).map(|j| hat.digit_at(j).unwrap()).collect();
    let ok = u.iter().zip(&v).all(|(x, y)| x <= y);
    Ok(UniformHat {
        hat,
        alignment: ok.then_some(Alignment { p, u, v }),
    })
}
