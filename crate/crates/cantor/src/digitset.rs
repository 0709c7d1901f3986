//! Digit sets `D ⊆ {0, …, n−1}`, their difference sets and slices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A base `n ≥ 3` together with digits `0 = d_1 < … < d_m ≤ n−1`, `2 ≤ m < n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawDigitSet", into = "RawDigitSet")]
pub struct DigitSet {
    base: i64,
    digits: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct RawDigitSet {
    base: i64,
    digits: Vec<i64>,
}

impl TryFrom<RawDigitSet> for DigitSet {
    type Error = Error;
    fn try_from(raw: RawDigitSet) -> Result<Self> {
        DigitSet::new(raw.base, raw.digits)
    }
}

impl From<DigitSet> for RawDigitSet {
    fn from(ds: DigitSet) -> Self {
        RawDigitSet {
            base: ds.base,
            digits: ds.digits,
        }
    }
}

/// `Δ = D − D` and its nonnegative half.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DifferenceSet {
    pub deltas: Vec<i64>,
    pub deltas_nonneg: Vec<i64>,
}

/// `D_δ = D ∩ (D+δ) − min`, empty when the intersection is.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SliceSet {
    pub delta: i64,
    pub members: Vec<i64>,
    /// `min(D ∩ (D+δ))`, absent for an empty slice.
    pub min: Option<i64>,
}

impl SliceSet {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    /// True when the slice has more than the single digit `0`.
    pub fn is_branching(&self) -> bool {
        self.members.len() > 1
    }

    pub fn is_subset_of(&self, other: &SliceSet) -> bool {
        self.members
            .iter()
            .all(|x| other.members.binary_search(x).is_ok())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub sparse: bool,
    pub regular: bool,
    pub uniform: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub gap: Option<i64>,
}

impl DigitSet {
    pub fn new(base: i64, digits: Vec<i64>) -> Result<Self> {
        if base < 3 {
            return Err(Error::InvalidDigitSet(format!("base {base} < 3")));
        }
        let mut sorted = digits.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != digits.len() {
            return Err(Error::InvalidDigitSet("repeated digit".into()));
        }
        if sorted.len() < 2 {
            return Err(Error::InvalidDigitSet("need at least two digits".into()));
        }
        if sorted.len() as i64 >= base {
            return Err(Error::InvalidDigitSet(format!(
                "{} digits in base {base}: need m < n",
                sorted.len()
            )));
        }
        if sorted[0] != 0 {
            return Err(Error::InvalidDigitSet("smallest digit must be 0".into()));
        }
        if *sorted.last().unwrap() >= base {
            return Err(Error::InvalidDigitSet(format!("digit out of range for base {base}")));
        }
        Ok(DigitSet {
            base,
            digits: sorted,
        })
    }

    pub fn base(&self) -> i64 {
        self.base
    }

    pub fn digits(&self) -> &[i64] {
        &self.digits
    }

    pub fn m(&self) -> usize {
        self.digits.len()
    }

    pub fn max_digit(&self) -> i64 {
        *self.digits.last().unwrap()
    }

    pub fn contains(&self, d: i64) -> bool {
        self.digits.binary_search(&d).is_ok()
    }

    pub fn differences(&self) -> DifferenceSet {
        let mut deltas: Vec<i64> = self
            .digits
            .iter()
            .flat_map(|a| self.digits.iter().map(move |b| a - b))
            .collect();
        deltas.sort_unstable();
        deltas.dedup();
        let deltas_nonneg = deltas.iter().copied().filter(|d| *d >= 0).collect();
        DifferenceSet {
            deltas,
            deltas_nonneg,
        }
    }

    pub fn in_delta(&self, h: i64) -> bool {
        self.digits.iter().any(|a| self.contains(a - h))
    }

    /// `D ∩ (D + δ)`, sorted.
    pub fn intersect_shift(&self, delta: i64) -> Vec<i64> {
        self.digits
            .iter()
            .copied()
            .filter(|a| self.contains(a - delta))
            .collect()
    }

    pub fn slice(&self, delta: i64) -> SliceSet {
        let inter = self.intersect_shift(delta);
        match inter.first().copied() {
            None => SliceSet {
                delta,
                members: Vec::new(),
                min: None,
            },
            Some(lo) => SliceSet {
                delta,
                members: inter.iter().map(|x| x - lo).collect(),
                min: Some(lo),
            },
        }
    }

    pub fn classify(&self) -> Classification {
        let gaps: Vec<i64> = self.digits.windows(2).map(|w| w[1] - w[0]).collect();
        let uniform = gaps.iter().all(|g| *g == gaps[0]) && gaps[0] >= 2;
        let regular = (2..self.base).any(|g| {
            (0..g).any(|offset| {
                let len = (self.base - 1 - offset) / g + 1;
                len >= 2
                    && self
                        .digits
                        .iter()
                        .all(|d| *d >= offset && (d - offset) % g == 0)
            })
        });
        let deltas = self.differences().deltas;
        let sparse = deltas.windows(2).all(|w| w[1] - w[0] >= 2);
        Classification {
            sparse,
            regular,
            uniform,
            gap: uniform.then_some(gaps[0]),
        }
    }

    pub fn is_sparse(&self) -> bool {
        self.classify().sparse
    }

    pub fn require_sparse(&self) -> Result<()> {
        if self.is_sparse() {
            Ok(())
        } else {
            Err(Error::NotSparse)
        }
    }
}

/// Smallest `S` with `base + S = target` (fewest elements, then lexicographic).
pub fn sumset_decompose(target: &SliceSet, base: &SliceSet) -> Option<Vec<i64>> {
    if target.is_empty() || base.is_empty() {
        return None;
    }
    let in_target = |x: i64| target.members.binary_search(&x).is_ok();
    let candidates: Vec<i64> = target
        .members
        .iter()
        .copied()
        .filter(|s| base.members.iter().all(|b| in_target(b + s)))
        .collect();
    let covers = |s: &[i64]| {
        let mut sum: Vec<i64> = s
            .iter()
            .flat_map(|x| base.members.iter().map(move |b| b + x))
            .collect();
        sum.sort_unstable();
        sum.dedup();
        sum == target.members
    };
    if !covers(&candidates) {
        return None;
    }
    if candidates.len() > 24 {
        return Some(candidates);
    }
    let c = candidates.len();
    let mut best: Option<Vec<i64>> = None;
    for mask in 1u32..(1u32 << c) {
        let pick: Vec<i64> = (0..c)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| candidates[i])
            .collect();
        let better = match &best {
            None => true,
            Some(b) => pick.len() < b.len() || (pick.len() == b.len() && pick < *b),
        };
        if better && covers(&pick) {
            best = Some(pick);
        }
    }
    best
}
