//! Compact subsets of the line as finite unions of closed intervals, and the
//! open domain `Ω` everything lives in.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The open interval `Ω = (lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Omega<T = f64> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Default for Omega<T> {
    fn default() -> Self {
        Self {
            lo: T::of(-10.0),
            hi: T::of(10.0),
        }
    }
}

impl<T: Scalar> Omega<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::InvalidArgument(format!("empty domain ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains(&self, x: T) -> bool {
        self.lo < x && x < self.hi
    }

    pub fn check(&self, x: T) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::DomainError {
                x: x.to_f64_lossy(),
                lo: self.lo.to_f64_lossy(),
                hi: self.hi.to_f64_lossy(),
            })
        }
    }

    /// Whether a compact set lies strictly inside the domain.
    pub fn contains_set(&self, set: &CompactSet<T>) -> bool {
        match set.hull() {
            None => true,
            Some((lo, hi)) => self.lo < lo && hi < self.hi,
        }
    }
}

/// Finite union of closed bounded intervals, kept sorted and pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(T, T)>", into = "Vec<(T, T)>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct CompactSet<T = f64> {
    intervals: Vec<(T, T)>,
}

impl<T: Scalar> TryFrom<Vec<(T, T)>> for CompactSet<T> {
    type Error = Error;
    fn try_from(v: Vec<(T, T)>) -> Result<Self> {
        Self::from_intervals(v)
    }
}

impl<T: Scalar> From<CompactSet<T>> for Vec<(T, T)> {
    fn from(s: CompactSet<T>) -> Self {
        s.intervals
    }
}

impl<T: Scalar> CompactSet<T> {
    pub fn empty() -> Self {
        Self {
            intervals: Vec::new(),
        }
    }

    pub fn interval(lo: T, hi: T) -> Result<Self> {
        Self::from_intervals(vec![(lo, hi)])
    }

    pub fn point(x: T) -> Self {
        Self {
            intervals: vec![(x, x)],
        }
    }

    /// Normalizes arbitrary closed intervals: sorts and merges overlaps.
    pub fn from_intervals(mut v: Vec<(T, T)>) -> Result<Self> {
        for &(lo, hi) in &v {
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::InvalidArgument(format!("bad interval [{lo}, {hi}]")));
            }
        }
        v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut out: Vec<(T, T)> = Vec::with_capacity(v.len());
        for (lo, hi) in v {
            match out.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => out.push((lo, hi)),
            }
        }
        Ok(Self { intervals: out })
    }

    pub fn intervals(&self) -> &[(T, T)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn hull(&self) -> Option<(T, T)> {
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    pub fn measure(&self) -> T {
        self.intervals
            .iter()
            .fold(T::zero(), |acc, &(lo, hi)| acc + (hi - lo))
    }

    pub fn contains(&self, x: T) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.intervals
            .iter()
            .all(|&(lo, hi)| other.intervals.iter().any(|&(a, b)| a <= lo && hi <= b))
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut v = self.intervals.clone();
        v.extend_from_slice(&other.intervals);
        Self::from_intervals(v).expect("union of valid sets")
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut v = Vec::new();
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                let lo = a.max(c);
                let hi = b.min(d);
                if lo <= hi {
                    v.push((lo, hi));
                }
            }
        }
        Self::from_intervals(v).expect("intersection of valid sets")
    }

    pub fn intersects(&self, other: &Self) -> bool {
        !self.intersection(other).is_empty()
    }

    /// Closed `r`-neighbourhood `{x : dist(x, K) ≤ r}`.
    pub fn inflate(&self, r: T) -> Self {
        let v = self
            .intervals
            .iter()
            .map(|&(lo, hi)| (lo - r, hi + r))
            .collect();
        Self::from_intervals(v).expect("inflation of valid set")
    }

    pub fn dist_to_point(&self, x: T) -> T {
        self.intervals
            .iter()
            .map(|&(lo, hi)| {
                if x < lo {
                    lo - x
                } else if x > hi {
                    x - hi
                } else {
                    T::zero()
                }
            })
            .fold(T::infinity(), T::min)
    }

    /// Attained distance between two compact sets; `+∞` if either is empty.
    pub fn distance(&self, other: &Self) -> T {
        let mut best = T::infinity();
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                let gap = if b < c {
                    c - b
                } else if d < a {
                    a - d
                } else {
                    T::zero()
                };
                best = best.min(gap);
            }
        }
        best
    }
}
