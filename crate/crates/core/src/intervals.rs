//! Finite unions of open intervals on the extended real line.

use std::fmt;

use serde::Serialize;

/// Gaps narrower than this (relative to `max(1, |endpoint|)`) are closed
/// during canonicalization.
pub const MERGE_TOLERANCE: f64 = 1e-12;

/// A canonical union of disjoint, sorted open intervals `(lo, hi)`.
///
/// Endpoints may be infinite. Boundary points are never members.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion::default()
    }

    pub fn full() -> Self {
        IntervalUnion {
            intervals: vec![(f64::NEG_INFINITY, f64::INFINITY)],
        }
    }

    pub fn interval(lo: f64, hi: f64) -> Self {
        IntervalUnion::from_intervals(vec![(lo, hi)])
    }

    /// Builds the canonical form of an arbitrary list of intervals: empty
    /// and NaN pieces dropped, overlaps and slivers merged, sorted.
    pub fn from_intervals(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|&(lo, hi)| lo < hi);
        raw.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let mut out: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            match out.last_mut() {
                Some(last) if lo - last.1 < MERGE_TOLERANCE * last.1.abs().max(1.0) => {
                    last.1 = last.1.max(hi);
                }
                _ => out.push((lo, hi)),
            }
        }
        IntervalUnion { intervals: out }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.intervals == [(f64::NEG_INFINITY, f64::INFINITY)]
    }

    pub fn contains(&self, t: f64) -> bool {
        // first interval whose upper end exceeds t
        let k = self.intervals.partition_point(|&(_, hi)| hi <= t);
        self.intervals.get(k).is_some_and(|&(lo, _)| lo < t)
    }

    pub fn infimum(&self) -> Option<f64> {
        self.intervals.first().map(|i| i.0)
    }

    pub fn supremum(&self) -> Option<f64> {
        self.intervals.last().map(|i| i.1)
    }

    /// All finite endpoints, in increasing order.
    pub fn endpoints(&self) -> Vec<f64> {
        self.intervals
            .iter()
            .flat_map(|&(lo, hi)| [lo, hi])
            .filter(|e| e.is_finite())
            .collect()
    }

    /// Distance from `t` to the nearest finite endpoint.
    pub fn distance_to_boundary(&self, t: f64) -> f64 {
        self.endpoints()
            .into_iter()
            .map(|e| (e - t).abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn intersect(&self, other: &IntervalUnion) -> IntervalUnion {
        let (a, b) = (&self.intervals, &other.intervals);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        while i < a.len() && j < b.len() {
            let lo = a[i].0.max(b[j].0);
            let hi = a[i].1.min(b[j].1);
            if lo < hi {
                out.push((lo, hi));
            }
            if a[i].1 < b[j].1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalUnion::from_intervals(out)
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        IntervalUnion::from_intervals(all)
    }

    /// The complement, up to boundary points.
    pub fn complement(&self) -> IntervalUnion {
        let mut out = Vec::with_capacity(self.intervals.len() + 1);
        let mut cursor = f64::NEG_INFINITY;
        for &(lo, hi) in &self.intervals {
            out.push((cursor, lo));
            cursor = hi;
        }
        out.push((cursor, f64::INFINITY));
        IntervalUnion::from_intervals(out)
    }

    /// Re-canonicalizes (a no-op on values built through this type).
    pub fn canonical(&self) -> IntervalUnion {
        IntervalUnion::from_intervals(self.intervals.clone())
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "{{}}");
        }
        for (k, (lo, hi)) in self.intervals.iter().enumerate() {
            if k > 0 {
                write!(f, " U ")?;
            }
            write!(f, "({lo}, {hi})")?;
        }
        Ok(())
    }
}
