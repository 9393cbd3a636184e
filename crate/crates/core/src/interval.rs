//! Finite unions of closed intervals with exact set algebra.

use std::fmt;

use crate::scalar::Scalar;

/// Sorted union of closed intervals. Overlapping or touching pieces are merged,
/// degenerate intervals (points) are allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet<S> {
    parts: Vec<(S, S)>,
}

impl<S: Scalar> Default for IntervalSet<S> {
    fn default() -> Self {
        Self::empty()
    }
}

impl<S: Scalar> IntervalSet<S> {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn interval(lo: S, hi: S) -> Self {
        Self::from_parts(vec![(lo, hi)])
    }

    /// Normalizes arbitrary (possibly reversed or overlapping) pieces.
    pub fn from_parts(parts: Vec<(S, S)>) -> Self {
        let mut parts: Vec<(S, S)> = parts
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        parts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("NaN endpoint"));
        let mut out: Vec<(S, S)> = Vec::with_capacity(parts.len());
        for (lo, hi) in parts {
            match out.last_mut() {
                Some(last) if lo <= last.1 => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => out.push((lo, hi)),
            }
        }
        IntervalSet { parts: out }
    }

    /// Keeps pieces as given. Callers guarantee they are sorted and disjoint.
    fn from_sorted(parts: Vec<(S, S)>) -> Self {
        IntervalSet { parts }
    }

    pub fn parts(&self) -> &[(S, S)] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn lo(&self) -> Option<&S> {
        self.parts.first().map(|p| &p.0)
    }

    pub fn hi(&self) -> Option<&S> {
        self.parts.last().map(|p| &p.1)
    }

    pub fn measure(&self) -> S {
        self.parts
            .iter()
            .fold(S::zero(), |acc, (a, b)| acc + b.clone() - a.clone())
    }

    pub fn contains(&self, x: &S) -> bool {
        self.parts.iter().any(|(a, b)| a <= x && x <= b)
    }

    /// `x` lies in the interior of the set.
    pub fn contains_interior(&self, x: &S) -> bool {
        self.parts.iter().any(|(a, b)| a < x && x < b)
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Self::from_parts(parts)
    }

    pub fn union_all<'a>(sets: impl IntoIterator<Item = &'a Self>) -> Self {
        let parts = sets
            .into_iter()
            .flat_map(|s| s.parts.iter().cloned())
            .collect();
        Self::from_parts(parts)
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.parts.len() && j < other.parts.len() {
            let (a0, a1) = &self.parts[i];
            let (b0, b1) = &other.parts[j];
            let lo = S::max_of(a0.clone(), b0.clone());
            let hi = S::min_of(a1.clone(), b1.clone());
            if lo <= hi {
                out.push((lo, hi));
            }
            if a1 < b1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::from_parts(out)
    }

    /// Closure of `self \ other`. Zero-length leftovers are dropped.
    pub fn difference(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for (a, b) in &self.parts {
            let mut lo = a.clone();
            let hi = b.clone();
            let mut alive = true;
            for (c, d) in &other.parts {
                if d < &lo {
                    continue;
                }
                if c > &hi {
                    break;
                }
                if c > &lo {
                    out.push((lo.clone(), c.clone()));
                }
                if d >= &hi {
                    alive = false;
                    break;
                }
                lo = d.clone();
            }
            if alive && lo < hi {
                out.push((lo, hi));
            } else if alive && lo == hi && a == b {
                out.push((lo, hi));
            }
        }
        Self::from_sorted(out)
    }

    /// Image under `x -> a x + e`.
    pub fn map_affine(&self, a: &S, e: &S) -> Self {
        let parts = self
            .parts
            .iter()
            .map(|(lo, hi)| {
                (
                    a.clone() * lo.clone() + e.clone(),
                    a.clone() * hi.clone() + e.clone(),
                )
            })
            .collect();
        Self::from_parts(parts)
    }

    /// Drops pieces shorter than `min_len`.
    pub fn without_slivers(&self, min_len: &S) -> Self {
        Self::from_sorted(
            self.parts
                .iter()
                .filter(|(a, b)| &(b.clone() - a.clone()) >= min_len)
                .cloned()
                .collect(),
        )
    }

    /// Interiors overlap with positive length.
    pub fn overlaps(&self, other: &Self) -> bool {
        self.intersect(other).measure() > S::zero()
    }

    fn directed_distance(&self, other: &Self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        if other.is_empty() {
            return f64::INFINITY;
        }
        let dist = |x: &S| -> S {
            other
                .parts
                .iter()
                .map(|(a, b)| {
                    if x < a {
                        a.clone() - x.clone()
                    } else if x > b {
                        x.clone() - b.clone()
                    } else {
                        S::zero()
                    }
                })
                .fold(None, |m: Option<S>, d| Some(m.map_or(d.clone(), |m| S::min_of(m, d))))
                .unwrap()
        };
        let two = S::one() + S::one();
        let mut worst = S::zero();
        for (a, b) in &self.parts {
            worst = S::max_of(worst, dist(a));
            worst = S::max_of(worst, dist(b));
            // farthest point of [a, b] inside a gap of `other`
            for w in other.parts.windows(2) {
                let (g0, g1) = (&w[0].1, &w[1].0);
                let lo = S::max_of(a.clone(), g0.clone());
                let hi = S::min_of(b.clone(), g1.clone());
                if lo <= hi {
                    let mid = (g0.clone() + g1.clone()) / two.clone();
                    let p = S::min_of(S::max_of(mid, lo), hi);
                    worst = S::max_of(worst, dist(&p));
                }
            }
        }
        worst.to_f64_lossy()
    }

    pub fn hausdorff(&self, other: &Self) -> f64 {
        self.directed_distance(other)
            .max(other.directed_distance(self))
    }

    pub fn to_f64(&self) -> IntervalSet<f64> {
        IntervalSet::from_parts(
            self.parts
                .iter()
                .map(|(a, b)| (a.to_f64_lossy(), b.to_f64_lossy()))
                .collect(),
        )
    }

    /// One `"lo hi"` line per piece, 12 significant digits.
    pub fn to_lines(&self) -> String {
        self.parts
            .iter()
            .map(|(a, b)| format!("{:.11e} {:.11e}\n", a.to_f64_lossy(), b.to_f64_lossy()))
            .collect()
    }
}

impl<S: Scalar> fmt::Display for IntervalSet<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.parts.is_empty() {
            return f.write_str("∅");
        }
        let parts: Vec<String> = self.parts.iter().map(|(a, b)| format!("[{a}, {b}]")).collect();
        f.write_str(&parts.join(" ∪ "))
    }
}
