//! Evidence that a word θ is disjunctive, (strongly) reversible or full.
//!
//! These are properties of the whole infinite word, so every check here either
//! returns a certificate found within a finite horizon or reports `Unknown`.

use std::fmt;

use crate::body::Body;
use crate::error::{Error, Result};
use crate::ifs::Ifs;
use crate::map::{MapSpec, PlaneMap};
use crate::scalar::Scalar;
use crate::word::{InfiniteWord, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    VerifiedStrong,
    VerifiedReversible,
    Unknown,
}

/// Output of [`construct_reverse_word`].
///
/// Every `(m, len)` in `match_positions` satisfies
/// `ω_1 … ω_len = θ_{m+len} … θ_{m+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReversalEvidence {
    pub theta_prefix_len: usize,
    pub omega_prefix: Word,
    pub ladder: Vec<usize>,
    pub match_positions: Vec<(usize, usize)>,
    pub verdict: Verdict,
}

impl ReversalEvidence {
    /// Re-verifies every recorded match by letter comparison.
    pub fn recheck(&self, theta: &InfiniteWord) -> bool {
        self.match_positions.iter().all(|&(m, len)| {
            len <= self.omega_prefix.len()
                && (1..=len).all(|i| self.omega_prefix.letter(i) == theta.letter(m + len + 1 - i))
        })
    }

    /// Turns a strong match `θ|t = reverse(ω|t)` with `t ≥ min_m + len` into a
    /// reversible match `(m, len)` with `m ≥ min_m`.
    pub fn reversible_from_strong(&self, min_m: usize, len: usize) -> Option<(usize, usize)> {
        self.match_positions
            .iter()
            .find(|&&(m, t)| m == 0 && t >= min_m + len)
            .map(|&(_, t)| (t - len, len))
    }
}

impl fmt::Display for ReversalEvidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {:?}", self.verdict)?;
        writeln!(f, "theta prefix scanned: {}", self.theta_prefix_len)?;
        writeln!(f, "ladder: {:?}", self.ladder)?;
        let shown = self.omega_prefix.len().min(64);
        writeln!(f, "omega prefix: {}", self.omega_prefix.prefix(shown))?;
        for (m, len) in &self.match_positions {
            writeln!(f, "match m={m} L={len}")?;
        }
        Ok(())
    }
}

fn failure_table(p: &[u8]) -> Vec<usize> {
    let mut fail = vec![0; p.len()];
    let mut k = 0;
    for i in 1..p.len() {
        while k > 0 && p[i] != p[k] {
            k = fail[k - 1];
        }
        if p[i] == p[k] {
            k += 1;
        }
        fail[i] = k;
    }
    fail
}

/// 0-based end index (inclusive) of the first occurrence of `p` in `text`
/// starting at or after `from`.
fn find_from(text: &[u8], p: &[u8], from: usize) -> Option<usize> {
    if p.is_empty() {
        return Some(from);
    }
    let fail = failure_table(p);
    let mut k = 0;
    for (i, &c) in text.iter().enumerate().skip(from) {
        while k > 0 && c != p[k] {
            k = fail[k - 1];
        }
        if c == p[k] {
            k += 1;
        }
        if k == p.len() {
            return Some(i);
        }
    }
    None
}

/// Runs the inductive construction of a reverse word ω for θ starting from the
/// interior address prefix `sigma`.
///
/// `t_1` is the first `t > s` with `θ_t … θ_{t-s+1} = σ|s`; each further
/// `t_{n+1} > t_n` ends a new occurrence of `θ|t_n`. Then `ω|t_n` is `θ|t_n`
/// reversed. Three ladder steps give `VerifiedStrong`. When the ladder stalls,
/// at least two reversible matches of `σ` give `VerifiedReversible`.
pub fn construct_reverse_word(
    theta: &InfiniteWord,
    sigma: &Word,
    t_max: usize,
) -> Result<ReversalEvidence> {
    let n = theta.alphabet_size();
    if sigma.alphabet_size() != n || sigma.letters().iter().any(|&l| l == 0 || l > n) {
        return Err(Error::InvalidWord(format!(
            "σ = {sigma} is not a word over {n} letters"
        )));
    }
    let s = sigma.len();
    let text = theta.prefix(t_max);
    let t = text.letters();
    let rev_sigma = sigma.reversed();

    let mut ladder = Vec::new();
    // occurrences starting at 0-based index >= 1 end after position s
    if let Some(end) = find_from(t, rev_sigma.letters(), 1) {
        ladder.push(end + 1);
        loop {
            let tn = *ladder.last().unwrap();
            match find_from(t, &t[..tn], 1) {
                Some(end) => ladder.push(end + 1),
                None => break,
            }
        }
    }

    let mut match_positions: Vec<(usize, usize)> = ladder.iter().map(|&tn| (0, tn)).collect();
    let verdict;
    let omega_prefix;
    if ladder.len() >= 3 {
        verdict = Verdict::VerifiedStrong;
        omega_prefix = text.prefix(*ladder.last().unwrap()).reversed();
    } else {
        let ms = reversible_matches(theta, sigma, t_max.saturating_sub(s), 16);
        if ms.len() >= 2 {
            verdict = Verdict::VerifiedReversible;
            match_positions = ms.into_iter().map(|m| (m, s)).collect();
            omega_prefix = sigma.clone();
        } else {
            verdict = Verdict::Unknown;
            omega_prefix = match ladder.last() {
                Some(&tn) => text.prefix(tn).reversed(),
                None => sigma.clone(),
            };
        }
    }
    Ok(ReversalEvidence {
        theta_prefix_len: t_max,
        omega_prefix,
        ladder,
        match_positions,
        verdict,
    })
}

/// Positions `m ≤ m_max` with `ω_1 … ω_L = θ_{m+L} … θ_{m+1}`, `L = |ω|`, at
/// most `limit` of them.
pub fn reversible_matches(theta: &InfiniteWord, omega: &Word, m_max: usize, limit: usize) -> Vec<usize> {
    let len = omega.len();
    let text = theta.prefix(m_max + len);
    let rev = omega.reversed();
    let mut out = Vec::new();
    let mut from = 0;
    while out.len() < limit {
        match find_from(text.letters(), rev.letters(), from) {
            Some(end) => {
                let m = end + 1 - len;
                out.push(m);
                from = m + 1;
            }
            None => break,
        }
    }
    out
}

/// Lengths `m ≤ min(m_max, |ω|)` with `ω|m = reverse(θ|m)`.
pub fn strong_matches(theta: &InfiniteWord, omega: &Word, m_max: usize) -> Vec<usize> {
    let top = m_max.min(omega.len());
    let t = theta.prefix(top);
    (1..=top)
        .filter(|&m| (1..=m).all(|i| omega.letter(i) == t.letter(m + 1 - i)))
        .collect()
}

/// Result of [`check_disjunctive`].
#[derive(Clone, Debug, PartialEq)]
pub struct DisjunctiveReport {
    pub max_len: usize,
    pub scanned: usize,
    /// First word (length-lex order) seen fewer than twice.
    pub missing: Option<Word>,
}

/// Checks that every word of length ≤ `max_len` occurs at least twice in `θ|scan`.
pub fn check_disjunctive(theta: &InfiniteWord, max_len: usize, scan: usize) -> DisjunctiveReport {
    let n = theta.alphabet_size();
    let text = theta.prefix(scan);
    let t = text.letters();
    for len in 1..=max_len {
        let mut counts = vec![0u8; (n as usize).pow(len as u32)];
        for w in t.windows(len) {
            let idx = w.iter().fold(0usize, |acc, &l| acc * n as usize + (l - 1) as usize);
            counts[idx] = counts[idx].saturating_add(1);
        }
        if let Some(idx) = counts.iter().position(|&c| c < 2) {
            let mut letters = vec![0u8; len];
            let mut k = idx;
            for slot in letters.iter_mut().rev() {
                *slot = (k % n as usize) as u8 + 1;
                k /= n as usize;
            }
            return DisjunctiveReport {
                max_len,
                scanned: scan,
                missing: Some(Word::new(letters, n).expect("valid letters")),
            };
        }
    }
    DisjunctiveReport {
        max_len,
        scanned: scan,
        missing: None,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FullVerdict {
    /// Two witnesses `(m, n)` with `f_{θ_n} ∘ … ∘ f_{θ_{m+1}}(A) ⊂ A°`, the second
    /// starting at or after the end of the first.
    VerifiedFull([(usize, usize); 2]),
    Unknown,
}

/// Tests `g(A) ⊂ A°` for a map `g`, exactly for interval bodies and on dense
/// samples otherwise.
pub struct InteriorTest<'a> {
    body: &'a Body,
    samples: Vec<[f64; 2]>,
}

impl<'a> InteriorTest<'a> {
    pub fn new(body: &'a Body, res: f64) -> Result<Self> {
        let samples = match body {
            Body::Intervals(_) => Vec::new(),
            _ => {
                let mut pts: Vec<[f64; 2]> = body
                    .samples(res, u32::MAX as u64)?
                    .into_iter()
                    .map(|p| [p[0], p[1]])
                    .collect();
                if let Body::Polygon(poly) = body {
                    let v = &poly.vertices;
                    let steps = 32;
                    for k in 0..v.len() {
                        let (a, b) = (v[k], v[(k + 1) % v.len()]);
                        for s in 0..steps {
                            let t = s as f64 / steps as f64;
                            pts.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                        }
                    }
                }
                pts
            }
        };
        Ok(InteriorTest { body, samples })
    }

    pub fn image_in_interior<S: Scalar>(&self, g: &MapSpec<S>) -> bool {
        match self.body {
            Body::Intervals(set) => {
                let Some((a, e)) = g.coeffs_1d() else {
                    return false;
                };
                let (a, e) = (a.to_f64_lossy(), e.to_f64_lossy());
                set.parts().iter().all(|&(lo, hi)| {
                    let (x, y) = (a * lo + e, a * hi + e);
                    let (x, y) = (x.min(y), x.max(y));
                    set.parts().iter().any(|&(p, q)| p < x && y < q)
                })
            }
            _ => {
                let Ok(pm) = PlaneMap::from_spec(g) else {
                    return false;
                };
                let bbox = self.body.bbox();
                match bbox.map_bbox(&pm) {
                    Some(b) if bbox.intersects(&b) => {}
                    _ => return false,
                }
                self.samples.iter().all(|&p| {
                    pm.apply(p)
                        .is_some_and(|q| self.body.contains_interior(&q, 1e-12))
                })
            }
        }
    }
}

/// Searches for fullness witnesses up to `depth` using samples at `res` cells per unit.
pub fn check_full<S: Scalar>(
    theta: &InfiniteWord,
    f: &Ifs<S>,
    body: &Body,
    depth: usize,
    res: f64,
) -> Result<FullVerdict> {
    if !f.declared_contractive() {
        return Err(Error::NotContractive {
            factor: f.estimate_contraction(),
        });
    }
    let test = InteriorTest::new(body, res)?;
    let prefix = theta.prefix(depth);
    // beyond this many letters the image is below one sample cell
    let lambda = f.estimate_contraction().max(1e-3);
    let diam = body.bbox().diameter().max(1e-9);
    let max_len = ((diam * res).ln() / (1.0 / lambda).ln()).ceil().max(1.0) as usize + 2;
    let witness = |lo: usize| -> Option<(usize, usize)> {
        for n in lo + 1..=depth {
            // g = f_{θ_n} ∘ ... ∘ f_{θ_{m+1}}; containment is monotone in n - m
            let mut g = MapSpec::identity(f.dim());
            for m in (lo..n).rev().take(max_len) {
                g = g.compose(f.map(prefix.letter(m + 1)));
                if test.image_in_interior(&g) {
                    return Some((m, n));
                }
            }
        }
        None
    };
    let Some(first) = witness(0) else {
        return Ok(FullVerdict::Unknown);
    };
    Ok(match witness(first.1) {
        Some(second) => FullVerdict::VerifiedFull([first, second]),
        None => FullVerdict::Unknown,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Polygon;

    fn w(s: &str, n: u8) -> Word {
        Word::parse(s, n).unwrap()
    }

    #[test]
    fn kmp_finds_first_occurrence() {
        assert_eq!(find_from(&[1, 2, 1, 2, 1], &[2, 1], 0), Some(2));
        assert_eq!(find_from(&[1, 2, 1, 2, 1], &[2, 1], 2), Some(4));
        assert_eq!(find_from(&[1, 1, 1], &[2], 0), None);
    }

    #[test]
    fn disjunctive_ladder() {
        let theta = InfiniteWord::Disjunctive { n: 2 };
        let ev = construct_reverse_word(&theta, &w("11", 2), 1_000_000).unwrap();
        assert_eq!(ev.verdict, Verdict::VerifiedStrong);
        assert_eq!(&ev.ladder[..3], &[4, 20, 938_444]);
        assert!(ev.recheck(&theta));
        // ω begins with σ
        assert_eq!(ev.omega_prefix.prefix(2), w("11", 2));
        let (m, len) = ev.reversible_from_strong(5, 3).unwrap();
        assert!(m >= 5 && len == 3);
        let single = ReversalEvidence {
            match_positions: vec![(m, len)],
            ..ev.clone()
        };
        assert!(single.recheck(&theta));
    }

    #[test]
    fn three_then_period_is_only_reversible() {
        let theta = InfiniteWord::parse("3(12)", 3).unwrap();
        let ev = construct_reverse_word(&theta, &w("12", 3), 10_000).unwrap();
        assert_eq!(ev.ladder, vec![4]);
        assert_eq!(ev.verdict, Verdict::VerifiedReversible);
        assert!(ev.recheck(&theta));
        let omega = InfiniteWord::parse("(12)", 3).unwrap().prefix(10_000);
        assert!(strong_matches(&theta, &omega, 10_000).is_empty());
        let ms = reversible_matches(&theta, &omega.prefix(2), 10_000, 1000);
        assert!(ms.len() >= 1000 && ms.windows(2).all(|p| p[0] < p[1]));
        assert!(ms.iter().all(|&m| theta.letter(m + 2) == 1 && theta.letter(m + 1) == 2));
    }

    #[test]
    fn missing_letter_is_unknown() {
        let theta = InfiniteWord::constant(1, 2).unwrap();
        let ev = construct_reverse_word(&theta, &w("2", 2), 5000).unwrap();
        assert_eq!(ev.verdict, Verdict::Unknown);
        assert!(construct_reverse_word(&theta, &Word::new(vec![1], 3).unwrap(), 10).is_err());
    }

    #[test]
    fn disjunctive_check() {
        let d = check_disjunctive(&InfiniteWord::Disjunctive { n: 3 }, 4, 5000);
        assert_eq!(d.missing, None);
        let p = check_disjunctive(&InfiniteWord::parse("(12)", 2).unwrap(), 2, 100);
        assert_eq!(p.missing, Some(w("11", 2)));
    }

    fn interval() -> Ifs<f64> {
        Ifs::new(vec![MapSpec::affine_1d(0.5, 0.0), MapSpec::affine_1d(0.5, 0.5)]).unwrap()
    }

    #[test]
    fn interval_fullness() {
        let body = Body::unit_interval();
        let alt = InfiniteWord::parse("(12)", 2).unwrap();
        assert_eq!(
            check_full(&alt, &interval(), &body, 16, 64.0).unwrap(),
            FullVerdict::VerifiedFull([(0, 2), (2, 4)])
        );
        let ones = InfiniteWord::constant(1, 2).unwrap();
        assert_eq!(check_full(&ones, &interval(), &body, 64, 64.0).unwrap(), FullVerdict::Unknown);
        let dis = InfiniteWord::Disjunctive { n: 2 };
        assert!(matches!(
            check_full(&dis, &interval(), &body, 10_000, 64.0).unwrap(),
            FullVerdict::VerifiedFull(_)
        ));
    }

    #[test]
    fn square_interior_test() {
        let body = Body::Polygon(Polygon::rect(&crate::geometry::Rect::unit()));
        let t = InteriorTest::new(&body, 16.0).unwrap();
        assert!(t.image_in_interior(&MapSpec::affine_2d([0.5, 0.0, 0.0, 0.5, 0.25, 0.25])));
        assert!(!t.image_in_interior(&MapSpec::affine_2d([0.5, 0.0, 0.0, 0.5, 0.0, 0.25])));
    }
}
