//! Finite and infinite words over the alphabet `{1, ..., N}`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// A finite word. Letters are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<u8>,
    n: u8,
}

impl Word {
    pub fn new(letters: Vec<u8>, n: u8) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWord("alphabet must be nonempty".into()));
        }
        if let Some(bad) = letters.iter().find(|&&l| l == 0 || l > n) {
            return Err(Error::InvalidWord(format!("letter {bad} outside 1..={n}")));
        }
        Ok(Word { letters, n })
    }

    pub fn empty(n: u8) -> Self {
        Word {
            letters: Vec::new(),
            n,
        }
    }

    /// Digits `1..=9`, e.g. `"2113"`. An empty string gives the empty word.
    pub fn parse(s: &str, n: u8) -> Result<Self> {
        let s = s.trim();
        if s == "-" {
            return Ok(Word::empty(n));
        }
        let letters = parse_digits(s, false)?;
        Word::new(letters, n)
    }

    pub fn alphabet_size(&self) -> u8 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    /// 1-based access.
    pub fn letter(&self, i: usize) -> u8 {
        self.letters[i - 1]
    }

    pub fn first(&self) -> Option<u8> {
        self.letters.first().copied()
    }

    pub fn reversed(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word { letters, n: self.n }
    }

    pub fn prefix(&self, k: usize) -> Word {
        Word {
            letters: self.letters[..k.min(self.len())].to_vec(),
            n: self.n,
        }
    }

    /// The word with its first letter removed.
    pub fn tail(&self) -> Word {
        Word {
            letters: self.letters.get(1..).unwrap_or(&[]).to_vec(),
            n: self.n,
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters, n: self.n }
    }

    pub fn push(&mut self, letter: u8) {
        debug_assert!(letter >= 1 && letter <= self.n);
        self.letters.push(letter);
    }

    pub fn prepend(&self, letter: u8) -> Word {
        let mut letters = Vec::with_capacity(self.len() + 1);
        letters.push(letter);
        letters.extend_from_slice(&self.letters);
        Word { letters, n: self.n }
    }

    /// All words of length `k` in lexicographic order.
    pub fn all_of_length(n: u8, k: usize) -> impl Iterator<Item = Word> {
        let total = (n as u128).pow(k as u32);
        (0..total).map(move |mut idx| {
            let mut letters = vec![1u8; k];
            for slot in letters.iter_mut().rev() {
                *slot = (idx % n as u128) as u8 + 1;
                idx /= n as u128;
            }
            Word { letters, n }
        })
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("-");
        }
        if self.n <= 9 {
            for l in &self.letters {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
            f.write_str(&parts.join("."))
        }
    }
}

fn parse_digits(s: &str, zero_based: bool) -> Result<Vec<u8>> {
    if s.contains('.') {
        return s
            .split('.')
            .map(|p| {
                let v: u8 = p
                    .parse()
                    .map_err(|_| Error::InvalidWord(format!("bad letter `{p}`")))?;
                Ok(if zero_based { v + 1 } else { v })
            })
            .collect();
    }
    s.chars()
        .map(|c| {
            let d = c
                .to_digit(10)
                .ok_or_else(|| Error::InvalidWord(format!("unexpected character `{c}`")))?
                as u8;
            Ok(if zero_based { d + 1 } else { d })
        })
        .collect()
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// The splitmix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// An infinite word with random access to its letters.
#[derive(Clone, Debug, PartialEq)]
pub enum InfiniteWord {
    /// `pre` followed by `period` repeated forever.
    EventuallyPeriodic { pre: Word, period: Word },
    /// All finite words over `[n]` concatenated in length-then-lexicographic order.
    Disjunctive { n: u8 },
    /// Independent letters drawn with the given probabilities from a counter-based
    /// splitmix64 stream, so `letter(i)` needs no state.
    Random { n: u8, probs: Vec<f64>, seed: u64 },
}

impl InfiniteWord {
    pub fn periodic(pre: Word, period: Word) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidWord("period must be nonempty".into()));
        }
        if pre.alphabet_size() != period.alphabet_size() {
            return Err(Error::InvalidWord("alphabet mismatch".into()));
        }
        Ok(InfiniteWord::EventuallyPeriodic { pre, period })
    }

    /// The constant word `letter letter letter ...`.
    pub fn constant(letter: u8, n: u8) -> Result<Self> {
        Self::periodic(Word::empty(n), Word::new(vec![letter], n)?)
    }

    pub fn random_uniform(n: u8, seed: u64) -> Self {
        InfiniteWord::Random {
            n,
            probs: vec![1.0 / n as f64; n as usize],
            seed,
        }
    }

    pub fn random(n: u8, probs: Vec<f64>, seed: u64) -> Result<Self> {
        if probs.len() != n as usize {
            return Err(Error::InvalidWord(format!(
                "expected {n} probabilities, got {}",
                probs.len()
            )));
        }
        let total: f64 = probs.iter().sum();
        if probs.iter().any(|&p| !(p > 0.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidWord(
                "probabilities must be positive and sum to one".into(),
            ));
        }
        Ok(InfiniteWord::Random { n, probs, seed })
    }

    /// Parses `"3(12)"`, `"(1)"`, `"disjunctive"` or `"random:seed=<u64>"`.
    /// A leading `"0:"` reads the digits as 0-based letters.
    pub fn parse(s: &str, n: u8) -> Result<Self> {
        let s = s.trim();
        if s == "disjunctive" {
            return Ok(InfiniteWord::Disjunctive { n });
        }
        if let Some(rest) = s.strip_prefix("random") {
            let rest = rest.trim_start_matches(':');
            let mut seed = 0u64;
            let mut probs = None;
            for part in rest.split(',').filter(|p| !p.is_empty()) {
                if let Some(v) = part.strip_prefix("seed=") {
                    seed = v
                        .parse()
                        .map_err(|_| Error::InvalidWord(format!("bad seed `{v}`")))?;
                } else if let Some(v) = part.strip_prefix("p=") {
                    let ps: std::result::Result<Vec<f64>, _> =
                        v.split('/').map(str::parse).collect();
                    probs = Some(
                        ps.map_err(|_| Error::InvalidWord(format!("bad probabilities `{v}`")))?,
                    );
                } else {
                    return Err(Error::InvalidWord(format!("unknown random option `{part}`")));
                }
            }
            return match probs {
                Some(p) => Self::random(n, p, seed),
                None => Ok(Self::random_uniform(n, seed)),
            };
        }
        let (zero_based, body) = match s.strip_prefix("0:") {
            Some(b) => (true, b),
            None => (false, s),
        };
        let open = body
            .find('(')
            .ok_or_else(|| Error::InvalidWord(format!("`{s}`: missing parenthesized period")))?;
        if !body.ends_with(')') {
            return Err(Error::InvalidWord(format!("`{s}`: period must close the word")));
        }
        let pre = Word::new(parse_digits(&body[..open], zero_based)?, n)?;
        let period = Word::new(parse_digits(&body[open + 1..body.len() - 1], zero_based)?, n)?;
        Self::periodic(pre, period)
    }

    pub fn alphabet_size(&self) -> u8 {
        match self {
            InfiniteWord::EventuallyPeriodic { period, .. } => period.alphabet_size(),
            InfiniteWord::Disjunctive { n } | InfiniteWord::Random { n, .. } => *n,
        }
    }

    /// Letter at 1-based position `i`.
    pub fn letter(&self, i: usize) -> u8 {
        assert!(i >= 1, "positions are 1-based");
        match self {
            InfiniteWord::EventuallyPeriodic { pre, period } => {
                if i <= pre.len() {
                    pre.letter(i)
                } else {
                    period.letter((i - pre.len() - 1) % period.len() + 1)
                }
            }
            InfiniteWord::Disjunctive { n } => disjunctive_letter(*n, i as u128),
            InfiniteWord::Random { probs, seed, .. } => {
                let bits = splitmix64(seed.wrapping_add((i as u64).wrapping_mul(GOLDEN_GAMMA)));
                let u = (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                let mut acc = 0.0;
                for (k, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return k as u8 + 1;
                    }
                }
                probs.len() as u8
            }
        }
    }

    /// `θ|k`.
    pub fn prefix(&self, k: usize) -> Word {
        let n = self.alphabet_size();
        let letters = match self {
            InfiniteWord::Disjunctive { n } => disjunctive_prefix(*n, k),
            _ => (1..=k).map(|i| self.letter(i)).collect(),
        };
        Word { letters, n }
    }
}

impl fmt::Display for InfiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfiniteWord::EventuallyPeriodic { pre, period } => {
                if !pre.is_empty() {
                    write!(f, "{pre}")?;
                }
                write!(f, "({period})")
            }
            InfiniteWord::Disjunctive { .. } => f.write_str("disjunctive"),
            InfiniteWord::Random { seed, .. } => write!(f, "random:seed={seed}"),
        }
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let letters = parse_digits(s.trim(), false)?;
        let n = letters.iter().copied().max().unwrap_or(1);
        Word::new(letters, n)
    }
}

fn disjunctive_letter(n: u8, i: u128) -> u8 {
    let n = n as u128;
    let mut offset = i - 1;
    let mut len = 1u32;
    let mut count = n;
    loop {
        let block = count * len as u128;
        if offset < block {
            break;
        }
        offset -= block;
        len += 1;
        count *= n;
    }
    let idx = offset / len as u128;
    let pos = (offset % len as u128) as u32;
    let digit = (idx / n.pow(len - 1 - pos)) % n;
    digit as u8 + 1
}

fn disjunctive_prefix(n: u8, k: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(k);
    let mut len = 1usize;
    'outer: loop {
        let mut digits = vec![1u8; len];
        loop {
            for &d in &digits {
                if out.len() == k {
                    break 'outer;
                }
                out.push(d);
            }
            // odometer increment
            let mut j = len;
            loop {
                if j == 0 {
                    len += 1;
                    continue 'outer;
                }
                j -= 1;
                if digits[j] < n {
                    digits[j] += 1;
                    break;
                }
                digits[j] = 1;
            }
        }
    }
    out
}
