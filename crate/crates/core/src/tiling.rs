//! Word-indexed tilings: tiles `(f⁻¹)_{θ|k} ∘ f_ω (A)` keyed by canonical addresses.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;

use crate::body::Body;
use crate::error::{Error, Result};
use crate::geometry::{Polygon, Rect};
use crate::ifs::Ifs;
use crate::interval::IntervalSet;
use crate::map::{MapSpec, PlaneMap};
use crate::raster::Raster;
use crate::scalar::Scalar;
use crate::word::{InfiniteWord, Word};

/// Default cap on the number of tiles enumerated at one level.
pub const DEFAULT_TILE_BUDGET: u64 = 1 << 22;

/// Canonical tile address: `level = 0`, or `word_1 ≠ θ_level`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TileKey {
    pub level: usize,
    pub word: Word,
}

impl fmt::Display for TileKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.word)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tile<S> {
    pub key: TileKey,
    pub xform: MapSpec<S>,
}

impl<S: Scalar> Tile<S> {
    /// Exact image of a 1-D attractor.
    pub fn interval(&self, a: &IntervalSet<S>) -> Option<IntervalSet<S>> {
        let (m, e) = self.xform.coeffs_1d()?;
        Some(a.map_affine(&m, &e))
    }

    pub fn polygon(&self, template: &Polygon) -> Option<Polygon> {
        template.map(&PlaneMap::from_spec(&self.xform).ok()?)
    }

    pub fn plane_map(&self) -> Result<PlaneMap> {
        PlaneMap::from_spec(&self.xform)
    }
}

/// Strips leading letters while `word_1 = θ_level`, which leaves the transform
/// `(f⁻¹)_{θ|level} ∘ f_word` unchanged.
pub fn canonicalize(theta: &InfiniteWord, level: usize, word: &Word) -> Result<TileKey> {
    if word.len() != level {
        return Err(Error::InvalidWord(format!(
            "word {word} has length {} but level is {level}",
            word.len()
        )));
    }
    let mut skip = 0;
    while skip < level && word.letter(skip + 1) == theta.letter(level - skip) {
        skip += 1;
    }
    Ok(TileKey {
        level: level - skip,
        word: Word::new(word.letters()[skip..].to_vec(), word.alphabet_size())?,
    })
}

fn check_theta(theta: &InfiniteWord, n: u8) -> Result<()> {
    if theta.alphabet_size() != n {
        return Err(Error::InvalidWord(format!(
            "θ = {theta} is over {} letters, the system has {n} maps",
            theta.alphabet_size()
        )));
    }
    Ok(())
}

/// All canonical keys of `T_{θ,k}`: pairs `(j, ν)` with `j ≤ k`, `|ν| = j` and
/// `ν_1 ≠ θ_j`. There are `N^k` of them.
pub fn canonical_keys(theta: &InfiniteWord, k: usize) -> Vec<TileKey> {
    let n = theta.alphabet_size();
    let mut out = vec![TileKey {
        level: 0,
        word: Word::empty(n),
    }];
    for j in 1..=k {
        let avoid = theta.letter(j);
        for w in Word::all_of_length(n, j) {
            if w.letter(1) != avoid {
                out.push(TileKey { level: j, word: w });
            }
        }
    }
    out.sort();
    out
}

/// `(f⁻¹)_{θ|j}` for `j = 0..=k`.
pub fn expansion_maps<S: Scalar>(f: &Ifs<S>, theta: &InfiniteWord, k: usize) -> Vec<MapSpec<S>> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(MapSpec::identity(f.dim()));
    for j in 1..=k {
        let next = out[j - 1].compose(f.inverse(theta.letter(j)));
        out.push(next);
    }
    out
}

/// The `N^k` tiles of `T_{θ,k}`, sorted by key.
///
/// Enumerates canonical addresses directly, depth first with running products,
/// in parallel over `(level, first letter)`.
pub fn tiles_at_level<S: Scalar>(
    f: &Ifs<S>,
    theta: &InfiniteWord,
    k: usize,
    budget: u64,
) -> Result<Vec<Tile<S>>> {
    check_theta(theta, f.n())?;
    let n = f.n();
    let count = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if count > budget as u128 {
        return Err(Error::budget("tiles", count, budget as u128));
    }
    let pre = expansion_maps(f, theta, k);
    let mut jobs = vec![(0usize, 0u8)];
    for j in 1..=k {
        jobs.extend((1..=n).filter(|&a| a != theta.letter(j)).map(|a| (j, a)));
    }
    let mut tiles: Vec<Tile<S>> = jobs
        .par_iter()
        .flat_map_iter(|&(j, a)| {
            let mut out = Vec::new();
            if j == 0 {
                out.push(Tile {
                    key: TileKey {
                        level: 0,
                        word: Word::empty(n),
                    },
                    xform: pre[0].clone(),
                });
                return out;
            }
            let mut letters = vec![a];
            let start = pre[j].compose(f.map(a));
            descend(f, j, &mut letters, &start, &mut out);
            out
        })
        .collect();
    tiles.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(tiles)
}

fn descend<S: Scalar>(f: &Ifs<S>, level: usize, letters: &mut Vec<u8>, m: &MapSpec<S>, out: &mut Vec<Tile<S>>) {
    if letters.len() == level {
        out.push(Tile {
            key: TileKey {
                level,
                word: Word::new(letters.clone(), f.n()).expect("letters in range"),
            },
            xform: m.clone(),
        });
        return;
    }
    for a in 1..=f.n() {
        letters.push(a);
        descend(f, level, letters, &m.compose(f.map(a)), out);
        letters.pop();
    }
}

/// Result of a non-overlap check. Amounts are interior cells in 2-D and
/// lengths in 1-D.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapReport {
    pub overlap: f64,
    pub overlapping_pairs: usize,
    pub worst: Option<(usize, usize, f64)>,
}

impl OverlapReport {
    pub fn is_clean(&self) -> bool {
        self.overlapping_pairs == 0
    }

    fn from_pairs(pairs: HashMap<(usize, usize), f64>) -> Self {
        let overlap = pairs.values().sum();
        let worst = pairs
            .iter()
            .map(|(&(a, b), &v)| (a, b, v))
            .max_by(|x, y| x.2.total_cmp(&y.2).then((y.0, y.1).cmp(&(x.0, x.1))));
        OverlapReport {
            overlap,
            overlapping_pairs: pairs.len(),
            worst,
        }
    }
}

/// Overlap of 1-D pieces `(lo, hi, owner)`: sweeps by left endpoint against the
/// piece reaching furthest right.
pub fn interval_overlaps<S: Scalar>(mut pieces: Vec<(S, S, usize)>) -> OverlapReport {
    pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite endpoints"));
    let mut pairs: HashMap<(usize, usize), f64> = HashMap::new();
    let mut reach: Option<(S, usize)> = None;
    for (lo, hi, owner) in pieces {
        if let Some((r, o)) = &reach {
            if &lo < r && *o != owner {
                let end = if &hi < r { hi.clone() } else { r.clone() };
                let len = (end - lo.clone()).to_f64_lossy();
                if len > 0.0 {
                    *pairs.entry(((*o).min(owner), (*o).max(owner))).or_default() += len;
                }
            }
        }
        match &reach {
            Some((r, _)) if &hi <= r => {}
            _ => reach = Some((hi, owner)),
        }
    }
    OverlapReport::from_pairs(pairs)
}

/// A copy `fwd(body)` placed in the plane.
#[derive(Clone, Copy, Debug)]
pub struct Placed<'a> {
    pub fwd: PlaneMap,
    pub body: &'a Body,
}

fn sigma_min(j: [f64; 4]) -> f64 {
    let q = j.iter().map(|v| v * v).sum::<f64>();
    let det = j[0] * j[3] - j[1] * j[2];
    let disc = (q * q - 4.0 * det * det).max(0.0).sqrt();
    ((q - disc) / 2.0).max(0.0).sqrt()
}

struct Prepared {
    inv: PlaneMap,
    bbox: Rect,
    margin: f64,
}

fn prepare(t: &Placed<'_>, margin_out: f64) -> Option<Prepared> {
    let src = t.body.bbox();
    let bbox = src.map_bbox(&t.fwd)?;
    let inv = t.fwd.inverse()?;
    let [cx, cy] = [(src.x0 + src.x1) / 2.0, (src.y0 + src.y1) / 2.0];
    let mut probes = src.corners().to_vec();
    probes.push([cx, cy]);
    let smin = probes
        .iter()
        .map(|&p| sigma_min(t.fwd.jacobian(p)))
        .fold(f64::INFINITY, f64::min);
    Some(Prepared {
        inv,
        bbox,
        margin: margin_out / smin.max(1e-300),
    })
}

const BLOCK: i64 = 512;

/// Counts raster cells lying in the interiors of two or more placed copies.
/// A cell belongs to a copy's interior when its center is farther than
/// `erosion` cells from the copy's boundary.
pub fn placed_overlaps(tiles: &[Placed<'_>], res: f64, erosion: usize) -> OverlapReport {
    let margin_out = erosion as f64 / res;
    let prepared: Vec<Option<Prepared>> = tiles.par_iter().map(|t| prepare(t, margin_out)).collect();
    let frame = prepared
        .iter()
        .flatten()
        .fold(Rect::empty(), |r, p| r.union(&p.bbox));
    if frame.is_empty() {
        return OverlapReport::from_pairs(HashMap::new());
    }
    let cell = |v: f64| (v * res).floor() as i64;
    let (i0, j0, i1, j1) = (cell(frame.x0), cell(frame.y0), cell(frame.x1), cell(frame.y1));
    let mut blocks = Vec::new();
    let mut bj = j0;
    while bj <= j1 {
        let mut bi = i0;
        while bi <= i1 {
            blocks.push((bi, bj));
            bi += BLOCK;
        }
        bj += BLOCK;
    }
    let pairs = blocks
        .par_iter()
        .map(|&(bi, bj)| {
            let block = Rect::new(
                bi as f64 / res,
                bj as f64 / res,
                (bi + BLOCK) as f64 / res,
                (bj + BLOCK) as f64 / res,
            );
            let mut owner = vec![u32::MAX; (BLOCK * BLOCK) as usize];
            let mut pairs: HashMap<(usize, usize), f64> = HashMap::new();
            for (idx, p) in prepared.iter().enumerate() {
                let Some(p) = p else { continue };
                if !p.bbox.intersects(&block) {
                    continue;
                }
                let lo_i = cell(p.bbox.x0).max(bi);
                let hi_i = cell(p.bbox.x1).min(bi + BLOCK - 1);
                let lo_j = cell(p.bbox.y0).max(bj);
                let hi_j = cell(p.bbox.y1).min(bj + BLOCK - 1);
                for j in lo_j..=hi_j {
                    for i in lo_i..=hi_i {
                        let y = [(i as f64 + 0.5) / res, (j as f64 + 0.5) / res];
                        let Some(x) = p.inv.apply(y) else { continue };
                        if !tiles[idx].body.contains_interior(&x, p.margin) {
                            continue;
                        }
                        let slot = &mut owner[((j - bj) * BLOCK + (i - bi)) as usize];
                        if *slot == u32::MAX {
                            *slot = idx as u32;
                        } else {
                            let o = *slot as usize;
                            *pairs.entry((o.min(idx), o.max(idx))).or_default() += 1.0;
                        }
                    }
                }
            }
            pairs
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    OverlapReport::from_pairs(pairs)
}

/// `T_{θ,k}` together with the data needed to place its tiles.
#[derive(Clone, Debug)]
pub struct Tiling<S> {
    pub ifs: Ifs<S>,
    pub body: Body,
    pub theta: InfiniteWord,
    pub level: usize,
    pub tiles: Vec<Tile<S>>,
}

impl<S: Scalar> Tiling<S> {
    pub fn new(ifs: Ifs<S>, body: Body, theta: InfiniteWord, level: usize, budget: u64) -> Result<Self> {
        if body.dim() != ifs.dim() {
            return Err(Error::DimMismatch {
                expected: ifs.dim(),
                found: body.dim(),
            });
        }
        let tiles = tiles_at_level(&ifs, &theta, level, budget)?;
        Ok(Tiling {
            ifs,
            body,
            theta,
            level,
            tiles,
        })
    }

    pub fn keys(&self) -> BTreeSet<TileKey> {
        self.tiles.iter().map(|t| t.key.clone()).collect()
    }

    /// The attractor as an exact interval set (1-D bodies only).
    pub fn exact_attractor(&self) -> Option<IntervalSet<S>> {
        match &self.body {
            Body::Intervals(s) => Some(IntervalSet::from_parts(
                s.parts()
                    .iter()
                    .map(|&(a, b)| (S::from_f64_lossy(a), S::from_f64_lossy(b)))
                    .collect(),
            )),
            _ => None,
        }
    }

    /// Tile intervals in key order (1-D only).
    pub fn intervals(&self) -> Option<Vec<IntervalSet<S>>> {
        let a = self.exact_attractor()?;
        self.tiles.iter().map(|t| t.interval(&a)).collect()
    }

    /// `B_k = (f⁻¹)_{θ|k}(A)`, the union of all tiles of the level.
    pub fn expansion_map(&self) -> MapSpec<S> {
        self.ifs.inverse_compose(&self.theta.prefix(self.level)).expect("θ checked")
    }

    pub fn verify_nonoverlap(&self, res: f64, erosion: usize) -> Result<OverlapReport> {
        if let Some(ivs) = self.intervals() {
            let pieces = ivs
                .iter()
                .enumerate()
                .flat_map(|(i, s)| s.parts().iter().map(move |(a, b)| (a.clone(), b.clone(), i)))
                .collect();
            return Ok(interval_overlaps(pieces));
        }
        let placed: Vec<Placed<'_>> = self
            .tiles
            .iter()
            .map(|t| {
                Ok(Placed {
                    fwd: t.plane_map()?,
                    body: &self.body,
                })
            })
            .collect::<Result<_>>()?;
        Ok(placed_overlaps(&placed, res, erosion))
    }

    /// Fraction of `window` covered by the tiles. Exact for 1-D (the window is
    /// `[x0, x1]`); in 2-D the fraction of cell centers `y` with
    /// `f_{θ_k} ∘ … ∘ f_{θ_1}(y) ∈ A`.
    pub fn coverage(&self, window: &Rect, res: f64) -> Result<f64> {
        coverage_at_level(&self.ifs, &self.body, &self.theta, self.level, window, res)
    }
}

/// Coverage of `window` by `B_k = (f⁻¹)_{θ|k}(A)` without enumerating tiles.
pub fn coverage_at_level<S: Scalar>(
    f: &Ifs<S>,
    body: &Body,
    theta: &InfiniteWord,
    k: usize,
    window: &Rect,
    res: f64,
) -> Result<f64> {
    check_theta(theta, f.n())?;
    let prefix = theta.prefix(k);
    if let Body::Intervals(a) = body {
        let a: IntervalSet<S> = IntervalSet::from_parts(
            a.parts()
                .iter()
                .map(|&(x, y)| (S::from_f64_lossy(x), S::from_f64_lossy(y)))
                .collect(),
        );
        let (m, e) = f
            .inverse_compose(&prefix)?
            .coeffs_1d()
            .ok_or_else(|| Error::Invariant("1-D coverage needs affine maps".into()))?;
        let lo = S::from_f64_lossy(window.x0);
        let hi = S::from_f64_lossy(window.x1);
        let covered = a.map_affine(&m, &e).intersect(&IntervalSet::interval(lo.clone(), hi.clone()));
        return Ok((covered.measure() / (hi - lo)).to_f64_lossy());
    }
    let back = PlaneMap::from_spec(&f.forward_along(&prefix)?)?;
    let grid = Raster::from_fn(window, res, u32::MAX as u64, |y| {
        back.apply(y).is_some_and(|x| body.contains(&x, 1e-12))
    })?;
    // frame cells whose centers fall inside the window
    let inside = Raster::from_fn(window, res, u32::MAX as u64, |y| window.contains(y))?;
    Ok(grid.intersect(&inside)?.count() as f64 / inside.count().max(1) as f64)
}
