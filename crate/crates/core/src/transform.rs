//! Addresses from tops sections, extended coordinates on the expansion
//! `B(θ)`, fast basins, and the fractal transformations between two systems.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use image::{Rgba, RgbaImage};
use rayon::prelude::*;

use crate::body::Body;
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::ifs::Ifs;
use crate::interval::IntervalSet;
use crate::map::{MapSpec, PlaneMap};
use crate::mask::{Mask1d, Mask2d, SetExpr};
use crate::raster::Raster;
use crate::scalar::Scalar;
use crate::word::{InfiniteWord, Word};

pub const DEFAULT_DEPTH: usize = 48;

/// `θ|k • ω`, canonical when `k = 0` or `θ_k ≠ ω_1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaAddress {
    pub prefix: Word,
    pub tail: Word,
}

impl OmegaAddress {
    pub fn is_canonical(&self) -> bool {
        match (self.prefix.letters().last(), self.tail.first()) {
            (Some(a), Some(b)) => *a != b,
            _ => true,
        }
    }
}

impl fmt::Display for OmegaAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}•{}", self.prefix, self.tail)
    }
}

#[derive(Clone, Debug)]
enum Regions {
    Intervals(Vec<IntervalSet<f64>>),
    Plane(Vec<Arc<SetExpr>>),
}

/// A tops section of a system with a known attractor body.
#[derive(Clone, Debug)]
pub struct Section {
    pub ifs: Ifs<f64>,
    pub body: Body,
    pub depth: usize,
    /// Membership tolerance for `x ∈ A`, one cell by default.
    pub tol: f64,
    regions: Regions,
    inverses: Vec<MapSpec<f64>>,
    center: Vec<f64>,
}

impl Section {
    /// Section induced by the tops mask, with membership tolerance `1/res`.
    pub fn tops(ifs: &Ifs<f64>, body: &Body, res: f64) -> Result<Self> {
        let regions = match body {
            Body::Intervals(a) => Regions::Intervals(Mask1d::tops_mask(ifs, a)?.regions),
            _ => Regions::Plane(Mask2d::tops_mask(ifs, body)?.regions),
        };
        let (center, _) = ifs.bounding_ball()?;
        Ok(Section {
            ifs: ifs.clone(),
            body: body.clone(),
            depth: DEFAULT_DEPTH,
            tol: 1.0 / res,
            regions,
            inverses: (1..=ifs.n()).map(|i| ifs.inverse(i).clone()).collect(),
            center,
        })
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn in_attractor(&self, x: &[f64]) -> bool {
        self.body.contains(x, self.tol)
    }

    fn in_region(&self, i: usize, x: &[f64]) -> bool {
        match &self.regions {
            Regions::Intervals(r) => r[i].contains(&x[0]),
            Regions::Plane(r) => r[i].contains([x[0], x[1]]),
        }
    }

    /// Largest `i` with `x ∈ M_i`; failing that, the map whose preimage of `x`
    /// lies closest to `A`.
    fn digit(&self, x: &[f64]) -> Result<usize> {
        let n = self.inverses.len();
        if let Some(i) = (0..n).rev().find(|&i| self.in_region(i, x)) {
            return Ok(i);
        }
        let bb = self.body.bbox();
        let mut best = (f64::INFINITY, 0);
        for i in (0..n).rev() {
            let y = self.inverses[i].apply(x)?;
            if self.body.contains(&y, self.tol) {
                return Ok(i);
            }
            let d = rect_distance(&bb, &y);
            if d < best.0 {
                best = (d, i);
            }
        }
        Ok(best.1)
    }

    /// The first `depth` digits of the address of `x ∈ A`.
    pub fn address(&self, x: &[f64]) -> Result<Word> {
        if !self.in_attractor(x) {
            return Err(Error::OutsideAttractor(x.to_vec()));
        }
        let mut letters = Vec::with_capacity(self.depth);
        // points accepted by the tolerant test are pulled onto A, or their
        // preimages would drift away by the expansion factor each step
        let mut y = self.body.nearest(x);
        for _ in 0..self.depth {
            let i = self.digit(&y)?;
            letters.push(i as u8 + 1);
            y = self.body.nearest(&self.inverses[i].apply(&y)?);
        }
        Word::new(letters, self.ifs.n())
    }

    /// `f_{w_1} ∘ … ∘ f_{w_k}` applied to the centre of the bounding ball.
    pub fn coordinate(&self, w: &Word) -> Result<Vec<f64>> {
        coordinate(&self.ifs, &self.center, w)
    }
}

fn rect_distance(r: &Rect, y: &[f64]) -> f64 {
    let dx = (r.x0 - y[0]).max(y[0] - r.x1).max(0.0);
    let dy = if y.len() > 1 {
        (r.y0 - y[1]).max(y[1] - r.y1).max(0.0)
    } else {
        0.0
    };
    dx.hypot(dy)
}

fn coordinate(f: &Ifs<f64>, start: &[f64], w: &Word) -> Result<Vec<f64>> {
    let mut x = start.to_vec();
    for &l in w.letters().iter().rev() {
        x = f.map(l).apply(&x)?;
    }
    Ok(x)
}

/// Greedy tops address of `x`.
pub fn section_address(s: &Section, x: &[f64]) -> Result<Word> {
    s.address(x)
}

/// `(f⁻¹)_{θ|k}(π(ω))`, with `π(ω)` approximated by the truncated tail.
pub fn extended_coordinate(f: &Ifs<f64>, addr: &OmegaAddress) -> Result<Vec<f64>> {
    let (c, _) = f.bounding_ball()?;
    let x = coordinate(f, &c, &addr.tail)?;
    f.inverse_compose(&addr.prefix)?.apply(&x)
}

/// `θ|k • τ(f_{θ_k} ∘ … ∘ f_{θ_1}(x))` for the least `k ≤ k_max` that lands in `A`.
pub fn extended_section(s: &Section, theta: &InfiniteWord, x: &[f64], k_max: usize) -> Result<OmegaAddress> {
    if theta.alphabet_size() != s.ifs.n() {
        return Err(Error::InvalidWord(format!("θ = {theta} does not match {} maps", s.ifs.n())));
    }
    let mut y = x.to_vec();
    // tolerance shrinks with the maps so that it stays one cell around x
    let mut scale = 1.0;
    for k in 0..=k_max {
        if k > 0 {
            y = s.ifs.map(theta.letter(k)).apply(&y)?;
            scale *= s.ifs.map_contraction(theta.letter(k));
        }
        if s.body.contains(&y, s.tol * scale) {
            let mut addr = OmegaAddress {
                prefix: theta.prefix(k),
                tail: s.address(&y)?,
            };
            // a tolerant membership test can leave θ_k = ω_1; fold it back
            while !addr.is_canonical() {
                let k = addr.prefix.len();
                addr.prefix = addr.prefix.prefix(k - 1);
                addr.tail = addr.tail.tail();
            }
            return Ok(addr);
        }
    }
    Err(Error::OutsideExpansion(x.to_vec()))
}

/// `π̂_G ∘ τ̂_F` at `x`: the point of the target system with the same address.
pub fn fractal_transform_point(
    from: &Section,
    to: &Ifs<f64>,
    theta: &InfiniteWord,
    x: &[f64],
    k_max: usize,
) -> Result<Vec<f64>> {
    if from.ifs.n() != to.n() {
        return Err(Error::DimMismatch {
            expected: from.ifs.n() as usize,
            found: to.n() as usize,
        });
    }
    let addr = extended_section(from, theta, x, k_max)?;
    extended_coordinate(to, &addr)
}

/// `∪_{|w| ≤ k} (f⁻¹)_w(A)` for a 1-D attractor, exactly.
pub fn fast_basin_1d<S: Scalar>(f: &Ifs<S>, a: &IntervalSet<S>, k: usize, budget: u64) -> Result<IntervalSet<S>> {
    let inv: Vec<(S, S)> = (1..=f.n())
        .map(|i| {
            f.inverse(i)
                .coeffs_1d()
                .ok_or_else(|| Error::Invariant("1-D fast basin needs affine maps".into()))
        })
        .collect::<Result<_>>()?;
    let mut level = a.clone();
    let mut basin = a.clone();
    for _ in 0..k {
        level = IntervalSet::union_all(inv.iter().map(|(m, e)| level.map_affine(m, e)).collect::<Vec<_>>().iter());
        basin = basin.union(&level);
        if basin.len() as u64 > budget {
            return Err(Error::budget("basin intervals", basin.len() as u128, budget as u128));
        }
    }
    Ok(basin)
}

/// `F*(X) ∪ A` with `F*(X) = ∪ f_i⁻¹(X)`.
pub fn basin_step_1d<S: Scalar>(f: &Ifs<S>, a: &IntervalSet<S>, x: &IntervalSet<S>) -> IntervalSet<S> {
    let mut out = a.clone();
    for i in 1..=f.n() {
        let (m, e) = f.inverse(i).coeffs_1d().expect("affine");
        out = out.union(&x.map_affine(&m, &e));
    }
    out
}

fn map_key(m: &PlaneMap, q: f64) -> [i64; 9] {
    let mut k = [0i64; 9];
    for (slot, v) in k.iter_mut().zip(m.matrix()) {
        *slot = (v * q).round() as i64;
    }
    k
}

/// Raster of `∪_{|w| ≤ k} (f⁻¹)_w(A)` inside `window`.
///
/// Each copy is drawn forward by splitting `g(A) = ∪ g∘f_i(A)` until the pieces
/// fit in a cell, so the expansion does not magnify the cell size.
pub fn fast_basin_2d(f: &Ifs<f64>, body: &Body, k: usize, window: &Rect, res: f64, budget: u64) -> Result<Raster> {
    let words: u128 = (0..=k as u32).map(|j| (f.len() as u128).pow(j)).sum();
    if words > budget as u128 {
        return Err(Error::budget("basin words", words, budget as u128));
    }
    let maps = f.plane_maps()?;
    let inv = f.plane_inverses()?;
    let mut out = Raster::new(window, res, budget)?;
    let cell = 1.0 / res;
    let abox = body.bbox();
    let anchor = {
        let (c, _) = f.bounding_ball()?;
        let mut x = [c[0], c[1]];
        for _ in 0..400 {
            x = maps[0].apply(x).ok_or(Error::NearInfinity)?;
        }
        x
    };
    let mut level = vec![PlaneMap::identity()];
    let mut seen: HashSet<[i64; 9]> = HashSet::new();
    let mut roots = Vec::new();
    for j in 0..=k {
        let mut next = Vec::new();
        for g in &level {
            if seen.insert(map_key(g, 1e9)) {
                roots.push(*g);
                if j < k {
                    next.extend(inv.iter().map(|h| h.compose(g)));
                }
            }
        }
        level = next;
    }
    if let Some(p) = body.polygon() {
        let cells: Vec<Vec<(i64, i64)>> = roots
            .par_iter()
            .filter_map(|g| {
                let bb = abox.map_bbox(g)?.intersect(window);
                let img = p.map(g)?;
                let r = Raster::from_fn(&bb, res, u64::MAX, |q| img.contains(q)).ok()?;
                Some(r.cells().collect())
            })
            .collect();
        for (i, j) in cells.into_iter().flatten() {
            out.set(i, j, true);
        }
        return Ok(out);
    }
    // split every copy level by level; copies overlap a lot, so pieces are
    // deduplicated across all of them
    let mut frontier = roots;
    while !frontier.is_empty() {
        let step: Vec<(Option<(i64, i64)>, Vec<PlaneMap>)> = frontier
            .par_iter()
            .filter_map(|h| {
                let bb = abox.map_bbox(h)?;
                if !bb.intersects(window) {
                    return None;
                }
                if bb.diameter() <= cell {
                    return Some((h.apply(anchor).map(|q| out.cell_of(q)), Vec::new()));
                }
                Some((None, maps.iter().map(|m| h.compose(m)).collect()))
            })
            .collect();
        let mut next = Vec::new();
        for (leaf, children) in step {
            if let Some((i, j)) = leaf {
                out.set(i, j, true);
            }
            for c in children {
                if seen.insert(map_key(&c, 1e9)) {
                    next.push(c);
                }
            }
        }
        if seen.len() as u64 > budget {
            return Err(Error::budget("basin pieces", seen.len() as u128, budget as u128));
        }
        frontier = next;
    }
    Ok(out)
}

/// Pixels of `img` cover `window`, row 0 at the top.
fn sample(img: &RgbaImage, window: &Rect, x: &[f64]) -> Option<Rgba<u8>> {
    let (w, h) = img.dimensions();
    let u = (x[0] - window.x0) / window.width() * w as f64;
    let v = (window.y1 - x[1]) / window.height() * h as f64;
    if u < 0.0 || v < 0.0 || u >= w as f64 || v >= h as f64 {
        return None;
    }
    Some(*img.get_pixel(u as u32, v as u32))
}

/// Settings for [`transform_image`].
#[derive(Clone, Debug)]
pub struct ImageTransform {
    pub in_window: Rect,
    pub out_window: Rect,
    pub out_size: (u32, u32),
    pub k_max: usize,
    pub sentinel: Rgba<u8>,
}

/// The transformed image `c ∘ h`: every output pixel at `y` in the target
/// space takes the colour of the input at the point with the same extended
/// address in the source space. Failures get the sentinel colour.
pub fn transform_image(
    source: &Ifs<f64>,
    target: &Section,
    theta: &InfiniteWord,
    img: &RgbaImage,
    t: &ImageTransform,
) -> RgbaImage {
    let (w, h) = t.out_size;
    let ow = &t.out_window;
    let pixels: Vec<Rgba<u8>> = (0..w * h)
        .into_par_iter()
        .map(|idx| {
            let (c, r) = (idx % w, idx / w);
            let y = [
                ow.x0 + (c as f64 + 0.5) / w as f64 * ow.width(),
                ow.y1 - (r as f64 + 0.5) / h as f64 * ow.height(),
            ];
            fractal_transform_point(target, source, theta, &y, t.k_max)
                .ok()
                .and_then(|x| sample(img, &t.in_window, &x))
                .unwrap_or(t.sentinel)
        })
        .collect();
    let mut out = RgbaImage::new(w, h);
    for (idx, p) in pixels.into_iter().enumerate() {
        out.put_pixel(idx as u32 % w, idx as u32 / w, p);
    }
    out
}
