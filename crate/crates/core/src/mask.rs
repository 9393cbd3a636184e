//! Masks and masked tilings for overlapping systems.
//!
//! One-dimensional masks are exact interval sets. In the plane every region and
//! tile is kept as a lazy set expression over the attractor, evaluated per cell
//! only when rasterized, so repeated pullbacks do not accumulate raster error.

use std::sync::Arc;

use rayon::prelude::*;

use crate::body::Body;
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::ifs::Ifs;
use crate::interval::IntervalSet;
use crate::map::{MapSpec, PlaneMap};
use crate::raster::Raster;
use crate::scalar::Scalar;
use crate::tiling::{interval_overlaps, placed_overlaps, Placed};
use crate::word::InfiniteWord;

fn map_1d<S: Scalar>(m: &MapSpec<S>, s: &IntervalSet<S>) -> Result<IntervalSet<S>> {
    let (a, e) = m
        .coeffs_1d()
        .ok_or_else(|| Error::Invariant("1-D masks need affine maps".into()))?;
    Ok(s.map_affine(&a, &e))
}

/// `M_1, …, M_N` for a 1-D attractor.
#[derive(Clone, Debug, PartialEq)]
pub struct Mask1d<S> {
    pub regions: Vec<IntervalSet<S>>,
}

impl<S: Scalar> Mask1d<S> {
    /// `M_i = f_i(A)`, valid only when the images do not overlap.
    pub fn default_mask(f: &Ifs<S>, a: &IntervalSet<S>) -> Result<Self> {
        let regions = f.maps().iter().map(|m| map_1d(m, a)).collect::<Result<Vec<_>>>()?;
        let pieces = regions
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.parts().iter().map(move |(x, y)| (x.clone(), y.clone(), i)))
            .collect();
        let report = interval_overlaps(pieces);
        if let Some((i, j, len)) = report.worst {
            return Err(Error::NotNonOverlapping(format!(
                "f_{}(A) and f_{}(A) share length {len}",
                i + 1,
                j + 1
            )));
        }
        Ok(Mask1d { regions })
    }

    /// `M_1 = f_1(A)`, `M_{k+1} = f_{k+1}(A) \ (M_1 ∪ … ∪ M_k)`.
    pub fn tops_mask(f: &Ifs<S>, a: &IntervalSet<S>) -> Result<Self> {
        let mut regions: Vec<IntervalSet<S>> = Vec::with_capacity(f.len());
        let mut taken = IntervalSet::empty();
        for m in f.maps() {
            let img = map_1d(m, a)?;
            let r = img.difference(&taken);
            taken = taken.union(&r);
            regions.push(r);
        }
        Ok(Mask1d { regions })
    }

    /// Covering, containment and disjointness up to endpoints.
    pub fn validate(&self, f: &Ifs<S>, a: &IntervalSet<S>) -> Result<()> {
        if self.regions.len() != f.len() {
            return Err(Error::InvalidMask(format!(
                "{} regions for {} maps",
                self.regions.len(),
                f.len()
            )));
        }
        let all = IntervalSet::union_all(&self.regions);
        if a.difference(&all).measure() > S::zero() {
            return Err(Error::InvalidMask("regions do not cover A".into()));
        }
        for (i, (r, m)) in self.regions.iter().zip(f.maps()).enumerate() {
            if r.difference(&map_1d(m, a)?).measure() > S::zero() {
                return Err(Error::InvalidMask(format!("M_{} is not inside f_{}(A)", i + 1, i + 1)));
            }
        }
        let pieces = self
            .regions
            .iter()
            .enumerate()
            .flat_map(|(i, s)| s.parts().iter().map(move |(x, y)| (x.clone(), y.clone(), i)))
            .collect();
        if let Some((i, j, _)) = interval_overlaps(pieces).worst {
            return Err(Error::InvalidMask(format!("M_{} and M_{} overlap", i + 1, j + 1)));
        }
        Ok(())
    }
}

/// A masked tile with the region index chosen at each step.
#[derive(Clone, Debug, PartialEq)]
pub struct MaskedTile<G> {
    pub geometry: G,
    pub trail: Vec<u8>,
}

/// `(F_n, A_n, M_n, T_n)` after `n - 1` steps.
#[derive(Clone, Debug)]
pub struct MaskedStep1d<S> {
    pub n: usize,
    pub ifs: Ifs<S>,
    pub attractor: IntervalSet<S>,
    pub mask: Mask1d<S>,
    pub tiles: Vec<MaskedTile<IntervalSet<S>>>,
}

fn conjugate_all<S: Scalar>(f: &Ifs<S>, g: &MapSpec<S>, g_inv: &MapSpec<S>) -> Result<Ifs<S>> {
    let maps = f.maps().iter().map(|m| g_inv.compose(m).compose(g)).collect();
    Ok(Ifs::new(maps)?.with_declared_contractive(f.declared_contractive()))
}

/// Runs `steps` rounds of the masked recursion on a 1-D system and returns the
/// states `n = 1, …, steps + 1`.
///
/// The mask must satisfy `M_{θ_1} = f_{θ_1}(A)`. With `rotate` set, a mask that
/// fails is first replaced by `M_{θ_1} = f_{θ_1}(A)`, `M_j \ f_{θ_1}(A)` for the
/// other regions; otherwise it is rejected.
pub fn masked_tiling_1d<S: Scalar>(
    f: &Ifs<S>,
    a: &IntervalSet<S>,
    mask: &Mask1d<S>,
    theta: &InfiniteWord,
    steps: usize,
    rotate: bool,
) -> Result<Vec<MaskedStep1d<S>>> {
    if theta.alphabet_size() != f.n() {
        return Err(Error::InvalidWord(format!("θ = {theta} does not match {} maps", f.n())));
    }
    mask.validate(f, a)?;
    let t1 = theta.letter(1) as usize - 1;
    let first = map_1d(&f.maps()[t1], a)?;
    let mut mask = mask.clone();
    if mask.regions[t1] != first {
        if !rotate {
            return Err(Error::InvalidMask(format!(
                "M_{} must equal f_{}(A) for θ = {theta}",
                t1 + 1,
                t1 + 1
            )));
        }
        for (j, r) in mask.regions.iter_mut().enumerate() {
            *r = if j == t1 { first.clone() } else { r.difference(&first) };
        }
    }
    let mut states = vec![MaskedStep1d {
        n: 1,
        ifs: f.clone(),
        attractor: a.clone(),
        mask,
        tiles: vec![MaskedTile {
            geometry: a.clone(),
            trail: Vec::new(),
        }],
    }];
    for n in 1..=steps {
        let cur = states.last().unwrap();
        let th = theta.letter(n);
        let g = cur.ifs.map(th).clone();
        let g_inv = cur.ifs.inverse(th).clone();
        let maps: Vec<(S, S)> = cur.ifs.maps().iter().map(|m| m.coeffs_1d().expect("affine")).collect();
        let tiles: Vec<MaskedTile<IntervalSet<S>>> = cur
            .tiles
            .par_iter()
            .flat_map_iter(|t| {
                let g_inv = &g_inv;
                let cur = &cur;
                maps.iter().enumerate().filter_map(move |(i, (ma, me))| {
                    let piece = t.geometry.map_affine(ma, me).intersect(&cur.mask.regions[i]);
                    let piece = piece.without_slivers(&S::tolerance());
                    if piece.measure() <= S::zero() {
                        return None;
                    }
                    let mut trail = t.trail.clone();
                    trail.push(i as u8 + 1);
                    Some(MaskedTile {
                        geometry: map_1d(g_inv, &piece).expect("affine"),
                        trail,
                    })
                })
            })
            .collect();
        let ifs = conjugate_all(&cur.ifs, &g, &g_inv)?;
        let attractor = map_1d(&g_inv, &cur.attractor)?;
        let next = theta.letter(n + 1) as usize - 1;
        let top = map_1d(&ifs.maps()[next], &attractor)?;
        let regions = cur
            .mask
            .regions
            .iter()
            .enumerate()
            .map(|(j, r)| {
                if j == next {
                    Ok(top.clone())
                } else {
                    Ok(map_1d(&g_inv, r)?.difference(&top))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        states.push(MaskedStep1d {
            n: n + 1,
            ifs,
            attractor,
            mask: Mask1d { regions },
            tiles,
        });
    }
    Ok(states)
}

/// A planar set built lazily from the attractor by maps and set operations.
#[derive(Clone, Debug)]
pub enum SetExpr {
    Body(Arc<Body>),
    /// `{y : m(y) ∈ inner}`; `m_inv` is kept for bounding boxes.
    Pre {
        m: PlaneMap,
        m_inv: PlaneMap,
        inner: Arc<SetExpr>,
    },
    Inter(Arc<SetExpr>, Arc<SetExpr>),
    Diff(Arc<SetExpr>, Arc<SetExpr>),
    Union(Vec<Arc<SetExpr>>),
}

impl SetExpr {
    pub fn body(b: Body) -> Arc<Self> {
        Arc::new(SetExpr::Body(Arc::new(b)))
    }

    /// `f(inner)`.
    pub fn image(f: &PlaneMap, inner: &Arc<SetExpr>) -> Result<Arc<Self>> {
        let f_inv = f.inverse().ok_or(Error::Singular { index: 0, det: 0.0 })?;
        Ok(Arc::new(SetExpr::Pre {
            m: f_inv,
            m_inv: *f,
            inner: inner.clone(),
        }))
    }

    /// `g⁻¹(inner)`.
    pub fn preimage(g: &PlaneMap, inner: &Arc<SetExpr>) -> Result<Arc<Self>> {
        let g_inv = g.inverse().ok_or(Error::Singular { index: 0, det: 0.0 })?;
        Ok(Arc::new(SetExpr::Pre {
            m: *g,
            m_inv: g_inv,
            inner: inner.clone(),
        }))
    }

    pub fn contains(&self, y: [f64; 2]) -> bool {
        match self {
            SetExpr::Body(b) => b.contains(&y, 1e-12),
            SetExpr::Pre { m, inner, .. } => m.apply(y).is_some_and(|x| inner.contains(x)),
            SetExpr::Inter(a, b) => a.contains(y) && b.contains(y),
            SetExpr::Diff(a, b) => a.contains(y) && !b.contains(y),
            SetExpr::Union(v) => v.iter().any(|e| e.contains(y)),
        }
    }

    /// Conservative bounding box.
    pub fn bbox(&self) -> Rect {
        match self {
            SetExpr::Body(b) => b.bbox(),
            SetExpr::Pre { m_inv, inner, .. } => {
                let r = inner.bbox();
                if r.is_empty() {
                    r
                } else {
                    r.map_bbox(m_inv).unwrap_or_else(Rect::empty)
                }
            }
            SetExpr::Inter(a, b) => {
                let r = a.bbox().intersect(&b.bbox());
                if r.is_empty() {
                    Rect::empty()
                } else {
                    r
                }
            }
            SetExpr::Diff(a, _) => a.bbox(),
            SetExpr::Union(v) => v.iter().fold(Rect::empty(), |r, e| r.union(&e.bbox())),
        }
    }

    /// Cells of a grid at `res` whose centers lie in the set.
    pub fn rasterize(&self, res: f64, budget: u64) -> Result<Raster> {
        let b = self.bbox();
        if b.is_empty() {
            return Raster::new(&Rect::new(0.0, 0.0, 0.0, 0.0), res, budget);
        }
        Raster::from_fn(&b.expand(1.0 / res), res, budget, |y| self.contains(y))
    }
}

/// Planar mask regions.
#[derive(Clone, Debug)]
pub struct Mask2d {
    pub regions: Vec<Arc<SetExpr>>,
}

impl Mask2d {
    pub fn default_mask(f: &Ifs<f64>, body: &Body, res: f64) -> Result<Self> {
        let maps = f.plane_maps()?;
        let placed: Vec<Placed<'_>> = maps.iter().map(|&fwd| Placed { fwd, body }).collect();
        let report = placed_overlaps(&placed, res, 1);
        if let Some((i, j, cells)) = report.worst {
            return Err(Error::NotNonOverlapping(format!(
                "f_{}(A) and f_{}(A) share {cells} interior cells",
                i + 1,
                j + 1
            )));
        }
        let a = SetExpr::body(body.clone());
        Ok(Mask2d {
            regions: maps.iter().map(|m| SetExpr::image(m, &a)).collect::<Result<_>>()?,
        })
    }

    pub fn tops_mask(f: &Ifs<f64>, body: &Body) -> Result<Self> {
        let a = SetExpr::body(body.clone());
        let mut regions: Vec<Arc<SetExpr>> = Vec::new();
        for m in f.plane_maps()? {
            let img = SetExpr::image(&m, &a)?;
            let r = if regions.is_empty() {
                img
            } else {
                Arc::new(SetExpr::Diff(img, Arc::new(SetExpr::Union(regions.clone()))))
            };
            regions.push(r);
        }
        Ok(Mask2d { regions })
    }

    pub fn rasterize(&self, res: f64, budget: u64) -> Result<Vec<Raster>> {
        self.regions.iter().map(|r| r.rasterize(res, budget)).collect()
    }

    /// Raster versions of the mask invariants: the regions cover `A` up to one
    /// boundary cell, lie in the one-cell dilation of `f_i(A)`, and have
    /// disjoint one-cell erosions.
    pub fn validate(&self, f: &Ifs<f64>, body: &Body, res: f64, budget: u64) -> Result<()> {
        if self.regions.len() != f.len() {
            return Err(Error::InvalidMask(format!(
                "{} regions for {} maps",
                self.regions.len(),
                f.len()
            )));
        }
        let rs = self.rasterize(res, budget)?;
        let a = body.rasterize(res, budget)?;
        let mut all = a.empty_like();
        for r in &rs {
            all.or_assign(r);
        }
        let missed = a.erode(1).difference(&all)?.count();
        if missed > 0 {
            return Err(Error::InvalidMask(format!("{missed} interior cells of A are uncovered")));
        }
        let aset = SetExpr::body(body.clone());
        for (i, (r, m)) in rs.iter().zip(f.plane_maps()?).enumerate() {
            let img = SetExpr::image(&m, &aset)?.rasterize(res, budget)?.dilate(1);
            let outside = r.difference(&img)?.count();
            if outside > 0 {
                return Err(Error::InvalidMask(format!("M_{} leaves f_{}(A) by {outside} cells", i + 1, i + 1)));
            }
        }
        let eroded: Vec<Raster> = rs.iter().map(|r| r.erode(1)).collect();
        for i in 0..eroded.len() {
            for j in 0..i {
                if eroded[i].overlap_count(&eroded[j]) > 0 {
                    return Err(Error::InvalidMask(format!("M_{} and M_{} overlap", j + 1, i + 1)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MaskedStep2d {
    pub n: usize,
    pub ifs: Ifs<f64>,
    pub attractor: Arc<SetExpr>,
    pub mask: Mask2d,
    pub tiles: Vec<MaskedTile<Arc<SetExpr>>>,
}

impl MaskedStep2d {
    /// Rasterized tiles; tiles without a cell center are dropped.
    pub fn tile_rasters(&self, res: f64, budget: u64) -> Result<Vec<(Vec<u8>, Raster)>> {
        let out: Vec<Result<Option<(Vec<u8>, Raster)>>> = self
            .tiles
            .par_iter()
            .map(|t| {
                let r = t.geometry.rasterize(res, budget)?;
                Ok((!r.is_empty()).then(|| (t.trail.clone(), r)))
            })
            .collect();
        let mut kept = Vec::new();
        for r in out {
            if let Some(t) = r? {
                kept.push(t);
            }
        }
        let dropped = self.tiles.len() - kept.len();
        if dropped > 0 {
            log::debug!("dropped {dropped} sub-cell tiles at step {}", self.n);
        }
        Ok(kept)
    }
}

/// Planar version of [`masked_tiling_1d`].
pub fn masked_tiling_2d(
    f: &Ifs<f64>,
    body: &Body,
    mask: &Mask2d,
    theta: &InfiniteWord,
    steps: usize,
    rotate: bool,
    res: f64,
) -> Result<Vec<MaskedStep2d>> {
    if theta.alphabet_size() != f.n() {
        return Err(Error::InvalidWord(format!("θ = {theta} does not match {} maps", f.n())));
    }
    if mask.regions.len() != f.len() {
        return Err(Error::InvalidMask("wrong number of regions".into()));
    }
    let a = SetExpr::body(body.clone());
    let t1 = theta.letter(1) as usize - 1;
    let first = SetExpr::image(&PlaneMap::from_spec(&f.maps()[t1])?, &a)?;
    let mut mask = mask.clone();
    let budget = u32::MAX as u64;
    let given = mask.regions[t1].rasterize(res, budget)?;
    let wanted = first.rasterize(res, budget)?;
    if given.difference(&wanted)?.count() + wanted.difference(&given)?.count() > 0 {
        if !rotate {
            return Err(Error::InvalidMask(format!(
                "M_{} must equal f_{}(A) for θ = {theta}",
                t1 + 1,
                t1 + 1
            )));
        }
        mask.regions = mask
            .regions
            .iter()
            .enumerate()
            .map(|(j, r)| {
                if j == t1 {
                    first.clone()
                } else {
                    Arc::new(SetExpr::Diff(r.clone(), first.clone()))
                }
            })
            .collect();
    }
    let mut states = vec![MaskedStep2d {
        n: 1,
        ifs: f.clone(),
        attractor: a.clone(),
        mask,
        tiles: vec![MaskedTile {
            geometry: a,
            trail: Vec::new(),
        }],
    }];
    for n in 1..=steps {
        let cur = states.last().unwrap();
        let th = theta.letter(n);
        let g_spec = cur.ifs.map(th).clone();
        let g_inv_spec = cur.ifs.inverse(th).clone();
        let g = PlaneMap::from_spec(&g_spec)?;
        let maps = cur.ifs.plane_maps()?;
        let mut tiles = Vec::new();
        for t in &cur.tiles {
            for (i, m) in maps.iter().enumerate() {
                let piece = Arc::new(SetExpr::Inter(SetExpr::image(m, &t.geometry)?, cur.mask.regions[i].clone()));
                if piece.bbox().is_empty() {
                    continue;
                }
                let mut trail = t.trail.clone();
                trail.push(i as u8 + 1);
                tiles.push(MaskedTile {
                    geometry: SetExpr::preimage(&g, &piece)?,
                    trail,
                });
            }
        }
        let ifs = conjugate_all(&cur.ifs, &g_spec, &g_inv_spec)?;
        let attractor = SetExpr::preimage(&g, &cur.attractor)?;
        let next = theta.letter(n + 1) as usize - 1;
        let top = SetExpr::image(&PlaneMap::from_spec(&ifs.maps()[next])?, &attractor)?;
        let regions = cur
            .mask
            .regions
            .iter()
            .enumerate()
            .map(|(j, r)| {
                if j == next {
                    Ok(top.clone())
                } else {
                    Ok(Arc::new(SetExpr::Diff(SetExpr::preimage(&g, r)?, top.clone())))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        states.push(MaskedStep2d {
            n: n + 1,
            ifs,
            attractor,
            mask: Mask2d { regions },
            tiles,
        });
    }
    Ok(states)
}

/// Pairs of rasters whose one-cell erosions share cells, with the shared count.
pub fn raster_overlaps(rasters: &[Raster], erosion: usize) -> Vec<(usize, usize, u64)> {
    let eroded: Vec<Raster> = rasters.par_iter().map(|r| r.erode(erosion)).collect();
    let boxes: Vec<Option<Rect>> = eroded.iter().map(Raster::occupied_bbox).collect();
    (0..eroded.len())
        .into_par_iter()
        .flat_map_iter(|i| {
            let eroded = &eroded;
            let boxes = &boxes;
            (0..i).filter_map(move |j| {
                let (Some(a), Some(b)) = (boxes[i], boxes[j]) else {
                    return None;
                };
                if !a.intersects(&b) {
                    return None;
                }
                let c = eroded[i].overlap_count(&eroded[j]);
                (c > 0).then_some((j, i, c))
            })
        })
        .collect()
}
