//! Attractor approximations: Hutchinson iteration on rasters or exact intervals,
//! the chaos game, Hausdorff distances and interiors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::ifs::Ifs;
use crate::interval::IntervalSet;
use crate::map::PlaneMap;
use crate::raster::{Raster, DEFAULT_CELL_BUDGET};
use crate::scalar::Scalar;

/// Default raster resolution in cells per unit.
pub const DEFAULT_RES: f64 = 256.0;
/// Steps discarded at the start of a chaos game orbit.
pub const BURN_IN: usize = 100;

/// Raster or exact 1-D approximation of a compact set.
#[derive(Clone, Debug, PartialEq)]
pub enum RegionApprox<S> {
    Raster(Raster),
    Intervals1D(IntervalSet<S>),
}

impl<S: Scalar> RegionApprox<S> {
    pub fn dim(&self) -> usize {
        match self {
            RegionApprox::Raster(_) => 2,
            RegionApprox::Intervals1D(_) => 1,
        }
    }

    pub fn as_raster(&self) -> Option<&Raster> {
        match self {
            RegionApprox::Raster(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_intervals(&self) -> Option<&IntervalSet<S>> {
        match self {
            RegionApprox::Intervals1D(s) => Some(s),
            _ => None,
        }
    }

    pub fn hausdorff(&self, other: &Self) -> Result<f64> {
        match (self, other) {
            (RegionApprox::Raster(a), RegionApprox::Raster(b)) => a.hausdorff(b),
            (RegionApprox::Intervals1D(a), RegionApprox::Intervals1D(b)) => Ok(a.hausdorff(b)),
            _ => Err(Error::DimMismatch {
                expected: self.dim(),
                found: other.dim(),
            }),
        }
    }
}

/// Points of a random orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub seed: u64,
}

impl PointCloud {
    /// The cloud as a region: degenerate intervals in 1-D, occupied cells in 2-D.
    pub fn to_region(&self, res: f64) -> Result<RegionApprox<f64>> {
        if self.dim == 1 {
            return Ok(RegionApprox::Intervals1D(IntervalSet::from_parts(
                self.points.iter().map(|p| (p[0], p[0])).collect(),
            )));
        }
        let bbox = Rect::of_points(self.points.iter().map(|p| {
            let a: &[f64; 2] = p.as_slice().try_into().expect("2-D point");
            a
        }));
        let mut r = Raster::new(&bbox, res, DEFAULT_CELL_BUDGET)?;
        for p in &self.points {
            let (i, j) = r.cell_of([p[0], p[1]]);
            r.set(i, j, true);
        }
        Ok(RegionApprox::Raster(r))
    }
}

/// Hausdorff distance; point clouds are rasterized at the other operand's resolution.
pub fn hausdorff_distance(a: &RegionApprox<f64>, b: &RegionApprox<f64>) -> Result<f64> {
    a.hausdorff(b)
}

pub fn cloud_hausdorff(cloud: &PointCloud, region: &RegionApprox<f64>) -> Result<f64> {
    let res = region.as_raster().map_or(DEFAULT_RES, Raster::res);
    cloud.to_region(res)?.hausdorff(region)
}

/// Rasterizes a region by cell-center sampling of `seed_fn` inside `bbox`.
pub fn raster_seed(bbox: &Rect, res: f64, f: impl Fn([f64; 2]) -> bool + Sync) -> Result<Raster> {
    Raster::from_fn(bbox, res, DEFAULT_CELL_BUDGET, f)
}

/// `F^iters(seed)`. Exact for 1-D intervals; on rasters every occupied cell is
/// sampled at 2x2 points which are mapped forward and re-rasterized. The frame
/// is grown to contain an invariant ball before iterating.
pub fn deterministic_attractor<S: Scalar>(
    f: &Ifs<S>,
    seed: &RegionApprox<S>,
    iters: usize,
    budget: u64,
) -> Result<RegionApprox<S>> {
    if !f.declared_contractive() {
        return Err(Error::NotContractive {
            factor: f.estimate_contraction(),
        });
    }
    match seed {
        RegionApprox::Intervals1D(s) => {
            if f.dim() != 1 {
                return Err(Error::DimMismatch {
                    expected: f.dim(),
                    found: 1,
                });
            }
            let coeffs: Vec<(S, S)> = f.maps().iter().filter_map(|m| m.coeffs_1d()).collect();
            if coeffs.len() != f.len() {
                return Err(Error::Invariant("1-D iteration needs affine maps".into()));
            }
            let mut cur = s.clone();
            for _ in 0..iters {
                let pieces = cur.len() as u128 * coeffs.len() as u128;
                if pieces > budget as u128 {
                    return Err(Error::budget("interval pieces", pieces, budget as u128));
                }
                let images: Vec<_> = coeffs.iter().map(|(a, e)| cur.map_affine(a, e)).collect();
                cur = IntervalSet::union_all(&images);
            }
            Ok(RegionApprox::Intervals1D(cur))
        }
        RegionApprox::Raster(r) => {
            let maps = f.plane_maps()?;
            let mut frame = r.frame();
            if let Ok((c, rad)) = f.bounding_ball() {
                frame = frame.union(&Rect::centered(c[0], c[1], 2.0 * rad, 2.0 * rad));
            }
            let frame = frame.expand(2.0 / r.res());
            let mut cur = Raster::new(&frame, r.res(), budget)?;
            cur.or_assign(r);
            for _ in 0..iters {
                cur = hutchinson_step(&cur, &maps);
            }
            Ok(RegionApprox::Raster(cur))
        }
    }
}

/// One forward pass of the Hutchinson operator on a raster (same frame).
pub fn hutchinson_step(cur: &Raster, maps: &[PlaneMap]) -> Raster {
    let cells: Vec<(i64, i64)> = cur.cells().collect();
    let res = cur.res();
    cells
        .par_chunks(4096)
        .fold(
            || cur.empty_like(),
            |mut acc, chunk| {
                for &(i, j) in chunk {
                    for (sx, sy) in [(0.25, 0.25), (0.75, 0.25), (0.25, 0.75), (0.75, 0.75)] {
                        let p = [(i as f64 + sx) / res, (j as f64 + sy) / res];
                        for m in maps {
                            if let Some(q) = m.apply(p) {
                                let (a, b) = acc.cell_of(q);
                                acc.set(a, b, true);
                            }
                        }
                    }
                }
                acc
            },
        )
        .reduce(
            || cur.empty_like(),
            |mut a, b| {
                a.or_assign(&b);
                a
            },
        )
}

/// Raster of the cells that contain attractor points, without the fattening of
/// cell-sampled iteration. Starts from the fixed points of the maps and keeps one
/// genuine attractor point per cell, mapping newly found points until no new
/// cell appears.
pub fn raster_attractor(f: &Ifs<f64>, res: f64, budget: u64) -> Result<Raster> {
    let (c, rad) = f.bounding_ball()?;
    let frame = Rect::centered(c[0], c[1], 2.0 * rad, 2.0 * rad).expand(2.0 / res);
    let maps = f.plane_maps()?;
    let mut r = Raster::new(&frame, res, budget)?;
    let mut frontier = Vec::new();
    for m in &maps {
        let mut x = [c[0], c[1]];
        for _ in 0..400 {
            x = m.apply(x).ok_or(Error::NearInfinity)?;
        }
        frontier.push(x);
    }
    let mut fresh = Vec::new();
    for p in frontier.drain(..) {
        let (i, j) = r.cell_of(p);
        if !r.get(i, j) && r.set(i, j, true) {
            fresh.push(p);
        }
    }
    while !fresh.is_empty() {
        let images: Vec<[f64; 2]> = fresh
            .par_iter()
            .flat_map_iter(|&p| maps.iter().filter_map(move |m| m.apply(p)))
            .collect();
        fresh.clear();
        for q in images {
            let (i, j) = r.cell_of(q);
            if !r.get(i, j) && r.set(i, j, true) {
                fresh.push(q);
            }
        }
    }
    Ok(r)
}

/// `n` points of a random orbit with uniform map choice after [`BURN_IN`] steps.
pub fn chaos_game<S: Scalar>(f: &Ifs<S>, n: usize, seed: u64) -> Result<PointCloud> {
    if !f.declared_contractive() {
        return Err(Error::NotContractive {
            factor: f.estimate_contraction(),
        });
    }
    let g = f.to_f64();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut x, _) = g.bounding_ball()?;
    let mut points = Vec::with_capacity(n);
    for step in 0..BURN_IN + n {
        let i = rng.random_range(0..g.len());
        x = g.maps()[i].apply(&x)?;
        if step >= BURN_IN {
            points.push(x.clone());
        }
    }
    Ok(PointCloud {
        dim: g.dim(),
        points,
        seed,
    })
}

/// Erosion by `cells` cells.
pub fn interior_approx(r: &Raster, cells: usize) -> Raster {
    r.erode(cells.max(1))
}
