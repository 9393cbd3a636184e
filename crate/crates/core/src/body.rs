//! Point-membership representations of an attractor.

use crate::error::Result;
use crate::geometry::{Polygon, Rect};
use crate::interval::IntervalSet;
use crate::raster::Raster;

/// An attractor (or any compact set) that can answer membership queries.
///
/// Polygonal attractors are exact. Fractal ones are backed by a fine raster,
/// with "interior" meaning the raster eroded by at least one cell.
#[derive(Clone, Debug)]
pub enum Body {
    Intervals(IntervalSet<f64>),
    Polygon(Polygon),
    Raster(Raster),
}

impl Body {
    pub fn dim(&self) -> usize {
        match self {
            Body::Intervals(_) => 1,
            _ => 2,
        }
    }

    pub fn unit_interval() -> Self {
        Body::Intervals(IntervalSet::interval(0.0, 1.0))
    }

    pub fn unit_square() -> Self {
        Body::Polygon(Polygon::rect(&Rect::unit()))
    }

    /// Point lies in the set or within `tol` of it.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        match self {
            Body::Intervals(s) => s
                .parts()
                .iter()
                .any(|&(a, b)| p[0] >= a - tol && p[0] <= b + tol),
            Body::Polygon(poly) => poly.contains_tol([p[0], p[1]], tol),
            Body::Raster(r) => r.near_point([p[0], p[1]], (tol * r.res()).ceil() as i64),
        }
    }

    /// A point of the set closest to `p`; raster bodies search three cells out
    /// and return the nearest occupied cell centre.
    pub fn nearest(&self, p: &[f64]) -> Vec<f64> {
        match self {
            Body::Intervals(s) => {
                let x = p[0];
                let best = s
                    .parts()
                    .iter()
                    .map(|&(a, b)| x.clamp(a, b))
                    .min_by(|u, v| (u - x).abs().total_cmp(&(v - x).abs()));
                vec![best.unwrap_or(x)]
            }
            Body::Polygon(poly) => poly.nearest([p[0], p[1]]).to_vec(),
            Body::Raster(r) => {
                let q = [p[0], p[1]];
                if r.contains_point(q) {
                    return p.to_vec();
                }
                let (i, j) = r.cell_of(q);
                let mut best: Option<(f64, [f64; 2])> = None;
                for dj in -3..=3 {
                    for di in -3..=3 {
                        if r.get(i + di, j + dj) {
                            let c = r.center(i + di, j + dj);
                            let d = (c[0] - q[0]).hypot(c[1] - q[1]);
                            if best.is_none_or(|(bd, _)| d < bd) {
                                best = Some((d, c));
                            }
                        }
                    }
                }
                best.map_or_else(|| p.to_vec(), |(_, c)| c.to_vec())
            }
        }
    }

    /// Point lies at distance more than `margin` inside the set. Raster bodies
    /// always require at least a one-cell margin.
    pub fn contains_interior(&self, p: &[f64], margin: f64) -> bool {
        match self {
            Body::Intervals(s) => s
                .parts()
                .iter()
                .any(|&(a, b)| p[0] > a + margin && p[0] < b - margin),
            Body::Polygon(poly) => poly.contains_interior([p[0], p[1]], margin),
            Body::Raster(r) => {
                let cells = ((margin * r.res()).ceil() as i64).max(1);
                r.deep_point([p[0], p[1]], cells)
            }
        }
    }

    /// Bounding box; 1-D sets use a zero-height box on the x axis.
    pub fn bbox(&self) -> Rect {
        match self {
            Body::Intervals(s) => match (s.lo(), s.hi()) {
                (Some(&a), Some(&b)) => Rect::new(a, 0.0, b, 0.0),
                _ => Rect::empty(),
            },
            Body::Polygon(p) => p.bbox(),
            Body::Raster(r) => r.occupied_bbox().unwrap_or_else(Rect::empty),
        }
    }

    pub fn polygon(&self) -> Option<&Polygon> {
        match self {
            Body::Polygon(p) => Some(p),
            _ => None,
        }
    }

    /// Raster of cell centers lying in the set.
    pub fn rasterize(&self, res: f64, budget: u64) -> Result<Raster> {
        match self {
            Body::Raster(r) if r.res() == res => Ok(r.clone()),
            _ => Raster::from_fn(&self.bbox().expand(1.0 / res), res, budget, |c| {
                self.contains(&c, 0.0)
            }),
        }
    }

    /// Points covering the set densely at spacing about `1/res`: cell centers of
    /// its raster plus, for polygons, the vertices.
    pub fn samples(&self, res: f64, budget: u64) -> Result<Vec<Vec<f64>>> {
        match self {
            Body::Intervals(s) => {
                let mut out = Vec::new();
                for &(a, b) in s.parts() {
                    let steps = ((b - a) * res).ceil().max(1.0) as usize;
                    out.extend((0..=steps).map(|k| vec![a + (b - a) * k as f64 / steps as f64]));
                }
                Ok(out)
            }
            _ => {
                let r = self.rasterize(res, budget)?;
                let mut out: Vec<Vec<f64>> = r.cells().map(|(i, j)| r.center(i, j).to_vec()).collect();
                if let Body::Polygon(p) = self {
                    out.extend(p.vertices.iter().map(|v| v.to_vec()));
                }
                Ok(out)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_modes() {
        let sq = Body::unit_square();
        assert!(sq.contains(&[1.0 + 1e-13, 0.5], 1e-12));
        assert!(!sq.contains_interior(&[1.0, 0.5], 0.0));
        let r = Body::Raster(sq.rasterize(64.0, 1 << 20).unwrap());
        assert!(r.contains(&[0.5, 0.5], 0.0));
        assert!(r.contains_interior(&[0.5, 0.5], 0.0));
        assert!(!r.contains_interior(&[0.5 / 64.0, 0.5], 0.0));
        let i = Body::unit_interval();
        assert!(i.contains_interior(&[0.5], 0.1));
        assert!(!i.contains_interior(&[0.0], 0.0));
        assert_eq!(i.samples(4.0, 100).unwrap().len(), 5);
    }
}
