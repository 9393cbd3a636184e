//! Bitset rasters on a global square lattice.
//!
//! Cell `(i, j)` covers `[i/res, (i+1)/res) x [j/res, (j+1)/res)`. Rasters with the
//! same resolution therefore share cell boundaries and can be combined without
//! resampling.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Rect;

/// Default cap on raster cell counts.
pub const DEFAULT_CELL_BUDGET: u64 = 1 << 28;

#[derive(Clone, Debug, PartialEq)]
pub struct Raster {
    res: f64,
    i0: i64,
    j0: i64,
    w: usize,
    h: usize,
    stride: usize,
    bits: Vec<u64>,
}

impl Raster {
    /// Empty raster whose frame covers `bbox`.
    pub fn new(bbox: &Rect, res: f64, budget: u64) -> Result<Self> {
        assert!(res > 0.0, "resolution must be positive");
        if bbox.is_empty() {
            return Err(Error::Invariant("raster frame is empty".into()));
        }
        let i0 = (bbox.x0 * res).floor() as i64;
        let j0 = (bbox.y0 * res).floor() as i64;
        let i1 = (bbox.x1 * res).floor() as i64;
        let j1 = (bbox.y1 * res).floor() as i64;
        Self::with_frame(res, i0, j0, (i1 - i0 + 1) as usize, (j1 - j0 + 1) as usize, budget)
    }

    pub fn with_frame(res: f64, i0: i64, j0: i64, w: usize, h: usize, budget: u64) -> Result<Self> {
        let cells = w as u128 * h as u128;
        if cells > budget as u128 {
            return Err(Error::budget("raster cells", cells, budget as u128));
        }
        let stride = w.div_ceil(64);
        Ok(Raster {
            res,
            i0,
            j0,
            w,
            h,
            stride,
            bits: vec![0; stride * h],
        })
    }

    /// Cells whose centers satisfy `f`, evaluated in parallel over rows.
    pub fn from_fn(
        bbox: &Rect,
        res: f64,
        budget: u64,
        f: impl Fn([f64; 2]) -> bool + Sync,
    ) -> Result<Self> {
        let mut r = Self::new(bbox, res, budget)?;
        r.fill_with(f);
        Ok(r)
    }

    /// Sets every cell of the frame whose center satisfies `f` (others are cleared).
    pub fn fill_with(&mut self, f: impl Fn([f64; 2]) -> bool + Sync) {
        let (res, i0, j0, w, stride) = (self.res, self.i0, self.j0, self.w, self.stride);
        self.bits
            .par_chunks_mut(stride)
            .enumerate()
            .for_each(|(y, row)| {
                let cy = (j0 + y as i64) as f64 + 0.5;
                for x in 0..w {
                    let c = [((i0 + x as i64) as f64 + 0.5) / res, cy / res];
                    if f(c) {
                        row[x / 64] |= 1 << (x % 64);
                    } else {
                        row[x / 64] &= !(1 << (x % 64));
                    }
                }
            });
    }

    pub fn empty_like(&self) -> Self {
        Raster {
            bits: vec![0; self.bits.len()],
            ..self.clone()
        }
    }

    pub fn res(&self) -> f64 {
        self.res
    }

    pub fn width(&self) -> usize {
        self.w
    }

    pub fn height(&self) -> usize {
        self.h
    }

    pub fn origin(&self) -> (i64, i64) {
        (self.i0, self.j0)
    }

    pub fn cell_count(&self) -> u64 {
        self.w as u64 * self.h as u64
    }

    pub fn cell_size(&self) -> f64 {
        1.0 / self.res
    }

    pub fn cell_diagonal(&self) -> f64 {
        std::f64::consts::SQRT_2 / self.res
    }

    pub fn frame(&self) -> Rect {
        Rect::new(
            self.i0 as f64 / self.res,
            self.j0 as f64 / self.res,
            (self.i0 + self.w as i64) as f64 / self.res,
            (self.j0 + self.h as i64) as f64 / self.res,
        )
    }

    pub fn cell_of(&self, [x, y]: [f64; 2]) -> (i64, i64) {
        ((x * self.res).floor() as i64, (y * self.res).floor() as i64)
    }

    pub fn center(&self, i: i64, j: i64) -> [f64; 2] {
        [(i as f64 + 0.5) / self.res, (j as f64 + 0.5) / self.res]
    }

    #[inline]
    fn local(&self, i: i64, j: i64) -> Option<(usize, usize)> {
        let x = i - self.i0;
        let y = j - self.j0;
        (x >= 0 && y >= 0 && (x as usize) < self.w && (y as usize) < self.h)
            .then_some((x as usize, y as usize))
    }

    #[inline]
    fn get_local(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.stride + x / 64] >> (x % 64) & 1 == 1
    }

    #[inline]
    fn set_local(&mut self, x: usize, y: usize, v: bool) {
        let word = &mut self.bits[y * self.stride + x / 64];
        if v {
            *word |= 1 << (x % 64);
        } else {
            *word &= !(1 << (x % 64));
        }
    }

    /// Occupancy of global cell `(i, j)`; false outside the frame.
    #[inline]
    pub fn get(&self, i: i64, j: i64) -> bool {
        self.local(i, j).is_some_and(|(x, y)| self.get_local(x, y))
    }

    /// Sets global cell `(i, j)`. Returns false when it lies outside the frame.
    pub fn set(&mut self, i: i64, j: i64, v: bool) -> bool {
        match self.local(i, j) {
            Some((x, y)) => {
                self.set_local(x, y, v);
                true
            }
            None => false,
        }
    }

    pub fn contains_point(&self, p: [f64; 2]) -> bool {
        let (i, j) = self.cell_of(p);
        self.get(i, j)
    }

    /// Occupied cell within Chebyshev distance `r` cells of the point's cell.
    pub fn near_point(&self, p: [f64; 2], r: i64) -> bool {
        let (i, j) = self.cell_of(p);
        (-r..=r).any(|dj| (-r..=r).any(|di| self.get(i + di, j + dj)))
    }

    /// The point's cell and all cells within Chebyshev distance `r` are occupied.
    pub fn deep_point(&self, p: [f64; 2], r: i64) -> bool {
        let (i, j) = self.cell_of(p);
        (-r..=r).all(|dj| (-r..=r).all(|di| self.get(i + di, j + dj)))
    }

    pub fn count(&self) -> u64 {
        self.bits.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn area(&self) -> f64 {
        self.count() as f64 / (self.res * self.res)
    }

    /// Occupied global cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.h).flat_map(move |y| {
            (0..self.stride).flat_map(move |k| {
                let mut word = self.bits[y * self.stride + k];
                std::iter::from_fn(move || {
                    if word == 0 {
                        return None;
                    }
                    let b = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some((self.i0 + (k * 64 + b) as i64, self.j0 + y as i64))
                })
            })
        })
    }

    pub fn occupied_bbox(&self) -> Option<Rect> {
        let mut r = Rect::empty();
        for (i, j) in self.cells() {
            r = r.include([i as f64 / self.res, j as f64 / self.res]);
            r = r.include([(i + 1) as f64 / self.res, (j + 1) as f64 / self.res]);
        }
        (!r.is_empty()).then_some(r)
    }

    fn same_frame(&self, o: &Raster) -> bool {
        self.res == o.res && self.i0 == o.i0 && self.j0 == o.j0 && self.w == o.w && self.h == o.h
    }

    fn check_res(&self, o: &Raster) -> Result<()> {
        if self.res != o.res {
            return Err(Error::Invariant(format!(
                "raster resolutions differ: {} vs {}",
                self.res, o.res
            )));
        }
        Ok(())
    }

    /// Copy of this raster on another frame of the same resolution.
    pub fn reframed(&self, i0: i64, j0: i64, w: usize, h: usize) -> Raster {
        let mut out = Raster::with_frame(self.res, i0, j0, w, h, u64::MAX).unwrap();
        for (i, j) in self.cells() {
            out.set(i, j, true);
        }
        out
    }

    fn common_frame(&self, o: &Raster) -> (i64, i64, usize, usize) {
        let i0 = self.i0.min(o.i0);
        let j0 = self.j0.min(o.j0);
        let i1 = (self.i0 + self.w as i64).max(o.i0 + o.w as i64);
        let j1 = (self.j0 + self.h as i64).max(o.j0 + o.h as i64);
        (i0, j0, (i1 - i0) as usize, (j1 - j0) as usize)
    }

    pub fn union(&self, o: &Raster) -> Result<Raster> {
        self.check_res(o)?;
        if self.same_frame(o) {
            let mut out = self.clone();
            out.bits.iter_mut().zip(&o.bits).for_each(|(a, b)| *a |= b);
            return Ok(out);
        }
        let (i0, j0, w, h) = self.common_frame(o);
        let mut out = self.reframed(i0, j0, w, h);
        for (i, j) in o.cells() {
            out.set(i, j, true);
        }
        Ok(out)
    }

    /// In-place union; cells of `o` outside this frame are dropped.
    pub fn or_assign(&mut self, o: &Raster) {
        if self.same_frame(o) {
            self.bits.iter_mut().zip(&o.bits).for_each(|(a, b)| *a |= b);
        } else {
            for (i, j) in o.cells() {
                self.set(i, j, true);
            }
        }
    }

    pub fn intersect(&self, o: &Raster) -> Result<Raster> {
        self.check_res(o)?;
        if self.same_frame(o) {
            let mut out = self.clone();
            out.bits.iter_mut().zip(&o.bits).for_each(|(a, b)| *a &= b);
            return Ok(out);
        }
        let mut out = self.empty_like();
        for (i, j) in self.cells() {
            if o.get(i, j) {
                out.set(i, j, true);
            }
        }
        Ok(out)
    }

    pub fn difference(&self, o: &Raster) -> Result<Raster> {
        self.check_res(o)?;
        if self.same_frame(o) {
            let mut out = self.clone();
            out.bits.iter_mut().zip(&o.bits).for_each(|(a, b)| *a &= !b);
            return Ok(out);
        }
        let mut out = self.clone();
        for (i, j) in o.cells() {
            out.set(i, j, false);
        }
        Ok(out)
    }

    /// Number of cells occupied in both.
    pub fn overlap_count(&self, o: &Raster) -> u64 {
        if self.same_frame(o) {
            return self
                .bits
                .iter()
                .zip(&o.bits)
                .map(|(a, b)| (a & b).count_ones() as u64)
                .sum();
        }
        self.cells().filter(|&(i, j)| o.get(i, j)).count() as u64
    }

    fn bools(&self) -> Vec<bool> {
        let mut v = vec![false; self.w * self.h];
        for y in 0..self.h {
            for x in 0..self.w {
                v[y * self.w + x] = self.get_local(x, y);
            }
        }
        v
    }

    fn from_bools(&self, v: &[bool]) -> Raster {
        let mut out = self.empty_like();
        for y in 0..self.h {
            for x in 0..self.w {
                if v[y * self.w + x] {
                    out.set_local(x, y, true);
                }
            }
        }
        out
    }

    /// Morphological erosion by a `(2r+1)`-square. Cells outside the frame count as empty.
    pub fn erode(&self, r: usize) -> Raster {
        if r == 0 {
            return self.clone();
        }
        let src = self.bools();
        let (w, h) = (self.w, self.h);
        let run = |line: &[bool], out: &mut [bool]| {
            // window fully occupied iff prefix-count difference equals its width
            let mut pre = vec![0usize; line.len() + 1];
            for (k, &b) in line.iter().enumerate() {
                pre[k + 1] = pre[k] + b as usize;
            }
            for k in 0..line.len() {
                let (lo, hi) = (k as isize - r as isize, k + r + 1);
                out[k] = lo >= 0 && hi <= line.len() && pre[hi] - pre[lo as usize] == 2 * r + 1;
            }
        };
        let mut horiz = vec![false; w * h];
        horiz
            .par_chunks_mut(w)
            .zip(src.par_chunks(w))
            .for_each(|(out, line)| run(line, out));
        let mut result = vec![false; w * h];
        let mut col = vec![false; h];
        let mut out = vec![false; h];
        for x in 0..w {
            for y in 0..h {
                col[y] = horiz[y * w + x];
            }
            run(&col, &mut out);
            for y in 0..h {
                result[y * w + x] = out[y];
            }
        }
        self.from_bools(&result)
    }

    /// Morphological dilation by a `(2r+1)`-square; the frame grows by `r` cells.
    pub fn dilate(&self, r: usize) -> Raster {
        let ri = r as i64;
        let mut out = Raster::with_frame(
            self.res,
            self.i0 - ri,
            self.j0 - ri,
            self.w + 2 * r,
            self.h + 2 * r,
            u64::MAX,
        )
        .unwrap();
        for (i, j) in self.cells() {
            for dj in -ri..=ri {
                for di in -ri..=ri {
                    out.set(i + di, j + dj, true);
                }
            }
        }
        out
    }

    /// Squared Euclidean distance (in cells) from every frame cell to the nearest
    /// occupied cell, by the Felzenszwalb-Huttenlocher transform.
    pub fn distance_transform_sq(&self) -> Vec<f64> {
        let (w, h) = (self.w, self.h);
        let mut grid: Vec<f64> = self
            .bools()
            .into_iter()
            .map(|b| if b { 0.0 } else { f64::INFINITY })
            .collect();
        grid.par_chunks_mut(w).for_each(|row| {
            let out = edt_1d(row);
            row.copy_from_slice(&out);
        });
        let mut col = vec![0.0; h];
        for x in 0..w {
            for y in 0..h {
                col[y] = grid[y * w + x];
            }
            let out = edt_1d(&col);
            for y in 0..h {
                grid[y * w + x] = out[y];
            }
        }
        grid
    }

    /// Hausdorff distance between the occupied cell sets, in world units.
    pub fn hausdorff(&self, o: &Raster) -> Result<f64> {
        self.check_res(o)?;
        if self.is_empty() || o.is_empty() {
            return Ok(if self.is_empty() && o.is_empty() {
                0.0
            } else {
                f64::INFINITY
            });
        }
        let (i0, j0, w, h) = self.common_frame(o);
        let a = self.reframed(i0, j0, w, h);
        let b = o.reframed(i0, j0, w, h);
        let directed = |from: &Raster, to: &Raster| -> f64 {
            let dt = to.distance_transform_sq();
            from.cells()
                .map(|(i, j)| dt[((j - j0) as usize) * w + (i - i0) as usize])
                .fold(0.0, f64::max)
                .sqrt()
        };
        Ok(directed(&a, &b).max(directed(&b, &a)) / self.res)
    }

    /// Grayscale image, `y` pointing up, occupied cells drawn as `fg`.
    pub fn to_image(&self, fg: u8, bg: u8) -> image::GrayImage {
        image::GrayImage::from_fn(self.w as u32, self.h as u32, |x, y| {
            let row = self.h - 1 - y as usize;
            image::Luma([if self.get_local(x as usize, row) { fg } else { bg }])
        })
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_image(0, 255).save(path)?;
        Ok(())
    }
}

fn edt_1d(f: &[f64]) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![f64::INFINITY; n];
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0usize;
    let first = match f.iter().position(|x| x.is_finite()) {
        Some(p) => p,
        None => return d,
    };
    v[0] = first;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in first + 1..n {
        if !f[q].is_finite() {
            continue;
        }
        let parabola = |p: usize| f[p] + (p * p) as f64;
        let mut s = (parabola(q) - parabola(v[k])) / (2.0 * (q - v[k]) as f64);
        // z[0] is -inf, so k never underflows
        while s <= z[k] {
            k -= 1;
            s = (parabola(q) - parabola(v[k])) / (2.0 * (q - v[k]) as f64);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0;
    for (q, slot) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        *slot = (q as f64 - p as f64).powi(2) + f[p];
    }
    d
}
