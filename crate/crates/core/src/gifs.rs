//! Graph-directed systems: one attractor component per vertex, tiles along
//! paths of the reversed graph.

use std::collections::VecDeque;

use rayon::prelude::*;

use crate::body::Body;
use crate::error::{Error, Result};
use crate::geometry::{Polygon, Rect};
use crate::ifs::Ifs;
use crate::map::{MapSpec, PlaneMap};
use crate::raster::Raster;
use crate::scalar::Scalar;
use crate::tiling::{placed_overlaps, OverlapReport, Placed, TileKey};
use crate::word::{InfiniteWord, Word};

/// An edge `from -> to` whose map sends component `to` into component `from`.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge<S> {
    pub from: usize,
    pub to: usize,
    pub map: MapSpec<S>,
}

#[derive(Clone, Debug)]
pub struct Gifs<S> {
    vertices: usize,
    edges: Vec<Edge<S>>,
    inverses: Vec<MapSpec<S>>,
}

impl<S: Scalar> Gifs<S> {
    /// Edges are labelled `1..=E` in the given order.
    pub fn new(vertices: usize, edges: Vec<Edge<S>>) -> Result<Self> {
        if vertices == 0 || edges.is_empty() {
            return Err(Error::GraphError("need at least one vertex and one edge".into()));
        }
        if edges.len() > u8::MAX as usize {
            return Err(Error::GraphError(format!("{} edges, at most 255 supported", edges.len())));
        }
        let dim = edges[0].map.dim();
        let mut inverses = Vec::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            if e.from >= vertices || e.to >= vertices {
                return Err(Error::GraphError(format!("edge {} leaves the vertex range", k + 1)));
            }
            if e.map.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: e.map.dim(),
                });
            }
            inverses.push(e.map.inverse().map_err(|err| match err {
                Error::Singular { det, .. } => Error::Singular { index: k + 1, det },
                other => other,
            })?);
        }
        let g = Gifs {
            vertices,
            edges,
            inverses,
        };
        for v in 0..vertices {
            for reversed in [false, true] {
                let seen = g.reachable(v, reversed);
                if let Some(miss) = seen.iter().position(|s| !s) {
                    let (a, b) = if reversed { (miss, v) } else { (v, miss) };
                    return Err(Error::GraphError(format!(
                        "not strongly connected: no path from vertex {} to vertex {}",
                        a + 1,
                        b + 1
                    )));
                }
            }
        }
        Ok(g)
    }

    /// The one-vertex system whose loops are the maps of `f`.
    pub fn from_ifs(f: &Ifs<S>) -> Result<Self> {
        let edges = f
            .maps()
            .iter()
            .map(|m| Edge {
                from: 0,
                to: 0,
                map: m.clone(),
            })
            .collect();
        Gifs::new(1, edges)
    }

    fn reachable(&self, v: usize, reversed: bool) -> Vec<bool> {
        let mut seen = vec![false; self.vertices];
        seen[v] = true;
        let mut queue = VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for e in &self.edges {
                let (a, b) = if reversed { (e.to, e.from) } else { (e.from, e.to) };
                if a == u && !seen[b] {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
        seen
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[Edge<S>] {
        &self.edges
    }

    pub fn edge_count(&self) -> u8 {
        self.edges.len() as u8
    }

    pub fn dim(&self) -> usize {
        self.edges[0].map.dim()
    }

    /// 1-based edge label.
    pub fn edge(&self, label: u8) -> &Edge<S> {
        &self.edges[label as usize - 1]
    }

    pub fn inverse(&self, label: u8) -> &MapSpec<S> {
        &self.inverses[label as usize - 1]
    }

    /// `C[i][j] = |E_ij|`.
    pub fn count_matrix(&self) -> Vec<Vec<u64>> {
        let mut c = vec![vec![0; self.vertices]; self.vertices];
        for e in &self.edges {
            c[e.from][e.to] += 1;
        }
        c
    }

    /// Number of paths of length `k` in the graph starting at each vertex.
    pub fn path_counts(&self, k: usize) -> Result<Vec<u64>> {
        let c = self.count_matrix();
        let mut v = vec![1u64; self.vertices];
        for _ in 0..k {
            let mut next = vec![0u64; self.vertices];
            for (i, row) in c.iter().enumerate() {
                for (j, &cij) in row.iter().enumerate() {
                    next[i] = cij
                        .checked_mul(v[j])
                        .and_then(|x| next[i].checked_add(x))
                        .ok_or_else(|| Error::budget("path count", u128::MAX, u64::MAX as u128))?;
                }
            }
            v = next;
        }
        Ok(v)
    }

    /// Checks that `θ|len` is a path in the reversed graph:
    /// `from(θ_k) = to(θ_{k+1})`.
    pub fn validate_reversed_path(&self, theta: &InfiniteWord, len: usize) -> Result<()> {
        if theta.alphabet_size() != self.edge_count() {
            return Err(Error::GraphError(format!(
                "θ = {theta} is not over the {} edge labels",
                self.edge_count()
            )));
        }
        for k in 1..len {
            let (a, b) = (theta.letter(k), theta.letter(k + 1));
            if self.edge(a).from != self.edge(b).to {
                return Err(Error::GraphError(format!(
                    "θ breaks at position {k}: edge {a} starts at vertex {} but edge {b} ends at vertex {}",
                    self.edge(a).from + 1,
                    self.edge(b).to + 1
                )));
            }
        }
        Ok(())
    }

    /// Checks that `w` is a path in the graph starting at `start`.
    pub fn validate_path(&self, w: &Word, start: usize) -> Result<()> {
        let mut at = start;
        for (k, &l) in w.letters().iter().enumerate() {
            let e = self.edge(l);
            if e.from != at {
                return Err(Error::GraphError(format!(
                    "edge {l} at position {} does not start at vertex {}",
                    k + 1,
                    at + 1
                )));
            }
            at = e.to;
        }
        Ok(())
    }

    /// `f_{w_1} ∘ … ∘ f_{w_k}`.
    pub fn compose(&self, w: &Word) -> MapSpec<S> {
        let mut m = MapSpec::identity(self.dim());
        for &l in w.letters() {
            m = m.compose(&self.edge(l).map);
        }
        m
    }

    /// `f⁻¹_{w_1} ∘ … ∘ f⁻¹_{w_k}`.
    pub fn inverse_compose(&self, w: &Word) -> MapSpec<S> {
        let mut m = MapSpec::identity(self.dim());
        for &l in w.letters() {
            m = m.compose(self.inverse(l));
        }
        m
    }

    pub fn to_f64(&self) -> Gifs<f64> {
        Gifs {
            vertices: self.vertices,
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    from: e.from,
                    to: e.to,
                    map: e.map.to_f64(),
                })
                .collect(),
            inverses: self.inverses.iter().map(MapSpec::to_f64).collect(),
        }
    }

    /// The flat system of all edge maps; its attractor contains every component.
    pub fn flatten(&self) -> Result<Ifs<S>> {
        Ifs::new(self.edges.iter().map(|e| e.map.clone()).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GifsTile<S> {
    pub key: TileKey,
    pub xform: MapSpec<S>,
    /// 0-based vertex whose component the tile is a copy of.
    pub component: usize,
}

impl<S: Scalar> GifsTile<S> {
    pub fn plane_map(&self) -> Result<PlaneMap> {
        PlaneMap::from_spec(&self.xform)
    }
}

/// Vertex where `θ|j` ends in the reversed graph.
fn start_vertex<S: Scalar>(g: &Gifs<S>, theta: &InfiniteWord, j: usize) -> usize {
    if j == 0 {
        g.edge(theta.letter(1)).to
    } else {
        g.edge(theta.letter(j)).from
    }
}

/// Strips leading letters while `ω_1 = θ_level`.
pub fn gifs_canonicalize<S: Scalar>(
    g: &Gifs<S>,
    theta: &InfiniteWord,
    level: usize,
    omega: &Word,
) -> Result<TileKey> {
    if omega.len() != level {
        return Err(Error::InvalidWord(format!("|ω| = {} at level {level}", omega.len())));
    }
    if level > 0 {
        g.validate_path(omega, start_vertex(g, theta, level))?;
    }
    let mut level = level;
    let mut w = omega.clone();
    while level > 0 && w.first() == Some(theta.letter(level)) {
        w = w.tail();
        level -= 1;
    }
    Ok(TileKey { level, word: w })
}

/// Tiles of `T_{θ,k}`, one per canonical key, sorted by key.
pub fn gifs_tiles<S: Scalar>(
    g: &Gifs<S>,
    theta: &InfiniteWord,
    k: usize,
    budget: u64,
) -> Result<Vec<GifsTile<S>>> {
    g.validate_reversed_path(theta, k.max(1))?;
    let total = g.path_counts(k)?[start_vertex(g, theta, k)];
    if total > budget {
        return Err(Error::budget("tiles", total as u128, budget as u128));
    }
    let n = g.edge_count();
    let mut out: Vec<GifsTile<S>> = (0..=k)
        .into_par_iter()
        .flat_map_iter(|j| {
            let mut tiles = Vec::new();
            if j == 0 {
                tiles.push(GifsTile {
                    key: TileKey {
                        level: 0,
                        word: Word::empty(n),
                    },
                    xform: MapSpec::identity(g.dim()),
                    component: start_vertex(g, theta, 0),
                });
                return tiles;
            }
            let th = theta.letter(j);
            let prefix = g.inverse_compose(&theta.prefix(j));
            let v = start_vertex(g, theta, j);
            for (idx, e) in g.edges().iter().enumerate() {
                let l = idx as u8 + 1;
                if e.from != v || l == th {
                    continue;
                }
                let mut w = Word::empty(n);
                w.push(l);
                descend(g, j, w, prefix.compose(&e.map), e.to, &mut tiles);
            }
            tiles
        })
        .collect();
    out.sort_by(|a, b| a.key.cmp(&b.key));
    Ok(out)
}

fn descend<S: Scalar>(g: &Gifs<S>, level: usize, w: Word, m: MapSpec<S>, at: usize, out: &mut Vec<GifsTile<S>>) {
    if w.len() == level {
        out.push(GifsTile {
            key: TileKey { level, word: w },
            xform: m,
            component: at,
        });
        return;
    }
    for (idx, e) in g.edges().iter().enumerate() {
        if e.from == at {
            let mut w2 = w.clone();
            w2.push(idx as u8 + 1);
            descend(g, level, w2, m.compose(&e.map), e.to, out);
        }
    }
}

/// Interior overlap of planar tiles over per-component bodies.
pub fn gifs_overlaps(tiles: &[GifsTile<f64>], bodies: &[Body], res: f64, erosion: usize) -> Result<OverlapReport> {
    let placed = tiles
        .iter()
        .map(|t| {
            Ok(Placed {
                fwd: t.plane_map()?,
                body: &bodies[t.component],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(placed_overlaps(&placed, res, erosion))
}

/// Components of a planar attractor, one raster per vertex.
///
/// Each component keeps one genuine attractor point per cell; new points are
/// pushed through the incoming edges until no new cell appears.
pub fn gifs_attractor(g: &Gifs<f64>, res: f64, budget: u64) -> Result<Vec<Raster>> {
    if g.dim() != 2 {
        return Err(Error::DimMismatch {
            expected: 2,
            found: g.dim(),
        });
    }
    let (c, rad) = g.flatten()?.bounding_ball()?;
    let frame = Rect::centered(c[0], c[1], 2.0 * rad, 2.0 * rad).expand(2.0 / res);
    let maps: Vec<PlaneMap> = g
        .edges()
        .iter()
        .map(|e| PlaneMap::from_spec(&e.map))
        .collect::<Result<_>>()?;
    let mut comps = (0..g.vertices())
        .map(|_| Raster::new(&frame, res, budget))
        .collect::<Result<Vec<_>>>()?;
    // representatives live on a grid twice as fine
    let mut seen = (0..g.vertices())
        .map(|_| Raster::new(&frame, 2.0 * res, budget))
        .collect::<Result<Vec<_>>>()?;
    // a point of A_v: follow the first outgoing edge forever
    let mut seeds = vec![[c[0], c[1]]; g.vertices()];
    for _ in 0..400 {
        let prev = seeds.clone();
        for (v, s) in seeds.iter_mut().enumerate() {
            let k = g.edges().iter().position(|e| e.from == v).expect("strongly connected");
            *s = maps[k].apply(prev[g.edges()[k].to]).ok_or(Error::NearInfinity)?;
        }
    }
    let mut fresh: Vec<Vec<[f64; 2]>> = seeds.into_iter().map(|p| vec![p]).collect();
    while fresh.iter().any(|f| !f.is_empty()) {
        let mut next: Vec<Vec<[f64; 2]>> = vec![Vec::new(); g.vertices()];
        for (v, pts) in fresh.iter().enumerate() {
            for &q in pts {
                let (i, j) = seen[v].cell_of(q);
                if !seen[v].get(i, j) && seen[v].set(i, j, true) {
                    let (a, b) = comps[v].cell_of(q);
                    comps[v].set(a, b, true);
                    next[v].push(q);
                }
            }
        }
        let images: Vec<(usize, [f64; 2])> = g
            .edges()
            .par_iter()
            .zip(maps.par_iter())
            .flat_map_iter(|(e, m)| next[e.to].iter().filter_map(move |&p| m.apply(p).map(|q| (e.from, q))))
            .collect();
        fresh = vec![Vec::new(); g.vertices()];
        for (v, q) in images {
            fresh[v].push(q);
        }
    }
    Ok(comps)
}

/// One application of the vector Hutchinson operator to raster components,
/// using 2×2 subsamples per occupied cell.
pub fn vector_hutchinson(g: &Gifs<f64>, comps: &[Raster]) -> Result<Vec<Raster>> {
    let maps: Vec<PlaneMap> = g
        .edges()
        .iter()
        .map(|e| PlaneMap::from_spec(&e.map))
        .collect::<Result<_>>()?;
    let mut out: Vec<Raster> = comps.iter().map(Raster::empty_like).collect();
    for (e, m) in g.edges().iter().zip(&maps) {
        let src = &comps[e.to];
        let h = src.cell_size() / 4.0;
        let dst = &mut out[e.from];
        for (i, j) in src.cells() {
            let [x, y] = src.center(i, j);
            for (dx, dy) in [(-h, -h), (h, -h), (-h, h), (h, h)] {
                if let Some(q) = m.apply([x + dx, y + dy]) {
                    let (a, b) = dst.cell_of(q);
                    dst.set(a, b, true);
                }
            }
        }
    }
    Ok(out)
}

pub const PRESETS: [&str; 2] = ["penrose", "trisquare"];

/// A system with the polygons its components are known to equal.
#[derive(Clone, Debug)]
pub struct GifsPreset {
    pub name: &'static str,
    pub gifs: Gifs<f64>,
    pub shapes: Vec<Polygon>,
}

impl GifsPreset {
    pub fn bodies(&self) -> Vec<Body> {
        self.shapes.iter().cloned().map(Body::Polygon).collect()
    }
}

pub fn preset(name: &str) -> Result<GifsPreset> {
    match name {
        "penrose" => penrose_preset(),
        "trisquare" => trisquare_preset(),
        _ => Err(Error::InvalidPreset(format!(
            "unknown graph preset `{name}`; try one of {}",
            PRESETS.join(", ")
        ))),
    }
}

pub fn golden_ratio() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

/// `ω_k = e^{ikπ/5}`.
fn root(k: i32) -> [f64; 2] {
    let t = k as f64 * std::f64::consts::PI / 5.0;
    [t.cos(), t.sin()]
}

/// `z -> α z + β`, or `α z̄ + β` when `conj`.
fn complex_affine(alpha: [f64; 2], beta: [f64; 2], conj: bool) -> MapSpec<f64> {
    let [p, q] = alpha;
    let [e, f] = beta;
    if conj {
        MapSpec::affine_2d([p, q, q, -p, e, f])
    } else {
        MapSpec::affine_2d([p, -q, q, p, e, f])
    }
}

/// Acute and obtuse golden triangles `A = [1, τ², 1+ω_2]`, `B = [1, τ², 1+ω_1]`
/// with `f_1 = ω_4(z−1)/τ + τ²`, `f_2 = −z̄/τ + τ²`, `f_3 = ω_7(z−τ²)/τ + 1`.
///
/// Edges: `1: A→B f_1`, `2: A→A f_2`, `3: A→A f_3`, `4: B→B f_1`, `5: B→A f_2`,
/// so that `A = f_1(B) ∪ f_2(A) ∪ f_3(A)` and `B = f_1(B) ∪ f_2(A)`.
pub fn penrose_preset() -> Result<GifsPreset> {
    let tau = golden_ratio();
    let s = 1.0 / tau;
    let t2 = tau * tau;
    let (w4, w7) = (root(4), root(7));
    let f1 = complex_affine([w4[0] * s, w4[1] * s], [t2 - w4[0] * s, -w4[1] * s], false);
    let f2 = complex_affine([-s, 0.0], [t2, 0.0], true);
    let f3 = complex_affine([w7[0] * s, w7[1] * s], [1.0 - tau * w7[0], -tau * w7[1]], false);
    let (a, b) = (0, 1);
    let e = |from, to, map: &MapSpec<f64>| Edge {
        from,
        to,
        map: map.clone(),
    };
    let gifs = Gifs::new(
        2,
        vec![e(a, b, &f1), e(a, a, &f2), e(a, a, &f3), e(b, b, &f1), e(b, a, &f2)],
    )?;
    let (w1, w2) = (root(1), root(2));
    let shapes = vec![
        Polygon::new(vec![[1.0, 0.0], [t2, 0.0], [1.0 + w2[0], w2[1]]]),
        Polygon::new(vec![[1.0, 0.0], [t2, 0.0], [1.0 + w1[0], w1[1]]]),
    ];
    Ok(GifsPreset {
        name: "penrose",
        gifs,
        shapes,
    })
}

/// Right triangle `T = (0,0),(1,0),(0,1)` and unit square `S`.
///
/// `T` is two half-size triangles plus the square `[0,½]²`; `S` is two
/// triangles filling its upper right quarter, the square `[0,½]×[½,1]` and
/// the rectangles `[0,0.6]×[0,½]`, `[0.6,1]×[0,½]`.
pub fn trisquare<S: Scalar>() -> Result<Gifs<S>> {
    let r = |n, d| S::from_ratio(n, d);
    let h = || r(1, 2);
    let z = S::zero;
    let (t, sq) = (0, 1);
    let e = |from, to, c: [S; 6]| Edge {
        from,
        to,
        map: MapSpec::affine_2d(c),
    };
    Gifs::new(
        2,
        vec![
            e(t, t, [h(), z(), z(), h(), h(), z()]),
            e(t, t, [h(), z(), z(), h(), z(), h()]),
            e(t, sq, [h(), z(), z(), h(), z(), z()]),
            e(sq, t, [h(), z(), z(), h(), h(), h()]),
            e(sq, t, [-h(), z(), z(), -h(), S::one(), S::one()]),
            e(sq, sq, [h(), z(), z(), h(), z(), h()]),
            e(sq, sq, [r(3, 5), z(), z(), h(), z(), z()]),
            e(sq, sq, [r(2, 5), z(), z(), h(), r(3, 5), z()]),
        ],
    )
}

pub fn trisquare_preset() -> Result<GifsPreset> {
    Ok(GifsPreset {
        name: "trisquare",
        gifs: trisquare()?,
        shapes: vec![
            Polygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
            Polygon::rect(&Rect::unit()),
        ],
    })
}
