//! TOML files for systems, graph systems and masks.
//!
//! ```toml
//! dim = 2
//! declared_contractive = false
//! body = { kind = "polygon", vertices = [[0, 0], [1, 0], [0, 1]] }
//!
//! [[maps]]
//! coeffs = [0.5, 0, 0, 0.5, 0, 0]   # (x, y) -> (a x + b y + e, c x + d y + f)
//! ```
//!
//! A 1-D map is `[a, e]`, a projective map is `kind = "projective"` with the
//! nine homogeneous entries row by row. `[digit]` with `matrix` and `digits`
//! replaces `maps` for digit tiles.

use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::Spanned;

use crate::body::Body;
use crate::error::{Error, Result};
use crate::geometry::{Polygon, Rect};
use crate::gifs::{Edge, Gifs};
use crate::ifs::Ifs;
use crate::interval::IntervalSet;
use crate::linalg::Matrix;
use crate::map::MapSpec;
use crate::presets;
use crate::raster::Raster;

fn line_of(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

fn parse_toml<T: for<'de> Deserialize<'de>>(src: &str) -> Result<T> {
    toml::from_str(src).map_err(|e| {
        let line = e.span().map_or(0, |s| line_of(src, s.start));
        Error::parse(line, "", e.message().trim())
    })
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct MapEntry {
    #[serde(default = "affine", skip_serializing_if = "is_affine")]
    kind: String,
    coeffs: Spanned<Vec<f64>>,
}

fn affine() -> String {
    "affine".into()
}

fn is_affine(k: &String) -> bool {
    k == "affine"
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum BodyEntry {
    Interval { lo: f64, hi: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct DigitEntry {
    matrix: [[i64; 2]; 2],
    digits: Vec<[i64; 2]>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct IfsFile {
    dim: Option<usize>,
    #[serde(default)]
    declared_contractive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    body: Option<BodyEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    digit: Option<DigitEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    maps: Vec<MapEntry>,
}

/// A loaded system with its attractor body when the file gives one.
#[derive(Clone, Debug)]
pub struct IfsConfig {
    pub ifs: Ifs<f64>,
    pub body: Option<Body>,
}

fn map_from_entry(src: &str, k: usize, e: &MapEntry, dim: usize) -> Result<MapSpec<f64>> {
    let c = e.coeffs.get_ref();
    let line = line_of(src, e.coeffs.span().start);
    let field = format!("maps[{k}].coeffs");
    let want = match (e.kind.as_str(), dim) {
        ("affine", 1) => 2,
        ("affine", 2) => 6,
        ("projective", 2) => 9,
        (kind, _) => return Err(Error::parse(line, format!("maps[{k}].kind"), format!("`{kind}` in dimension {dim}"))),
    };
    if c.len() != want {
        return Err(Error::parse(line, field, format!("expected {want} numbers, found {}", c.len())));
    }
    if let Some(bad) = c.iter().find(|v| !v.is_finite()) {
        return Err(Error::parse(line, field, format!("non-finite coefficient {bad}")));
    }
    Ok(match want {
        2 => MapSpec::affine_1d(c[0], c[1]),
        6 => MapSpec::affine_2d([c[0], c[1], c[2], c[3], c[4], c[5]]),
        _ => MapSpec::projective(Matrix::from_rows(3, 3, c.clone()))?,
    })
}

fn body_from_entry(b: BodyEntry) -> Result<Body> {
    Ok(match b {
        BodyEntry::Interval { lo, hi } => {
            if !(lo < hi) {
                return Err(Error::parse(0, "body", format!("empty interval [{lo}, {hi}]")));
            }
            Body::Intervals(IntervalSet::interval(lo, hi))
        }
        BodyEntry::Polygon { vertices } => {
            if vertices.len() < 3 {
                return Err(Error::parse(0, "body.vertices", "a polygon needs three vertices"));
            }
            Body::Polygon(Polygon::new(vertices))
        }
    })
}

pub fn parse_ifs(src: &str) -> Result<IfsConfig> {
    let file: IfsFile = parse_toml(src)?;
    let body = file.body.map(body_from_entry).transpose()?;
    if let Some(d) = file.digit {
        if !file.maps.is_empty() {
            return Err(Error::parse(0, "digit", "give either `digit` or `maps`, not both"));
        }
        return Ok(IfsConfig {
            ifs: presets::digit(d.matrix, &d.digits)?,
            body,
        });
    }
    let dim = file.dim.unwrap_or(2);
    if file.maps.is_empty() {
        return Err(Error::parse(0, "maps", "no maps"));
    }
    let maps = file
        .maps
        .iter()
        .enumerate()
        .map(|(k, e)| map_from_entry(src, k, e, dim))
        .collect::<Result<Vec<_>>>()?;
    let mut ifs = Ifs::new(maps)?;
    if file.declared_contractive {
        ifs = ifs.with_declared_contractive(true);
    }
    if let Some(b) = &body {
        if b.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: b.dim(),
            });
        }
    }
    Ok(IfsConfig { ifs, body })
}

pub fn load_ifs(path: &Path) -> Result<IfsConfig> {
    parse_ifs(&std::fs::read_to_string(path)?)
}

fn entry_of(m: &MapSpec<f64>) -> MapEntry {
    let (kind, coeffs) = if let Some([a, e]) = m.coeffs_1d().map(|(a, e)| [a, e]) {
        ("affine", vec![a, e])
    } else if let Some(c) = m.coeffs_2d() {
        ("affine", c.to_vec())
    } else {
        ("projective", m.homogeneous().as_slice().to_vec())
    };
    MapEntry {
        kind: kind.into(),
        coeffs: Spanned::new(0..0, coeffs),
    }
}

fn body_entry(b: &Body) -> Option<BodyEntry> {
    match b {
        Body::Intervals(s) if s.len() == 1 => Some(BodyEntry::Interval {
            lo: *s.lo()?,
            hi: *s.hi()?,
        }),
        Body::Polygon(p) => Some(BodyEntry::Polygon {
            vertices: p.vertices.clone(),
        }),
        _ => None,
    }
}

/// TOML text that [`parse_ifs`] reads back to the same coefficients.
pub fn dump_ifs(f: &Ifs<f64>, body: Option<&Body>) -> Result<String> {
    let file = IfsFile {
        dim: Some(f.dim()),
        declared_contractive: f.declared_contractive(),
        body: body.and_then(body_entry),
        digit: None,
        maps: f.maps().iter().map(entry_of).collect(),
    };
    toml::to_string(&file).map_err(|e| Error::Invariant(e.to_string()))
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct EdgeEntry {
    from: usize,
    to: usize,
    #[serde(default = "affine", skip_serializing_if = "is_affine")]
    kind: String,
    coeffs: Spanned<Vec<f64>>,
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
struct GifsFile {
    vertices: usize,
    dim: Option<usize>,
    /// One polygon per vertex, if the components are known.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    shapes: Vec<Vec<[f64; 2]>>,
    edges: Vec<EdgeEntry>,
}

#[derive(Clone, Debug)]
pub struct GifsConfig {
    pub gifs: Gifs<f64>,
    pub shapes: Vec<Polygon>,
}

/// Vertices are numbered from 1 in the file.
pub fn parse_gifs(src: &str) -> Result<GifsConfig> {
    let file: GifsFile = parse_toml(src)?;
    let dim = file.dim.unwrap_or(2);
    let mut edges = Vec::with_capacity(file.edges.len());
    for (k, e) in file.edges.iter().enumerate() {
        let line = line_of(src, e.coeffs.span().start);
        for (name, v) in [("from", e.from), ("to", e.to)] {
            if v == 0 || v > file.vertices {
                return Err(Error::parse(line, format!("edges[{k}].{name}"), format!("vertex {v} outside 1..={}", file.vertices)));
            }
        }
        let entry = MapEntry {
            kind: e.kind.clone(),
            coeffs: e.coeffs.clone(),
        };
        edges.push(Edge {
            from: e.from - 1,
            to: e.to - 1,
            map: map_from_entry(src, k, &entry, dim)?,
        });
    }
    if !file.shapes.is_empty() && file.shapes.len() != file.vertices {
        return Err(Error::parse(0, "shapes", "give one shape per vertex"));
    }
    Ok(GifsConfig {
        gifs: Gifs::new(file.vertices, edges)?,
        shapes: file.shapes.into_iter().map(Polygon::new).collect(),
    })
}

pub fn load_gifs(path: &Path) -> Result<GifsConfig> {
    parse_gifs(&std::fs::read_to_string(path)?)
}

pub fn dump_gifs(g: &Gifs<f64>, shapes: &[Polygon]) -> Result<String> {
    let file = GifsFile {
        vertices: g.vertices(),
        dim: Some(g.dim()),
        shapes: shapes.iter().map(|p| p.vertices.clone()).collect(),
        edges: g
            .edges()
            .iter()
            .map(|e| {
                let m = entry_of(&e.map);
                EdgeEntry {
                    from: e.from + 1,
                    to: e.to + 1,
                    kind: m.kind,
                    coeffs: m.coeffs,
                }
            })
            .collect(),
    };
    toml::to_string(&file).map_err(|e| Error::Invariant(e.to_string()))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskFile {
    /// 1-D: one list of `[lo, hi]` pairs per region.
    #[serde(default)]
    regions: Vec<Vec<[f64; 2]>>,
    /// 2-D: one PNG per region, dark pixels inside, covering `window`.
    #[serde(default)]
    png: Vec<String>,
    window: Option<[f64; 4]>,
}

/// Mask regions as read from a file.
#[derive(Clone, Debug)]
pub enum MaskConfig {
    Intervals(Vec<IntervalSet<f64>>),
    Rasters(Vec<Raster>),
}

pub fn load_mask(path: &Path) -> Result<MaskConfig> {
    let src = std::fs::read_to_string(path)?;
    let file: MaskFile = parse_toml(&src)?;
    match (file.regions.is_empty(), file.png.is_empty()) {
        (false, true) => Ok(MaskConfig::Intervals(
            file.regions
                .into_iter()
                .map(|r| IntervalSet::from_parts(r.into_iter().map(|[a, b]| (a, b)).collect()))
                .collect(),
        )),
        (true, false) => {
            let [x0, y0, x1, y1] = file
                .window
                .ok_or_else(|| Error::parse(0, "window", "PNG masks need a window"))?;
            let window = Rect::new(x0, y0, x1, y1);
            let dir = path.parent().unwrap_or(Path::new("."));
            let rasters = file
                .png
                .iter()
                .map(|p| raster_from_png(&dir.join(p), &window))
                .collect::<Result<Vec<_>>>()?;
            Ok(MaskConfig::Rasters(rasters))
        }
        _ => Err(Error::parse(0, "regions", "give either `regions` or `png`")),
    }
}

/// Dark pixels of a PNG stretched over `window`, row 0 at the top.
pub fn raster_from_png(path: &Path, window: &Rect) -> Result<Raster> {
    let img = image::open(path)?.to_luma8();
    let (w, h) = img.dimensions();
    let res = w as f64 / window.width();
    if ((h as f64 / window.height()) - res).abs() > 1e-6 * res {
        return Err(Error::parse(0, "window", format!("{w}×{h} pixels do not have square cells over the window")));
    }
    Raster::from_fn(window, res, u64::MAX, |[x, y]| {
        let u = ((x - window.x0) * res) as i64;
        let v = ((window.y1 - y) * res) as i64;
        u >= 0 && v >= 0 && (u as u32) < w && (v as u32) < h && img.get_pixel(u as u32, v as u32)[0] < 128
    })
}
