//! SVG and PNG output of tilings, and plain-text tile records.

use std::fmt::Write as _;
use std::path::Path;

use image::{Rgb, RgbImage};
use rayon::prelude::*;

use crate::body::Body;
use crate::error::{Error, Result};
use crate::geometry::{Polygon, Rect};
use crate::map::{MapSpec, PlaneMap};
use crate::raster::Raster;
use crate::tiling::TileKey;
use crate::word::Word;

pub const PALETTE: [[u8; 3]; 12] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [170, 110, 40],
];

/// Black for the level-0 tile, otherwise a palette entry picked by an FNV-1a
/// hash of the key text.
pub fn color_for(key: &TileKey) -> [u8; 3] {
    if key.level == 0 {
        return [0, 0, 0];
    }
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.to_string().bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    PALETTE[(h % PALETTE.len() as u64) as usize]
}

fn hex([r, g, b]: [u8; 3]) -> String {
    format!("#{r:02x}{g:02x}{b:02x}")
}

#[derive(Clone, Debug)]
pub struct RenderStyle {
    pub window: Rect,
    /// Pixels per unit.
    pub scale: f64,
    /// Outline width in pixels; zero for none.
    pub stroke: f64,
    pub background: [u8; 3],
}

impl RenderStyle {
    pub fn new(window: Rect, scale: f64) -> Self {
        RenderStyle {
            window,
            scale,
            stroke: 0.5,
            background: [255, 255, 255],
        }
    }

    fn size(&self) -> (u32, u32) {
        (
            (self.window.width() * self.scale).round().max(1.0) as u32,
            (self.window.height() * self.scale).round().max(1.0) as u32,
        )
    }

    fn to_px(&self, [x, y]: [f64; 2]) -> (f64, f64) {
        ((x - self.window.x0) * self.scale, (self.window.y1 - y) * self.scale)
    }
}

fn svg_open(style: &RenderStyle) -> String {
    let (w, h) = style.size();
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(s, r#"<rect width="{w}" height="{h}" fill="{}"/>"#, hex(style.background));
    s
}

fn stroke_attr(style: &RenderStyle) -> String {
    if style.stroke > 0.0 {
        format!(r##" stroke="#000000" stroke-width="{}""##, style.stroke)
    } else {
        String::new()
    }
}

/// One `<path>` per polygon tile.
pub fn svg_polygons(tiles: &[(TileKey, Polygon)], style: &RenderStyle) -> String {
    let mut s = svg_open(style);
    let stroke = stroke_attr(style);
    for (key, p) in tiles {
        if !p.bbox().intersects(&style.window) {
            continue;
        }
        let mut d = String::new();
        for (i, v) in p.vertices.iter().enumerate() {
            let (x, y) = style.to_px(*v);
            let _ = write!(d, "{}{x:.3},{y:.3} ", if i == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(s, r#"<path data-key="{key}" d="{d}" fill="{}"{stroke}/>"#, hex(color_for(key)));
    }
    s.push_str("</svg>\n");
    s
}

/// One `<rect>` per interval tile, spanning the window height.
pub fn svg_intervals(tiles: &[(TileKey, (f64, f64))], style: &RenderStyle) -> String {
    let mut s = svg_open(style);
    let stroke = stroke_attr(style);
    let (_, h) = style.size();
    for (key, (lo, hi)) in tiles {
        if *hi < style.window.x0 || *lo > style.window.x1 {
            continue;
        }
        let (x0, _) = style.to_px([*lo, 0.0]);
        let (x1, _) = style.to_px([*hi, 0.0]);
        let _ = writeln!(
            s,
            r#"<rect data-key="{key}" x="{x0:.3}" y="0" width="{:.3}" height="{h}" fill="{}"{stroke}/>"#,
            x1 - x0,
            hex(color_for(key))
        );
    }
    s.push_str("</svg>\n");
    s
}

/// A planar tile drawn as the image of a body under a map.
#[derive(Clone, Debug)]
pub struct PlacedBody<'a> {
    pub key: TileKey,
    pub fwd: PlaneMap,
    pub body: &'a Body,
}

/// Pixel colours for tiles given as images of bodies; later tiles win.
pub fn png_tiles(tiles: &[PlacedBody<'_>], style: &RenderStyle) -> Result<RgbImage> {
    let (w, h) = style.size();
    let mut img = RgbImage::from_pixel(w, h, Rgb(style.background));
    let tol = 0.5 / style.scale;
    let painted: Vec<Vec<(u32, u32, [u8; 3])>> = tiles
        .par_iter()
        .map(|t| {
            let mut out = Vec::new();
            let Some(inv) = t.fwd.inverse() else { return out };
            let Some(bb) = t.body.bbox().map_bbox(&t.fwd) else { return out };
            let bb = bb.intersect(&style.window);
            if bb.is_empty() {
                return out;
            }
            let (c0, r0) = style.to_px([bb.x0, bb.y1]);
            let (c1, r1) = style.to_px([bb.x1, bb.y0]);
            let color = color_for(&t.key);
            let scale = t.fwd.jacobian(t.body.bbox().corners()[0]);
            let shrink = (scale[0] * scale[3] - scale[1] * scale[2]).abs().sqrt().max(1e-300);
            for r in (r0.floor().max(0.0) as u32)..(r1.ceil().min(h as f64) as u32) {
                for c in (c0.floor().max(0.0) as u32)..(c1.ceil().min(w as f64) as u32) {
                    let p = [
                        style.window.x0 + (c as f64 + 0.5) / style.scale,
                        style.window.y1 - (r as f64 + 0.5) / style.scale,
                    ];
                    if let Some(q) = inv.apply(p) {
                        if t.body.contains(&q, tol / shrink) {
                            out.push((c, r, color));
                        }
                    }
                }
            }
            out
        })
        .collect();
    for (c, r, color) in painted.into_iter().flatten() {
        img.put_pixel(c, r, Rgb(color));
    }
    Ok(img)
}

/// Rasters drawn in one colour each; `None` keys are drawn black.
pub fn png_rasters(layers: &[(Option<TileKey>, &Raster)], style: &RenderStyle) -> RgbImage {
    let (w, h) = style.size();
    let mut img = RgbImage::from_pixel(w, h, Rgb(style.background));
    for (key, r) in layers {
        let color = key.as_ref().map_or([0, 0, 0], color_for);
        for (i, j) in r.cells() {
            let (x, y) = style.to_px(r.center(i, j));
            if x >= 0.0 && y >= 0.0 && (x as u32) < w && (y as u32) < h {
                img.put_pixel(x as u32, y as u32, Rgb(color));
            }
        }
    }
    img
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

pub fn write_png(path: &Path, img: &RgbImage) -> Result<()> {
    img.save(path)?;
    Ok(())
}

fn coeffs(m: &MapSpec<f64>) -> Result<Vec<f64>> {
    if let Some((a, e)) = m.coeffs_1d() {
        Ok(vec![a, e])
    } else if let Some(c) = m.coeffs_2d() {
        Ok(c.to_vec())
    } else {
        Err(Error::Invariant("records hold affine maps only".into()))
    }
}

fn word_field(w: &Word) -> String {
    if w.is_empty() {
        "-".into()
    } else {
        w.to_string()
    }
}

/// `level word [component] coefficients…` with 17 significant digits.
pub fn tile_record(key: &TileKey, component: Option<usize>, m: &MapSpec<f64>) -> Result<String> {
    let mut s = format!("{} {}", key.level, word_field(&key.word));
    if let Some(c) = component {
        let _ = write!(s, " {}", c + 1);
    }
    for v in coeffs(m)? {
        let _ = write!(s, " {v:.16e}");
    }
    Ok(s)
}

/// Inverse of [`tile_record`]; `n` is the alphabet size.
pub fn parse_tile_record(line: &str, n: u8, with_component: bool) -> Result<(TileKey, Option<usize>, MapSpec<f64>)> {
    let bad = |field: &str, msg: &str| Error::parse(0, field, msg);
    let mut it = line.split_whitespace();
    let level: usize = it
        .next()
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad("level", "missing or not an integer"))?;
    let word = Word::parse(it.next().ok_or_else(|| bad("word", "missing"))?, n)?;
    let component = if with_component {
        let c: usize = it
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad("component", "missing or not an integer"))?;
        Some(c.checked_sub(1).ok_or_else(|| bad("component", "components start at 1"))?)
    } else {
        None
    };
    let vals = it
        .map(str::parse::<f64>)
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| bad("coefficients", &e.to_string()))?;
    let m = match vals.len() {
        2 => MapSpec::affine_1d(vals[0], vals[1]),
        6 => MapSpec::affine_2d([vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]]),
        k => return Err(bad("coefficients", &format!("expected 2 or 6 numbers, found {k}"))),
    };
    Ok((TileKey { level, word }, component, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::tiling::tiles_at_level;
    use crate::word::InfiniteWord;

    #[test]
    fn records_round_trip_bit_exact() {
        let f = presets::chair();
        let theta = InfiniteWord::parse("(1234)", 4).unwrap();
        for t in tiles_at_level(&f, &theta, 3, 1 << 20).unwrap() {
            let line = tile_record(&t.key, None, &t.xform).unwrap();
            let (key, _, m) = parse_tile_record(&line, 4, false).unwrap();
            assert_eq!(key, t.key);
            let (a, b) = (m.coeffs_2d().unwrap(), t.xform.coeffs_2d().unwrap());
            assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()), "{line}");
        }
        let key = TileKey {
            level: 0,
            word: Word::empty(2),
        };
        let line = tile_record(&key, Some(1), &MapSpec::affine_1d(1.0, 0.0)).unwrap();
        assert_eq!(line.split_whitespace().take(3).collect::<Vec<_>>(), ["0", "-", "2"]);
        assert_eq!(parse_tile_record(&line, 2, true).unwrap().1, Some(1));
    }

    #[test]
    fn interval_svg_counts_and_determinism() {
        let f = presets::interval::<f64>();
        let theta = InfiniteWord::constant(1, 2).unwrap();
        let k = 5;
        let tiles: Vec<(TileKey, (f64, f64))> = tiles_at_level(&f, &theta, k, 1 << 20)
            .unwrap()
            .into_iter()
            .map(|t| {
                let (a, e) = t.xform.coeffs_1d().unwrap();
                (t.key, (e, a + e))
            })
            .collect();
        let style = RenderStyle::new(Rect::new(0.0, 0.0, 32.0, 1.0), 20.0);
        let svg = svg_intervals(&tiles, &style);
        assert_eq!(svg.matches("<rect data-key").count(), 1 << k);
        assert_eq!(svg, svg_intervals(&tiles, &style));
    }

    #[test]
    fn png_paints_square_tiles() {
        let f = presets::overlap2d(0.5).unwrap();
        let theta = InfiniteWord::constant(1, 4).unwrap();
        let body = Body::unit_square();
        let tiles = tiles_at_level(&f, &theta, 1, 1 << 10).unwrap();
        let placed: Vec<PlacedBody<'_>> = tiles
            .iter()
            .map(|t| PlacedBody {
                key: t.key.clone(),
                fwd: t.plane_map().unwrap(),
                body: &body,
            })
            .collect();
        let img = png_tiles(&placed, &RenderStyle::new(Rect::new(0.0, 0.0, 2.0, 2.0), 16.0)).unwrap();
        assert_eq!(img.dimensions(), (32, 32));
        assert_eq!(*img.get_pixel(8, 24), Rgb([0, 0, 0]));
        assert!(img.pixels().all(|p| p.0 != [255, 255, 255]));
    }
}
