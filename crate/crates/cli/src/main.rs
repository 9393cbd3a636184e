use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use image::Rgba;

use ifstile::attractor::{chaos_game, raster_attractor};
use ifstile::body::Body;
use ifstile::config::{self, MaskConfig};
use ifstile::error::{Error, Result};
use ifstile::geometry::{Polygon, Rect};
use ifstile::gifs::{self, gifs_overlaps, gifs_tiles, Gifs};
use ifstile::ifs::Ifs;
use ifstile::interval::IntervalSet;
use ifstile::map::PlaneMap;
use ifstile::mask::{masked_tiling_1d, masked_tiling_2d, raster_overlaps, Mask1d, Mask2d, SetExpr};
use ifstile::presets;
use ifstile::raster::{Raster, DEFAULT_CELL_BUDGET};
use ifstile::render::{self, PlacedBody, RenderStyle};
use ifstile::reversal::{check_disjunctive, check_full, construct_reverse_word, FullVerdict};
use ifstile::tiling::{TileKey, Tiling};
use ifstile::transform::{self, ImageTransform, Section, DEFAULT_DEPTH};
use ifstile::word::{InfiniteWord, Word};

#[derive(Parser)]
#[command(name = "ifstile", version, about = "Fractal tilings from iterated function systems")]
struct Cli {
    /// Raster resolution in cells per unit.
    #[arg(long, global = true, default_value_t = 64.0)]
    res: f64,
    /// Upper bound on tiles, words or raster cells.
    #[arg(long, global = true, default_value_t = 1 << 22)]
    budget: u64,
    /// Seed for `random` words and the chaos game.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file; text goes to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Svg,
    Png,
    Records,
}

#[derive(Subcommand)]
enum Cmd {
    /// Render the attractor of a system.
    Attractor {
        /// Preset name or TOML config path.
        system: String,
        /// Use this many chaos-game points instead of the deterministic fill.
        #[arg(long)]
        chaos: Option<usize>,
    },
    /// Tiling T_{θ,k} of an IFS.
    Tile {
        system: String,
        #[arg(long, default_value = "(1)")]
        theta: String,
        #[arg(long, short, default_value_t = 4)]
        level: usize,
        /// `x0,y0,x1,y1`; defaults to the bounding box of the tiles.
        #[arg(long)]
        window: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Svg)]
        format: Format,
        /// Fail with exit code 2 if tile interiors overlap.
        #[arg(long)]
        check: bool,
    },
    /// Masked tiling of a possibly overlapping IFS.
    MaskTile {
        system: String,
        /// `tops`, `default`, or a mask TOML file.
        #[arg(long, default_value = "tops")]
        mask: String,
        #[arg(long, default_value = "(1)")]
        theta: String,
        #[arg(long, default_value_t = 4)]
        steps: usize,
        /// Rotate a mask whose θ_1 region is not f_{θ_1}(A).
        #[arg(long)]
        rotate: bool,
        #[arg(long)]
        window: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Svg)]
        format: Format,
        #[arg(long)]
        check: bool,
    },
    /// Tiling from a graph-directed system.
    GifsTile {
        /// `penrose`, `trisquare`, or a TOML config path.
        system: String,
        #[arg(long, default_value = "(2351)")]
        theta: String,
        #[arg(long, short, default_value_t = 4)]
        level: usize,
        #[arg(long)]
        window: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Svg)]
        format: Format,
        #[arg(long)]
        check: bool,
    },
    /// Extended fractal transformation between two systems with equally many maps.
    Transform {
        /// System whose picture is read.
        from: String,
        /// System whose space is drawn.
        to: String,
        #[arg(long, default_value = "(1)")]
        theta: String,
        /// Transform one point `x` or `x,y` and print the result.
        #[arg(long)]
        point: Option<String>,
        /// Input PNG covering `--in-window`.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value = "0,0,1,1")]
        in_window: String,
        #[arg(long, default_value = "0,0,1,1")]
        out_window: String,
        /// Output image width and height in pixels.
        #[arg(long, default_value_t = 256)]
        size: u32,
        #[arg(long, default_value_t = 24)]
        k_max: usize,
    },
    /// Union of all inverse images of the attractor up to a depth.
    FastBasin {
        system: String,
        #[arg(long, short, default_value_t = 6)]
        depth: usize,
        #[arg(long, default_value = "-2,-2,3,3")]
        window: String,
    },
    /// Disjunctive, reversible and full evidence for a word.
    CheckWord {
        theta: String,
        /// Alphabet size; taken from `--system` when given.
        #[arg(long, short)]
        n: Option<u8>,
        /// System for the fullness check.
        #[arg(long)]
        system: Option<String>,
        /// Interior address σ to start the reverse-word construction.
        #[arg(long)]
        sigma: Option<String>,
        #[arg(long, default_value_t = 10_000)]
        scan: usize,
        #[arg(long, default_value_t = 200)]
        depth: usize,
    },
    /// Print the TOML config of a preset.
    Preset { name: Option<String> },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } => 3,
        Error::NotContractive { .. }
        | Error::Singular { .. }
        | Error::NearInfinity
        | Error::NotNonOverlapping(_)
        | Error::InvalidMask(_)
        | Error::GraphError(_)
        | Error::OutsideAttractor(_)
        | Error::OutsideExpansion(_)
        | Error::Invariant(_)
        | Error::DimMismatch { .. } => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ifstile: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

struct System {
    ifs: Ifs<f64>,
    body: Body,
    template: Option<Polygon>,
}

fn is_file(s: &str) -> bool {
    s.ends_with(".toml") || Path::new(s).is_file()
}

fn load_system(s: &str, res: f64) -> Result<System> {
    if is_file(s) {
        let c = config::load_ifs(Path::new(s))?;
        let body = match c.body {
            Some(b) => b,
            None if c.ifs.dim() == 2 => Body::Raster(raster_attractor(&c.ifs, res, DEFAULT_CELL_BUDGET)?),
            None => return Err(Error::parse(0, "body", "1-D configs need an interval body")),
        };
        let template = body.polygon().cloned();
        return Ok(System {
            ifs: c.ifs,
            body,
            template,
        });
    }
    let p = presets::named(s, res)?;
    Ok(System {
        ifs: p.ifs,
        body: p.body,
        template: p.template,
    })
}

fn load_gifs(s: &str) -> Result<(Gifs<f64>, Vec<Polygon>)> {
    if is_file(s) {
        let c = config::load_gifs(Path::new(s))?;
        Ok((c.gifs, c.shapes))
    } else {
        let p = gifs::preset(s)?;
        Ok((p.gifs, p.shapes))
    }
}

fn parse_theta(s: &str, n: u8, seed: u64) -> Result<InfiniteWord> {
    if s == "random" {
        return Ok(InfiniteWord::random_uniform(n, seed));
    }
    InfiniteWord::parse(s, n)
}

fn parse_nums(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse(0, what, e.to_string()))
}

fn parse_window(s: &str, dim: usize) -> Result<Rect> {
    let v = parse_nums(s, "window")?;
    match (dim, v.len()) {
        (1, 2) => Ok(Rect::new(v[0], 0.0, v[1], 1.0)),
        (_, 4) => Ok(Rect::new(v[0], v[1], v[2], v[3])),
        _ => Err(Error::parse(0, "window", "expected x0,x1 or x0,y0,x1,y1")),
    }
}

fn emit_text(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => render::write_text(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn need_out(out: &Option<PathBuf>) -> Result<&Path> {
    out.as_deref()
        .ok_or_else(|| Error::parse(0, "--out", "PNG output needs a file"))
}

/// Scale so the longer side of the window is about 1024 pixels.
fn style_for(window: Rect, res: f64) -> RenderStyle {
    let side = window.width().max(window.height()).max(1e-9);
    RenderStyle::new(window, (1024.0 / side).min(res * 16.0))
}

fn report_overlaps(pairs: usize, what: &str) -> Result<()> {
    if pairs > 0 {
        return Err(Error::NotNonOverlapping(format!("{pairs} overlapping {what} pairs")));
    }
    eprintln!("no overlapping {what}");
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Attractor { system, chaos } => attractor(cli, system, *chaos),
        Cmd::Tile {
            system,
            theta,
            level,
            window,
            format,
            check,
        } => tile(cli, system, theta, *level, window.as_deref(), *format, *check),
        Cmd::MaskTile {
            system,
            mask,
            theta,
            steps,
            rotate,
            window,
            format,
            check,
        } => mask_tile(cli, system, mask, theta, *steps, *rotate, window.as_deref(), *format, *check),
        Cmd::GifsTile {
            system,
            theta,
            level,
            window,
            format,
            check,
        } => gifs_tile(cli, system, theta, *level, window.as_deref(), *format, *check),
        Cmd::Transform {
            from,
            to,
            theta,
            point,
            input,
            in_window,
            out_window,
            size,
            k_max,
        } => {
            let src = load_system(from, cli.res)?;
            let dst = load_system(to, cli.res)?;
            let theta = parse_theta(theta, dst.ifs.n(), cli.seed)?;
            let section = Section::tops(&dst.ifs, &dst.body, cli.res)?.with_depth(DEFAULT_DEPTH);
            if let Some(p) = point {
                let x = parse_nums(p, "point")?;
                let addr = transform::extended_section(&section, &theta, &x, *k_max)?;
                let y = transform::extended_coordinate(&src.ifs, &addr)?;
                let y: Vec<String> = y.iter().map(|v| format!("{v:.12}")).collect();
                return emit_text(&cli.out, &format!("{addr}\n{}\n", y.join(" ")));
            }
            let input = input
                .as_ref()
                .ok_or_else(|| Error::parse(0, "--input", "give --point or --input"))?;
            let img = image::open(input)?.to_rgba8();
            let t = ImageTransform {
                in_window: parse_window(in_window, 2)?,
                out_window: parse_window(out_window, 2)?,
                out_size: (*size, *size),
                k_max: *k_max,
                sentinel: Rgba([255, 0, 255, 255]),
            };
            let out = transform::transform_image(&src.ifs, &section, &theta, &img, &t);
            out.save(need_out(&cli.out)?)?;
            Ok(())
        }
        Cmd::FastBasin { system, depth, window } => {
            let s = load_system(system, cli.res)?;
            if let Body::Intervals(a) = &s.body {
                let b = transform::fast_basin_1d(&s.ifs, a, *depth, cli.budget)?;
                return emit_text(&cli.out, &b.to_lines());
            }
            let w = parse_window(window, 2)?;
            let r = transform::fast_basin_2d(&s.ifs, &s.body, *depth, &w, cli.res, cli.budget)?;
            println!("occupancy {:.6}", r.count() as f64 / r.cell_count() as f64);
            if let Some(p) = &cli.out {
                r.save_png(p)?;
            }
            Ok(())
        }
        Cmd::CheckWord {
            theta,
            n,
            system,
            sigma,
            scan,
            depth,
        } => {
            let sys = system.as_deref().map(|s| load_system(s, cli.res)).transpose()?;
            let n = match (&sys, n) {
                (Some(s), _) => s.ifs.n(),
                (None, Some(n)) => *n,
                (None, None) => return Err(Error::parse(0, "-n", "give -n or --system")),
            };
            let theta = parse_theta(theta, n, cli.seed)?;
            let mut text = String::new();
            let d = check_disjunctive(&theta, 4, *scan);
            text.push_str(&match d.missing {
                None => format!("every word of length <= {} occurs twice in the first {scan} letters\n", d.max_len),
                Some(w) => format!("word {w} occurs fewer than twice in the first {scan} letters\n"),
            });
            if let Some(sigma) = sigma {
                let ev = construct_reverse_word(&theta, &Word::parse(sigma, n)?, *scan)?;
                text.push_str(&ev.to_string());
            }
            if let Some(s) = &sys {
                text.push_str(&match check_full(&theta, &s.ifs, &s.body, *depth, cli.res)? {
                    FullVerdict::VerifiedFull(w) => format!("full: witnesses {w:?}\n"),
                    FullVerdict::Unknown => "full: unknown\n".to_string(),
                });
            }
            emit_text(&cli.out, &text)
        }
        Cmd::Preset { name } => match name.as_deref() {
            None => {
                let mut names: Vec<&str> = presets::NAMES.to_vec();
                names.extend(gifs::PRESETS);
                emit_text(&cli.out, &(names.join("\n") + "\n"))
            }
            Some(n) if gifs::PRESETS.contains(&n) => {
                let p = gifs::preset(n)?;
                emit_text(&cli.out, &config::dump_gifs(&p.gifs, &p.shapes)?)
            }
            Some(n) => {
                let p = presets::named(n, cli.res)?;
                let body = (!matches!(p.body, Body::Raster(_))).then_some(&p.body);
                emit_text(&cli.out, &config::dump_ifs(&p.ifs, body)?)
            }
        },
    }
}

fn attractor(cli: &Cli, system: &str, chaos: Option<usize>) -> Result<()> {
    let s = load_system(system, cli.res)?;
    if let Body::Intervals(a) = &s.body {
        return emit_text(&cli.out, &a.to_lines());
    }
    let r = match chaos {
        Some(n) => {
            let cloud = chaos_game(&s.ifs, n, cli.seed)?;
            cloud
                .to_region(cli.res)?
                .as_raster()
                .cloned()
                .ok_or_else(|| Error::Invariant("chaos game gave no raster".into()))?
        }
        None => match &s.body {
            Body::Raster(r) => r.clone(),
            b => b.rasterize(cli.res, cli.budget)?,
        },
    };
    let style = RenderStyle::new(r.frame(), cli.res);
    let img = render::png_rasters(&[(None, &r)], &style);
    render::write_png(need_out(&cli.out)?, &img)
}

#[allow(clippy::too_many_arguments)]
fn tile(
    cli: &Cli,
    system: &str,
    theta: &str,
    level: usize,
    window: Option<&str>,
    format: Format,
    check: bool,
) -> Result<()> {
    let s = load_system(system, cli.res)?;
    let theta = parse_theta(theta, s.ifs.n(), cli.seed)?;
    let t = Tiling::new(s.ifs.clone(), s.body.clone(), theta, level, cli.budget)?;
    if check {
        report_overlaps(t.verify_nonoverlap(cli.res, 1)?.overlapping_pairs, "tile")?;
    }
    match (format, &s.body) {
        (Format::Records, _) => {
            let mut text = String::new();
            for tile in &t.tiles {
                text.push_str(&render::tile_record(&tile.key, None, &tile.xform)?);
                text.push('\n');
            }
            emit_text(&cli.out, &text)
        }
        (Format::Svg, Body::Intervals(a)) => {
            let pieces: Vec<(TileKey, (f64, f64))> = t
                .tiles
                .iter()
                .flat_map(|tile| {
                    let set = tile.interval(a).unwrap_or_else(IntervalSet::empty);
                    set.parts().iter().map(|&p| (tile.key.clone(), p)).collect::<Vec<_>>()
                })
                .collect();
            let lo = pieces.iter().map(|p| p.1 .0).fold(f64::INFINITY, f64::min);
            let hi = pieces.iter().map(|p| p.1 .1).fold(f64::NEG_INFINITY, f64::max);
            let w = match window {
                Some(w) => parse_window(w, 1)?,
                None => Rect::new(lo, 0.0, hi, 1.0),
            };
            let mut style = style_for(w, cli.res);
            style.window.y1 = style.window.y0 + 24.0 / style.scale;
            emit_text(&cli.out, &render::svg_intervals(&pieces, &style))
        }
        (Format::Svg, _) => {
            let template = s
                .template
                .as_ref()
                .ok_or_else(|| Error::Invariant("SVG needs a polygonal attractor; use --format png".into()))?;
            let polys: Vec<(TileKey, Polygon)> = t
                .tiles
                .iter()
                .filter_map(|tile| Some((tile.key.clone(), tile.polygon(template)?)))
                .collect();
            let w = window_or(window, polys.iter().map(|p| p.1.bbox()))?;
            emit_text(&cli.out, &render::svg_polygons(&polys, &style_for(w, cli.res)))
        }
        (Format::Png, Body::Intervals(_)) => Err(Error::Invariant("PNG output is for planar systems".into())),
        (Format::Png, body) => {
            let placed: Vec<PlacedBody<'_>> = t
                .tiles
                .iter()
                .map(|tile| {
                    Ok(PlacedBody {
                        key: tile.key.clone(),
                        fwd: tile.plane_map()?,
                        body,
                    })
                })
                .collect::<Result<_>>()?;
            let boxes = placed.iter().filter_map(|p| body.bbox().map_bbox(&p.fwd));
            let w = window_or(window, boxes)?;
            let img = render::png_tiles(&placed, &style_for(w, cli.res))?;
            render::write_png(need_out(&cli.out)?, &img)
        }
    }
}

fn window_or(window: Option<&str>, boxes: impl Iterator<Item = Rect>) -> Result<Rect> {
    match window {
        Some(w) => parse_window(w, 2),
        None => Ok(boxes.fold(Rect::empty(), |a, b| a.union(&b))),
    }
}

fn trail_key(trail: &[u8], n: u8) -> Result<TileKey> {
    Ok(TileKey {
        level: trail.len(),
        word: Word::new(trail.to_vec(), n)?,
    })
}

#[allow(clippy::too_many_arguments)]
fn mask_tile(
    cli: &Cli,
    system: &str,
    mask: &str,
    theta: &str,
    steps: usize,
    rotate: bool,
    window: Option<&str>,
    format: Format,
    check: bool,
) -> Result<()> {
    let s = load_system(system, cli.res)?;
    let n = s.ifs.n();
    let theta = parse_theta(theta, n, cli.seed)?;
    if let Body::Intervals(a) = &s.body {
        let m = match mask {
            "tops" => Mask1d::tops_mask(&s.ifs, a)?,
            "default" => Mask1d::default_mask(&s.ifs, a)?,
            path => match config::load_mask(Path::new(path))? {
                MaskConfig::Intervals(regions) => Mask1d { regions },
                MaskConfig::Rasters(_) => return Err(Error::InvalidMask("raster mask for a 1-D system".into())),
            },
        };
        let states = masked_tiling_1d(&s.ifs, a, &m, &theta, steps, rotate)?;
        let last = states.last().expect("at least one state");
        let mut pieces = Vec::new();
        for t in &last.tiles {
            let key = trail_key(&t.trail, n)?;
            for &p in t.geometry.parts() {
                pieces.push((key.clone(), p));
            }
        }
        if check {
            let mut sorted: Vec<(f64, f64)> = pieces.iter().map(|p| p.1).collect();
            sorted.sort_by(|x, y| x.0.total_cmp(&y.0));
            let bad = sorted.windows(2).filter(|w| w[1].0 < w[0].1 - 1e-12).count();
            report_overlaps(bad, "tile")?;
        }
        return match format {
            Format::Svg => {
                let lo = pieces.iter().map(|p| p.1 .0).fold(f64::INFINITY, f64::min);
                let hi = pieces.iter().map(|p| p.1 .1).fold(f64::NEG_INFINITY, f64::max);
                let w = match window {
                    Some(w) => parse_window(w, 1)?,
                    None => Rect::new(lo, 0.0, hi, 1.0),
                };
                let mut style = style_for(w, cli.res);
                style.window.y1 = style.window.y0 + 24.0 / style.scale;
                emit_text(&cli.out, &render::svg_intervals(&pieces, &style))
            }
            _ => {
                let text: String = pieces
                    .iter()
                    .map(|(k, (lo, hi))| format!("{} {lo:.16e} {hi:.16e}\n", k.word))
                    .collect();
                emit_text(&cli.out, &text)
            }
        };
    }
    let m = match mask {
        "tops" => Mask2d::tops_mask(&s.ifs, &s.body)?,
        "default" => Mask2d::default_mask(&s.ifs, &s.body, cli.res)?,
        path => match config::load_mask(Path::new(path))? {
            MaskConfig::Rasters(rs) => Mask2d {
                regions: rs.into_iter().map(|r| SetExpr::body(Body::Raster(r))).collect(),
            },
            MaskConfig::Intervals(_) => return Err(Error::InvalidMask("interval mask for a planar system".into())),
        },
    };
    let states = masked_tiling_2d(&s.ifs, &s.body, &m, &theta, steps, rotate, cli.res)?;
    let last = states.last().expect("at least one state");
    let rasters = last.tile_rasters(cli.res, cli.budget)?;
    if check {
        let rs: Vec<Raster> = rasters.iter().map(|r| r.1.clone()).collect();
        report_overlaps(raster_overlaps(&rs, 1).len(), "tile")?;
    }
    let layers: Vec<(Option<TileKey>, &Raster)> = rasters
        .iter()
        .map(|(trail, r)| Ok((Some(trail_key(trail, n)?), r)))
        .collect::<Result<_>>()?;
    let w = window_or(window, rasters.iter().filter_map(|r| r.1.occupied_bbox()))?;
    let img = render::png_rasters(&layers, &RenderStyle::new(w, cli.res));
    render::write_png(need_out(&cli.out)?, &img)
}

fn gifs_tile(
    cli: &Cli,
    system: &str,
    theta: &str,
    level: usize,
    window: Option<&str>,
    format: Format,
    check: bool,
) -> Result<()> {
    let (g, shapes) = load_gifs(system)?;
    let theta = parse_theta(theta, g.edge_count(), cli.seed)?;
    let tiles = gifs_tiles(&g, &theta, level, cli.budget)?;
    if check {
        if shapes.is_empty() {
            return Err(Error::Invariant("overlap check needs component shapes".into()));
        }
        let bodies: Vec<Body> = shapes.iter().cloned().map(Body::Polygon).collect();
        report_overlaps(gifs_overlaps(&tiles, &bodies, cli.res, 1)?.overlapping_pairs, "tile")?;
    }
    match format {
        Format::Records => {
            let mut text = String::new();
            for t in &tiles {
                text.push_str(&render::tile_record(&t.key, Some(t.component), &t.xform)?);
                text.push('\n');
            }
            emit_text(&cli.out, &text)
        }
        Format::Svg | Format::Png => {
            if shapes.is_empty() {
                return Err(Error::Invariant("drawing needs component shapes".into()));
            }
            let polys: Vec<(TileKey, Polygon)> = tiles
                .iter()
                .filter_map(|t| {
                    let m = PlaneMap::from_spec(&t.xform).ok()?;
                    Some((t.key.clone(), shapes[t.component].map(&m)?))
                })
                .collect();
            let w = window_or(window, polys.iter().map(|p| p.1.bbox()))?;
            let style = style_for(w, cli.res);
            if matches!(format, Format::Svg) {
                return emit_text(&cli.out, &render::svg_polygons(&polys, &style));
            }
            let bodies: Vec<Body> = polys.iter().map(|p| Body::Polygon(p.1.clone())).collect();
            let placed: Vec<PlacedBody<'_>> = polys
                .iter()
                .zip(&bodies)
                .map(|(p, b)| PlacedBody {
                    key: p.0.clone(),
                    fwd: PlaneMap::identity(),
                    body: b,
                })
                .collect();
            let img = render::png_tiles(&placed, &style)?;
            render::write_png(need_out(&cli.out)?, &img)
        }
    }
}
