//! Ready-made systems: interval, chair, fold-out square, triangles, gaskets,
//! digit tiles and the overlapping `b`-scaled families.

use crate::attractor::raster_attractor;
use crate::body::Body;
use crate::error::{Error, Result};
use crate::geometry::Polygon;
use crate::ifs::Ifs;
use crate::linalg::Matrix;
use crate::map::{MapSpec, PlaneMap};
use crate::raster::DEFAULT_CELL_BUDGET;
use crate::scalar::Scalar;

/// Names accepted by [`named`]. Parameterized forms: `foldout:<ex>,<ey>`,
/// `overlap1d:<b>`, `overlap2d:<b>`.
pub const NAMES: &[&str] = &[
    "interval",
    "chair",
    "foldout",
    "triangle",
    "projective-triangle",
    "sierpinski",
    "empty-interior",
    "twindragon",
    "overlap1d",
    "overlap2d",
];

/// A system together with its attractor and, for polygonal attractors, the
/// vertex template used for drawing.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: String,
    pub ifs: Ifs<f64>,
    pub body: Body,
    pub template: Option<Polygon>,
}

/// `{x/2, x/2 + 1/2}` with attractor `[0, 1]`.
pub fn interval<S: Scalar>() -> Ifs<S> {
    let half = S::from_ratio(1, 2);
    Ifs::new(vec![
        MapSpec::affine_1d(half.clone(), S::zero()),
        MapSpec::affine_1d(half.clone(), half),
    ])
    .expect("valid maps")
}

/// `{b x, b x + 1 - b}`, overlapping for `b > 1/2`.
pub fn overlap1d<S: Scalar>(b: S) -> Result<Ifs<S>> {
    if !(b > S::zero() && b < S::one()) {
        return Err(Error::InvalidPreset(format!("b = {b} must lie in (0, 1)")));
    }
    let l = S::one() - b.clone();
    Ifs::new(vec![MapSpec::affine_1d(b.clone(), S::zero()), MapSpec::affine_1d(b, l)])
}

/// Four corner copies of the unit square scaled by `b`, in the order
/// bottom-left, bottom-right, top-left, top-right.
pub fn overlap2d<S: Scalar>(b: S) -> Result<Ifs<S>> {
    if !(b > S::zero() && b < S::one()) {
        return Err(Error::InvalidPreset(format!("b = {b} must lie in (0, 1)")));
    }
    let l = S::one() - b.clone();
    let z = S::zero();
    let offsets = [
        (z.clone(), z.clone()),
        (l.clone(), z.clone()),
        (z.clone(), l.clone()),
        (l.clone(), l),
    ];
    Ifs::new(
        offsets
            .into_iter()
            .map(|(e, f)| MapSpec::affine_2d([b.clone(), z.clone(), z.clone(), b.clone(), e, f]))
            .collect(),
    )
}

pub fn chair_polygon() -> Polygon {
    Polygon::new(vec![
        [0.0, 0.0],
        [1.0, 0.0],
        [1.0, 0.5],
        [0.5, 0.5],
        [0.5, 1.0],
        [0.0, 1.0],
    ])
}

pub fn chair() -> Ifs<f64> {
    Ifs::new(vec![
        MapSpec::affine_2d([0.5, 0.0, 0.0, 0.5, 0.0, 0.0]),
        MapSpec::affine_2d([0.5, 0.0, 0.0, 0.5, 0.25, 0.25]),
        MapSpec::affine_2d([-0.5, 0.0, 0.0, 0.5, 1.0, 0.0]),
        MapSpec::affine_2d([0.5, 0.0, 0.0, -0.5, 0.0, 1.0]),
    ])
    .expect("valid maps")
}

/// Fold-out maps of the unit square `ABCD` for an interior point `E`:
/// `f1(ABCD) = APES`, `f2 = BPEQ`, `f3 = CREQ`, `f4 = DRES`, where `P, Q, R, S`
/// are the projections of `E` on `AB, BC, CD, DA`.
pub fn foldout(e: [f64; 2]) -> Result<Ifs<f64>> {
    let [ex, ey] = e;
    if !(ex > 0.0 && ex < 1.0 && ey > 0.0 && ey < 1.0) {
        return Err(Error::InvalidPreset(format!("E = {e:?} must lie inside the unit square")));
    }
    let (a, b, d) = ([0.0, 0.0], [1.0, 0.0], [0.0, 1.0]);
    let c = [1.0, 1.0];
    let (p, q, r, s) = ([ex, 0.0], [1.0, ey], [ex, 1.0], [0.0, ey]);
    // an affine map of the square is fixed by the images of A, B and D
    let maps = [[a, p, s], [b, p, q], [c, r, q], [d, r, s]]
        .into_iter()
        .map(|dst| MapSpec::from_triangle([a, b, d], dst))
        .collect::<Result<Vec<_>>>()?;
    Ifs::new(maps)
}

/// `f1(ABC) = Abc`, `f2(ABC) = aBc`, `f3(ABC) = abC`, `f4(ABC) = abc` with `c` on
/// `AB`, `a` on `BC` and `b` on `CA`.
pub fn triangle(big: [[f64; 2]; 3], small: [[f64; 2]; 3]) -> Result<Ifs<f64>> {
    let [ca, cb, cc] = big;
    let [sa, sb, sc] = small;
    let on_segment = |p: [f64; 2], u: [f64; 2], v: [f64; 2]| {
        let cross = (v[0] - u[0]) * (p[1] - u[1]) - (v[1] - u[1]) * (p[0] - u[0]);
        let t = ((p[0] - u[0]) * (v[0] - u[0]) + (p[1] - u[1]) * (v[1] - u[1]))
            / ((v[0] - u[0]).powi(2) + (v[1] - u[1]).powi(2));
        cross.abs() < 1e-12 && t > 0.0 && t < 1.0
    };
    if !(on_segment(sa, cb, cc) && on_segment(sb, cc, ca) && on_segment(sc, ca, cb)) {
        return Err(Error::InvalidPreset(
            "a, b, c must lie strictly inside BC, CA, AB".into(),
        ));
    }
    let maps = [[ca, sb, sc], [sa, cb, sc], [sa, sb, cc], [sa, sb, sc]]
        .into_iter()
        .map(|dst| MapSpec::from_triangle(big, dst))
        .collect::<Result<Vec<_>>>()?;
    Ifs::new(maps)
}

pub const TRIANGLE: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
pub const TRIANGLE_MIDPOINTS: [[f64; 2]; 3] = [[0.5, 0.5], [0.0, 0.5], [0.5, 0.0]];

/// Homogeneous matrix of the chart change used by the projective triangle.
pub fn projective_chart() -> MapSpec<f64> {
    MapSpec::projective(Matrix::from_rows(
        3,
        3,
        vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.3, 0.2, 1.0],
    ))
    .expect("invertible")
}

/// The midpoint triangle system conjugated by [`projective_chart`]; its
/// attractor is the image triangle.
pub fn projective_triangle() -> Result<(Ifs<f64>, Polygon)> {
    let p = projective_chart();
    let base = triangle(TRIANGLE, TRIANGLE_MIDPOINTS)?;
    let pinv = p.inverse()?;
    let maps: Vec<MapSpec<f64>> = base.maps().iter().map(|m| p.compose(m).compose(&pinv)).collect();
    let f = Ifs::new(maps)?;
    let pm = PlaneMap::from_spec(&p)?;
    let poly = Polygon::new(TRIANGLE.iter().map(|&v| pm.apply(v).expect("finite")).collect());
    // the Euclidean certificate is only sampled on [0,1]^2 for projective maps
    let lambda = f.estimate_contraction_on((0.0, 1.0));
    Ok((f.with_declared_contractive(lambda < 1.0), poly))
}

pub fn sierpinski() -> Ifs<f64> {
    Ifs::new(vec![
        MapSpec::affine_2d([0.5, 0.0, 0.0, 0.5, 0.0, 0.0]),
        MapSpec::affine_2d([0.5, 0.0, 0.0, 0.5, 0.5, 0.0]),
        MapSpec::affine_2d([0.5, 0.0, 0.0, 0.5, 0.0, 0.5]),
    ])
    .expect("valid maps")
}

/// Three-map system whose attractor has empty interior.
pub fn empty_interior() -> Ifs<f64> {
    Ifs::new(vec![
        MapSpec::affine_2d([-0.7, 0.0, 0.0, 0.65, 0.7, 0.35]),
        MapSpec::affine_2d([0.0, -0.3, -0.6, -0.3, 1.0, 1.3]),
        MapSpec::affine_2d([0.0, 0.375, -0.6, 0.35, 0.325, 0.65]),
    ])
    .expect("valid maps")
}

/// Digit system `f_i(x) = L⁻¹(x - d_i)`. `L` must be expanding and `D` a full
/// set of coset representatives of `Z² / L Z²`.
pub fn digit(l: [[i64; 2]; 2], d: &[[i64; 2]]) -> Result<Ifs<f64>> {
    let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
    if det.unsigned_abs() as usize != d.len() {
        return Err(Error::InvalidPreset(format!(
            "|det L| = {} but {} digits given",
            det.abs(),
            d.len()
        )));
    }
    // eigenvalues of an integer 2x2 matrix: λ² - tr λ + det = 0
    let tr = (l[0][0] + l[1][1]) as f64;
    let disc = tr * tr - 4.0 * det as f64;
    let min_modulus = if disc >= 0.0 {
        ((tr.abs() - disc.sqrt()) / 2.0).abs()
    } else {
        (det as f64).abs().sqrt()
    };
    if min_modulus <= 1.0 {
        return Err(Error::InvalidPreset("L is not expanding".into()));
    }
    // d_i - d_j ∈ L Z² iff adj(L)(d_i - d_j) ≡ 0 mod det
    let adj = [[l[1][1], -l[0][1]], [-l[1][0], l[0][0]]];
    for i in 0..d.len() {
        for j in 0..i {
            let v = [d[i][0] - d[j][0], d[i][1] - d[j][1]];
            let w = [adj[0][0] * v[0] + adj[0][1] * v[1], adj[1][0] * v[0] + adj[1][1] * v[1]];
            if w[0] % det == 0 && w[1] % det == 0 {
                return Err(Error::InvalidPreset(format!(
                    "digits {:?} and {:?} lie in the same coset",
                    d[j], d[i]
                )));
            }
        }
    }
    let linv = Matrix::from_rows(2, 2, vec![l[0][0] as f64, l[0][1] as f64, l[1][0] as f64, l[1][1] as f64])
        .inverse()
        .ok_or_else(|| Error::InvalidPreset("L is singular".into()))?;
    let maps = d
        .iter()
        .map(|di| {
            let off = linv.mul_vec(&[-di[0] as f64, -di[1] as f64]);
            MapSpec::affine(linv.clone(), off)
        })
        .collect::<Result<Vec<_>>>()?;
    let f = Ifs::new(maps)?;
    // L⁻¹ need only contract in an adapted norm
    Ok(if f.declared_contractive() { f } else { f.with_declared_contractive(true) })
}

pub const TWINDRAGON_L: [[i64; 2]; 2] = [[1, -1], [1, 1]];
pub const TWINDRAGON_D: [[i64; 2]; 2] = [[0, 0], [1, 0]];

fn parse_params(name: &str, rest: &str, count: usize) -> Result<Vec<f64>> {
    let vals: std::result::Result<Vec<f64>, _> = rest.split(',').map(|s| s.trim().parse()).collect();
    match vals {
        Ok(v) if v.len() == count => Ok(v),
        _ => Err(Error::InvalidPreset(format!(
            "`{name}` expects {count} comma-separated numbers, got `{rest}`"
        ))),
    }
}

/// Builds a preset by name. Fractal attractors are rasterized at `res`.
pub fn named(spec: &str, res: f64) -> Result<Preset> {
    let (name, params) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let fractal = |ifs: Ifs<f64>| -> Result<Preset> {
        let body = Body::Raster(raster_attractor(&ifs, res, DEFAULT_CELL_BUDGET)?);
        Ok(Preset {
            name: spec.to_string(),
            ifs,
            body,
            template: None,
        })
    };
    let polygonal = |ifs: Ifs<f64>, poly: Polygon| Preset {
        name: spec.to_string(),
        ifs,
        body: Body::Polygon(poly.clone()),
        template: Some(poly),
    };
    match (name, params) {
        ("interval", None) => Ok(Preset {
            name: spec.into(),
            ifs: interval(),
            body: Body::unit_interval(),
            template: None,
        }),
        ("overlap1d", p) => {
            let b = p.map(|p| parse_params(name, p, 1)).transpose()?.map_or(0.65, |v| v[0]);
            Ok(Preset {
                name: spec.into(),
                ifs: overlap1d(b)?,
                body: Body::unit_interval(),
                template: None,
            })
        }
        ("overlap2d", p) => {
            let b = p.map(|p| parse_params(name, p, 1)).transpose()?.map_or(0.65, |v| v[0]);
            Ok(polygonal(overlap2d(b)?, Polygon::rect(&crate::geometry::Rect::unit())))
        }
        ("chair", None) => Ok(polygonal(chair(), chair_polygon())),
        ("foldout", p) => {
            let e = p.map(|p| parse_params(name, p, 2)).transpose()?.unwrap_or(vec![2.0 / 3.0, 1.0 / 3.0]);
            Ok(polygonal(foldout([e[0], e[1]])?, Polygon::rect(&crate::geometry::Rect::unit())))
        }
        ("triangle", None) => Ok(polygonal(
            triangle(TRIANGLE, TRIANGLE_MIDPOINTS)?,
            Polygon::new(TRIANGLE.to_vec()),
        )),
        ("projective-triangle", None) => {
            let (f, poly) = projective_triangle()?;
            Ok(polygonal(f, poly))
        }
        ("sierpinski", None) => fractal(sierpinski()),
        ("empty-interior", None) => fractal(empty_interior()),
        ("twindragon", None) => fractal(digit(TWINDRAGON_L, &TWINDRAGON_D)?),
        _ => Err(Error::InvalidPreset(format!(
            "unknown preset `{spec}`; known: {}",
            NAMES.join(", ")
        ))),
    }
}
