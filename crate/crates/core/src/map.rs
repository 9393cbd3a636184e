//! Invertible affine and projective maps of R^n.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Homogeneous coordinates closer than this to zero count as the line at infinity.
pub const INFINITY_GUARD: f64 = 1e-12;

/// An affine map `x -> Lx + o` or a projective map given by a homogeneous matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum MapSpec<S> {
    Affine { linear: Matrix<S>, offset: Vec<S> },
    Projective { hom: Matrix<S> },
}

impl<S: Scalar> MapSpec<S> {
    pub fn affine(linear: Matrix<S>, offset: Vec<S>) -> Result<Self> {
        if !linear.is_square() {
            return Err(Error::DimMismatch {
                expected: linear.rows(),
                found: linear.cols(),
            });
        }
        if offset.len() != linear.rows() {
            return Err(Error::DimMismatch {
                expected: linear.rows(),
                found: offset.len(),
            });
        }
        Ok(MapSpec::Affine { linear, offset })
    }

    pub fn projective(hom: Matrix<S>) -> Result<Self> {
        if !hom.is_square() || hom.rows() < 2 {
            return Err(Error::DimMismatch {
                expected: hom.rows(),
                found: hom.cols(),
            });
        }
        Ok(MapSpec::Projective { hom })
    }

    pub fn identity(dim: usize) -> Self {
        MapSpec::Affine {
            linear: Matrix::identity(dim),
            offset: vec![S::zero(); dim],
        }
    }

    /// `(x, y) -> (a x + b y + e, c x + d y + f)`.
    pub fn affine_2d([a, b, c, d, e, f]: [S; 6]) -> Self {
        MapSpec::Affine {
            linear: Matrix::from_rows(2, 2, vec![a, b, c, d]),
            offset: vec![e, f],
        }
    }

    /// `x -> a x + e`.
    pub fn affine_1d(a: S, e: S) -> Self {
        MapSpec::Affine {
            linear: Matrix::from_rows(1, 1, vec![a]),
            offset: vec![e],
        }
    }

    /// Builds a map from its row-major coefficient list: the linear block followed by
    /// the offset for affine maps, the full homogeneous matrix for projective ones.
    pub fn from_coefficients(dim: usize, projective: bool, coeffs: Vec<S>) -> Result<Self> {
        if projective {
            let n = dim + 1;
            if coeffs.len() != n * n {
                return Err(Error::DimMismatch {
                    expected: n * n,
                    found: coeffs.len(),
                });
            }
            Self::projective(Matrix::from_rows(n, n, coeffs))
        } else {
            if coeffs.len() != dim * dim + dim {
                return Err(Error::DimMismatch {
                    expected: dim * dim + dim,
                    found: coeffs.len(),
                });
            }
            let mut coeffs = coeffs;
            let offset = coeffs.split_off(dim * dim);
            Self::affine(Matrix::from_rows(dim, dim, coeffs), offset)
        }
    }

    /// Inverse of [`from_coefficients`](Self::from_coefficients).
    pub fn coefficients(&self) -> Vec<S> {
        match self {
            MapSpec::Affine { linear, offset } => {
                let mut v = linear.as_slice().to_vec();
                v.extend(offset.iter().cloned());
                v
            }
            MapSpec::Projective { hom } => hom.as_slice().to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            MapSpec::Affine { linear, .. } => linear.rows(),
            MapSpec::Projective { hom } => hom.rows() - 1,
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, MapSpec::Affine { .. })
    }

    pub fn homogeneous(&self) -> Matrix<S> {
        match self {
            MapSpec::Affine { linear, offset } => {
                let n = linear.rows();
                let mut h = Matrix::zeros(n + 1, n + 1);
                for i in 0..n {
                    for j in 0..n {
                        h[(i, j)] = linear[(i, j)].clone();
                    }
                    h[(i, n)] = offset[i].clone();
                }
                h[(n, n)] = S::one();
                h
            }
            MapSpec::Projective { hom } => hom.clone(),
        }
    }

    /// Linear part of an affine map.
    pub fn linear(&self) -> Option<&Matrix<S>> {
        match self {
            MapSpec::Affine { linear, .. } => Some(linear),
            MapSpec::Projective { .. } => None,
        }
    }

    pub fn offset(&self) -> Option<&[S]> {
        match self {
            MapSpec::Affine { offset, .. } => Some(offset),
            MapSpec::Projective { .. } => None,
        }
    }

    /// Determinant of the linear part, or of the homogeneous matrix.
    pub fn determinant(&self) -> S {
        match self {
            MapSpec::Affine { linear, .. } => linear.determinant(),
            MapSpec::Projective { hom } => hom.determinant(),
        }
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &Self) -> Self {
        assert_eq!(self.dim(), inner.dim(), "composing maps of different dimension");
        match (self, inner) {
            (
                MapSpec::Affine { linear: l1, offset: o1 },
                MapSpec::Affine { linear: l2, offset: o2 },
            ) => {
                let linear = l1 * l2;
                let offset = l1
                    .mul_vec(o2)
                    .into_iter()
                    .zip(o1)
                    .map(|(a, b)| a + b.clone())
                    .collect();
                MapSpec::Affine { linear, offset }
            }
            _ => MapSpec::Projective {
                hom: &self.homogeneous() * &inner.homogeneous(),
            },
        }
    }

    pub fn inverse(&self) -> Result<Self> {
        let singular = || Error::Singular {
            index: 0,
            det: self.determinant().to_f64_lossy(),
        };
        match self {
            MapSpec::Affine { linear, offset } => {
                let inv = linear.inverse().ok_or_else(singular)?;
                let offset = inv.mul_vec(offset).into_iter().map(|v| -v).collect();
                Ok(MapSpec::Affine {
                    linear: inv,
                    offset,
                })
            }
            MapSpec::Projective { hom } => Ok(MapSpec::Projective {
                hom: hom.inverse().ok_or_else(singular)?,
            }),
        }
    }

    pub fn apply(&self, x: &[S]) -> Result<Vec<S>> {
        if x.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        match self {
            MapSpec::Affine { linear, offset } => Ok(linear
                .mul_vec(x)
                .into_iter()
                .zip(offset)
                .map(|(a, b)| a + b.clone())
                .collect()),
            MapSpec::Projective { hom } => {
                let mut xh = x.to_vec();
                xh.push(S::one());
                let mut y = hom.mul_vec(&xh);
                let w = y.pop().unwrap();
                if w.is_zero() || w.to_f64_lossy().abs() < INFINITY_GUARD {
                    return Err(Error::NearInfinity);
                }
                Ok(y.into_iter().map(|v| v / w.clone()).collect())
            }
        }
    }

    /// Largest entrywise difference of the homogeneous matrices. Projective matrices
    /// are first scaled so their bottom-right entry is one.
    pub fn max_abs_diff(&self, other: &Self) -> S {
        normalized(self.homogeneous()).max_abs_diff(&normalized(other.homogeneous()))
    }

    /// `[a, b, c, d, e, f]` for a 2-D affine map.
    pub fn coeffs_2d(&self) -> Option<[S; 6]> {
        match self {
            MapSpec::Affine { linear, offset } if linear.rows() == 2 => Some([
                linear[(0, 0)].clone(),
                linear[(0, 1)].clone(),
                linear[(1, 0)].clone(),
                linear[(1, 1)].clone(),
                offset[0].clone(),
                offset[1].clone(),
            ]),
            _ => None,
        }
    }

    /// `(a, e)` for a 1-D affine map `x -> a x + e`.
    pub fn coeffs_1d(&self) -> Option<(S, S)> {
        match self {
            MapSpec::Affine { linear, offset } if linear.rows() == 1 => {
                Some((linear[(0, 0)].clone(), offset[0].clone()))
            }
            _ => None,
        }
    }

    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> MapSpec<T> {
        match self {
            MapSpec::Affine { linear, offset } => MapSpec::Affine {
                linear: linear.map(&f),
                offset: offset.iter().map(&f).collect(),
            },
            MapSpec::Projective { hom } => MapSpec::Projective { hom: hom.map(&f) },
        }
    }

    pub fn to_f64(&self) -> MapSpec<f64> {
        self.convert(|v| v.to_f64_lossy())
    }

    /// The unique affine map sending the three points `src` to `dst` in order.
    pub fn from_triangle(src: [[S; 2]; 3], dst: [[S; 2]; 3]) -> Result<Self> {
        let basis = |p: &[[S; 2]; 3]| {
            Matrix::from_rows(
                2,
                2,
                vec![
                    p[1][0].clone() - p[0][0].clone(),
                    p[2][0].clone() - p[0][0].clone(),
                    p[1][1].clone() - p[0][1].clone(),
                    p[2][1].clone() - p[0][1].clone(),
                ],
            )
        };
        let s = basis(&src);
        let inv = s.inverse().ok_or_else(|| Error::Singular {
            index: 0,
            det: s.determinant().to_f64_lossy(),
        })?;
        let linear = &basis(&dst) * &inv;
        let shifted = linear.mul_vec(&src[0]);
        let offset = vec![
            dst[0][0].clone() - shifted[0].clone(),
            dst[0][1].clone() - shifted[1].clone(),
        ];
        Ok(MapSpec::Affine { linear, offset })
    }
}

fn normalized<S: Scalar>(h: Matrix<S>) -> Matrix<S> {
    let n = h.rows() - 1;
    let w = h[(n, n)].clone();
    if w.is_zero() || w == S::one() {
        h
    } else {
        h.map(|v| v.clone() / w.clone())
    }
}

/// Fast 2-D map over `f64` used in raster loops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneMap {
    m: [f64; 9],
    affine: bool,
}

impl PlaneMap {
    /// Row-major homogeneous matrix.
    pub fn matrix(&self) -> &[f64; 9] {
        &self.m
    }

    pub fn identity() -> Self {
        PlaneMap {
            m: [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            affine: true,
        }
    }

    pub fn from_spec<S: Scalar>(spec: &MapSpec<S>) -> Result<Self> {
        if spec.dim() != 2 {
            return Err(Error::DimMismatch {
                expected: 2,
                found: spec.dim(),
            });
        }
        let h = normalized(spec.homogeneous()).to_f64();
        let mut m = [0.0; 9];
        m.copy_from_slice(h.as_slice());
        Ok(PlaneMap {
            m,
            affine: spec.is_affine(),
        })
    }

    pub fn to_spec(&self) -> MapSpec<f64> {
        if self.affine {
            MapSpec::affine_2d([self.m[0], self.m[1], self.m[3], self.m[4], self.m[2], self.m[5]])
        } else {
            MapSpec::Projective {
                hom: Matrix::from_rows(3, 3, self.m.to_vec()),
            }
        }
    }

    pub fn is_affine(&self) -> bool {
        self.affine
    }

    #[inline]
    pub fn apply(&self, [x, y]: [f64; 2]) -> Option<[f64; 2]> {
        let m = &self.m;
        let u = m[0] * x + m[1] * y + m[2];
        let v = m[3] * x + m[4] * y + m[5];
        if self.affine {
            return Some([u, v]);
        }
        let w = m[6] * x + m[7] * y + m[8];
        if w.abs() < INFINITY_GUARD {
            None
        } else {
            Some([u / w, v / w])
        }
    }

    pub fn compose(&self, inner: &PlaneMap) -> PlaneMap {
        let (a, b) = (&self.m, &inner.m);
        let mut m = [0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                m[i * 3 + j] = (0..3).map(|k| a[i * 3 + k] * b[k * 3 + j]).sum();
            }
        }
        PlaneMap {
            m,
            affine: self.affine && inner.affine,
        }
    }

    pub fn inverse(&self) -> Option<PlaneMap> {
        let spec = self.to_spec().inverse().ok()?;
        PlaneMap::from_spec(&spec).ok()
    }

    /// Jacobian at a point (constant for affine maps).
    pub fn jacobian(&self, [x, y]: [f64; 2]) -> [f64; 4] {
        let m = &self.m;
        if self.affine {
            return [m[0], m[1], m[3], m[4]];
        }
        let w = m[6] * x + m[7] * y + m[8];
        let u = m[0] * x + m[1] * y + m[2];
        let v = m[3] * x + m[4] * y + m[5];
        let w2 = w * w;
        [
            (m[0] * w - u * m[6]) / w2,
            (m[1] * w - u * m[7]) / w2,
            (m[3] * w - v * m[6]) / w2,
            (m[4] * w - v * m[7]) / w2,
        ]
    }

    pub fn raw(&self) -> &[f64; 9] {
        &self.m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn half() -> MapSpec<f64> {
        MapSpec::affine_1d(0.5, 0.0)
    }

    #[test]
    fn compose_1d() {
        let f2 = MapSpec::affine_1d(0.5, 0.5);
        let g = f2.compose(&half());
        assert_eq!(g.coeffs_1d(), Some((0.25, 0.5)));
    }

    #[test]
    fn exact_inverse() {
        let q = |n, d| BigRational::from_ratio(n, d);
        let f = MapSpec::affine_1d(q(13, 20), q(7, 20));
        let g = f.inverse().unwrap();
        assert_eq!(g.compose(&f), MapSpec::identity(1));
        assert_eq!(g.coeffs_1d().unwrap(), (q(20, 13), q(-7, 13)));
    }

    #[test]
    fn singular_rejected() {
        let f = MapSpec::affine_2d([1.0, 2.0, 2.0, 4.0, 0.0, 0.0]);
        assert!(matches!(f.inverse(), Err(Error::Singular { .. })));
    }

    #[test]
    fn projective_near_infinity() {
        let hom = Matrix::from_rows(3, 3, vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 0.0]);
        let f = MapSpec::projective(hom).unwrap();
        assert!(matches!(f.apply(&[0.0, 1.0]), Err(Error::NearInfinity)));
        assert_eq!(f.apply(&[2.0, 1.0]).unwrap(), vec![1.0, 0.5]);
    }

    #[test]
    fn triangle_correspondence() {
        let src: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let dst = [[1.0, 1.0], [0.5, 1.0], [1.0, 0.5]];
        let f = MapSpec::from_triangle(src, dst).unwrap();
        for (s, d) in src.iter().zip(&dst) {
            let y = f.apply(s).unwrap();
            assert!((y[0] - d[0]).abs() < 1e-15 && (y[1] - d[1]).abs() < 1e-15);
        }
        assert_eq!(f.coeffs_2d().unwrap(), [-0.5, 0.0, 0.0, -0.5, 1.0, 1.0]);
    }

    #[test]
    fn plane_map_matches_spec() {
        let hom = Matrix::from_rows(3, 3, vec![0.5, 0.1, 0.2, 0.0, 0.4, 0.1, 0.1, 0.2, 1.0]);
        let f = MapSpec::projective(hom).unwrap();
        let p = PlaneMap::from_spec(&f).unwrap();
        let y = f.apply(&[0.3, 0.7]).unwrap();
        let z = p.apply([0.3, 0.7]).unwrap();
        assert!((y[0] - z[0]).abs() < 1e-15 && (y[1] - z[1]).abs() < 1e-15);
        let inv = p.inverse().unwrap();
        let back = inv.apply(z).unwrap();
        assert!((back[0] - 0.3).abs() < 1e-12 && (back[1] - 0.7).abs() < 1e-12);
        // numeric jacobian
        let h = 1e-6;
        let j = p.jacobian([0.3, 0.7]);
        let dx = p.apply([0.3 + h, 0.7]).unwrap();
        assert!(((dx[0] - z[0]) / h - j[0]).abs() < 1e-5);
    }

    fn arb_affine() -> impl Strategy<Value = MapSpec<f64>> {
        prop::array::uniform6(-2.0f64..2.0).prop_filter_map("singular", |c| {
            let m = MapSpec::affine_2d(c);
            (m.determinant().abs() > 0.05).then_some(m)
        })
    }

    proptest! {
        #[test]
        fn inverse_round_trip(m in arb_affine(), x in -5.0f64..5.0, y in -5.0f64..5.0) {
            let inv = m.inverse().unwrap();
            let back = inv.apply(&m.apply(&[x, y]).unwrap()).unwrap();
            prop_assert!((back[0] - x).abs() < 1e-9 && (back[1] - y).abs() < 1e-9);
        }

        #[test]
        fn composition_is_associative(a in arb_affine(), b in arb_affine(), c in arb_affine()) {
            let left = a.compose(&b).compose(&c);
            let right = a.compose(&b.compose(&c));
            prop_assert!(left.max_abs_diff(&right) < 1e-12);
        }

        #[test]
        fn coefficients_round_trip(a in arb_affine()) {
            let back = MapSpec::from_coefficients(2, false, a.coefficients()).unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
