//! Iterated function systems and word-indexed compositions.

use crate::error::{Error, Result};
use crate::map::{MapSpec, PlaneMap};
use crate::scalar::Scalar;
use crate::word::{InfiniteWord, Word};

/// A finite family of invertible maps of R^n.
#[derive(Clone, Debug)]
pub struct Ifs<S> {
    maps: Vec<MapSpec<S>>,
    inverses: Vec<MapSpec<S>>,
    declared_contractive: bool,
}

/// Square window `[lo, hi]^dim` used to sample projective Jacobians.
pub const DEFAULT_JACOBIAN_WINDOW: (f64, f64) = (0.0, 1.0);

impl<S: Scalar> Ifs<S> {
    /// Checks dimensions and invertibility. The contractivity flag is set from
    /// the Euclidean certificate; see [`with_declared_contractive`](Self::with_declared_contractive).
    pub fn new(maps: Vec<MapSpec<S>>) -> Result<Self> {
        let first = maps
            .first()
            .ok_or_else(|| Error::Invariant("an IFS needs at least one map".into()))?;
        let dim = first.dim();
        if maps.len() > u8::MAX as usize {
            return Err(Error::Invariant("at most 255 maps are supported".into()));
        }
        let mut inverses = Vec::with_capacity(maps.len());
        for (i, m) in maps.iter().enumerate() {
            if m.dim() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: m.dim(),
                });
            }
            let inv = m.inverse().map_err(|_| Error::Singular {
                index: i + 1,
                det: m.determinant().to_f64_lossy(),
            })?;
            inverses.push(inv);
        }
        let mut ifs = Ifs {
            maps,
            inverses,
            declared_contractive: false,
        };
        ifs.declared_contractive = ifs.estimate_contraction() < 1.0;
        Ok(ifs)
    }

    /// Overrides the contractivity flag, e.g. for systems contractive only in
    /// an adapted metric.
    pub fn with_declared_contractive(mut self, flag: bool) -> Self {
        self.declared_contractive = flag;
        self
    }

    pub fn declared_contractive(&self) -> bool {
        self.declared_contractive
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn n(&self) -> u8 {
        self.maps.len() as u8
    }

    pub fn maps(&self) -> &[MapSpec<S>] {
        &self.maps
    }

    /// `f_i`, 1-based.
    pub fn map(&self, i: u8) -> &MapSpec<S> {
        &self.maps[i as usize - 1]
    }

    /// `f_i^{-1}`, 1-based.
    pub fn inverse(&self, i: u8) -> &MapSpec<S> {
        &self.inverses[i as usize - 1]
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        if let Some(&bad) = w.letters().iter().find(|&&l| l == 0 || l > self.n()) {
            return Err(Error::InvalidWord(format!(
                "letter {bad} out of range for an IFS with {} maps",
                self.n()
            )));
        }
        Ok(())
    }

    /// `f_{ω1} ∘ ... ∘ f_{ωk}`.
    pub fn compose(&self, w: &Word) -> Result<MapSpec<S>> {
        self.check_word(w)?;
        Ok(w.letters()
            .iter()
            .fold(MapSpec::identity(self.dim()), |acc, &l| acc.compose(self.map(l))))
    }

    /// `f^{-1}_{ω1} ∘ ... ∘ f^{-1}_{ωk}`.
    pub fn inverse_compose(&self, w: &Word) -> Result<MapSpec<S>> {
        self.check_word(w)?;
        Ok(w.letters()
            .iter()
            .fold(MapSpec::identity(self.dim()), |acc, &l| acc.compose(self.inverse(l))))
    }

    /// `f_{θk} ∘ ... ∘ f_{θ1}`, the forward map sending `(f^{-1})_{θ|k}(A)` back onto `A`.
    pub fn forward_along(&self, w: &Word) -> Result<MapSpec<S>> {
        self.compose(&w.reversed())
    }

    /// The IFS of inverse maps, `F*`.
    pub fn inverse_system(&self) -> Ifs<S> {
        Ifs {
            maps: self.inverses.clone(),
            inverses: self.maps.clone(),
            declared_contractive: false,
        }
    }

    /// Conjugates every map by `g`: `g^{-1} ∘ f_i ∘ g`.
    pub fn conjugate(&self, g: &MapSpec<S>) -> Result<Ifs<S>> {
        let ginv = g.inverse()?;
        let maps = self
            .maps
            .iter()
            .map(|f| ginv.compose(f).compose(g))
            .collect();
        let mut out = Ifs::new(maps)?;
        out.declared_contractive = self.declared_contractive;
        Ok(out)
    }

    pub fn to_f64(&self) -> Ifs<f64> {
        Ifs {
            maps: self.maps.iter().map(MapSpec::to_f64).collect(),
            inverses: self.inverses.iter().map(MapSpec::to_f64).collect(),
            declared_contractive: self.declared_contractive,
        }
    }

    /// Largest singular value over the maps. Projective maps use the largest
    /// Jacobian norm sampled on `[0, 1]^dim`.
    pub fn estimate_contraction(&self) -> f64 {
        self.estimate_contraction_on(DEFAULT_JACOBIAN_WINDOW)
    }

    /// Lipschitz estimate of map `i` (1-based).
    pub fn map_contraction(&self, i: u8) -> f64 {
        map_contraction(self.map(i), DEFAULT_JACOBIAN_WINDOW)
    }

    pub fn estimate_contraction_on(&self, window: (f64, f64)) -> f64 {
        self.maps
            .iter()
            .map(|m| map_contraction(m, window))
            .fold(0.0, f64::max)
    }

    fn require_contractive(&self) -> Result<f64> {
        let lambda = self.estimate_contraction();
        if !self.declared_contractive {
            return Err(Error::NotContractive { factor: lambda });
        }
        Ok(lambda)
    }

    /// `f_{ω|depth}(x0)` together with a bound on its distance to `π(ω)`.
    pub fn coordinate_point(
        &self,
        w: &InfiniteWord,
        depth: usize,
        x0: &[S],
    ) -> Result<(Vec<S>, f64)> {
        let lambda = self.require_contractive()?;
        let prefix = w.prefix(depth);
        self.check_word(&prefix)?;
        let mut x = x0.to_vec();
        for &l in prefix.letters().iter().rev() {
            x = self.map(l).apply(&x)?;
        }
        let (c, r) = self.bounding_ball()?;
        let far = x0
            .iter()
            .zip(&c)
            .map(|(a, b)| (a.to_f64_lossy() - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let bound = if lambda < 1.0 {
            lambda.powi(depth as i32) * (far + r)
        } else {
            f64::INFINITY
        };
        Ok((x, bound))
    }

    /// A ball `B(c, R)` with `f_i(B) ⊆ B` for every affine map, so it contains the
    /// attractor. `c` is the centroid of the fixed points.
    pub fn bounding_ball(&self) -> Result<(Vec<f64>, f64)> {
        let lambda = self.estimate_contraction();
        if lambda >= 1.0 {
            return Err(Error::NotContractive { factor: lambda });
        }
        let f = self.to_f64();
        let dim = self.dim();
        let mut c = vec![0.0; dim];
        let fixed: Vec<Vec<f64>> = f.maps.iter().map(fixed_point).collect::<Result<_>>()?;
        for p in &fixed {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += pi / fixed.len() as f64;
            }
        }
        let mut r: f64 = 0.0;
        for m in &f.maps {
            let y = m.apply(&c)?;
            let d = y
                .iter()
                .zip(&c)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            r = r.max(d / (1.0 - lambda));
        }
        Ok((c, r))
    }

    pub fn plane_maps(&self) -> Result<Vec<PlaneMap>> {
        self.maps.iter().map(PlaneMap::from_spec).collect()
    }

    pub fn plane_inverses(&self) -> Result<Vec<PlaneMap>> {
        self.inverses.iter().map(PlaneMap::from_spec).collect()
    }
}

fn map_contraction<S: Scalar>(m: &MapSpec<S>, window: (f64, f64)) -> f64 {
    match m {
        MapSpec::Affine { linear, .. } => linear.to_f64().spectral_norm(),
        MapSpec::Projective { .. } => {
            let m = m.to_f64();
            let dim = m.dim();
            let steps = 16;
            let h = 1e-6;
            let mut worst: f64 = 0.0;
            let total = (steps + 1usize).pow(dim as u32);
            for idx in 0..total {
                let mut k = idx;
                let x: Vec<f64> = (0..dim)
                    .map(|_| {
                        let t = (k % (steps + 1)) as f64 / steps as f64;
                        k /= steps + 1;
                        window.0 + t * (window.1 - window.0)
                    })
                    .collect();
                let Ok(y) = m.apply(&x) else {
                    return f64::INFINITY;
                };
                let mut jac = crate::linalg::Matrix::zeros(dim, dim);
                for j in 0..dim {
                    let mut xp = x.clone();
                    xp[j] += h;
                    let Ok(yp) = m.apply(&xp) else {
                        return f64::INFINITY;
                    };
                    for i in 0..dim {
                        jac[(i, j)] = (yp[i] - y[i]) / h;
                    }
                }
                worst = worst.max(jac.spectral_norm());
            }
            worst
        }
    }
}

/// Fixed point of a contractive affine map, or a projective map's fixed point
/// found by iteration.
fn fixed_point(m: &MapSpec<f64>) -> Result<Vec<f64>> {
    match m {
        MapSpec::Affine { linear, offset } => {
            let n = linear.rows();
            let mut a = crate::linalg::Matrix::identity(n);
            for i in 0..n {
                for j in 0..n {
                    a[(i, j)] -= linear[(i, j)];
                }
            }
            let inv = a.inverse().ok_or(Error::NotContractive { factor: 1.0 })?;
            Ok(inv.mul_vec(offset))
        }
        MapSpec::Projective { .. } => {
            let mut x = vec![0.5; m.dim()];
            for _ in 0..2000 {
                x = m.apply(&x)?;
            }
            Ok(x)
        }
    }
}
