//! Boxes and polygons in the plane.

use crate::map::PlaneMap;

/// Closed axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect {
            x0: x0.min(x1),
            y0: y0.min(y1),
            x1: x0.max(x1),
            y1: y0.max(y1),
        }
    }

    pub fn centered(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Rect::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    }

    pub fn unit() -> Self {
        Rect::new(0.0, 0.0, 1.0, 1.0)
    }

    pub fn empty() -> Self {
        Rect {
            x0: f64::INFINITY,
            y0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y1: f64::NEG_INFINITY,
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.x0 <= self.x1 && self.y0 <= self.y1)
    }

    pub fn of_points<'a>(pts: impl IntoIterator<Item = &'a [f64; 2]>) -> Self {
        pts.into_iter().fold(Rect::empty(), |r, p| r.include(*p))
    }

    pub fn include(&self, [x, y]: [f64; 2]) -> Self {
        Rect {
            x0: self.x0.min(x),
            y0: self.y0.min(y),
            x1: self.x1.max(x),
            y1: self.y1.max(y),
        }
    }

    pub fn union(&self, o: &Rect) -> Rect {
        Rect {
            x0: self.x0.min(o.x0),
            y0: self.y0.min(o.y0),
            x1: self.x1.max(o.x1),
            y1: self.y1.max(o.y1),
        }
    }

    pub fn intersect(&self, o: &Rect) -> Rect {
        Rect {
            x0: self.x0.max(o.x0),
            y0: self.y0.max(o.y0),
            x1: self.x1.min(o.x1),
            y1: self.y1.min(o.y1),
        }
    }

    pub fn intersects(&self, o: &Rect) -> bool {
        !self.intersect(o).is_empty()
    }

    pub fn expand(&self, m: f64) -> Rect {
        Rect {
            x0: self.x0 - m,
            y0: self.y0 - m,
            x1: self.x1 + m,
            y1: self.y1 + m,
        }
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn diameter(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn contains(&self, [x, y]: [f64; 2]) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    pub fn corners(&self) -> [[f64; 2]; 4] {
        [
            [self.x0, self.y0],
            [self.x1, self.y0],
            [self.x1, self.y1],
            [self.x0, self.y1],
        ]
    }

    /// Bounding box of the image of this box's corners. Exact for affine maps.
    pub fn map_bbox(&self, m: &PlaneMap) -> Option<Rect> {
        let mut r = Rect::empty();
        for c in self.corners() {
            r = r.include(m.apply(c)?);
        }
        Some(r)
    }

    /// Parses `"x0,y0,x1,y1"`.
    pub fn parse(s: &str) -> Option<Rect> {
        let v: Vec<f64> = s.split(',').map(|p| p.trim().parse().ok()).collect::<Option<_>>()?;
        (v.len() == 4).then(|| Rect::new(v[0], v[1], v[2], v[3]))
    }
}

/// Simple polygon given by its vertices in order.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
}

impl Polygon {
    pub fn new(vertices: Vec<[f64; 2]>) -> Self {
        Polygon { vertices }
    }

    pub fn rect(r: &Rect) -> Self {
        Polygon::new(r.corners().to_vec())
    }

    pub fn bbox(&self) -> Rect {
        Rect::of_points(&self.vertices)
    }

    pub fn area(&self) -> f64 {
        self.signed_area().abs()
    }

    pub fn signed_area(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| {
                let [x0, y0] = self.vertices[i];
                let [x1, y1] = self.vertices[(i + 1) % n];
                x0 * y1 - x1 * y0
            })
            .sum::<f64>()
            / 2.0
    }

    /// Even-odd rule. Points on the boundary may land either way; use
    /// [`boundary_distance`](Self::boundary_distance) for tolerant tests.
    pub fn contains(&self, [x, y]: [f64; 2]) -> bool {
        let n = self.vertices.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let [xi, yi] = self.vertices[i];
            let [xj, yj] = self.vertices[j];
            if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    pub fn boundary_distance(&self, p: [f64; 2]) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| segment_distance(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// The point itself if inside, otherwise the closest boundary point.
    pub fn nearest(&self, p: [f64; 2]) -> [f64; 2] {
        if self.contains(p) {
            return p;
        }
        let n = self.vertices.len();
        (0..n)
            .map(|i| segment_closest(p, self.vertices[i], self.vertices[(i + 1) % n]))
            .min_by(|a, b| {
                let da = (p[0] - a[0]).hypot(p[1] - a[1]);
                let db = (p[0] - b[0]).hypot(p[1] - b[1]);
                da.total_cmp(&db)
            })
            .unwrap_or(p)
    }

    /// Inside or within `tol` of the boundary.
    pub fn contains_tol(&self, p: [f64; 2], tol: f64) -> bool {
        self.contains(p) || self.boundary_distance(p) <= tol
    }

    /// Inside and farther than `margin` from the boundary.
    pub fn contains_interior(&self, p: [f64; 2], margin: f64) -> bool {
        self.contains(p) && self.boundary_distance(p) > margin
    }

    pub fn map(&self, m: &PlaneMap) -> Option<Polygon> {
        let vertices = self
            .vertices
            .iter()
            .map(|&v| m.apply(v))
            .collect::<Option<Vec<_>>>()?;
        Some(Polygon { vertices })
    }
}

fn segment_closest(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    };
    [a[0] + t * dx, a[1] + t * dy]
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let c = segment_closest(p, a, b);
    (p[0] - c[0]).hypot(p[1] - c[1])
}
