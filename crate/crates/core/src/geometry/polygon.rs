use crate::error::{Error, Result};

/// Convex polygon in the plane with counterclockwise vertices and the origin
/// inside or on the boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon2D {
    vertices: Vec<[f64; 2]>,
    // Outward unit normal and offset of edge i (from vertex i to i+1).
    normals: Vec<[f64; 2]>,
    offsets: Vec<f64>,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

impl Polygon2D {
    pub fn new(vertices: Vec<[f64; 2]>) -> Result<Self> {
        let k = vertices.len();
        if k < 3 {
            return Err(Error::InvalidBody(format!("polygon needs at least 3 vertices, got {k}")));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidBody("polygon vertices must be finite".into()));
        }
        let scale = vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
        if scale == 0.0 {
            return Err(Error::InvalidBody("polygon is a single point".into()));
        }
        let tol = 1e-12 * scale;
        let area2: f64 = (0..k)
            .map(|i| {
                let (a, b) = (vertices[i], vertices[(i + 1) % k]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum();
        if area2 <= tol * scale {
            return Err(Error::InvalidBody("polygon vertices must be counterclockwise with positive area".into()));
        }
        let mut normals = Vec::with_capacity(k);
        let mut offsets = Vec::with_capacity(k);
        for i in 0..k {
            let (a, b, c) = (vertices[i], vertices[(i + 1) % k], vertices[(i + 2) % k]);
            if cross(a, b, c) < -tol * scale {
                return Err(Error::InvalidBody(format!("polygon is not convex at vertex {}", (i + 1) % k)));
            }
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = dx.hypot(dy);
            if len <= tol {
                return Err(Error::InvalidBody(format!("polygon has a repeated vertex at index {i}")));
            }
            let nrm = [dy / len, -dx / len];
            let off = dot(nrm, a);
            if off < -tol {
                return Err(Error::InvalidBody("polygon must contain the origin".into()));
            }
            normals.push(nrm);
            offsets.push(off.max(0.0));
        }
        // Convex turns at every vertex plus positive area still admit a
        // polygon that winds around twice; the edge directions must make a
        // single counterclockwise turn.
        let turning: f64 = (0..k)
            .map(|i| {
                let (n0, n1) = (normals[i], normals[(i + 1) % k]);
                (n0[0] * n1[1] - n0[1] * n1[0]).atan2(dot(n0, n1))
            })
            .sum();
        if (turning - std::f64::consts::TAU).abs() > 1e-6 {
            return Err(Error::InvalidBody("polygon boundary is self-intersecting".into()));
        }
        Ok(Self { vertices, normals, offsets })
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    /// Circular sector of radius `radius` with apex at the origin, centered
    /// on angle `center`, of half-opening `half_width`, whose arc is
    /// approximated by `arc_vertices` points. Convex for `half_width ≤ π/2`.
    pub fn sector(center: f64, half_width: f64, radius: f64, arc_vertices: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidBody(format!("sector half-width must lie in (0, pi/2], got {half_width}")));
        }
        if arc_vertices < 2 {
            return Err(Error::InvalidBody("sector needs at least 2 arc vertices".into()));
        }
        let mut v = vec![[0.0, 0.0]];
        for i in 0..arc_vertices {
            let t = center - half_width + 2.0 * half_width * i as f64 / (arc_vertices - 1) as f64;
            v.push([radius * t.cos(), radius * t.sin()]);
        }
        Self::new(v)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Outward unit edge normals with their offsets: the polygon is
    /// `{x : nᵢ·x ≤ cᵢ}`.
    pub fn halfplanes(&self) -> impl Iterator<Item = ([f64; 2], f64)> + '_ {
        self.normals.iter().copied().zip(self.offsets.iter().copied())
    }

    pub fn support(&self, u: [f64; 2]) -> f64 {
        self.vertices.iter().map(|v| dot(*v, u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        let k = self.vertices.len();
        0.5 * (0..k)
            .map(|i| {
                let (a, b) = (self.vertices[i], self.vertices[(i + 1) % k]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
    }

    pub fn radial(&self, theta: [f64; 2]) -> f64 {
        self.halfplanes()
            .filter_map(|(n, c)| {
                let d = dot(n, theta);
                (d > 0.0).then(|| c / d)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        let tol = 1e-12 * self.circumradius();
        self.halfplanes().all(|(n, c)| dot(n, x) <= c + tol)
    }

    /// Nearest point of the polygon to `x`.
    pub fn project(&self, x: [f64; 2]) -> [f64; 2] {
        if self.halfplanes().all(|(n, c)| dot(n, x) <= c) {
            return x;
        }
        let k = self.vertices.len();
        let mut best = self.vertices[0];
        let mut best_d = f64::INFINITY;
        for i in 0..k {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % k]);
            let ab = [b[0] - a[0], b[1] - a[1]];
            let t = (dot([x[0] - a[0], x[1] - a[1]], ab) / dot(ab, ab)).clamp(0.0, 1.0);
            let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
            let d = (x[0] - q[0]).hypot(x[1] - q[1]);
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        best
    }

    /// Polar angles of the vertices, in `[0, 2π)`.
    pub fn vertex_angles(&self) -> Vec<f64> {
        self.vertices
            .iter()
            .filter(|v| v[0] != 0.0 || v[1] != 0.0)
            .map(|v| v[1].atan2(v[0]).rem_euclid(std::f64::consts::TAU))
            .collect()
    }

    /// Polygon rotated by `angle` about the origin.
    pub fn rotated(&self, angle: f64) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        Self::new(self.vertices.iter().map(|v| [c * v[0] - s * v[1], s * v[0] + c * v[1]]).collect())
    }

    fn scaled(&self, t: f64) -> Vec<[f64; 2]> {
        self.vertices.iter().map(|v| [t * v[0], t * v[1]]).collect()
    }
}

/// Index of the lowest vertex (smallest y, then smallest x).
fn bottom(v: &[[f64; 2]]) -> usize {
    (0..v.len()).min_by(|&i, &j| v[i][1].total_cmp(&v[j][1]).then(v[i][0].total_cmp(&v[j][0]))).expect("nonempty")
}

/// Exact vertex list of `λP + (1−λ)Q` by merging the edge sequences of the
/// scaled polygons in order of polar angle.
pub fn polygon_minkowski(lambda: f64, p: &Polygon2D, q: &Polygon2D) -> Result<Polygon2D> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParams(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    if lambda == 1.0 {
        return Ok(p.clone());
    }
    if lambda == 0.0 {
        return Ok(q.clone());
    }
    let a = p.scaled(lambda);
    let b = q.scaled(1.0 - lambda);
    let (ia, ib) = (bottom(&a), bottom(&b));
    let (na, nb) = (a.len(), b.len());
    let edge = |v: &[[f64; 2]], start: usize, i: usize| {
        let n = v.len();
        let (s, t) = (v[(start + i) % n], v[(start + i + 1) % n]);
        [t[0] - s[0], t[1] - s[1]]
    };
    let mut out = Vec::with_capacity(na + nb);
    let mut cur = [a[ia][0] + b[ib][0], a[ia][1] + b[ib][1]];
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        out.push(cur);
        let step = if i == na {
            let e = edge(&b, ib, j);
            j += 1;
            e
        } else if j == nb {
            let e = edge(&a, ia, i);
            i += 1;
            e
        } else {
            let (ea, eb) = (edge(&a, ia, i), edge(&b, ib, j));
            let c = ea[0] * eb[1] - ea[1] * eb[0];
            if c > 0.0 {
                i += 1;
                ea
            } else if c < 0.0 {
                j += 1;
                eb
            } else {
                i += 1;
                j += 1;
                [ea[0] + eb[0], ea[1] + eb[1]]
            }
        };
        cur = [cur[0] + step[0], cur[1] + step[1]];
    }
    let scale = lambda * p.circumradius() + (1.0 - lambda) * q.circumradius();
    Polygon2D::new(simplify(out, 1e-12 * scale))
}

/// Drops repeated vertices and vertices lying on the segment between their
/// neighbours, within `tol`.
fn simplify(mut v: Vec<[f64; 2]>, tol: f64) -> Vec<[f64; 2]> {
    loop {
        let k = v.len();
        if k <= 3 {
            return v;
        }
        let drop = (0..k).find(|&i| {
            let (a, b, c) = (v[(i + k - 1) % k], v[i], v[(i + 1) % k]);
            let ac = (c[0] - a[0]).hypot(c[1] - a[1]);
            let dup = (b[0] - a[0]).hypot(b[1] - a[1]) <= tol;
            dup || cross(a, b, c).abs() <= tol * ac.max(tol)
        });
        match drop {
            Some(i) => {
                v.remove(i);
            }
            None => return v,
        }
    }
}
