use crate::error::{Error, Result};

use super::polygon::Polygon2D;

const DYKSTRA_MAX_SWEEPS: usize = 100_000;

/// `{x : aᵢ·x ≤ bᵢ}` with every `bᵢ ≥ 0`. Rows are stored with unit normals.
/// Unbounded polyhedra are allowed; their radial function takes the value ∞.
#[derive(Debug, Clone, PartialEq)]
pub struct HPolytope {
    normals: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    dim: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

impl HPolytope {
    pub fn new(rows: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let Some(dim) = rows.first().map(|r| r.0.len()) else {
            return Err(Error::InvalidBody("polytope needs at least one row".into()));
        };
        if dim == 0 {
            return Err(Error::InvalidBody("polytope rows must have at least one coordinate".into()));
        }
        let mut normals = Vec::with_capacity(rows.len());
        let mut offsets = Vec::with_capacity(rows.len());
        for (i, (a, b)) in rows.into_iter().enumerate() {
            if a.len() != dim {
                return Err(Error::InvalidBody(format!("row {i} has {} coordinates, expected {dim}", a.len())));
            }
            if !b.is_finite() || a.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidBody(format!("row {i} has non-finite entries")));
            }
            if b < 0.0 {
                return Err(Error::InvalidBody(format!("row {i} has b = {b} < 0: origin excluded")));
            }
            let len = norm(&a);
            if len == 0.0 {
                return Err(Error::InvalidBody(format!("row {i} has a zero normal")));
            }
            normals.push(a.iter().map(|x| x / len).collect());
            offsets.push(b / len);
        }
        Ok(Self { normals, offsets, dim })
    }

    /// The cube `[−h, h]ⁿ`.
    pub fn cube(dim: usize, half_side: f64) -> Result<Self> {
        let mut rows = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut a = vec![0.0; dim];
                a[i] = s;
                rows.push((a, half_side));
            }
        }
        Self::new(rows)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.normals.iter().map(Vec::as_slice).zip(self.offsets.iter().copied())
    }

    pub fn radial(&self, theta: &[f64]) -> f64 {
        self.rows()
            .filter_map(|(a, b)| {
                let d = dot(a, theta);
                (d > 0.0).then(|| b / d)
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let tol = 1e-12 * norm(x).max(1.0);
        self.rows().all(|(a, b)| dot(a, x) <= b + tol)
    }

    /// Euclidean projection by Dykstra's alternating scheme over the
    /// halfspaces.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if self.rows().all(|(a, b)| dot(a, x) <= b) {
            return Ok(x.to_vec());
        }
        let m = self.normals.len();
        let scale = norm(x).max(self.offsets.iter().copied().fold(0.0, f64::max)).max(1.0);
        let mut y = x.to_vec();
        let mut corr = vec![vec![0.0; self.dim]; m];
        for _ in 0..DYKSTRA_MAX_SWEEPS {
            let mut change = 0.0f64;
            for (i, (a, b)) in self.normals.iter().zip(&self.offsets).enumerate() {
                let z: Vec<f64> = y.iter().zip(&corr[i]).map(|(y, c)| y + c).collect();
                let excess = (dot(a, &z) - b).max(0.0);
                let next: Vec<f64> = z.iter().zip(a).map(|(z, a)| z - excess * a).collect();
                for k in 0..self.dim {
                    corr[i][k] = z[k] - next[k];
                    change = change.max((next[k] - y[k]).abs());
                }
                y = next;
            }
            if change <= 1e-15 * scale {
                return Ok(y);
            }
        }
        Err(Error::NotConverged { what: "polytope projection", iterations: DYKSTRA_MAX_SWEEPS })
    }

    /// The same body as a vertex list, when it is a bounded polygon.
    pub fn to_polygon(&self) -> Option<Polygon2D> {
        if self.dim != 2 {
            return None;
        }
        let scale = self.offsets.iter().copied().fold(0.0, f64::max).max(1.0);
        let mut pts: Vec<[f64; 2]> = Vec::new();
        let m = self.normals.len();
        for i in 0..m {
            for j in i + 1..m {
                let (a, b) = (&self.normals[i], &self.normals[j]);
                let det = a[0] * b[1] - a[1] * b[0];
                if det.abs() < 1e-14 {
                    continue;
                }
                let (p, q) = (self.offsets[i], self.offsets[j]);
                let v = [(p * b[1] - q * a[1]) / det, (a[0] * q - b[0] * p) / det];
                let tol = 1e-10 * scale.max(v[0].hypot(v[1]));
                if self.rows().all(|(a, b)| dot(a, &v) <= b + tol) {
                    pts.push(v);
                }
            }
        }
        // Bounded iff consecutive normals (by angle) are less than π apart.
        let mut angles: Vec<f64> = self.normals.iter().map(|a| a[1].atan2(a[0])).collect();
        angles.sort_by(f64::total_cmp);
        let gaps = angles
            .windows(2)
            .map(|w| w[1] - w[0])
            .chain(std::iter::once(angles[0] + std::f64::consts::TAU - angles[angles.len() - 1]));
        if gaps.fold(0.0, f64::max) >= std::f64::consts::PI - 1e-12 {
            return None;
        }
        let c = pts.iter().fold([0.0, 0.0], |s, p| [s[0] + p[0], s[1] + p[1]]);
        let c = [c[0] / pts.len() as f64, c[1] / pts.len() as f64];
        pts.sort_by(|p, q| (p[1] - c[1]).atan2(p[0] - c[0]).total_cmp(&(q[1] - c[1]).atan2(q[0] - c[0])));
        pts.dedup_by(|p, q| (p[0] - q[0]).hypot(p[1] - q[1]) < 1e-12 * scale);
        while pts.len() > 1 {
            let (f, l) = (pts[0], pts[pts.len() - 1]);
            if (f[0] - l[0]).hypot(f[1] - l[1]) < 1e-12 * scale {
                pts.pop();
            } else {
                break;
            }
        }
        Polygon2D::new(pts).ok()
    }

    /// Directions in the plane where the radial function is not smooth:
    /// vertex directions and the zeros of `aᵢ·θ`.
    pub fn angular_breakpoints(&self) -> Vec<f64> {
        if self.dim != 2 {
            return Vec::new();
        }
        let mut out: Vec<f64> = self
            .normals
            .iter()
            .flat_map(|a| {
                let t = a[1].atan2(a[0]);
                [t + std::f64::consts::FRAC_PI_2, t - std::f64::consts::FRAC_PI_2]
            })
            .collect();
        if let Some(poly) = self.to_polygon() {
            out.extend(poly.vertex_angles());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_radial_and_homogeneity() {
        let sq = HPolytope::cube(2, 1.0).unwrap();
        let d = [std::f64::consts::FRAC_1_SQRT_2; 2];
        assert!((sq.radial(&d) - std::f64::consts::SQRT_2).abs() < 1e-15);
        let big = HPolytope::cube(2, 3.0).unwrap();
        assert!((big.radial(&d) - 3.0 * sq.radial(&d)).abs() < 1e-14);
    }

    #[test]
    fn halfplane_is_unbounded() {
        let h = HPolytope::new(vec![(vec![0.0, 1.0], 0.0)]).unwrap();
        assert_eq!(h.radial(&[0.0, -1.0]), f64::INFINITY);
        assert_eq!(h.radial(&[0.0, 1.0]), 0.0);
        assert!(h.to_polygon().is_none());
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(HPolytope::new(vec![]).is_err());
        assert!(HPolytope::new(vec![(vec![1.0, 0.0], -1.0)]).is_err());
        assert!(HPolytope::new(vec![(vec![0.0, 0.0], 1.0)]).is_err());
        assert!(HPolytope::new(vec![(vec![1.0, 0.0], 1.0), (vec![1.0], 1.0)]).is_err());
    }

    #[test]
    fn projection_onto_cube() {
        let c = HPolytope::cube(3, 1.0).unwrap();
        let p = c.project(&[3.0, 0.5, -2.0]).unwrap();
        for (got, want) in p.iter().zip([1.0, 0.5, -1.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn polygon_conversion() {
        let sq = HPolytope::cube(2, 2.0).unwrap().to_polygon().unwrap();
        assert_eq!(sq.len(), 4);
        assert!((sq.area() - 16.0).abs() < 1e-12);
    }
}
