use crate::error::{Error, Result};

/// `{x : xₙ ≥ |x'| tan α − ε} ∩ B(R)`, where `x'` holds the first `n − 1`
/// coordinates. Defined in every dimension `n ≥ 2`; `R` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedCone {
    alpha: f64,
    eps: f64,
    radius: f64,
}

impl TruncatedCone {
    pub fn new(alpha: f64, eps: f64, radius: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
            return Err(Error::InvalidBody(format!("cone angle must lie in (0, pi/2), got {alpha}")));
        }
        if !(eps >= 0.0) || !eps.is_finite() {
            return Err(Error::InvalidBody(format!("cone drop must be finite and >= 0, got {eps}")));
        }
        if !(radius > 0.0) {
            return Err(Error::InvalidBody(format!("truncation radius must be positive, got {radius}")));
        }
        Ok(Self { alpha, eps, radius })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn split(x: &[f64]) -> (f64, f64) {
        let (head, last) = x.split_at(x.len() - 1);
        (head.iter().map(|v| v * v).sum::<f64>().sqrt(), last[0])
    }

    pub fn radial(&self, theta: &[f64]) -> f64 {
        let (c, z) = Self::split(theta);
        let k = c * self.alpha.tan() - z;
        let cone = if k <= 0.0 { f64::INFINITY } else { self.eps / k };
        cone.min(self.radius)
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let (r, z) = Self::split(x);
        let scale = r.hypot(z).max(1.0);
        z >= r * self.alpha.tan() - self.eps - 1e-12 * scale
            && (self.radius.is_infinite() || r.hypot(z) <= self.radius * (1.0 + 1e-12))
    }

    /// Nearest point in the meridian half-plane `(r, z)`, `r ≥ 0`: the
    /// projection onto the cone if it lies in the ball, else the radial
    /// projection onto the ball if it lies in the cone, else the corner where
    /// both boundaries meet.
    fn project_meridian(&self, r: f64, z: f64) -> (f64, f64) {
        let (s, c) = self.alpha.sin_cos();
        let in_cone = |r: f64, z: f64| z >= r * self.alpha.tan() - self.eps;
        let (cr, cz) = if in_cone(r, z) {
            (r, z)
        } else {
            // Boundary ray from the apex (0, −ε) along (cos α, sin α).
            let t = (r * c + (z + self.eps) * s).max(0.0);
            (t * c, -self.eps + t * s)
        };
        if self.radius.is_infinite() || cr.hypot(cz) <= self.radius {
            return (cr, cz);
        }
        let f = self.radius / r.hypot(z);
        if in_cone(r * f, z * f) {
            return (r * f, z * f);
        }
        // Corner: |(0, −ε) + t(cos α, sin α)| = R.
        let t = self.eps * s + (self.radius * self.radius - self.eps * self.eps * c * c).sqrt();
        (t * c, -self.eps + t * s)
    }

    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let (r, z) = Self::split(x);
        let (pr, pz) = self.project_meridian(r, z);
        let n = x.len();
        let mut out = Vec::with_capacity(n);
        if r > 0.0 {
            out.extend(x[..n - 1].iter().map(|v| v * pr / r));
        } else {
            let mut head = vec![0.0; n - 1];
            head[0] = pr;
            out.extend(head);
        }
        out.push(pz);
        out
    }

    /// Planar (`n = 2`) directions where the radial function is not smooth.
    pub fn angular_breakpoints(&self) -> Vec<f64> {
        let a = self.alpha;
        let mut out = vec![a, std::f64::consts::PI - a];
        if self.radius.is_finite() && self.eps > 0.0 {
            let d = (self.eps * a.cos() / self.radius).min(1.0).asin();
            out.extend([a - d, std::f64::consts::PI - a + d]);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apex_ray_and_outside() {
        let c = TruncatedCone::new(1.0, 0.0, 5.0).unwrap();
        assert_eq!(c.radial(&[0.0, 0.0, 1.0]), 5.0);
        assert_eq!(c.radial(&[1.0, 0.0, 0.0]), 0.0);
        let inf = TruncatedCone::new(1.0, 0.0, f64::INFINITY).unwrap();
        assert_eq!(inf.radial(&[0.0, 1.0]), f64::INFINITY);
    }

    #[test]
    fn dropped_cone_radial_is_boundary_hit() {
        let c = TruncatedCone::new(0.7, 0.3, f64::INFINITY).unwrap();
        let th = [1.0, 0.0];
        let r = c.radial(&th);
        assert!((r - 0.3 / 0.7f64.tan()).abs() < 1e-15);
        assert!(c.contains(&[r * 0.999, 0.0]));
        assert!(!c.contains(&[r * 1.001, 0.0]));
    }

    #[test]
    fn projection_is_nearest() {
        let c = TruncatedCone::new(0.9, 0.2, 3.0).unwrap();
        let pts = [[2.0, -1.0], [0.0, -2.0], [4.0, 4.0], [0.1, 5.0], [-3.0, 0.0], [3.0, 2.5]];
        for x in pts {
            let p = c.project(&x);
            assert!(c.contains(&p));
            let d = (x[0] - p[0]).hypot(x[1] - p[1]);
            // brute force over a fine grid of boundary candidates
            for i in 0..2000 {
                for j in 0..60 {
                    let t = -std::f64::consts::PI + std::f64::consts::TAU * i as f64 / 2000.0;
                    let rad = 3.0 * j as f64 / 59.0;
                    let q = [rad * t.cos(), rad * t.sin()];
                    if c.contains(&q) {
                        assert!((x[0] - q[0]).hypot(x[1] - q[1]) >= d - 1e-9, "x={x:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn validation() {
        assert!(TruncatedCone::new(0.0, 0.1, 1.0).is_err());
        assert!(TruncatedCone::new(1.6, 0.1, 1.0).is_err());
        assert!(TruncatedCone::new(1.0, -0.1, 1.0).is_err());
        assert!(TruncatedCone::new(1.0, 0.1, 0.0).is_err());
    }
}
