//! Convex bodies containing the origin: radial functions, membership,
//! nearest-point projections and Minkowski combinations.

mod cone;
mod hpolytope;
mod polygon;
pub mod schema;

use std::fmt;

pub use cone::TruncatedCone;
pub use hpolytope::HPolytope;
pub use polygon::{polygon_minkowski, Polygon2D};

use crate::error::{Error, Result};

const BISECTION_MAX_ITER: usize = 200;
const ALTERNATING_MAX_ITER: usize = 100_000;

/// Unit vector in ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Checks that `coords` has unit length within 1e−12.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let len = norm(&coords);
        if coords.is_empty() || !((len - 1.0).abs() <= 1e-12) {
            return Err(Error::InvalidParams(format!("direction must be a unit vector, |v| = {len}")));
        }
        Ok(Self(coords))
    }

    /// Rescales a nonzero finite vector to unit length.
    pub fn normalize(v: &[f64]) -> Result<Self> {
        let len = norm(v);
        if !(len > 0.0) || !len.is_finite() {
            return Err(Error::InvalidParams("cannot normalize a zero or non-finite vector".into()));
        }
        Ok(Self(v.iter().map(|x| x / len).collect()))
    }

    pub fn from_angle(theta: f64) -> Self {
        Self(vec![theta.cos(), theta.sin()])
    }

    /// Standard basis vector `eᵢ` of ℝⁿ.
    pub fn axis(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Euclidean ball centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    radius: f64,
}

impl Ball {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidBody(format!("ball radius must be positive, got {radius}")));
        }
        Ok(Self { radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Lazy Minkowski combination `λK + (1−λ)L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    lambda: f64,
    left: Body,
    right: Body,
}

impl Combination {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn left(&self) -> &Body {
        &self.left
    }

    pub fn right(&self) -> &Body {
        &self.right
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Body {
    Ball(Ball),
    HPolytope(HPolytope),
    Polygon(Polygon2D),
    Cone(TruncatedCone),
    Combination(Box<Combination>),
}

impl Body {
    pub fn ball(radius: f64) -> Result<Self> {
        Ball::new(radius).map(Body::Ball)
    }

    pub fn hpolytope(rows: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        HPolytope::new(rows).map(Body::HPolytope)
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        Polygon2D::new(vertices).map(Body::Polygon)
    }

    pub fn cone(alpha: f64, eps: f64, radius: f64) -> Result<Self> {
        TruncatedCone::new(alpha, eps, radius).map(Body::Cone)
    }

    /// Ambient dimension, or `None` for bodies defined in every dimension.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Body::Ball(_) | Body::Cone(_) => None,
            Body::HPolytope(h) => Some(h.dim()),
            Body::Polygon(_) => Some(2),
            Body::Combination(c) => c.left.dim().or(c.right.dim()),
        }
    }

    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self.dim() {
            Some(d) if d != n => Err(Error::DimensionMismatch { body: d, expected: n }),
            _ if n < 2 && matches!(self, Body::Cone(_)) => Err(Error::DimensionMismatch { body: 2, expected: n }),
            _ => Ok(()),
        }
    }

    /// `ρ(θ) = sup{t ≥ 0 : tθ ∈ K}`, possibly `+∞`.
    pub fn radial(&self, theta: &Direction) -> Result<f64> {
        self.check_dim(theta.dim())?;
        let t = theta.coords();
        Ok(match self {
            Body::Ball(b) => b.radius,
            Body::HPolytope(h) => h.radial(t),
            Body::Polygon(p) => p.radial([t[0], t[1]]),
            Body::Cone(c) => c.radial(t),
            Body::Combination(c) => return c.radial(theta),
        })
    }

    /// Whether `x` lies in the body (closed, with round-off slack ~1e−12).
    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        self.check_dim(x.len())?;
        Ok(match self {
            Body::Ball(b) => norm(x) <= b.radius * (1.0 + 1e-12),
            Body::HPolytope(h) => h.contains(x),
            Body::Polygon(p) => p.contains([x[0], x[1]]),
            Body::Cone(c) => c.contains(x),
            Body::Combination(c) => return c.contains(x),
        })
    }

    /// Largest norm of a point of the body, `None` if unbounded or not
    /// cheaply known.
    pub fn circumradius(&self) -> Option<f64> {
        match self {
            Body::Ball(b) => Some(b.radius),
            Body::HPolytope(h) => h.to_polygon().map(|p| p.circumradius()),
            Body::Polygon(p) => Some(p.circumradius()),
            Body::Cone(c) => c.radius().is_finite().then(|| c.radius()),
            Body::Combination(c) => {
                let (l, r) = (c.left.circumradius()?, c.right.circumradius()?);
                Some(c.lambda * l + (1.0 - c.lambda) * r)
            }
        }
    }

    /// Nearest point of the body to `x`.
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x.len())?;
        match self {
            Body::Ball(b) => {
                let len = norm(x);
                Ok(if len <= b.radius { x.to_vec() } else { x.iter().map(|v| v * b.radius / len).collect() })
            }
            Body::HPolytope(h) => h.project(x),
            Body::Polygon(p) => Ok(p.project([x[0], x[1]]).to_vec()),
            Body::Cone(c) => Ok(c.project(x)),
            Body::Combination(_) => Err(Error::UnsupportedCombination("projection onto a nested combination".into())),
        }
    }

    /// Planar directions (angles) where the radial function may fail to be
    /// smooth; used to place quadrature breakpoints in dimension 2.
    pub fn angular_breakpoints(&self) -> Vec<f64> {
        match self {
            Body::Ball(_) => Vec::new(),
            Body::HPolytope(h) => h.angular_breakpoints(),
            Body::Polygon(p) => p.vertex_angles(),
            Body::Cone(c) => c.angular_breakpoints(),
            Body::Combination(c) => {
                let mut v = c.left.angular_breakpoints();
                v.extend(c.right.angular_breakpoints());
                v
            }
        }
    }
}

impl fmt::Display for Body {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Body::Ball(b) => write!(f, "ball[r={}]", b.radius),
            Body::HPolytope(h) => write!(f, "hpolytope[{} rows in R^{}]", h.rows().count(), h.dim()),
            Body::Polygon(p) => write!(f, "polygon[{} vertices]", p.len()),
            Body::Cone(c) => write!(f, "cone[alpha={} eps={} R={}]", c.alpha(), c.eps(), c.radius()),
            Body::Combination(c) => write!(f, "({} {} + {} {})", c.lambda, c.left, 1.0 - c.lambda, c.right),
        }
    }
}

/// `λK + (1−λ)L`, simplified where the sum has a closed form:
/// `λ ∈ {0, 1}`, two balls, two bounded planar polyhedra, and two cones
/// sharing angle and truncation radius. For the cone pair the result is the cone with drop
/// `λε_K + (1−λ)ε_L`; with a finite radius `R` this body contains the true sum
/// and agrees with it inside `B(R − max|ε_K − ε_L|)`.
pub fn combine(lambda: f64, k: &Body, l: &Body) -> Result<Body> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParams(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    if let (Some(a), Some(b)) = (k.dim(), l.dim()) {
        if a != b {
            return Err(Error::DimensionMismatch { body: b, expected: a });
        }
    }
    if lambda == 1.0 {
        return Ok(k.clone());
    }
    if lambda == 0.0 {
        return Ok(l.clone());
    }
    Ok(match (k, l) {
        (Body::Ball(a), Body::Ball(b)) => Body::ball(lambda * a.radius + (1.0 - lambda) * b.radius)?,
        (Body::Cone(a), Body::Cone(b)) if a.alpha() == b.alpha() && a.radius() == b.radius() => {
            Body::cone(a.alpha(), lambda * a.eps() + (1.0 - lambda) * b.eps(), a.radius())?
        }
        _ => match (as_polygon(k), as_polygon(l)) {
            (Some(p), Some(q)) => Body::Polygon(polygon_minkowski(lambda, &p, &q)?),
            _ => lazy_combination(lambda, k, l),
        },
    })
}

/// Unsimplified `λK + (1−λ)L` node.
pub fn lazy_combination(lambda: f64, k: &Body, l: &Body) -> Body {
    Body::Combination(Box::new(Combination { lambda, left: k.clone(), right: l.clone() }))
}

impl Combination {
    fn radial(&self, theta: &Direction) -> Result<f64> {
        let lam = self.lambda;
        let rk = if lam > 0.0 { self.left.radial(theta)? } else { 0.0 };
        let rl = if lam < 1.0 { self.right.radial(theta)? } else { 0.0 };
        if rk.is_infinite() || rl.is_infinite() {
            return Ok(f64::INFINITY);
        }
        let lo = lam * rk + (1.0 - lam) * rl;
        let t = theta.coords();
        let at = |s: f64| -> Vec<f64> { t.iter().map(|v| v * s).collect() };
        let mut hi = match (self.left.circumradius(), self.right.circumradius()) {
            (Some(a), Some(b)) => lo + 2.0 * a + 2.0 * b,
            _ => {
                // Unbounded or unknown extent: expand geometrically.
                let mut h = (2.0 * lo).max(1.0);
                let mut doublings = 0;
                while self.contains(&at(h))? {
                    h *= 2.0;
                    doublings += 1;
                    if doublings > 60 {
                        return Err(Error::NotConverged { what: "radial bracket expansion", iterations: 60 });
                    }
                }
                h
            }
        };
        let mut lo = lo;
        if !self.contains(&at(lo))? || self.contains(&at(hi * (1.0 + 1e-9)))? {
            return Err(Error::NotConverged { what: "radial bracket", iterations: 0 });
        }
        let tol = 1e-10 * hi.max(1e-300);
        for _ in 0..BISECTION_MAX_ITER {
            if hi - lo <= tol {
                return Ok(0.5 * (lo + hi));
            }
            let mid = 0.5 * (lo + hi);
            if self.contains(&at(mid))? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::NotConverged { what: "radial bisection", iterations: BISECTION_MAX_ITER })
    }

    fn contains(&self, x: &[f64]) -> Result<bool> {
        let lam = self.lambda;
        if lam == 1.0 {
            return self.left.contains(x);
        }
        if lam == 0.0 {
            return self.right.contains(x);
        }
        let scale = norm(x).max(1.0);
        match (&self.left, &self.right) {
            (Body::Combination(_), _) | (_, Body::Combination(_)) => {
                Err(Error::UnsupportedCombination("nested combinations have no membership oracle".into()))
            }
            (k, Body::Ball(b)) => Ok(scaled_distance(k, lam, x)? <= (1.0 - lam) * b.radius() + 1e-12 * scale),
            (Body::Ball(b), l) => Ok(scaled_distance(l, 1.0 - lam, x)? <= lam * b.radius() + 1e-12 * scale),
            (k, l) if as_polygon(k).is_some() && as_polygon(l).is_some() => {
                let (p, q) = (as_polygon(k).expect("checked"), as_polygon(l).expect("checked"));
                Ok(polygon_sum_contains(lam, &p, &q, [x[0], x[1]]))
            }
            (k @ (Body::HPolytope(_) | Body::Polygon(_)), l @ (Body::HPolytope(_) | Body::Polygon(_))) => {
                alternating_feasible(lam, k, l, x)
            }
            (k, l) => Err(Error::UnsupportedCombination(format!("no membership oracle for {k} + {l}"))),
        }
    }
}

/// Bounded planar polyhedra as vertex lists.
fn as_polygon(b: &Body) -> Option<std::borrow::Cow<'_, Polygon2D>> {
    match b {
        Body::Polygon(p) => Some(std::borrow::Cow::Borrowed(p)),
        Body::HPolytope(h) => h.to_polygon().map(std::borrow::Cow::Owned),
        _ => None,
    }
}

/// `dist(x, tK)` for `t > 0`.
fn scaled_distance(k: &Body, t: f64, x: &[f64]) -> Result<f64> {
    let y: Vec<f64> = x.iter().map(|v| v / t).collect();
    let p = k.project(&y)?;
    Ok(t * y.iter().zip(&p).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
}

/// Membership in `λP + (1−λ)Q` from support functions: the sum is cut out
/// by the edge normals of both summands.
fn polygon_sum_contains(lambda: f64, p: &Polygon2D, q: &Polygon2D, x: [f64; 2]) -> bool {
    let scale = (lambda * p.circumradius() + (1.0 - lambda) * q.circumradius()).max(x[0].hypot(x[1]));
    p.halfplanes().chain(q.halfplanes()).all(|(u, _)| {
        u[0] * x[0] + u[1] * x[1] <= lambda * p.support(u) + (1.0 - lambda) * q.support(u) + 1e-12 * scale
    })
}

/// Decides whether `λK ∩ (x − (1−λ)L)` is nonempty for polyhedral `K`, `L`
/// by alternating projections: the iterates converge linearly to a point of
/// the intersection, or to a closest pair whose stalled positive gap
/// certifies emptiness.
fn alternating_feasible(lambda: f64, k: &Body, l: &Body, x: &[f64]) -> Result<bool> {
    let mu = 1.0 - lambda;
    let scale = norm(x).max(1.0);
    let tol = 1e-12 * scale;
    let proj_a = |y: &[f64]| -> Result<Vec<f64>> {
        let s: Vec<f64> = y.iter().map(|v| v / lambda).collect();
        Ok(k.project(&s)?.into_iter().map(|v| v * lambda).collect())
    };
    let proj_b = |y: &[f64]| -> Result<Vec<f64>> {
        let s: Vec<f64> = x.iter().zip(y).map(|(xv, yv)| (xv - yv) / mu).collect();
        Ok(l.project(&s)?.into_iter().zip(x).map(|(v, xv)| xv - mu * v).collect())
    };
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum::<f64>().sqrt();
    let mut a = proj_a(&x.iter().map(|v| v * lambda).collect::<Vec<_>>())?;
    let mut history = Vec::with_capacity(ALTERNATING_MAX_ITER);
    for it in 0..ALTERNATING_MAX_ITER {
        let b = proj_b(&a)?;
        let gap = dist(&a, &b);
        if gap <= tol {
            return Ok(true);
        }
        history.push(gap);
        // The gap sequence is nonincreasing; once it stalls above the
        // threshold the sets are separated by (about) that gap.
        if it >= 200 {
            let old = history[it - 100];
            if old - gap <= 1e-9 * gap {
                return Ok(false);
            }
        }
        a = proj_a(&b)?;
    }
    Err(Error::NotConverged { what: "alternating projections", iterations: ALTERNATING_MAX_ITER })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, PI, SQRT_2};

    fn square() -> Body {
        Body::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap()
    }

    #[test]
    fn ball_radial_and_combination() {
        let b2 = Body::ball(2.0).unwrap();
        assert_eq!(b2.radial(&Direction::from_angle(0.7)).unwrap(), 2.0);
        let (b1, b3) = (Body::ball(1.0).unwrap(), Body::ball(3.0).unwrap());
        for lam in [0.25, 0.5, 0.8] {
            assert_eq!(combine(lam, &b1, &b3).unwrap(), Body::ball(3.0 - 2.0 * lam).unwrap());
            let lazy = lazy_combination(lam, &b1, &b3);
            let r = lazy.radial(&Direction::from_angle(1.3)).unwrap();
            assert!((r - (lam + 3.0 * (1.0 - lam))).abs() < 1e-9);
            let edge = lam + 3.0 * (1.0 - lam) + 1e-6;
            assert!(!lazy.contains(&[edge, 0.0]).unwrap());
            assert!(lazy.contains(&[edge - 2e-6, 0.0]).unwrap());
        }
    }

    #[test]
    fn combine_endpoints_return_operands() {
        let (k, l) = (square(), Body::ball(1.0).unwrap());
        assert_eq!(combine(1.0, &k, &l).unwrap(), k);
        assert_eq!(combine(0.0, &k, &l).unwrap(), l);
        assert!(combine(1.5, &k, &l).is_err());
    }

    #[test]
    fn cone_pair_collapses() {
        let a = Body::cone(1.4, 0.0, f64::INFINITY).unwrap();
        let b = Body::cone(1.4, 0.1, f64::INFINITY).unwrap();
        match combine(0.5, &a, &b).unwrap() {
            Body::Cone(c) => assert!((c.eps() - 0.05).abs() < 1e-16),
            other => panic!("expected cone, got {other}"),
        }
    }

    #[test]
    fn square_radial_on_diagonal() {
        let sq = Body::hpolytope(vec![
            (vec![1.0, 0.0], 1.0),
            (vec![-1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 1.0),
            (vec![0.0, -1.0], 1.0),
        ])
        .unwrap();
        let r = sq.radial(&Direction::from_angle(FRAC_PI_4)).unwrap();
        assert!((r - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn origin_is_in_every_body() {
        let bodies = [
            Body::ball(0.5).unwrap(),
            square(),
            Body::cone(1.0, 0.0, 2.0).unwrap(),
            Body::hpolytope(vec![(vec![1.0, 2.0, 3.0], 0.0)]).unwrap(),
        ];
        for b in &bodies {
            let n = b.dim().unwrap_or(3);
            assert!(b.contains(&vec![0.0; n]).unwrap(), "{b}");
        }
    }

    #[test]
    fn dimension_checks() {
        let sq = square();
        assert!(matches!(sq.radial(&Direction::axis(3, 0)), Err(Error::DimensionMismatch { body: 2, expected: 3 })));
        let cube = Body::HPolytope(HPolytope::cube(3, 1.0).unwrap());
        assert!(combine(0.5, &sq, &cube).is_err());
        assert!(Direction::new(vec![1.0, 1.0]).is_err());
        assert!(Direction::normalize(&[0.0, 0.0]).is_err());
    }

    #[test]
    fn polygon_sum_by_bisection_matches_edge_merge() {
        let p = Polygon2D::new(vec![[-1.0, -0.5], [2.0, -0.3], [0.5, 1.5], [-1.2, 0.7]]).unwrap();
        let q = Polygon2D::rectangle(-0.3, 1.0, -2.0, 0.4).unwrap();
        let lam = 0.3;
        let exact = polygon_minkowski(lam, &p, &q).unwrap();
        let lazy = lazy_combination(lam, &Body::Polygon(p), &Body::Polygon(q));
        for i in 0..64 {
            let th = Direction::from_angle(2.0 * PI * i as f64 / 64.0);
            let a = exact.radial([th.coords()[0], th.coords()[1]]);
            let b = lazy.radial(&th).unwrap();
            assert!((a - b).abs() < 1e-8, "i={i}: {a} vs {b}");
        }
    }

    #[test]
    fn hpolytope_pair_membership_by_alternating_projections() {
        let k = Body::HPolytope(HPolytope::cube(3, 1.0).unwrap());
        let l = Body::hpolytope(vec![
            (vec![1.0, 1.0, 1.0], 1.0),
            (vec![-1.0, 0.0, 0.0], 0.5),
            (vec![0.0, -1.0, 0.0], 0.5),
            (vec![0.0, 0.0, -1.0], 0.5),
        ])
        .unwrap();
        let c = lazy_combination(0.5, &k, &l);
        // Along e₁: ρ_K = 1, ρ_L = 1 (from the first row), support of the sum
        // in direction e₁ is ½·1 + ½·2 = 1.5 and is attained on the axis.
        let r = c.radial(&Direction::axis(3, 0)).unwrap();
        assert!((r - 1.5).abs() < 1e-7, "{r}");
        assert!(!c.contains(&[1.6, 0.0, 0.0]).unwrap());
        assert!(c.contains(&[1.4, 0.0, 0.0]).unwrap());
    }

    #[test]
    fn radial_superadditivity() {
        let tri = Body::hpolytope(vec![(vec![1.0, 1.0], 1.0), (vec![-1.0, 0.2], 0.7), (vec![0.3, -1.0], 0.9)]).unwrap();
        let pairs = [
            (Body::cone(1.1, 0.4, 3.0).unwrap(), Body::ball(0.7).unwrap()),
            (tri.clone(), square()),
            (square(), Body::ball(1.5).unwrap()),
        ];
        for (k, l) in &pairs {
            let c = lazy_combination(0.4, k, l);
            for i in 0..32 {
                let th = Direction::from_angle(2.0 * PI * i as f64 / 32.0 + 0.01);
                let lhs = c.radial(&th).unwrap();
                let rhs = 0.4 * k.radial(&th).unwrap() + 0.6 * l.radial(&th).unwrap();
                assert!(lhs >= rhs - 1e-10, "{k} + {l}, i={i}");
            }
        }
    }

    #[test]
    fn unsupported_pairs_are_reported() {
        let c = lazy_combination(0.5, &Body::cone(1.0, 0.1, 2.0).unwrap(), &square());
        assert!(matches!(c.contains(&[0.1, 0.1]), Err(Error::UnsupportedCombination(_))));
        let nested = lazy_combination(0.5, &c, &square());
        assert!(matches!(nested.contains(&[0.0, 0.0]), Err(Error::UnsupportedCombination(_))));
    }
}
