//! Numerical checks of Brunn-Minkowski type inequalities
//! `μ(λK + (1−λ)L)^α ≥ λμ(K)^α + (1−λ)μ(L)^α` for `μ = μ_p`: deficits with
//! error bars, per-pair exponent search, the cone counterexample search,
//! and the one-dimensional ratios behind the lower bound.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{lower_bound, BoundParams};
use crate::error::{Error, Result};
use crate::geometry::{combine, Body, Direction, Polygon2D, TruncatedCone};
use crate::measure::{ball_complement_measure, cone_measure, mu, MeasureValue, QuadratureSpec};
use crate::quad::{integrate_with_breaks, QuadConfig};

/// Margin, in units of the propagated error, a negative deficit needs
/// before it counts as a violation.
pub const VIOLATION_MARGIN: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DeficitReport {
    pub lambda: f64,
    pub alpha_exponent: f64,
    pub deficit: f64,
    pub numeric_error: f64,
    pub bodies: (Body, Body),
    /// `μ(K)`, `μ(L)` and `μ(λK + (1−λ)L)`.
    pub measures: [MeasureValue; 3],
}

impl DeficitReport {
    pub const CSV_HEADER: &'static str = "lambda,alpha,deficit,error,mu_k,mu_l,mu_combination,k,l";

    pub fn is_violation(&self) -> bool {
        self.deficit < -VIOLATION_MARGIN * self.numeric_error
    }

    pub fn csv_row(&self) -> String {
        let [k, l, c] = &self.measures;
        format!(
            "{},{},{:e},{:e},{},{},{},{},{}",
            self.lambda,
            self.alpha_exponent,
            self.deficit,
            self.numeric_error,
            k.value,
            l.value,
            c.value,
            self.bodies.0,
            self.bodies.1
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleWitness {
    pub alpha: f64,
    pub eps: f64,
    pub radius: f64,
    pub lambda: f64,
    pub q: f64,
    pub deficit: f64,
    pub error: f64,
}

impl CounterexampleWitness {
    pub const CSV_HEADER: &'static str = "alpha,eps,R,lambda,q,deficit,error";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:e},{:e}",
            self.alpha, self.eps, self.radius, self.lambda, self.q, self.deficit, self.error
        )
    }
}

/// `μ_p(K)`, taking cones through the one-dimensional kernel quadrature
/// (exact in every dimension) and everything else through [`mu`].
pub fn body_measure(body: &Body, params: BoundParams, spec: &QuadratureSpec) -> Result<MeasureValue> {
    match body {
        Body::Cone(c) => cone_measure(c, params, spec.radial_tol),
        _ => mu(body, params, spec),
    }
}

/// Measure of `λK + (1−λ)L`. Cone pairs collapse to a single cone that,
/// for finite `R`, contains the sum and agrees with it inside a slightly
/// smaller ball; the mass of the missing shell is added to the error.
pub fn combination_measure(
    lambda: f64,
    k: &Body,
    l: &Body,
    params: BoundParams,
    spec: &QuadratureSpec,
) -> Result<MeasureValue> {
    let sum = combine(lambda, k, l)?;
    let mut m = body_measure(&sum, params, spec)?;
    if let (Body::Cone(a), Body::Cone(b), Body::Cone(s)) = (k, l, &sum) {
        if s.radius().is_finite() && a.eps() != b.eps() && lambda > 0.0 && lambda < 1.0 {
            let spread = (a.eps() - s.eps()).abs().max((b.eps() - s.eps()).abs());
            m.abs_error += ball_complement_measure(params.n(), params.p(), s.radius() - spread)?;
        }
    }
    Ok(m)
}

/// Error of `μ^α` given `μ ± e`, by secants on both sides (first order in
/// `e` away from zero, still finite when `e` is comparable to `μ`).
fn power_error(m: &MeasureValue, alpha: f64) -> f64 {
    let v = m.value.max(0.0);
    let up = (v + m.abs_error).powf(alpha) - v.powf(alpha);
    let down = v.powf(alpha) - (v - m.abs_error).max(0.0).powf(alpha);
    up.max(down)
}

fn deficit_at(lambda: f64, alpha: f64, m: &[MeasureValue; 3]) -> (f64, f64) {
    let [k, l, c] = m;
    let deficit = c.value.max(0.0).powf(alpha)
        - lambda * k.value.max(0.0).powf(alpha)
        - (1.0 - lambda) * l.value.max(0.0).powf(alpha);
    let error = power_error(c, alpha) + lambda * power_error(k, alpha) + (1.0 - lambda) * power_error(l, alpha);
    (deficit, error)
}

fn measure_triple(
    k: &Body,
    l: &Body,
    lambda: f64,
    params: BoundParams,
    spec: &QuadratureSpec,
) -> Result<[MeasureValue; 3]> {
    let mk = body_measure(k, params, spec)?;
    let ml = body_measure(l, params, spec)?;
    let mc = if lambda == 1.0 {
        mk
    } else if lambda == 0.0 {
        ml
    } else {
        combination_measure(lambda, k, l, params, spec)?
    };
    Ok([mk, ml, mc])
}

pub fn bm_deficit(
    k: &Body,
    l: &Body,
    lambda: f64,
    alpha_exp: f64,
    params: BoundParams,
    spec: &QuadratureSpec,
) -> Result<DeficitReport> {
    if !(alpha_exp > 0.0) {
        return Err(Error::InvalidParams(format!("exponent must be positive, got {alpha_exp}")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParams(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let measures = measure_triple(k, l, lambda, params, spec)?;
    let (deficit, numeric_error) = deficit_at(lambda, alpha_exp, &measures);
    Ok(DeficitReport {
        lambda,
        alpha_exponent: alpha_exp,
        deficit,
        numeric_error,
        bodies: (k.clone(), l.clone()),
        measures,
    })
}

/// Largest `α ∈ (0, 1]` for which every `λ` in the grid gives a deficit of
/// at least minus its error, located by bisection to `1e−4`.
pub fn empirical_max_alpha(
    k: &Body,
    l: &Body,
    lambda_grid: &[f64],
    params: BoundParams,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !lambda_grid.iter().any(|&t| t > 0.0 && t < 1.0) {
        return Err(Error::InvalidParams("lambda grid needs a value strictly inside (0, 1)".into()));
    }
    let triples: Vec<(f64, [MeasureValue; 3])> =
        lambda_grid.iter().map(|&t| Ok((t, measure_triple(k, l, t, params, spec)?))).collect::<Result<_>>()?;
    let holds = |alpha: f64| {
        triples.iter().all(|(t, m)| {
            let (d, e) = deficit_at(*t, alpha, m);
            d >= -e
        })
    };
    if holds(1.0) {
        return Ok(1.0);
    }
    let floor = 1e-6;
    if !holds(floor) {
        return Err(Error::InvalidParams(format!("deficit is negative already at alpha = {floor}")));
    }
    let (mut lo, mut hi) = (floor, 1.0);
    while hi - lo > 1e-4 {
        let mid = 0.5 * (lo + hi);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CounterexampleGrid {
    pub alphas: Vec<f64>,
    pub eps: Vec<f64>,
    pub radius: f64,
}

impl Default for CounterexampleGrid {
    fn default() -> Self {
        Self { alphas: vec![1.40, 1.45, 1.50, 1.52, 1.55], eps: vec![0.05, 0.1, 0.2], radius: 30.0 }
    }
}

fn cone_pair_deficit(params: BoundParams, q: f64, alpha: f64, eps: f64, radius: f64, tol: f64) -> Result<(f64, f64)> {
    let a = Body::Cone(TruncatedCone::new(alpha, 0.0, radius)?);
    let b = Body::Cone(TruncatedCone::new(alpha, eps, radius)?);
    let spec = QuadratureSpec::for_dim(params.n()).with_tol(tol);
    let r = bm_deficit(&a, &b, 0.5, q, params, &spec)?;
    Ok((r.deficit, r.numeric_error))
}

/// Scans `(α, ε)` at `λ = ½` for truncated cones `A = C_α ∩ B(R)` and
/// `B = (C_α − εeₙ) ∩ B(R)` violating the inequality with exponent `q`.
/// Returns the first violating grid point in row-major order, after
/// recomputing it at a tighter tolerance.
pub fn counterexample_search(
    params: BoundParams,
    q: f64,
    grid: &CounterexampleGrid,
) -> Result<Option<CounterexampleWitness>> {
    if !(q > 0.0) {
        return Err(Error::InvalidParams(format!("exponent must be positive, got {q}")));
    }
    let tuples: Vec<(f64, f64)> = grid.alphas.iter().flat_map(|&a| grid.eps.iter().map(move |&e| (a, e))).collect();
    let scanned: Vec<Result<(f64, f64)>> =
        tuples.par_iter().map(|&(a, e)| cone_pair_deficit(params, q, a, e, grid.radius, 1e-11)).collect();
    for (&(alpha, eps), r) in tuples.iter().zip(scanned) {
        let (d, err) = r?;
        if d < -VIOLATION_MARGIN * err {
            let (deficit, error) = cone_pair_deficit(params, q, alpha, eps, grid.radius, 1e-13)?;
            if deficit < -VIOLATION_MARGIN * error {
                return Ok(Some(CounterexampleWitness {
                    alpha,
                    eps,
                    radius: grid.radius,
                    lambda: 0.5,
                    q,
                    deficit,
                    error,
                }));
            }
        }
    }
    Ok(None)
}

/// Convex polygon with 4 to 12 candidate vertices at sorted random angles
/// and radii in `[0.2, 3]`, with no angular gap of `π` or more so that the
/// origin is interior.
pub fn random_polygon<R: Rng>(rng: &mut R) -> Polygon2D {
    loop {
        let k = rng.random_range(4..=12);
        let mut angles: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        angles.sort_by(f64::total_cmp);
        let max_gap = angles
            .windows(2)
            .map(|w| w[1] - w[0])
            .chain(std::iter::once(angles[0] + 2.0 * PI - angles[k - 1]))
            .fold(0.0, f64::max);
        if max_gap >= 0.95 * PI {
            continue;
        }
        let points: Vec<[f64; 2]> = angles
            .iter()
            .map(|&t| {
                let r = rng.random_range(0.2..=3.0);
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        if let Ok(p) = Polygon2D::new(convex_hull(points)) {
            return p;
        }
    }
}

/// Seeded corpus of polygon pairs.
pub fn random_polygon_pairs(seed: u64, count: usize) -> Vec<(Polygon2D, Polygon2D)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (random_polygon(&mut rng), random_polygon(&mut rng))).collect()
}

/// Counter-clockwise hull by the monotone chain, without collinear points.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

/// The radial potential `V(x) = scale·|x|^p`. For it,
/// `⟨(∇²V)^{−1}∇V, ∇V⟩ = p V/(p−1)`, so the weight in the lower bound is
/// `F(x) = n / (n + p V(x)/(p−1))`, decreasing along rays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomogeneousPotential {
    pub p: f64,
    pub scale: f64,
}

impl HomogeneousPotential {
    /// `V(x) = |x|^p / p`, the potential of `μ_p`.
    pub fn standard(p: f64) -> Self {
        Self { p, scale: 1.0 / p }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.scale * r.powf(self.p)
    }

    pub fn weight(&self, n: usize, r: f64) -> f64 {
        let nf = n as f64;
        nf / (nf + self.p * self.value(r) / (self.p - 1.0))
    }

    /// Radius beyond which `e^{−V}` is below `e^{−750}`.
    fn cutoff(&self) -> f64 {
        (750.0 / self.scale).powf(1.0 / self.p)
    }

    fn breaks(&self, upper: f64) -> Vec<f64> {
        let r0 = self.scale.powf(-1.0 / self.p);
        let mut out = vec![0.0];
        let mut r = r0 / 8.0;
        while r < upper {
            out.push(r);
            r *= 2.0;
        }
        out.push(upper);
        out
    }

    fn check(&self) -> Result<()> {
        if !(self.p > 1.0) || !(self.scale > 0.0) {
            return Err(Error::InvalidParams(format!(
                "potential needs p > 1 and a positive scale, got p = {}, scale = {}",
                self.p, self.scale
            )));
        }
        Ok(())
    }

    /// `(∫₀^t F r^{n−1}e^{−V} dr, ∫₀^t r^{n−1}e^{−V} dr)`.
    fn radial_pair(&self, n: usize, t: f64) -> Result<(f64, f64)> {
        let upper = t.min(self.cutoff());
        let breaks = self.breaks(upper);
        let cfg = QuadConfig::new(0.0, 1e-13);
        let w = |r: f64| r.powi(n as i32 - 1) * (-self.value(r)).exp();
        let num = integrate_with_breaks(|r| self.weight(n, r) * w(r), &breaks, &cfg)?.value;
        let den = integrate_with_breaks(w, &breaks, &cfg)?.value;
        Ok((num, den))
    }
}

/// `g_θ(t) = ∫₀^t F(rθ) r^{n−1}e^{−V(rθ)} dr / ∫₀^t r^{n−1}e^{−V(rθ)} dr` at
/// each `t` of an increasing grid.
pub fn g_theta_profile(
    potential: HomogeneousPotential,
    theta: &Direction,
    params: BoundParams,
    t_grid: &[f64],
) -> Result<Vec<f64>> {
    potential.check()?;
    if theta.dim() != params.n() {
        return Err(Error::DimensionMismatch { body: theta.dim(), expected: params.n() });
    }
    if t_grid.first().is_some_and(|&t| !(t > 0.0)) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParams("t grid must be positive and increasing".into()));
    }
    // The potential is radial, so the ray direction only fixes the dimension.
    t_grid
        .par_iter()
        .map(|&t| {
            let (num, den) = potential.radial_pair(params.n(), t)?;
            Ok(num / den)
        })
        .collect()
}

/// The ray ratio over the whole ray for `V = t|x|^p`, with
/// `F = n/(n + p t r^p/(p−1))`.
pub fn homogeneous_g(params: BoundParams, t: f64) -> Result<f64> {
    let pot = HomogeneousPotential { p: params.p(), scale: t };
    pot.check()?;
    let (num, den) = pot.radial_pair(params.n(), f64::INFINITY)?;
    Ok(num / den)
}

/// Largest `|g(tᵢ)/g(tⱼ) − 1|` over the given scales.
pub fn homogeneous_g_constancy(params: BoundParams, t_values: &[f64]) -> Result<f64> {
    if t_values.len() < 2 || t_values.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParams("need at least two positive scales".into()));
    }
    let g: Vec<f64> = t_values.iter().map(|&t| homogeneous_g(params, t)).collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for a in &g {
        for b in &g {
            worst = worst.max((a / b - 1.0).abs());
        }
    }
    Ok(worst)
}

/// `α_low − (p−1)/(pn)`.
pub fn jensen_gap(params: BoundParams) -> Result<f64> {
    if !(params.p() > 1.0) {
        return Err(Error::InvalidParams(format!("Jensen gap needs p > 1, got {}", params.p())));
    }
    Ok(lower_bound(params)? - (params.p() - 1.0) / (params.p() * params.nf()))
}

/// `(1/μ(K)) ∫_K F dμ` for the planar wedge
/// `K = {rθ : 0 ≤ r ≤ R, |θ − θ₀| ≤ δ}` (chordal distance on the circle),
/// its arc replaced by a polygon through `arc_vertices` points.
pub fn wedge_average(
    potential: HomogeneousPotential,
    center: f64,
    delta: f64,
    radius: f64,
    arc_vertices: usize,
) -> Result<f64> {
    potential.check()?;
    if !(delta > 0.0 && delta <= PI / 8.0) {
        return Err(Error::InvalidParams(format!("wedge size must lie in (0, pi/8], got {delta}")));
    }
    let half = 2.0 * (delta / 2.0).asin();
    let wedge = Body::Polygon(Polygon2D::sector(center, half, radius, arc_vertices)?);
    let mut breaks: Vec<f64> = wedge.angular_breakpoints();
    breaks.retain(|t| (t - center).abs() < half);
    breaks.extend([center - half, center + half]);
    breaks.sort_by(f64::total_cmp);
    let failure = std::cell::RefCell::new(None);
    let ray = |t: f64, part: usize| {
        let pair = wedge.radial(&Direction::from_angle(t)).and_then(|rho| potential.radial_pair(2, rho));
        match pair {
            Ok((num, den)) => [num, den][part],
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let cfg = QuadConfig::new(0.0, 1e-12);
    let num = integrate_with_breaks(|t| ray(t, 0), &breaks, &cfg);
    let den = integrate_with_breaks(|t| ray(t, 1), &breaks, &cfg);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(num?.value / den?.value)
}
