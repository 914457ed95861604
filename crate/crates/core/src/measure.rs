//! The measure `μ_p` with density proportional to `e^{−|x|^p/p}` on ℝⁿ,
//! evaluated on star-shaped bodies through polar coordinates:
//!
//! ```text
//! μ_p(K) = (1/|S^{n−1}|) ∫_{S^{n−1}} P(n/p, ρ_K(θ)^p / p) dθ
//! ```
//!
//! where `P` is the regularized lower incomplete gamma function, plus the
//! cone kernel `H(r, s) = ∫_s^∞ e^{−(r²+t²)^{p/2}/p} dt` and the coefficients
//! of the small-drop expansion of cone measures.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::bounds::BoundParams;
use crate::error::{Error, Result};
use crate::geometry::{Body, Direction, TruncatedCone};
use crate::quad::{gauss_legendre, integrate, integrate_with_breaks, neumaier_sum, QuadConfig};
use crate::specfun::{log_gamma_pos, lower_inc_gamma_regularized, upper_inc_gamma_regularized};

const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Conservative sum of quadrature remainder estimates.
    DeterministicQuadrature,
    /// Half-width of a 95% normal confidence interval.
    MonteCarlo95,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureValue {
    pub value: f64,
    pub abs_error: f64,
    pub kind: ErrorKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SphereRule {
    /// Adaptive Gauss-Kronrod in the polar angle, split at the directions
    /// where the radial function has kinks or jumps (n = 2).
    ExactAngle2d,
    /// Gauss-Legendre in the cosine of the polar angle times the trapezoid
    /// rule in azimuth (n = 3).
    ProductGauss3d,
    /// Isotropic directions from normalized Gaussian vectors.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub sphere_rule: SphereRule,
    pub radial_tol: f64,
    /// Gauss-Legendre node count for [`SphereRule::ProductGauss3d`] (the
    /// azimuth uses twice as many points).
    pub sphere_points: usize,
}

impl QuadratureSpec {
    /// The default rule for dimension `n`.
    pub fn for_dim(n: usize) -> Self {
        let sphere_rule = match n {
            2 => SphereRule::ExactAngle2d,
            3 => SphereRule::ProductGauss3d,
            _ => SphereRule::MonteCarlo { samples: 200_000, seed: 0 },
        };
        Self { sphere_rule, radial_tol: 1e-12, sphere_points: 96 }
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Self {
        Self { sphere_rule: SphereRule::MonteCarlo { samples, seed }, radial_tol: 1e-12, sphere_points: 0 }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.radial_tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radial_tol > 0.0) {
            return Err(Error::InvalidParams(format!("radial_tol must be positive, got {}", self.radial_tol)));
        }
        match self.sphere_rule {
            SphereRule::MonteCarlo { samples, .. } if samples < 1000 => {
                Err(Error::InvalidParams(format!("Monte Carlo needs at least 1000 samples, got {samples}")))
            }
            SphereRule::ProductGauss3d if self.sphere_points < 4 => {
                Err(Error::InvalidParams(format!("product rule needs at least 4 points, got {}", self.sphere_points)))
            }
            _ => Ok(()),
        }
    }
}

/// `|S^{k−1}| = 2π^{k/2} / Γ(k/2)`, the surface area of the unit sphere in ℝᵏ.
pub fn sphere_area(k: usize) -> f64 {
    let h = k as f64 / 2.0;
    2.0 * (h * PI.ln() - log_gamma_pos(h)).exp()
}

fn ln_c(k: f64, p: f64) -> f64 {
    (k / p - 1.0) * p.ln() + log_gamma_pos(k / p)
}

/// `∫₀^R r^{n−1} e^{−r^p/p} dr = p^{n/p−1} γ(n/p, R^p/p)`.
pub fn radial_mass(n: usize, p: f64, radius: f64) -> Result<f64> {
    if n < 1 || !(p >= 1.0) || !(radius >= 0.0) {
        return Err(Error::InvalidParams(format!("radial_mass needs n >= 1, p >= 1, R >= 0 (got {n}, {p}, {radius})")));
    }
    let nf = n as f64;
    let total = ln_c(nf, p).exp();
    if radius.is_infinite() {
        return Ok(total);
    }
    Ok(total * lower_inc_gamma_regularized(nf / p, radius.powf(p) / p)?)
}

/// `μ_p(B(R)) = P(n/p, R^p/p)`.
pub fn ball_measure(n: usize, p: f64, radius: f64) -> Result<f64> {
    if radius.is_infinite() {
        return Ok(1.0);
    }
    lower_inc_gamma_regularized(n as f64 / p, radius.powf(p) / p)
}

/// `μ_p({|x| ≥ R})`.
pub fn ball_complement_measure(n: usize, p: f64, radius: f64) -> Result<f64> {
    if radius.is_infinite() {
        return Ok(0.0);
    }
    upper_inc_gamma_regularized(n as f64 / p, radius.max(0.0).powf(p) / p)
}

fn contains_combination(body: &Body) -> bool {
    matches!(body, Body::Combination(_))
}

/// `μ_p(K)`.
pub fn mu(body: &Body, params: BoundParams, spec: &QuadratureSpec) -> Result<MeasureValue> {
    spec.validate()?;
    let n = params.n();
    body.check_dim(n)?;
    let p = params.p();
    // Ray shooting through a lazy combination resolves ρ to ~1e−10 relative;
    // tighter quadrature tolerances would only chase that noise.
    let tol = if contains_combination(body) { spec.radial_tol.max(1e-8) } else { spec.radial_tol };
    match spec.sphere_rule {
        SphereRule::ExactAngle2d => {
            if n != 2 {
                return Err(Error::UnsupportedRule(format!("angle quadrature needs n = 2, got n = {n}")));
            }
            mu_planar(body, p, tol)
        }
        SphereRule::ProductGauss3d => {
            if n != 3 {
                return Err(Error::UnsupportedRule(format!("product Gauss rule needs n = 3, got n = {n}")));
            }
            mu_product3(body, p, spec.sphere_points)
        }
        SphereRule::MonteCarlo { samples, seed } => mu_monte_carlo(body, n, p, samples, seed),
    }
}

/// Fraction of mass along the ray through `theta`: `P(n/p, ρ^p/p)`.
fn ray_fraction(body: &Body, theta: &Direction, n: usize, p: f64) -> Result<f64> {
    let rho = body.radial(theta)?;
    ball_measure(n, p, rho)
}

fn mu_planar(body: &Body, p: f64, tol: f64) -> Result<MeasureValue> {
    let tau = 2.0 * PI;
    let mut breaks: Vec<f64> = body.angular_breakpoints().into_iter().map(|t| t.rem_euclid(tau)).collect();
    breaks.extend([0.0, tau]);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    // Evaluation errors are carried out of the closure through this slot.
    let failure = std::cell::RefCell::new(None);
    let f = |t: f64| match ray_fraction(body, &Direction::from_angle(t), 2, p) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            0.0
        }
    };
    let cfg = QuadConfig::new(tol * tau, 1e-14).with_max_intervals(20_000);
    let r = integrate_with_breaks(f, &breaks, &cfg);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let r = r?;
    Ok(MeasureValue {
        value: r.value / tau,
        abs_error: r.abs_error / tau + 4.0 * f64::EPSILON,
        kind: ErrorKind::DeterministicQuadrature,
    })
}

fn product3_estimate(body: &Body, p: f64, m: usize) -> Result<f64> {
    let (u, w) = gauss_legendre(m);
    let naz = 2 * m;
    let rows: Vec<Result<f64>> = u
        .par_iter()
        .zip(w.par_iter())
        .map(|(&u, &w)| {
            let s = (1.0 - u * u).max(0.0).sqrt();
            let vals: Result<Vec<f64>> = (0..naz)
                .map(|j| {
                    let phi = 2.0 * PI * (j as f64 + 0.5) / naz as f64;
                    let th = Direction::new(vec![s * phi.cos(), s * phi.sin(), u])
                        .or_else(|_| Direction::normalize(&[s * phi.cos(), s * phi.sin(), u]))?;
                    ray_fraction(body, &th, 3, p)
                })
                .collect();
            Ok(w * neumaier_sum(vals?) / naz as f64)
        })
        .collect();
    let rows: Result<Vec<f64>> = rows.into_iter().collect();
    // (1/4π) ∫_{−1}^{1} ∫_0^{2π} … dφ du = ½ Σ wᵢ · mean over azimuth.
    Ok(0.5 * neumaier_sum(rows?))
}

fn mu_product3(body: &Body, p: f64, m: usize) -> Result<MeasureValue> {
    let fine = product3_estimate(body, p, m)?;
    let coarse = product3_estimate(body, p, m / 2)?;
    Ok(MeasureValue {
        value: fine,
        abs_error: (fine - coarse).abs() + 8.0 * f64::EPSILON,
        kind: ErrorKind::DeterministicQuadrature,
    })
}

fn mu_monte_carlo(body: &Body, n: usize, p: f64, samples: usize, seed: u64) -> Result<MeasureValue> {
    let chunks = samples.div_ceil(MC_CHUNK);
    let partial: Vec<Result<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let count = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut vals = Vec::with_capacity(count);
            let mut g = vec![0.0; n];
            for _ in 0..count {
                let th = loop {
                    for x in g.iter_mut() {
                        *x = StandardNormal.sample(&mut rng);
                    }
                    if let Ok(d) = Direction::normalize(&g) {
                        break d;
                    }
                };
                vals.push(ray_fraction(body, &th, n, p)?);
            }
            Ok((neumaier_sum(vals.iter().copied()), neumaier_sum(vals.iter().map(|v| v * v))))
        })
        .collect();
    let mut sums = Vec::with_capacity(chunks);
    let mut squares = Vec::with_capacity(chunks);
    for r in partial {
        let (s, q) = r?;
        sums.push(s);
        squares.push(q);
    }
    let nf = samples as f64;
    let mean = neumaier_sum(sums) / nf;
    let var = ((neumaier_sum(squares) / nf - mean * mean) * nf / (nf - 1.0)).max(0.0);
    Ok(MeasureValue { value: mean, abs_error: 1.96 * (var / nf).sqrt(), kind: ErrorKind::MonteCarlo95 })
}

/// Value with an absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

/// `∫_T^∞ e^{−t^p/p} dt = p^{1/p−1} Γ(1/p, T^p/p)`, which bounds the tail of
/// the kernel beyond `T ≥ 0` for every `r`.
fn kernel_tail_bound(p: f64, t: f64) -> Result<f64> {
    Ok(ln_c(1.0, p).exp() * upper_inc_gamma_regularized(1.0 / p, t.max(0.0).powf(p) / p)?)
}

/// `H(r, s) = ∫_s^∞ e^{−(r²+t²)^{p/2}/p} dt`, to absolute accuracy `tol`.
pub fn kernel_h(r: f64, s: f64, p: f64, tol: f64) -> Result<Estimate> {
    kernel_h_window(r, s, f64::INFINITY, p, tol)
}

/// `∫_s^{u} e^{−(r²+t²)^{p/2}/p} dt` for `u` finite or `+∞`.
pub fn kernel_h_window(r: f64, s: f64, upper: f64, p: f64, tol: f64) -> Result<Estimate> {
    if !(p >= 1.0) || !(r >= 0.0) || s.is_nan() || !(tol > 0.0) {
        return Err(Error::InvalidParams(format!("kernel needs p >= 1, r >= 0, tol > 0 (got {p}, {r}, {tol})")));
    }
    if upper <= s {
        return Ok(Estimate { value: 0.0, abs_error: 0.0 });
    }
    let f = |t: f64| (-(r * r + t * t).powf(0.5 * p) / p).exp();
    let (hi, tail) = if upper.is_finite() {
        (upper, 0.0)
    } else {
        let mut t = s.max(0.0) + 1.0;
        while kernel_tail_bound(p, t)? >= tol / 10.0 {
            t *= 1.5;
        }
        (t, kernel_tail_bound(p, t)?)
    };
    if hi <= s {
        return Ok(Estimate { value: 0.0, abs_error: kernel_tail_bound(p, s)? });
    }
    let mut breaks = vec![s];
    if s < 0.0 && hi > 0.0 {
        breaks.push(0.0);
    }
    breaks.push(hi);
    let q = integrate_with_breaks(f, &breaks, &QuadConfig::new(tol / 10.0, 1e-13))?;
    Ok(Estimate { value: q.value, abs_error: q.abs_error + tail })
}

/// `μ_p` of a cone `{xₙ ≥ |x'| tan α − ε} ∩ B(R)` by one-dimensional
/// quadrature in `r = |x'|` over the kernel `H`; for finite `R` the inner
/// `t` range is cut to the chord `|t| ≤ √(R² − r²)` of the sphere.
pub fn cone_measure(cone: &TruncatedCone, params: BoundParams, tol: f64) -> Result<MeasureValue> {
    let (n, p) = (params.n(), params.p());
    let (tan_a, eps, big_r) = (cone.alpha().tan(), cone.eps(), cone.radius());
    let norm = sphere_area(n - 1) / (sphere_area(n) * ln_c(n as f64, p).exp());
    // Mass outside the cylinder r ≤ r_max is below that outside B(r_max).
    let (r_max, truncation) = if big_r.is_finite() {
        let (s, c) = cone.alpha().sin_cos();
        let corner = (eps * s + (big_r * big_r - eps * eps * c * c).max(0.0).sqrt()) * c;
        (corner.min(big_r), 0.0)
    } else {
        let mut r = 1.0;
        while ball_complement_measure(n, p, r)? >= tol / 10.0 {
            r *= 1.25;
        }
        (r, ball_complement_measure(n, p, r)?)
    };
    let inner_tol = tol / (10.0 * norm * (r_max.powi(n as i32 - 1) + 1.0));
    let inner_err = std::cell::Cell::new(0.0f64);
    let failure = std::cell::RefCell::new(None);
    let integrand = |r: f64| {
        let lo = r * tan_a - eps;
        let h = if big_r.is_finite() {
            let half = (big_r * big_r - r * r).max(0.0).sqrt();
            kernel_h_window(r, lo.max(-half), half, p, inner_tol)
        } else {
            kernel_h(r, lo, p, inner_tol)
        };
        match h {
            Ok(h) => {
                let w = r.powi(n as i32 - 2);
                inner_err.set(inner_err.get().max(w * h.abs_error));
                w * h.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    };
    let mut breaks = vec![0.0, r_max];
    let r0 = eps / tan_a;
    if r0 > 0.0 && r0 < r_max {
        breaks.insert(1, r0);
    }
    let q = integrate_with_breaks(integrand, &breaks, &QuadConfig::new(tol / (10.0 * norm), 1e-13));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let q = q?;
    let abs_error = norm * (q.abs_error + inner_err.get() * r_max) + truncation;
    Ok(MeasureValue { value: norm * q.value, abs_error, kind: ErrorKind::DeterministicQuadrature })
}

/// Coefficients of the expansion of the measure of a cone with small drop
/// `δ` around `δ = 0`:
///
/// ```text
/// μ_p(C_α − δeₙ) = c(n,p) M (1 + δ I₁/I₀ + δ² I₂/(2I₀) + O(δ³)),   M = |S^{n−2}| I₀
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCoefficients {
    /// `∫₀^∞ r^{n−2} H(r, r tan α) dr`, by nested quadrature.
    pub i0: f64,
    /// `c₁ cos^{n−1} α`.
    pub i1: f64,
    /// `c₂ sin α cos^{n−1} α`.
    pub i2: f64,
    /// `∫₀^∞ r^{n−2} e^{−r^p/(p cos^p α)} dr`, by quadrature.
    pub i1_quadrature: f64,
    /// `∫₀^∞ r^{n−2} (r/cos α)^{p−2} r tan α e^{−r^p/(p cos^p α)} dr`, by quadrature.
    pub i2_quadrature: f64,
    /// `c₀ ∫₀^{π/2−α} sin^{n−2} θ dθ`.
    pub i0_coarea: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// `|S^{n−2}| I₀`.
    pub m: f64,
    /// Normalizing constant `c(n, p) = 1/(|S^{n−1}| c₀)` of μ_p.
    pub normalizer: f64,
}

impl ExpansionCoefficients {
    /// Second-order prediction of `μ_p` for the untruncated cone with drop `δ`.
    pub fn predicted_measure(&self, drop: f64) -> f64 {
        self.normalizer * self.m * (1.0 + drop * self.i1 / self.i0 + drop * drop * self.i2 / (2.0 * self.i0))
    }
}

pub fn expansion_coefficients(params: BoundParams, alpha: f64) -> Result<ExpansionCoefficients> {
    if !(alpha > 0.0 && alpha < PI / 2.0) {
        return Err(Error::InvalidParams(format!("cone angle must lie in (0, pi/2), got {alpha}")));
    }
    let (n, p) = (params.n(), params.p());
    let nf = n as f64;
    let c0 = ln_c(nf, p).exp();
    let c1 = ln_c(nf - 1.0, p).exp();
    let c2 = ln_c(nf + p - 2.0, p).exp();
    let (sa, ca) = alpha.sin_cos();
    let cos_pow = ca.powi(n as i32 - 1);
    let cone = TruncatedCone::new(alpha, 0.0, f64::INFINITY)?;
    let tol = 1e-13;
    let mu_a = cone_measure(&cone, params, tol)?;
    let normalizer = 1.0 / (sphere_area(n) * c0);
    let i0 = mu_a.value / (normalizer * sphere_area(n - 1));

    let w = |r: f64| r.powi(n as i32 - 2) * (-(r / ca).powf(p) / p).exp();
    // Beyond r = cos α · T the weight is below e^{−T^p/p} times a polynomial.
    let t_max = ca * (p * 800.0).powf(1.0 / p);
    let cfg = QuadConfig::new(0.0, 1e-13);
    let i1_quadrature = integrate(w, 0.0, t_max, &cfg)?.value;
    let i2_quadrature = integrate(|r: f64| w(r) * (r / ca).powf(p - 2.0) * r * alpha.tan(), 0.0, t_max, &cfg)?.value;
    let sin_int = integrate(|t: f64| t.sin().powi(n as i32 - 2), 0.0, PI / 2.0 - alpha, &cfg)?.value;
    Ok(ExpansionCoefficients {
        i0,
        i1: c1 * cos_pow,
        i2: c2 * sa * cos_pow,
        i1_quadrature,
        i2_quadrature,
        i0_coarea: c0 * sin_int,
        c0,
        c1,
        c2,
        m: sphere_area(n - 1) * i0,
        normalizer,
    })
}
