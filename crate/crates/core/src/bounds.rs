//! Lower and upper bounds on the Brunn-Minkowski exponent `α_p(n)` of μ_p
//! over convex bodies containing the origin, and their large-`n` and
//! large-`p` expansions.
//!
//! ```text
//! f₁(n, p) = (1/n) e^a a^{n/p} Γ(1 − n/p, a),   a = (p − 1) n / p
//! f₂(n, p) = 1 − p/(n−1) · Γ((n+p−2)/p) Γ(n/p) / Γ((n−1)/p)²
//! ```

use crate::error::{Error, Result};
use crate::quad::{integrate_with_breaks, QuadConfig};
use crate::specfun::{log_gamma_pos, log_scaled_upper_gamma, stirling_correction};

/// Above this value of `n/p` the lower bound is evaluated through its
/// integral representation by default.
pub const INTEGRAL_ROUTE_THRESHOLD: f64 = 150.0;

/// Dimension `n ≥ 2` and exponent `p ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    n: usize,
    p: f64,
}

impl BoundParams {
    pub fn new(n: usize, p: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParams(format!("dimension must be at least 2, got {n}")));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParams(format!("exponent p must be finite and >= 1, got {p}")));
        }
        Ok(Self { n, p })
    }

    /// Accepts a real-valued dimension only if it is an integer.
    pub fn from_real(n: f64, p: f64) -> Result<Self> {
        if n.fract() != 0.0 || !n.is_finite() || n < 0.0 {
            return Err(Error::InvalidParams(format!("dimension must be an integer, got {n}")));
        }
        Self::new(n as usize, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `a = (p − 1) n / p`.
    pub fn a(&self) -> f64 {
        (self.p - 1.0) * self.nf() / self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundMethod {
    ClosedForm,
    IntegralRepresentation,
    LimitP1,
}

impl BoundMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundMethod::ClosedForm => "closed-form",
            BoundMethod::IntegralRepresentation => "integral",
            BoundMethod::LimitP1 => "limit-p1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPair {
    pub lower: f64,
    pub upper: f64,
    pub method: BoundMethod,
}

impl BoundPair {
    /// Smallest interval with `decimals` digits that contains
    /// `[lower, upper]`: the lower end rounded down, the upper end rounded up.
    pub fn rounded_enclosure(&self, decimals: u32) -> (f64, f64) {
        let scale = 10f64.powi(decimals as i32);
        // Snap values that sit on a grid point up to round-off before rounding outward.
        let snap = |v: f64| {
            let r = (v * scale).round();
            if (v * scale - r).abs() < 1e-9 {
                Some(r / scale)
            } else {
                None
            }
        };
        let lo = snap(self.lower).unwrap_or_else(|| (self.lower * scale).floor() / scale);
        let hi = snap(self.upper).unwrap_or_else(|| (self.upper * scale).ceil() / scale);
        (lo, hi)
    }
}

/// Default evaluation route for the lower bound.
pub fn lower_bound_method(params: BoundParams) -> BoundMethod {
    if params.p == 1.0 {
        BoundMethod::LimitP1
    } else if params.nf() / params.p > INTEGRAL_ROUTE_THRESHOLD {
        BoundMethod::IntegralRepresentation
    } else {
        BoundMethod::ClosedForm
    }
}

/// `f₁(n, p)` by the default route.
pub fn lower_bound(params: BoundParams) -> Result<f64> {
    lower_bound_with(params, lower_bound_method(params))
}

/// `f₁(n, p)` by an explicit route. `LimitP1` is only meaningful at `p = 1`.
pub fn lower_bound_with(params: BoundParams, method: BoundMethod) -> Result<f64> {
    if params.p == 1.0 {
        return Ok(0.0);
    }
    match method {
        BoundMethod::ClosedForm => lower_bound_closed_form(params),
        BoundMethod::IntegralRepresentation => lower_bound_integral(params),
        BoundMethod::LimitP1 => {
            Err(Error::InvalidParams(format!("the p = 1 route does not apply at p = {}", params.p)))
        }
    }
}

fn lower_bound_closed_form(params: BoundParams) -> Result<f64> {
    let n = params.nf();
    let a = params.a();
    let ln = log_scaled_upper_gamma(1.0 - n / params.p, a)? + (n / params.p) * a.ln();
    Ok(ln.exp() / n)
}

/// `(1/n) ∫₀^∞ (1 + s/a)^{−n/p} e^{−s} ds`.
fn lower_bound_integral(params: BoundParams) -> Result<f64> {
    let n = params.nf();
    let a = params.a();
    let k = n / params.p;
    let f = |s: f64| (-k * (s / a).ln_1p() - s).exp();
    // Integrand ≤ e^{−s}, so truncating at 750 drops less than e^{−750}.
    let mut breaks: Vec<f64> = [0.0, a.min(1.0), 1.0, 4.0, 16.0, 64.0, 750.0].to_vec();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let r = integrate_with_breaks(f, &breaks, &QuadConfig::new(0.0, 1e-13))?;
    Ok(r.value / n)
}

/// `f₂(n, p)`, assembled in log-gamma space.
pub fn upper_bound(params: BoundParams) -> Result<f64> {
    if params.p == 1.0 {
        return Ok(0.0);
    }
    let p = params.p;
    let y = (params.nf() - 1.0) / p;
    // ln[p/(n−1) · Γ(y + 1 − 1/p) Γ(y + 1/p) / Γ(y)²]
    let ln_ratio = -y.ln() + log_gamma_shift(y, 1.0 - 1.0 / p) + log_gamma_shift(y, 1.0 / p);
    Ok(-ln_ratio.exp_m1())
}

/// `ln Γ(y + h) − ln Γ(y)` for `y > 0`, `0 ≤ h ≤ 1`, without the
/// cancellation of two large log-gammas when `y` is large.
fn log_gamma_shift(y: f64, h: f64) -> f64 {
    if y <= 20.0 {
        return log_gamma_pos(y + h) - log_gamma_pos(y);
    }
    // Stirling difference: (y−½)ln(1+h/y) + h ln(y+h) − h + S(y+h) − S(y).
    (y - 0.5) * (h / y).ln_1p() + h * (y + h).ln() - h + (stirling_correction(y + h) - stirling_correction(y))
}

/// Two-term large-`n` expansion `(p−1)/(pn) + (p−1)/(p²n²)` of the lower bound.
pub fn lower_bound_asymptotic_n(params: BoundParams) -> f64 {
    let (n, p) = (params.nf(), params.p);
    (p - 1.0) / (p * n) + (p - 1.0) / (p * p * n * n)
}

/// Leading large-`n` term `(p−1)/(pn)` of the upper bound.
pub fn upper_bound_asymptotic_n(params: BoundParams) -> f64 {
    let (n, p) = (params.nf(), params.p);
    (p - 1.0) / (p * n)
}

/// Common `p → ∞` limit `1/n` of both bounds: the exponent of the classical
/// Brunn-Minkowski inequality for volume, recovered in this limit.
pub fn large_p_limit(n: usize) -> f64 {
    1.0 / n as f64
}

pub fn bound_pair(params: BoundParams) -> Result<BoundPair> {
    let method = lower_bound_method(params);
    Ok(BoundPair { lower: lower_bound_with(params, method)?, upper: upper_bound(params)?, method })
}
