//! One-sided stable densities by Pollard's alternating series, and the
//! Laplace mixture that represents the discrete stable law.

use std::f64::consts::PI;

use crate::error::{param, Error, Result};
use crate::gf::LaplaceMixture;
use crate::special::{ln_gamma, CompensatedSum};

/// Largest admissible ratio between the biggest series term and the sum.
const MAX_CONDITION: f64 = 1e8;

/// Outcome of one series evaluation.
#[derive(Debug, Clone, Copy)]
pub struct PollardValue {
    pub value: f64,
    /// `max |term| / |sum|`: how many digits cancellation cost.
    pub condition: f64,
    pub terms: usize,
}

/// `g_α(x) = (1/π) Σ_{j≥1} (-1)^{j+1} Γ(1+αj) sin(παj) / (j! x^{1+αj})`.
///
/// Stops once the term magnitude bound drops below `1e-14·|sum|` past its
/// peak; fails after `max_terms`.
pub fn pollard_series(alpha: f64, x: f64, max_terms: usize) -> Result<PollardValue> {
    let lx = x.ln();
    let mut sum = CompensatedSum::new();
    let mut biggest = 0.0f64;
    let mut prev_mag = f64::INFINITY;
    for j in 1..=max_terms {
        let jf = j as f64;
        let ln_mag = ln_gamma(1.0 + alpha * jf) - ln_gamma(jf + 1.0) - (1.0 + alpha * jf) * lx;
        let mag = ln_mag.exp();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * mag * (PI * alpha * jf).sin();
        sum.add(term);
        biggest = biggest.max(term.abs());
        let s = sum.value().abs();
        if mag < prev_mag && mag < 1e-14 * s {
            let value = sum.value() / PI;
            return Ok(PollardValue { value, condition: biggest / s, terms: j });
        }
        if !mag.is_finite() {
            break;
        }
        prev_mag = mag;
    }
    Err(Error::SeriesDivergence(format!(
        "stable series at alpha = {alpha}, x = {x} not converged after {max_terms} terms"
    )))
}

/// Smallest `x` (on a geometric grid) at which the series loses fewer than
/// eight digits to cancellation.
pub fn pollard_x_min(alpha: f64, max_terms: usize) -> f64 {
    let mut x = 1.0;
    let ok = |x: f64| {
        pollard_series(alpha, x, max_terms)
            .map(|v| v.condition <= MAX_CONDITION && v.value > 0.0)
            .unwrap_or(false)
    };
    if !ok(x) {
        while !ok(x) && x < 1e6 {
            x *= 1.25;
        }
        return x;
    }
    while ok(x * 0.95) && x > 1e-12 {
        x *= 0.95;
    }
    x
}

/// Density `g_α` with the series below `x_min` replaced by the quadratic
/// `g(x_min)(x/x_min)^2`; the true density vanishes faster than any power
/// there, so the region carries very little mass.
#[derive(Debug, Clone, Copy)]
pub struct StableDensity {
    pub alpha: f64,
    pub x_min: f64,
    g_min: f64,
    max_terms: usize,
}

impl StableDensity {
    pub fn new(alpha: f64, max_terms: usize) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(param(format!("stable index {alpha} outside (0,1)")));
        }
        let x_min = pollard_x_min(alpha, max_terms);
        let g_min = pollard_series(alpha, x_min, max_terms)?.value;
        Ok(Self { alpha, x_min, g_min, max_terms })
    }

    /// Value and a flag telling whether the low-accuracy extrapolation was used.
    pub fn eval(&self, x: f64) -> (f64, bool) {
        if x <= 0.0 {
            return (0.0, true);
        }
        if x < self.x_min {
            let r = x / self.x_min;
            return (self.g_min * r * r, true);
        }
        match pollard_series(self.alpha, x, self.max_terms) {
            Ok(v) => (v.value.max(0.0), false),
            Err(_) => (0.0, true),
        }
    }
}

/// The discrete stable law `exp(-λ(1-w)^γ)` as a Poisson mixture with
/// density `s g_γ(s x)`, `s = λ^{-1/γ}`.
pub fn discrete_stable_mixture(lambda: f64, gamma: f64, series_terms: usize) -> Result<LaplaceMixture> {
    if !(lambda > 0.0) {
        return Err(param(format!("lambda = {lambda} must be positive")));
    }
    let d = StableDensity::new(gamma, series_terms)?;
    let s = lambda.powf(-1.0 / gamma);
    LaplaceMixture::with_quadrature(
        format!("discrete stable mixture (lambda={lambda}, gamma={gamma})"),
        move |x| s * d.eval(s * x).0,
        (0.0, f64::INFINITY),
        2e-3,
        1e-7,
    )
}
