use std::cell::Cell;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{param, Error, Result};
use crate::quadrature::{integrate, integrate_positive_axis, integrate_to_inf, QuadOptions};
use crate::special::ln_gamma;

type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A density `f` on `(0, ∞)` whose Laplace transform gives the pgf
/// `Q(w) = ∫ e^{-(1-w)x} f(x) dx`.
#[derive(Clone)]
pub struct LaplaceMixture {
    density: Density,
    support: (f64, f64),
    tolerance: f64,
    quad_rel_tol: f64,
    label: String,
}

impl fmt::Debug for LaplaceMixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LaplaceMixture")
            .field("label", &self.label)
            .field("support", &self.support)
            .field("tolerance", &self.tolerance)
            .finish()
    }
}

fn quad_support<F: Fn(f64) -> f64>(f: F, support: (f64, f64), opts: QuadOptions) -> Result<f64> {
    let (lo, hi) = support;
    let v = if lo <= 0.0 && hi.is_infinite() {
        integrate_positive_axis(f, opts)?
    } else if hi.is_infinite() {
        integrate_to_inf(|s| { let x = lo * s.exp(); if x.is_infinite() { 0.0 } else { f(x) * x } }, 0.0, opts)?
    } else {
        integrate(f, lo.max(0.0), hi, opts)?
    };
    Ok(v.value)
}

impl LaplaceMixture {
    /// Wrap a density, checking that it integrates to 1 within `tolerance`.
    pub fn new<F>(label: impl Into<String>, density: F, support: (f64, f64), tolerance: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_quadrature(label, density, support, tolerance, 1e-10)
    }

    /// As [`LaplaceMixture::new`], with an explicit relative tolerance for
    /// every quadrature, for densities that are only known to a few digits.
    pub fn with_quadrature<F>(
        label: impl Into<String>,
        density: F,
        support: (f64, f64),
        tolerance: f64,
        quad_rel_tol: f64,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let m = Self { density: Arc::new(density), support, tolerance, quad_rel_tol, label: label.into() };
        let mass = m.integrate_weighted(|_| 1.0)?;
        if (mass - 1.0).abs() > tolerance {
            return Err(Error::Quadrature(format!(
                "density '{}' integrates to {mass}, not 1 within {tolerance}",
                m.label
            )));
        }
        Ok(m)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn density(&self, x: f64) -> f64 {
        (self.density)(x)
    }

    /// `∫ w(x) f(x) dx` over the support; a negative density value at any
    /// node is a domain error.
    pub fn integrate_weighted<W: Fn(f64) -> f64>(&self, weight: W) -> Result<f64> {
        let negative = Cell::new(None);
        let v = quad_support(
            |x| {
                let fx = (self.density)(x);
                if fx < 0.0 {
                    negative.set(Some((x, fx)));
                }
                let w = weight(x);
                if w == 0.0 {
                    0.0
                } else {
                    w * fx
                }
            },
            self.support,
            QuadOptions::rel(self.quad_rel_tol),
        )?;
        if let Some((x, fx)) = negative.get() {
            return Err(Error::Domain(format!("density '{}' is negative at x = {x}: {fx}", self.label)));
        }
        Ok(v)
    }

    /// `Q(w)` at a real point.
    pub fn pgf(&self, w: f64) -> Result<f64> {
        self.integrate_weighted(|x| (-(1.0 - w) * x).exp())
    }

    /// `Q(w)` at a complex point with `Re w < 1`.
    pub fn pgf_complex(&self, w: Complex64) -> Result<Complex64> {
        if w.im == 0.0 {
            return self.pgf(w.re).map(|v| Complex64::new(v, 0.0));
        }
        let s = 1.0 - w.re;
        let re = self.integrate_weighted(|x| (-s * x).exp() * (w.im * x).cos())?;
        let im = self.integrate_weighted(|x| (-s * x).exp() * (w.im * x).sin())?;
        Ok(Complex64::new(re, im))
    }

    /// `p_n = ∫ e^{-x} x^n / n! f(x) dx`.
    pub fn coefficient(&self, n: usize) -> Result<f64> {
        let lf = ln_gamma(n as f64 + 1.0);
        self.integrate_weighted(|x| {
            if n == 0 {
                (-x).exp()
            } else {
                (n as f64 * x.ln() - x - lf).exp()
            }
        })
    }
}

/// `g(n)` as the ratio `∫ e^{-x} x^{n+1} f / ∫ e^{-x} x^n f`.
pub fn mixture_g(m: &LaplaceMixture, n: usize) -> Result<f64> {
    // both integrands share the Poisson weight scale e^{-x} x^n / n!
    let lf = ln_gamma(n as f64 + 1.0);
    let weight = |k: f64| {
        move |x: f64| {
            if x <= 0.0 {
                0.0
            } else {
                (k * x.ln() - x - lf).exp()
            }
        }
    };
    let upper = m.integrate_weighted(weight(n as f64 + 1.0))?;
    let lower = m.integrate_weighted(weight(n as f64))?;
    if lower <= 0.0 {
        return Err(Error::Quadrature(format!("vanishing moment integral at n = {n}")));
    }
    Ok(upper / lower)
}

/// The density `f_b(x) = e^{-(1-b)x/b} f(x/b) / Z(b)` whose pgf is
/// `Q(bw)/Q(b)`.
pub fn mixture_rescale(m: &LaplaceMixture, b: f64) -> Result<LaplaceMixture> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(param(format!("rescale factor b = {b} must lie in (0, 1]")));
    }
    if b == 1.0 {
        return Ok(m.clone());
    }
    let z = b * m.integrate_weighted(|u| (-(1.0 - b) * u).exp())?;
    let f = m.density.clone();
    let (lo, hi) = m.support;
    LaplaceMixture::with_quadrature(
        format!("{} rescaled by {b}", m.label),
        move |x| (-(1.0 - b) * x / b).exp() * f(x / b) / z,
        (lo * b, hi * b),
        m.tolerance,
        m.quad_rel_tol,
    )
}
