//! Generating-function arithmetic: evaluation, thinning, compounding,
//! Taylor-coefficient extraction and Laplace-mixture representations.

mod gfunction;
mod mixture;
mod pgf;
mod table;

pub use gfunction::{falling_to_monomial, GFunction};
pub(crate) use gfunction::{rational_eval, trim};
pub use mixture::{mixture_g, mixture_rescale, LaplaceMixture};
pub use pgf::{CustomPgf, Pgf, PgfKind};
pub use table::{fmt17, PmfTable, Provenance};

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::distributions;
use crate::error::{param, Error, Result};
use crate::series;

/// Coefficients are declared non-pgf only below this.
pub const NEGATIVE_TOLERANCE: f64 = -1e-12;

pub fn pgf_eval(p: &Pgf, w: f64) -> Result<f64> {
    p.eval(w)
}

/// `w ↦ Q(1 - a + a w)`.
///
/// Any `a ∈ (0, 1]` is allowed; `a > 1` only for Laplace-representable pgfs.
pub fn pgf_thin(p: &Pgf, a: f64) -> Result<Pgf> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(param(format!("thinning factor a = {a} must be positive")));
    }
    if a > 1.0 && !p.laplace_representable() {
        return Err(Error::Scaling(format!(
            "a = {a} > 1 needs a Laplace-representable pgf; {} is not known to be one",
            describe(p)
        )));
    }
    Ok(Pgf::thinned(p.clone(), a))
}

/// `outer ∘ inner`.
pub fn pgf_compound(outer: &Pgf, inner: &Pgf) -> Result<Pgf> {
    for w in [0.0, 1.0] {
        let v = inner.eval(w)?;
        if !(v >= -1e-12 && v <= outer.domain_radius() + 1e-12) {
            return Err(Error::Domain(format!(
                "inner pgf maps {w} to {v}, outside the outer domain"
            )));
        }
    }
    Ok(Pgf::composed(outer.clone(), inner.clone()))
}

/// The pgf of the Laplace mixture.
pub fn mixture_pgf(m: &LaplaceMixture) -> Pgf {
    Pgf::mixture(m.clone())
}

fn describe(p: &Pgf) -> String {
    match p.kind() {
        PgfKind::Family(s) => s.name().to_string(),
        PgfKind::Identity => "identity".into(),
        PgfKind::Composed { .. } => "a composition".into(),
        PgfKind::Thinned { .. } => "a thinned pgf".into(),
        PgfKind::Series(_) => "an explicit series".into(),
        PgfKind::Mixture(m) => m.label().to_string(),
        PgfKind::Custom(c) => c.name.clone(),
    }
}

/// Taylor coefficients `p_0..p_{n_max}`.
///
/// Closed-form families use their pmf, compositions with `inner(0) = 0`
/// compose coefficient series, mixtures integrate each coefficient; anything
/// else falls back to [`contour_coefficients`].
pub fn pgf_coefficients(p: &Pgf, n_max: usize) -> Result<PmfTable> {
    let len = n_max + 1;
    match p.kind() {
        PgfKind::Family(spec) => distributions::pmf_table(spec, n_max),
        PgfKind::Identity => {
            let mut probs = vec![0.0; len];
            if len > 1 {
                probs[1] = 1.0;
            }
            Ok(PmfTable::normalized(probs, Provenance::ClosedForm))
        }
        PgfKind::Series(t) => {
            let mut probs = t.probs.clone();
            probs.resize(len, 0.0);
            Ok(PmfTable::normalized(probs, Provenance::Series))
        }
        PgfKind::Composed { outer, inner } if inner.eval(0.0)? == 0.0 => {
            let o = pgf_coefficients(outer, n_max)?;
            let i = pgf_coefficients(inner, n_max)?;
            let probs = series::compose(&o.probs, &i.probs, len)?;
            Ok(PmfTable::normalized(probs, Provenance::Series))
        }
        PgfKind::Mixture(m) => {
            let probs = (0..len).map(|n| m.coefficient(n)).collect::<Result<Vec<_>>>()?;
            Ok(PmfTable::normalized(probs, Provenance::Quadrature))
        }
        _ => {
            let probs = contour_coefficients(|w| p.eval_complex(w), n_max, p.series_radius())?;
            Ok(PmfTable::normalized(probs, Provenance::Contour))
        }
    }
}

/// Trapezoidal Cauchy integral on a circle of radius `ρ`.
///
/// `ρ = clamp(10^{-4/n_max}, 0.5, 0.95·radius)`: roundoff in `p_n` grows like
/// `ε ρ^{-n}`, so the circle is pushed out until that is about `1e-12`, while
/// aliasing `ρ^M` with `M ≥ 8(n_max+1)` nodes stays negligible. Node counts
/// double until two successive passes agree to `1e-9`.
pub fn contour_coefficients<F>(f: F, n_max: usize, radius: f64) -> Result<Vec<f64>>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let target = if n_max == 0 { 0.5 } else { 10f64.powf(-4.0 / n_max as f64) };
    let rho = target.max(0.5).min(0.95 * radius);
    let pass = |m: usize| -> Result<Vec<f64>> {
        let values = (0..m)
            .map(|j| f(Complex64::from_polar(rho, 2.0 * PI * j as f64 / m as f64)))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..=n_max)
            .map(|n| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in values.iter().enumerate() {
                    let theta = -2.0 * PI * ((n * j) % m) as f64 / m as f64;
                    acc += v * Complex64::from_polar(1.0, theta);
                }
                acc.re / (m as f64 * rho.powi(n as i32))
            })
            .collect())
    };
    let mut m = 8 * (n_max + 1);
    let mut prev = pass(m)?;
    loop {
        m *= 2;
        let next = pass(m)?;
        let diff = prev.iter().zip(&next).fold(0.0f64, |d, (a, b)| d.max((a - b).abs()));
        if diff < 1e-9 {
            return Ok(next);
        }
        if m > 1 << 20 {
            return Err(Error::Convergence(format!(
                "contour extraction disagrees by {diff:e} between {} and {m} nodes",
                m / 2
            )));
        }
        prev = next;
    }
}
