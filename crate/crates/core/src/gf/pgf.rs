use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::distributions::{self, DistributionSpec};
use crate::error::{Error, Result};
use crate::gf::mixture::LaplaceMixture;
use crate::gf::table::PmfTable;
use crate::series;

type ComplexFn = Arc<dyn Fn(Complex64) -> Result<Complex64> + Send + Sync>;

/// A pgf given only as a callable.
#[derive(Clone)]
pub struct CustomPgf {
    pub name: String,
    f: ComplexFn,
}

impl fmt::Debug for CustomPgf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomPgf").field("name", &self.name).finish()
    }
}

#[derive(Debug, Clone)]
pub enum PgfKind {
    Family(DistributionSpec),
    /// `w ↦ w`, the point mass at 1.
    Identity,
    /// `outer(inner(w))`.
    Composed { outer: Box<Pgf>, inner: Box<Pgf> },
    /// `base(1 - a + a w)`.
    Thinned { base: Box<Pgf>, a: f64 },
    Series(PmfTable),
    Mixture(LaplaceMixture),
    Custom(CustomPgf),
}

/// A probability generating function.
#[derive(Debug, Clone)]
pub struct Pgf {
    kind: PgfKind,
    domain_radius: f64,
    /// Radius of convergence of the power series (at least 1).
    series_radius: f64,
    laplace: bool,
}

impl Pgf {
    pub fn family(spec: DistributionSpec) -> Self {
        let laplace = spec.laplace_representable();
        let series_radius = spec.convergence_radius();
        Self { kind: PgfKind::Family(spec), domain_radius: 1.0, series_radius, laplace }
    }

    pub fn identity() -> Self {
        Self { kind: PgfKind::Identity, domain_radius: 1.0, series_radius: f64::INFINITY, laplace: false }
    }

    pub fn series(table: PmfTable) -> Self {
        Self { kind: PgfKind::Series(table), domain_radius: 1.0, series_radius: f64::INFINITY, laplace: false }
    }

    pub fn mixture(m: LaplaceMixture) -> Self {
        Self { kind: PgfKind::Mixture(m), domain_radius: 1.0, series_radius: 1.0, laplace: true }
    }

    /// Wrap a callable. `series_radius` bounds where the contour may go;
    /// `laplace` whitelists thinning with `a > 1`.
    pub fn custom<F>(name: impl Into<String>, f: F, series_radius: f64, laplace: bool) -> Self
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        Self {
            kind: PgfKind::Custom(CustomPgf { name: name.into(), f: Arc::new(f) }),
            domain_radius: 1.0,
            series_radius,
            laplace,
        }
    }

    pub(crate) fn composed(outer: Pgf, inner: Pgf) -> Self {
        let series_radius = inner.series_radius.min(1.0);
        Self {
            kind: PgfKind::Composed { outer: Box::new(outer), inner: Box::new(inner) },
            domain_radius: 1.0,
            series_radius,
            laplace: false,
        }
    }

    pub(crate) fn thinned(base: Pgf, a: f64) -> Self {
        let series_radius = if a <= 1.0 {
            if base.series_radius.is_infinite() {
                f64::INFINITY
            } else {
                (base.series_radius - 1.0 + a) / a
            }
        } else {
            1.0
        };
        let laplace = base.laplace;
        Self { kind: PgfKind::Thinned { base: Box::new(base), a }, domain_radius: 1.0, series_radius, laplace }
    }

    pub fn kind(&self) -> &PgfKind {
        &self.kind
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn series_radius(&self) -> f64 {
        self.series_radius
    }

    /// Whether `Q(1 - a + a w)` is known to be a pgf for every `a > 0`.
    pub fn laplace_representable(&self) -> bool {
        self.laplace
    }

    pub fn spec(&self) -> Option<&DistributionSpec> {
        match &self.kind {
            PgfKind::Family(s) => Some(s),
            _ => None,
        }
    }

    /// Evaluate at a real point of `[0, domain_radius]`.
    pub fn eval(&self, w: f64) -> Result<f64> {
        if !(w >= 0.0 && w <= self.domain_radius) {
            return Err(Error::Domain(format!(
                "w = {w} outside [0, {}]",
                self.domain_radius
            )));
        }
        self.eval_real_unchecked(w)
    }

    pub(crate) fn eval_real_unchecked(&self, w: f64) -> Result<f64> {
        match &self.kind {
            PgfKind::Family(spec) => distributions::pgf_real(spec, w),
            PgfKind::Identity => Ok(w),
            PgfKind::Composed { outer, inner } => outer.eval_real_unchecked(inner.eval_real_unchecked(w)?),
            PgfKind::Thinned { base, a } => base.eval_real_unchecked(1.0 - a + a * w),
            PgfKind::Series(t) => Ok(t.probs.iter().rev().fold(0.0, |acc, &p| acc * w + p)),
            PgfKind::Mixture(m) => m.pgf(w),
            PgfKind::Custom(c) => (c.f)(Complex64::new(w, 0.0)).map(|v| v.re),
        }
    }

    /// Evaluate at a complex point (analytic continuation where defined).
    pub fn eval_complex(&self, w: Complex64) -> Result<Complex64> {
        match &self.kind {
            PgfKind::Family(spec) => distributions::pgf_complex(spec, w),
            PgfKind::Identity => Ok(w),
            PgfKind::Composed { outer, inner } => outer.eval_complex(inner.eval_complex(w)?),
            PgfKind::Thinned { base, a } => base.eval_complex(1.0 - a + a * w),
            PgfKind::Series(t) => Ok(series::eval_complex(&t.probs, w)),
            PgfKind::Mixture(m) => m.pgf_complex(w),
            PgfKind::Custom(c) => (c.f)(w),
        }
    }
}
