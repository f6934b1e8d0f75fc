//! Factorial moments, scaled factorial moments `F_j = <n^(j)> / <n>^j`, the
//! fractional-moment finiteness classifier and the `F_2` extremum of the
//! extended Sibuya family.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distributions::{pmf_table, DistributionSpec, Family};
use crate::error::{param, Error, Result};
use crate::gf::{pgf_thin, Pgf, PmfTable};
use crate::quadrature::{integrate, QuadOptions};
use crate::special::{bessel_i, falling, neg_gamma_neg, rising, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    ClosedForm,
    Numeric,
}

/// `moments[j-1] = <n^(j)>`, `scaled[j-1] = F_j` for `j = 1..=j_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorialMoments {
    pub moments: Vec<f64>,
    pub scaled: Vec<f64>,
    pub source: MomentSource,
    /// Bound on the neglected tail contribution (numeric source only).
    pub tail_bound: f64,
}

impl FactorialMoments {
    fn from_moments(moments: Vec<f64>, source: MomentSource, tail_bound: f64) -> Self {
        let m1 = moments.first().copied().unwrap_or(f64::NAN);
        let scaled = moments.iter().enumerate().map(|(i, m)| m / m1.powi(i as i32 + 1)).collect();
        Self { moments, scaled, source, tail_bound }
    }
}

fn infinite(spec: &DistributionSpec) -> Error {
    Error::InfiniteMoment(format!("{} has an infinite mean", spec.name()))
}

/// `<X^(j)>` of `X = Y - 1` from those of `Y`, by Leibniz's rule on
/// `Q_Y(w) / w` with `(1/w)^(m)(1) = (-1)^m m!`.
fn unshift(y: &[f64]) -> Vec<f64> {
    // y[0] = 1 is the zeroth moment
    (1..y.len())
        .map(|j| {
            let mut c = 1.0; // C(j, i), i = j
            let mut acc = 0.0;
            for i in (0..=j).rev() {
                let m = j - i;
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                acc += c * y[i] * sign * falling(m as f64, m);
                c = c * i as f64 / (m + 1) as f64;
            }
            acc
        })
        .collect()
}

fn closed_moments(spec: &DistributionSpec, j_max: usize) -> Result<Option<Vec<f64>>> {
    use Family::*;
    let js = 1..=j_max;
    let extended = |b: f64, gamma: f64| -> Vec<f64> {
        if gamma == 0.0 {
            return logarithmic(b, j_max);
        }
        let norm = (1.0 - b).powf(gamma) - 1.0;
        (1..=j_max)
            .map(|j| (-b).powi(j as i32) * (1.0 - b).powf(gamma - j as f64) * falling(gamma, j) / norm)
            .collect()
    };
    let with_zeroth = |v: Vec<f64>| -> Vec<f64> { std::iter::once(1.0).chain(v).collect() };
    let m = match spec.family {
        Poisson { lambda } => js.map(|j| lambda.powi(j as i32)).collect(),
        Nbd { q, k } => js.map(|j| rising(k, j) * (q / (1.0 - q)).powi(j as i32)).collect(),
        Geometric { lambda } => js.map(|j| falling(j as f64, j) * lambda.powi(j as i32)).collect(),
        MittagLeffler { lambda, gamma } if gamma == 1.0 => {
            js.map(|j| falling(j as f64, j) * lambda.powi(j as i32)).collect()
        }
        Bernoulli { a } => js.map(|j| if j == 1 { a } else { 0.0 }).collect(),
        Cmp2 { theta } => {
            let x = 2.0 * theta.sqrt();
            let i0 = bessel_i(0, x);
            js.map(|j| theta.powf(j as f64 / 2.0) * bessel_i(j, x) / i0).collect()
        }
        Logarithmic { theta } => logarithmic(theta, j_max),
        ZeroInflatedLog { theta } => unshift(&with_zeroth(logarithmic(theta, j_max))),
        ExtendedSibuya { b, gamma } if b < 1.0 => extended(b, gamma),
        ShiftedExtendedSibuya { b, gamma } if b < 1.0 => unshift(&with_zeroth(extended(b, gamma))),
        ZeroTruncatedNbd { q, k } => extended(q, -k),
        FourParam { b, .. } if b < 1.0 => return Ok(None),
        _ => return Err(infinite(spec)),
    };
    Ok(Some(m))
}

fn logarithmic(theta: f64, j_max: usize) -> Vec<f64> {
    let l = (-theta).ln_1p();
    (1..=j_max)
        .map(|j| -falling((j - 1) as f64, j - 1) * theta.powi(j as i32) / ((1.0 - theta).powi(j as i32) * l))
        .collect()
}

/// Factorial and scaled factorial moments up to order `j_max`.
pub fn factorial_moments(spec: &DistributionSpec, j_max: usize) -> Result<FactorialMoments> {
    if j_max == 0 {
        return Err(param("j_max must be at least 1"));
    }
    if let Some(m) = closed_moments(spec, j_max)? {
        return Ok(FactorialMoments::from_moments(m, MomentSource::ClosedForm, 0.0));
    }
    let mut n = 256;
    loop {
        let t = pmf_table(spec, n)?;
        if let Some((m, bound)) = table_moments(&t, j_max) {
            return Ok(FactorialMoments::from_moments(m, MomentSource::Numeric, bound));
        }
        if n >= 1 << 16 {
            return Err(Error::Convergence(format!("{} moment sums do not settle", spec.name())));
        }
        n *= 4;
    }
}

/// Tail-completed `Σ n^(j) p_n` when the table ends in a geometric tail
/// whose contribution is below `1e-13` relative.
fn table_moments(t: &PmfTable, j_max: usize) -> Option<(Vec<f64>, f64)> {
    let p = &t.probs;
    let n = p.len() - 1;
    if n < 8 || p[n] <= 0.0 && p[n - 1] <= 0.0 {
        // finite support inside the table
        let m = (1..=j_max)
            .map(|j| p.iter().enumerate().map(|(i, &q)| falling(i as f64, j) * q).collect::<CompensatedSum>().value())
            .collect();
        return Some((m, 0.0));
    }
    let rho = p[n] / p[n - 1];
    if !(rho < 1.0) {
        return None;
    }
    let mut out = Vec::with_capacity(j_max);
    let mut worst = 0.0f64;
    for j in 1..=j_max {
        let s: f64 = p.iter().enumerate().map(|(i, &q)| falling(i as f64, j) * q).collect::<CompensatedSum>().value();
        // Σ_{i>n} (i)_j p_n ρ^{i-n} ≤ p_n (n+j)^j ρ/(1-ρ)^{j+1}
        let tail = p[n] * ((n + j) as f64).powi(j as i32) * rho / (1.0 - rho).powi(j as i32 + 1);
        if tail > 1e-13 * s.abs() {
            return None;
        }
        worst = worst.max(tail / s.abs());
        out.push(s);
    }
    Some((out, worst))
}

/// `Q^(j)(1)` for `j = 0..=j_max` by a Cauchy integral on a circle about
/// `w = 1` inside the disk of convergence.
pub fn derivatives_at_one(p: &Pgf, j_max: usize) -> Result<Vec<f64>> {
    let big_r = p.series_radius();
    if !(big_r > 1.0 + 1e-9) {
        return Err(Error::Unsupported(
            "derivatives at w = 1 need a series radius above 1".into(),
        ));
    }
    let r = (0.5 * (big_r - 1.0)).min(0.5);
    let m = 256usize;
    let mut acc = vec![Complex64::new(0.0, 0.0); j_max + 1];
    for k in 0..m {
        let u = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64);
        let q = p.eval_complex(1.0 + r * u)?;
        for (j, a) in acc.iter_mut().enumerate() {
            *a += q * u.powi(-(j as i32));
        }
    }
    Ok(acc
        .iter()
        .enumerate()
        .map(|(j, a)| a.re / m as f64 * falling(j as f64, j) / r.powi(j as i32))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinningRow {
    pub a: f64,
    pub scaled: Vec<f64>,
    pub max_rel_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinningReport {
    pub spec: DistributionSpec,
    pub base: Vec<f64>,
    pub rows: Vec<ThinningRow>,
    pub tolerance: f64,
}

impl ThinningReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Compare `F_1..F_{j_max}` of the family with those of each thinned pgf,
/// the latter from derivatives of `Q(1 - a + a w)` at `w = 1`.
pub fn thinning_invariance_check(spec: &DistributionSpec, a_list: &[f64], j_max: usize) -> Result<ThinningReport> {
    let tolerance = 1e-8;
    let base = factorial_moments(spec, j_max)?.scaled;
    let pgf = Pgf::family(*spec);
    let mut rows = Vec::new();
    for &a in a_list {
        let thinned = pgf_thin(&pgf, a)?;
        let d = derivatives_at_one(&thinned, j_max)?;
        let scaled: Vec<f64> = (1..=j_max).map(|j| d[j] / d[1].powi(j as i32)).collect();
        let max_rel_error = scaled
            .iter()
            .zip(&base)
            .map(|(x, y)| if *y == 0.0 { x.abs() } else { ((x - y) / y).abs() })
            .fold(0.0, f64::max);
        rows.push(ThinningRow { a, scaled, max_rel_error, pass: max_rel_error <= tolerance });
    }
    Ok(ThinningReport { spec: *spec, base, rows, tolerance })
}

/// Outcome of the `E X^r` finiteness classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentVerdict {
    pub r: f64,
    pub finite: bool,
    pub low_confidence: bool,
    /// `E X^r` when finite.
    pub estimate: Option<f64>,
    /// Fitted `s` in `ΔI(ε) ~ ε^s`: positive means the integral converges.
    pub exponent: f64,
    /// `(ε, ∫_{ε-cut} ...)` for each rung of the ladder.
    pub diagnostics: Vec<(f64, f64)>,
}

/// The default ladder `ε = 2^-k`, `k = 4..=20`.
pub fn default_ladder() -> Vec<f64> {
    (4..=20).map(|k| 2f64.powi(-k)).collect()
}

/// Classify `E X^r < ∞` through
/// `E X^r = ∫_0^∞ (1 - Q(e^{-u})) u^{-1-r} du / (-Γ(-r))`,
/// cut at `u = -ln(1-ε)` for each ε of the ladder.
pub fn abs_moment_classify(p: &Pgf, r: f64, eps_ladder: &[f64]) -> Result<MomentVerdict> {
    if !(r > 0.0 && r < 1.0) {
        return Err(param(format!("r = {r} outside (0,1)")));
    }
    if eps_ladder.len() < 5 || eps_ladder.windows(2).any(|w| !(w[1] < w[0])) || eps_ladder[0] >= 1.0 {
        return Err(param("eps ladder must hold at least 5 strictly decreasing values in (0,1)"));
    }
    let opts = QuadOptions { rel_tol: 1e-10, abs_tol: 1e-300, ..QuadOptions::default() };
    // integrate in t = ln u, where power laws in u become exponentials
    let integrand = |t: f64| -> f64 {
        let u = t.exp();
        let q = p.eval((-u).exp()).unwrap_or(f64::NAN);
        (1.0 - q).max(0.0) * u.powf(-r)
    };
    // beyond u = 40, 1 - Q(e^{-u}) = 1 - p_0 to double precision
    let u_far = 40.0f64;
    let p0 = p.eval(0.0)?;
    let cut = |eps: f64| -(-eps).ln_1p();
    let far = (1.0 - p0) * u_far.powf(-r) / r;
    let mut total = far + integrate(integrand, cut(eps_ladder[0]).ln(), u_far.ln(), opts)?.value;
    let mut diagnostics = vec![(eps_ladder[0], total)];
    for w in eps_ladder.windows(2) {
        total += integrate(integrand, cut(w[1]).ln(), cut(w[0]).ln(), opts)?.value;
        diagnostics.push((w[1], total));
    }
    // increments between rungs and their log-ratio per halving
    let inc: Vec<f64> = diagnostics.windows(2).map(|w| w[1].1 - w[0].1).collect();
    let steps: Vec<f64> = eps_ladder.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let rates: Vec<f64> = (0..inc.len() - 1)
        .map(|k| (inc[k] / inc[k + 1]).log2() / steps[k + 1])
        .collect();
    let tail = &rates[rates.len().saturating_sub(3)..];
    let s = tail.iter().sum::<f64>() / tail.len() as f64;
    let spread = tail.iter().map(|x| (x - s).abs()).fold(0.0, f64::max);
    let finite = s > 0.0 && inc.iter().all(|d| d.is_finite());
    let low_confidence = s.abs() < 0.02 || spread > 0.5 * s.abs().max(0.02);
    let estimate = finite.then(|| {
        let last = *inc.last().unwrap();
        let ratio = 2f64.powf(s * steps.last().unwrap());
        (total + last / (ratio - 1.0)) / neg_gamma_neg(r)
    });
    Ok(MomentVerdict { r, finite, low_confidence, estimate, exponent: s, diagnostics })
}

/// `ψ(γ, δ) = e^{γδ}(γδ(1-γ) - 1) + 1`, summed as a series for small `γδ`
/// to avoid cancellation.
pub fn psi(gamma: f64, delta: f64) -> f64 {
    let x = gamma * delta;
    if x < 1.0 {
        let mut term = 1.0;
        let mut acc = 0.0;
        for m in 1..40 {
            term *= x / m as f64;
            acc += term * ((1.0 - gamma) * m as f64 - 1.0);
        }
        acc
    } else {
        x.exp() * (x * (1.0 - gamma) - 1.0) + 1.0
    }
}

/// `F_2 = ((1-γ)/γ)(e^{δγ} - 1)` of the extended Sibuya law with `δ = -ln(1-b)`.
pub fn f2_extended(gamma: f64, delta: f64) -> f64 {
    (1.0 - gamma) / gamma * (delta * gamma).exp_m1()
}

/// The maximizer `γ₀ ∈ (0,1)` of `F_2(γ)` at fixed `δ > 2`: the root of
/// `ψ(·, δ)` by bisection. Returns the lower bracket when the root lies
/// below it.
pub fn f2_extremum(delta: f64) -> Result<f64> {
    if !(delta > 2.0) || !delta.is_finite() {
        return Err(Error::NoRoot(format!("delta = {delta}: F_2 has no interior extremum for delta <= 2")));
    }
    let (mut lo, mut hi) = (1e-6, 1.0 - 1e-6);
    if psi(lo, delta) <= 0.0 {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if psi(mid, delta) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nbd_scaled_moments() {
        let f = factorial_moments(&Family::Nbd { q: 0.6, k: 2.0 }.into(), 4).unwrap();
        assert!((f.scaled[1] - 1.5).abs() < 1e-14);
        assert!((f.scaled[2] - 2.0 * 3.0 * 4.0 / 8.0).abs() < 1e-13);
    }

    #[test]
    fn extended_f2_example() {
        let f = factorial_moments(&Family::ExtendedSibuya { b: 0.5, gamma: 0.25 }.into(), 2).unwrap();
        let want = 3.0 * (2f64.powf(0.25) - 1.0);
        assert!((f.scaled[1] - want).abs() < 1e-13);
        assert!((f.scaled[1] - f2_extended(0.25, 2f64.ln())).abs() < 1e-13);
    }

    #[test]
    fn point_mass_at_one() {
        let f = factorial_moments(&Family::Bernoulli { a: 1.0 }.into(), 4).unwrap();
        assert_eq!(f.scaled, vec![1.0, 0.0, 0.0, 0.0]);
        let v = abs_moment_classify(&Pgf::identity(), 0.4, &default_ladder()).unwrap();
        assert!(v.finite);
        assert!((v.estimate.unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sibuya_has_no_mean() {
        assert!(matches!(
            factorial_moments(&Family::Sibuya { gamma: 0.5 }.into(), 1),
            Err(Error::InfiniteMoment(_))
        ));
    }

    #[test]
    fn unshift_geometric() {
        // Y = X + 1 with X ~ Geometric(λ): <Y> = 1 + λ, <Y(Y-1)> = 2λ + 2λ^2
        let l: f64 = 0.7;
        let x = unshift(&[1.0, 1.0 + l, 2.0 * l + 2.0 * l * l]);
        assert!((x[0] - l).abs() < 1e-14);
        assert!((x[1] - 2.0 * l * l).abs() < 1e-14);
    }

    #[test]
    fn psi_changes_sign_once() {
        let g0 = f2_extremum(4.0).unwrap();
        assert!(psi(g0 - 1e-3, 4.0) > 0.0 && psi(g0 + 1e-3, 4.0) < 0.0);
        assert!(matches!(f2_extremum(2.0), Err(Error::NoRoot(_))));
        assert!(f2_extremum(2.0 + 1e-6).unwrap() < 1e-3);
    }
}
