use num_complex::Complex64;

use crate::distributions::pmf::{extended_norm, ln_pmf_closed};
use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::special::{bessel_i, hyp2f1, hyp_pfq};

/// Principal-branch `z^e`, with `0^e = 0` for `e > 0`.
pub(crate) fn cpow(z: Complex64, e: f64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return if e > 0.0 { z } else { Complex64::new(f64::INFINITY, 0.0) };
    }
    z.powf(e)
}

/// `1 - (1-x)^γ` for real `x ≤ 1`, accurate near `x = 0`.
fn one_minus_pow(x: f64, gamma: f64) -> f64 {
    -(gamma * (-x).ln_1p()).exp_m1()
}

fn finite(spec: &DistributionSpec, w: f64, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{} pgf undefined at w = {w}", spec.name())))
    }
}

/// `Σ_{n<60} p_n w^n` from the closed-form pmf, used near `w = 0` where the
/// shifted families divide by `w`.
fn small_w(spec: &DistributionSpec, w: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut wn = Complex64::new(1.0, 0.0);
    for n in 0..60 {
        acc += wn * ln_pmf_closed(spec, n).map_or(0.0, f64::exp);
        wn *= w;
    }
    acc
}

fn cmp_series(theta_w: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for n in 1..10_000 {
        term *= theta_w / ((n * n) as f64);
        sum += term;
        if term.norm() < 1e-17 * sum.norm() && (n * n) as f64 > theta_w.norm() {
            break;
        }
    }
    sum
}

/// The family pgf at a real point. Arguments below 0 are allowed (thinning
/// with `a > 1` needs them); the result is checked to be finite.
pub fn pgf_real(spec: &DistributionSpec, w: f64) -> Result<f64> {
    use Family::*;
    let v = match spec.family {
        Sibuya { gamma } => one_minus_pow(w, gamma),
        ScaledSibuya { lambda, gamma } => 1.0 - lambda * (1.0 - w).powf(gamma),
        ShiftedSibuya { gamma } => {
            if w == 0.0 {
                gamma
            } else {
                one_minus_pow(w, gamma) / w
            }
        }
        GeneralizedSibuya { nu, gamma } => {
            let c = gamma / (nu + 1.0);
            c * w * gen_hyp(nu, gamma, w)?
        }
        ShiftedGeneralizedSibuya { nu, gamma } => gamma / (nu + 1.0) * gen_hyp(nu, gamma, w)?,
        ExtendedSibuya { b, gamma } => one_minus_pow(b * w, gamma) / extended_norm(b, gamma),
        ShiftedExtendedSibuya { b, gamma } => {
            if w == 0.0 {
                b * gamma / extended_norm(b, gamma)
            } else {
                one_minus_pow(b * w, gamma) / (extended_norm(b, gamma) * w)
            }
        }
        ZeroTruncatedNbd { q, k } => one_minus_pow(q * w, -k) / extended_norm(q, -k),
        DiscreteStable { lambda, gamma } => (-lambda * (1.0 - w).powf(gamma)).exp(),
        MittagLeffler { lambda, gamma } => 1.0 / (1.0 + lambda * (1.0 - w).powf(gamma)),
        Nbd { q, k } => ((1.0 - q) / (1.0 - q * w)).powf(k),
        Geometric { lambda } => 1.0 / (1.0 + lambda * (1.0 - w)),
        Poisson { lambda } => (lambda * (w - 1.0)).exp(),
        Bernoulli { a } => 1.0 - a + a * w,
        Logarithmic { theta } => (-theta * w).ln_1p() / (-theta).ln_1p(),
        ZeroInflatedLog { theta } => {
            if w == 0.0 {
                -theta / (-theta).ln_1p()
            } else {
                (-theta * w).ln_1p() / (w * (-theta).ln_1p())
            }
        }
        Cmp2 { theta } => cmp_series(Complex64::new(theta * w, 0.0)).re / bessel_i(0, 2.0 * theta.sqrt()),
        FourParam { b, gamma, ell, k } => {
            let h = one_minus_pow(b * w, gamma);
            let h1 = extended_norm(b, gamma);
            (1.0 - (1.0 - h.powi(ell as i32)).powi(k as i32)) / (1.0 - (1.0 - h1.powi(ell as i32)).powi(k as i32))
        }
    };
    finite(spec, w, v)
}

/// `2F1(1, ν-γ+1; ν+2; w)`.
fn gen_hyp(nu: f64, gamma: f64, w: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&w) {
        hyp2f1(1.0, nu - gamma + 1.0, nu + 2.0, w)
    } else {
        hyp_pfq(&[1.0, nu - gamma + 1.0], &[nu + 2.0], Complex64::new(w, 0.0), 1_000_000).map(|v| v.re)
    }
}

/// The family pgf continued to a complex point (principal branches).
pub fn pgf_complex(spec: &DistributionSpec, w: Complex64) -> Result<Complex64> {
    use Family::*;
    let one = Complex64::new(1.0, 0.0);
    let s = |x: Complex64, gamma: f64| one - cpow(one - x, gamma);
    let shifted = matches!(
        spec.family,
        ShiftedSibuya { .. } | ShiftedGeneralizedSibuya { .. } | ShiftedExtendedSibuya { .. } | ZeroInflatedLog { .. }
    );
    if shifted && w.norm() < 0.05 {
        return Ok(small_w(spec, w));
    }
    let v = match spec.family {
        Sibuya { gamma } => s(w, gamma),
        ScaledSibuya { lambda, gamma } => one - lambda * cpow(one - w, gamma),
        ShiftedSibuya { gamma } => s(w, gamma) / w,
        GeneralizedSibuya { nu, gamma } => {
            w * gamma / (nu + 1.0) * hyp_pfq(&[1.0, nu - gamma + 1.0], &[nu + 2.0], w, 1_000_000)?
        }
        ShiftedGeneralizedSibuya { nu, gamma } => {
            gamma / (nu + 1.0) * hyp_pfq(&[1.0, nu - gamma + 1.0], &[nu + 2.0], w, 1_000_000)?
        }
        ExtendedSibuya { b, gamma } => s(b * w, gamma) / extended_norm(b, gamma),
        ShiftedExtendedSibuya { b, gamma } => s(b * w, gamma) / (extended_norm(b, gamma) * w),
        ZeroTruncatedNbd { q, k } => s(q * w, -k) / extended_norm(q, -k),
        DiscreteStable { lambda, gamma } => (-lambda * cpow(one - w, gamma)).exp(),
        MittagLeffler { lambda, gamma } => one / (one + lambda * cpow(one - w, gamma)),
        Nbd { q, k } => cpow((1.0 - q) / (one - q * w), k),
        Geometric { lambda } => one / (one + lambda * (one - w)),
        Poisson { lambda } => (lambda * (w - one)).exp(),
        Bernoulli { a } => (1.0 - a) + a * w,
        Logarithmic { theta } => (one - theta * w).ln() / (-theta).ln_1p(),
        ZeroInflatedLog { theta } => (one - theta * w).ln() / (w * (-theta).ln_1p()),
        Cmp2 { theta } => cmp_series(theta * w) / bessel_i(0, 2.0 * theta.sqrt()),
        FourParam { b, gamma, ell, k } => {
            let h = s(b * w, gamma);
            let h1 = extended_norm(b, gamma);
            (one - (one - h.powi(ell as i32)).powi(k as i32)) / (1.0 - (1.0 - h1.powi(ell as i32)).powi(k as i32))
        }
    };
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{} pgf undefined at w = {w}", spec.name())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::pmf::pmf_table;

    fn all_specs() -> Vec<DistributionSpec> {
        use Family::*;
        [
            Sibuya { gamma: 0.4 },
            ScaledSibuya { lambda: 0.6, gamma: 0.5 },
            ShiftedSibuya { gamma: 0.7 },
            GeneralizedSibuya { nu: 1.5, gamma: 0.6 },
            ShiftedGeneralizedSibuya { nu: 1.0, gamma: 0.5 },
            ExtendedSibuya { b: 0.8, gamma: 0.3 },
            ExtendedSibuya { b: 0.8, gamma: -1.5 },
            ShiftedExtendedSibuya { b: 0.7, gamma: 0.4 },
            DiscreteStable { lambda: 1.3, gamma: 0.6 },
            MittagLeffler { lambda: 0.8, gamma: 0.5 },
            Nbd { q: 0.4, k: 2.5 },
            Geometric { lambda: 1.5 },
            Poisson { lambda: 3.0 },
            Bernoulli { a: 0.3 },
            Logarithmic { theta: 0.6 },
            ZeroInflatedLog { theta: 0.6 },
            Cmp2 { theta: 2.0 },
            ZeroTruncatedNbd { q: 0.5, k: 2.0 },
            FourParam { b: 0.9, gamma: 0.5, ell: 2, k: 2 },
        ]
        .into_iter()
        .map(DistributionSpec::from)
        .collect()
    }

    #[test]
    fn normalised_at_one() {
        for s in all_specs() {
            let v = pgf_real(&s, 1.0).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "{s:?}: {v}");
        }
    }

    #[test]
    fn real_matches_table_partial_sums() {
        for s in all_specs() {
            let t = pmf_table(&s, 4000).unwrap();
            for w in [0.0, 0.3, 0.7] {
                let direct = pgf_real(&s, w).unwrap();
                let sum: f64 = t.probs.iter().rev().fold(0.0, |acc, p| acc * w + p);
                assert!((direct - sum).abs() < 1e-10, "{s:?} w={w}: {direct} vs {sum}");
            }
        }
    }

    #[test]
    fn complex_agrees_with_real_on_axis() {
        for s in all_specs() {
            for w in [0.01, 0.2, 0.6, 0.95] {
                let c = pgf_complex(&s, Complex64::new(w, 0.0)).unwrap();
                let r = pgf_real(&s, w).unwrap();
                assert!((c.re - r).abs() < 1e-11 && c.im.abs() < 1e-12, "{s:?} w={w}");
            }
        }
    }
}
