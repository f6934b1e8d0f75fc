use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::gf::{GFunction, PmfTable, Provenance};
use crate::series;
use crate::special::{bessel_i, ln_abs_binomial, ln_gamma, signed_binomials};

/// Number of tabulated ratios behind a [`GFunction::Sequence`].
pub const SEQUENCE_LEN: usize = 1024;

/// `1 - (1-b)^γ`, the normaliser of the extended Sibuya pgf (negative for
/// `γ < 0`).
pub(crate) fn extended_norm(b: f64, gamma: f64) -> f64 {
    -(gamma * (-b).ln_1p()).exp_m1()
}

fn sibuya_ln(gamma: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    gamma.ln() + ln_gamma(n as f64 - gamma) - ln_gamma(1.0 - gamma) - ln_gamma(n as f64 + 1.0)
}

fn generalized_ln(nu: f64, gamma: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    let n = n as f64;
    gamma.ln() - (nu + n).ln() + ln_gamma(nu + n - gamma) - ln_gamma(nu + 1.0 - gamma) + ln_gamma(nu + 1.0)
        - ln_gamma(nu + n)
}

fn extended_ln(b: f64, gamma: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    ln_abs_binomial(gamma, n) + n as f64 * b.ln() - extended_norm(b, gamma).abs().ln()
}

fn log_series_ln(theta: f64, n: usize) -> f64 {
    if n == 0 {
        return f64::NEG_INFINITY;
    }
    n as f64 * theta.ln() - (n as f64).ln() - (-(-theta).ln_1p()).ln()
}

/// `ln p_n` for families with a closed-form pmf; `None` for those whose pmf
/// is only available as a series.
pub fn ln_pmf_closed(spec: &DistributionSpec, n: usize) -> Option<f64> {
    use Family::*;
    let nf = n as f64;
    Some(match spec.family {
        Sibuya { gamma } => sibuya_ln(gamma, n),
        ScaledSibuya { lambda, gamma } => {
            if n == 0 {
                (-lambda).ln_1p()
            } else {
                lambda.ln() + sibuya_ln(gamma, n)
            }
        }
        ShiftedSibuya { gamma } => sibuya_ln(gamma, n + 1),
        GeneralizedSibuya { nu, gamma } => generalized_ln(nu, gamma, n),
        ShiftedGeneralizedSibuya { nu, gamma } => generalized_ln(nu, gamma, n + 1),
        ExtendedSibuya { b, gamma } => extended_ln(b, gamma, n),
        ShiftedExtendedSibuya { b, gamma } => extended_ln(b, gamma, n + 1),
        ZeroTruncatedNbd { q, k } => extended_ln(q, -k, n),
        Nbd { q, k } => {
            ln_gamma(nf + k) - ln_gamma(k) - ln_gamma(nf + 1.0) + k * (-q).ln_1p() + nf * q.ln()
        }
        Geometric { lambda } => {
            let q = lambda / (1.0 + lambda);
            -lambda.ln_1p() + nf * q.ln()
        }
        Poisson { lambda } => -lambda + nf * lambda.ln() - ln_gamma(nf + 1.0),
        Bernoulli { a } => match n {
            0 => (-a).ln_1p(),
            1 => a.ln(),
            _ => f64::NEG_INFINITY,
        },
        Logarithmic { theta } => log_series_ln(theta, n),
        ZeroInflatedLog { theta } => log_series_ln(theta, n + 1),
        Cmp2 { theta } => nf * theta.ln() - 2.0 * ln_gamma(nf + 1.0) - bessel_i(0, 2.0 * theta.sqrt()).ln(),
        DiscreteStable { .. } | MittagLeffler { .. } | FourParam { .. } => return None,
    })
}

/// Taylor coefficients of `S(γ, w) = 1 - (1-w)^γ`.
pub(crate) fn sibuya_series(gamma: f64, n_max: usize) -> Vec<f64> {
    let mut s = signed_binomials(gamma, n_max);
    s[0] = 0.0;
    for c in s.iter_mut().skip(1) {
        *c = -*c;
    }
    s
}

fn series_probs(spec: &DistributionSpec, n_max: usize) -> Result<Vec<f64>> {
    use Family::*;
    let len = n_max + 1;
    match spec.family {
        DiscreteStable { lambda, gamma } => {
            // e^{-λ} exp(λ S(γ, w))
            let s: Vec<f64> = sibuya_series(gamma, n_max).iter().map(|c| lambda * c).collect();
            Ok(series::exp(&s, len).into_iter().map(|c| c * (-lambda).exp()).collect())
        }
        MittagLeffler { lambda, gamma } => {
            // (1/(1+λ)) / (1 - θ S(γ, w)), θ = λ/(1+λ)
            let theta = lambda / (1.0 + lambda);
            let mut d: Vec<f64> = sibuya_series(gamma, n_max).iter().map(|c| -theta * c).collect();
            d[0] = 1.0;
            Ok(series::reciprocal(&d, len)?.into_iter().map(|c| c / (1.0 + lambda)).collect())
        }
        FourParam { b, gamma, ell, k } => {
            let mut h = sibuya_series(gamma, n_max);
            let mut bn = 1.0;
            for c in h.iter_mut() {
                *c *= bn;
                bn *= b;
            }
            let mut hl = h.clone();
            for _ in 1..ell {
                hl = series::mul(&hl, &h, len);
            }
            let u: Vec<f64> = hl.iter().enumerate().map(|(i, c)| if i == 0 { 1.0 - c } else { -c }).collect();
            let uk = series::pow(&u, k as f64, len)?;
            let h1 = extended_norm(b, gamma);
            let norm = 1.0 - (1.0 - h1.powi(ell as i32)).powi(k as i32);
            Ok(uk.iter().enumerate().map(|(i, c)| if i == 0 { (1.0 - c) / norm } else { -c / norm }).collect())
        }
        _ => unreachable!("closed-form family routed to series path"),
    }
}

/// `p_0..p_{n_max}`: closed form (in log space) when available, otherwise
/// the pgf power series.
pub fn pmf_table(spec: &DistributionSpec, n_max: usize) -> Result<PmfTable> {
    let mut table = if ln_pmf_closed(spec, 0).is_some() {
        let probs = (0..=n_max).map(|n| ln_pmf_closed(spec, n).map_or(0.0, f64::exp)).collect();
        PmfTable::normalized(probs, Provenance::ClosedForm)
    } else {
        PmfTable::normalized(series_probs(spec, n_max)?, Provenance::Series)
    };
    if let Some((n, p)) = table.probs.iter().enumerate().find(|(_, p)| !p.is_finite()) {
        return Err(Error::Overflow(format!("{}: p_{n} = {p}", spec.name())));
    }
    if spec.heavy_tailed() {
        table.fit_tail_exponent();
    }
    Ok(table)
}

/// Single probability `P(N = n)`.
pub fn pmf(spec: &DistributionSpec, n: usize) -> Result<f64> {
    match ln_pmf_closed(spec, n) {
        Some(l) => Ok(l.exp()),
        None => Ok(pmf_table(spec, n)?.get(n)),
    }
}

/// Table built from the floor probability and the one-step recurrence
/// `p_{n+1} = g(n) p_n / (n+1)`, accumulated in log space.
pub fn recurrence_table(spec: &DistributionSpec, n_max: usize) -> Result<PmfTable> {
    let g = g_function(spec)?;
    let floor = spec.floor();
    let mut probs = vec![0.0; n_max + 1];
    if floor > n_max {
        return Ok(PmfTable::normalized(probs, Provenance::Recurrence));
    }
    let mut ln_p = match ln_pmf_closed(spec, floor) {
        Some(l) => l,
        None => pmf_table(spec, floor)?.get(floor).ln(),
    };
    probs[floor] = ln_p.exp();
    for n in floor..n_max {
        let gn = g.eval(n)?;
        if gn <= 0.0 {
            break;
        }
        ln_p += gn.ln() - ((n + 1) as f64).ln();
        probs[n + 1] = ln_p.exp();
    }
    Ok(PmfTable::normalized(probs, Provenance::Recurrence))
}

/// The ratio `g(n) = (n+1) p_{n+1} / p_n`.
///
/// Rational families return their falling-factorial amplitude form; the
/// discrete stable, Mittag-Leffler and four-parameter families return ratios
/// of their series coefficients.
pub fn g_function(spec: &DistributionSpec) -> Result<GFunction> {
    use Family::*;
    let amp = |a: Vec<f64>, b: Vec<f64>| Ok(GFunction::amplitude(a, b));
    match spec.family {
        Sibuya { gamma } => amp(vec![-gamma, 1.0], vec![1.0]),
        ShiftedSibuya { gamma } => amp(vec![1.0 - gamma, 3.0 - gamma, 1.0], vec![2.0, 1.0]),
        GeneralizedSibuya { nu, gamma } => amp(vec![nu - gamma, 2.0 + nu - gamma, 1.0], vec![nu + 1.0, 1.0]),
        ShiftedGeneralizedSibuya { nu, gamma } => {
            amp(vec![1.0 + nu - gamma, 3.0 + nu - gamma, 1.0], vec![nu + 2.0, 1.0])
        }
        ExtendedSibuya { b, gamma } => amp(vec![0.0, b * (1.0 - gamma), b], vec![0.0, 1.0]),
        ShiftedExtendedSibuya { b, gamma } => {
            amp(vec![b * (1.0 - gamma), b * (3.0 - gamma), b], vec![2.0, 1.0])
        }
        Nbd { q, k } | ZeroTruncatedNbd { q, k } => amp(vec![q * k, q], vec![1.0]),
        Geometric { lambda } => {
            let q = lambda / (1.0 + lambda);
            amp(vec![q, q], vec![1.0])
        }
        Poisson { lambda } => amp(vec![lambda], vec![1.0]),
        Bernoulli { a } => {
            let r = a / (1.0 - a);
            amp(vec![r, -r], vec![1.0])
        }
        Logarithmic { theta } => amp(vec![0.0, theta], vec![1.0]),
        ZeroInflatedLog { theta } => amp(vec![theta, 3.0 * theta, theta], vec![2.0, 1.0]),
        Cmp2 { theta } => amp(vec![theta], vec![1.0, 1.0]),
        ScaledSibuya { lambda, gamma } => {
            let tail = GFunction::amplitude(vec![-gamma, 1.0], vec![1.0]);
            if lambda == 1.0 {
                Ok(tail)
            } else {
                Ok(GFunction::Piecewise { head: vec![lambda * gamma / (1.0 - lambda)], tail: Box::new(tail) })
            }
        }
        DiscreteStable { .. } | MittagLeffler { .. } | FourParam { .. } => {
            let start = spec.floor();
            let t = pmf_table(spec, start + SEQUENCE_LEN)?;
            let values = (start..start + SEQUENCE_LEN)
                .map(|n| (n + 1) as f64 * t.probs[n + 1] / t.probs[n])
                .collect();
            Ok(GFunction::Sequence { start, values })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{make_spec, FamilyParams};

    fn spec(f: Family) -> DistributionSpec {
        f.into()
    }

    #[test]
    fn sibuya_small_table() {
        let t = pmf_table(&spec(Family::Sibuya { gamma: 0.5 }), 3).unwrap();
        for (got, want) in t.probs.iter().zip([0.0, 0.5, 0.125, 0.0625]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn generalized_p1() {
        let p = pmf(&spec(Family::GeneralizedSibuya { nu: 0.0, gamma: 0.4 }), 1).unwrap();
        assert!((p - 0.4).abs() < 1e-14);
    }

    #[test]
    fn nbd_values() {
        let t = pmf_table(&spec(Family::Nbd { q: 0.5, k: 2.0 }), 2).unwrap();
        for (got, want) in t.probs.iter().zip([0.25, 0.25, 0.1875]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn cmp_normaliser() {
        let s = spec(Family::Cmp2 { theta: 1.0 });
        let mut h = 0.0;
        let mut f = 1.0;
        for n in 0..30 {
            if n > 0 {
                f *= n as f64;
            }
            h += 1.0 / (f * f);
        }
        assert!((pmf(&s, 0).unwrap() - 1.0 / h).abs() < 1e-15);
        assert!((h - 2.279_585_3).abs() < 1e-7);
    }

    #[test]
    fn extended_sibuya_p1_and_g() {
        let s = spec(Family::ExtendedSibuya { b: 0.9, gamma: 0.5 });
        let want = 0.9 * 0.5 / (1.0 - 0.1f64.sqrt());
        assert!((pmf(&s, 1).unwrap() - want).abs() < 1e-14);
        let g = g_function(&s).unwrap();
        assert!((g.eval(1).unwrap() - 0.45).abs() < 1e-14);
        assert!((g.eval(4).unwrap() - 3.15).abs() < 1e-13);
    }

    #[test]
    fn shifted_sibuya_g0() {
        let g = g_function(&spec(Family::ShiftedSibuya { gamma: 0.5 })).unwrap();
        assert!((g.eval(0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn four_param_m2_ratio() {
        let s = make_spec(
            "four_param",
            &FamilyParams { b: Some(1.0), m: Some(2.0), ell: Some(2.0), k: Some(2.0), ..Default::default() },
        )
        .unwrap();
        let g = g_function(&s).unwrap();
        assert!((g.eval(2).unwrap() - 1.5).abs() < 1e-10);
        for n in 3..20 {
            assert!((g.eval(n).unwrap() - (2.0 * n as f64 - 3.0) / 2.0).abs() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn recurrence_matches_closed_form() {
        for f in [
            Family::Sibuya { gamma: 0.3 },
            Family::ScaledSibuya { lambda: 0.4, gamma: 0.5 },
            Family::ZeroInflatedLog { theta: 0.7 },
            Family::Bernoulli { a: 0.3 },
            Family::Cmp2 { theta: 2.0 },
        ] {
            let s = spec(f);
            let a = pmf_table(&s, 60).unwrap();
            let b = recurrence_table(&s, 60).unwrap();
            for n in 0..=60 {
                let (x, y) = (a.probs[n], b.probs[n]);
                assert!((x - y).abs() <= 1e-12 * x.abs().max(1e-300), "{f:?} n={n} {x} {y}");
            }
        }
    }
}
