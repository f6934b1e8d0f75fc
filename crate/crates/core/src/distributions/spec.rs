use serde::{Deserialize, Serialize};

use crate::error::{param, Result};

/// A catalog family with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// pgf `1 - (1-w)^γ`.
    Sibuya { gamma: f64 },
    /// pgf `1 - λ(1-w)^γ`.
    ScaledSibuya { lambda: f64, gamma: f64 },
    /// Sibuya minus one.
    ShiftedSibuya { gamma: f64 },
    GeneralizedSibuya { nu: f64, gamma: f64 },
    ShiftedGeneralizedSibuya { nu: f64, gamma: f64 },
    /// pgf `S(γ, bw) / S(γ, b)`.
    ExtendedSibuya { b: f64, gamma: f64 },
    ShiftedExtendedSibuya { b: f64, gamma: f64 },
    /// pgf `exp(-λ(1-w)^γ)`.
    DiscreteStable { lambda: f64, gamma: f64 },
    /// pgf `1 / (1 + λ(1-w)^γ)`.
    MittagLeffler { lambda: f64, gamma: f64 },
    /// pgf `((1-q)/(1-qw))^k`.
    Nbd { q: f64, k: f64 },
    /// pgf `1 / (1 + λ(1-w))`.
    Geometric { lambda: f64 },
    Poisson { lambda: f64 },
    Bernoulli { a: f64 },
    /// pgf `log(1-θw) / log(1-θ)`.
    Logarithmic { theta: f64 },
    /// The logarithmic law shifted down to start at 0.
    ZeroInflatedLog { theta: f64 },
    /// `p_n ∝ θ^n / (n!)^2`.
    Cmp2 { theta: f64 },
    ZeroTruncatedNbd { q: f64, k: f64 },
    /// pgf `(1-(1-H(bw)^ℓ)^k) / (1-(1-H(b)^ℓ)^k)` with `H(x) = 1-(1-x)^γ`.
    FourParam { b: f64, gamma: f64, ell: u32, k: u32 },
}

/// Loose parameter record as it arrives from flags or JSON.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FamilyParams {
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub nu: Option<f64>,
    pub b: Option<f64>,
    pub theta: Option<f64>,
    pub q: Option<f64>,
    pub k: Option<f64>,
    pub mean: Option<f64>,
    pub ell: Option<f64>,
    pub m: Option<f64>,
    pub a: Option<f64>,
}

/// A validated family. `unverified` marks parameter sets accepted without a
/// proof that the result is a pgf (four-parameter family off its known set).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub unverified: bool,
}

pub const FAMILY_NAMES: [&str; 18] = [
    "sibuya",
    "scaled_sibuya",
    "shifted_sibuya",
    "generalized_sibuya",
    "shifted_generalized_sibuya",
    "extended_sibuya",
    "shifted_extended_sibuya",
    "discrete_stable",
    "mittag_leffler",
    "nbd",
    "geometric",
    "poisson",
    "bernoulli",
    "logarithmic",
    "zero_inflated_log",
    "cmp2",
    "zero_truncated_nbd",
    "four_param",
];

fn need(v: Option<f64>, name: &str, family: &str) -> Result<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => Err(param(format!("{family}: {name} = {x} is not finite"))),
        None => Err(param(format!("{family}: missing parameter {name}"))),
    }
}

fn check(ok: bool, family: &str, constraint: &str, value: impl std::fmt::Display) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(param(format!("{family}: constraint {constraint} violated ({value})")))
    }
}

fn positive_int(x: f64, name: &str, family: &str) -> Result<u32> {
    check(x >= 1.0 && x.fract() == 0.0 && x < 1e6, family, &format!("{name} positive integer"), x)?;
    Ok(x as u32)
}

/// Build a spec by family name, checking every parameter constraint.
pub fn make_spec(family: &str, p: &FamilyParams) -> Result<DistributionSpec> {
    let f = family;
    let open01 = |x: f64| x > 0.0 && x < 1.0;
    let fam = match family {
        "sibuya" | "shifted_sibuya" => {
            let g = need(p.gamma, "gamma", f)?;
            check(open01(g), f, "0 < gamma < 1", g)?;
            if family == "sibuya" {
                Family::Sibuya { gamma: g }
            } else {
                Family::ShiftedSibuya { gamma: g }
            }
        }
        "scaled_sibuya" => {
            let g = need(p.gamma, "gamma", f)?;
            let l = need(p.lambda, "lambda", f)?;
            check(open01(g), f, "0 < gamma < 1", g)?;
            check(l > 0.0 && l <= 1.0, f, "0 < lambda <= 1", l)?;
            Family::ScaledSibuya { lambda: l, gamma: g }
        }
        "generalized_sibuya" | "shifted_generalized_sibuya" => {
            let nu = need(p.nu, "nu", f)?;
            let g = need(p.gamma, "gamma", f)?;
            check(nu >= 0.0, f, "nu >= 0", nu)?;
            check(g > 0.0 && g < nu + 1.0, f, "0 < gamma < nu + 1", g)?;
            if family == "generalized_sibuya" {
                Family::GeneralizedSibuya { nu, gamma: g }
            } else {
                Family::ShiftedGeneralizedSibuya { nu, gamma: g }
            }
        }
        "extended_sibuya" | "shifted_extended_sibuya" => {
            let b = need(p.b, "b", f)?;
            let g = need(p.gamma, "gamma", f)?;
            check(b > 0.0 && b <= 1.0, f, "0 < b <= 1", b)?;
            check(g < 1.0, f, "gamma < 1", g)?;
            if b == 1.0 {
                check(g > 0.0, f, "gamma > 0 when b = 1", g)?;
            }
            match (family, g == 0.0) {
                ("extended_sibuya", true) => Family::Logarithmic { theta: b },
                ("extended_sibuya", false) => Family::ExtendedSibuya { b, gamma: g },
                (_, true) => Family::ZeroInflatedLog { theta: b },
                _ => Family::ShiftedExtendedSibuya { b, gamma: g },
            }
        }
        "discrete_stable" | "mittag_leffler" => {
            let l = need(p.lambda, "lambda", f)?;
            let g = need(p.gamma, "gamma", f)?;
            check(l > 0.0, f, "lambda > 0", l)?;
            check(g > 0.0 && g <= 1.0, f, "0 < gamma <= 1", g)?;
            if family == "discrete_stable" {
                check(g < 1.0, f, "gamma < 1", g)?;
                Family::DiscreteStable { lambda: l, gamma: g }
            } else {
                Family::MittagLeffler { lambda: l, gamma: g }
            }
        }
        "nbd" | "zero_truncated_nbd" => {
            let k = need(p.k, "k", f)?;
            check(k > 0.0, f, "k > 0", k)?;
            let q = match (p.q, p.mean) {
                (Some(q), _) => q,
                (None, Some(mean)) => {
                    check(mean > 0.0 && mean.is_finite(), f, "mean > 0", mean)?;
                    mean / (k + mean)
                }
                (None, None) => return Err(param(format!("{f}: missing parameter q (or mean)"))),
            };
            check(open01(q), f, "0 < q < 1", q)?;
            if family == "nbd" {
                Family::Nbd { q, k }
            } else {
                Family::ZeroTruncatedNbd { q, k }
            }
        }
        "geometric" => {
            let l = match (p.lambda, p.q) {
                (Some(l), _) => l,
                (None, Some(q)) => {
                    check(open01(q), f, "0 < q < 1", q)?;
                    q / (1.0 - q)
                }
                (None, None) => return Err(param("geometric: missing parameter lambda (or q)")),
            };
            check(l > 0.0 && l.is_finite(), f, "lambda > 0", l)?;
            Family::Geometric { lambda: l }
        }
        "poisson" => {
            let l = need(p.lambda, "lambda", f)?;
            check(l > 0.0, f, "lambda > 0", l)?;
            Family::Poisson { lambda: l }
        }
        "bernoulli" => {
            let a = need(p.a, "a", f)?;
            check(open01(a), f, "0 < a < 1", a)?;
            Family::Bernoulli { a }
        }
        "logarithmic" | "zero_inflated_log" => {
            let t = need(p.theta.or(p.b), "theta", f)?;
            check(open01(t), f, "0 < theta < 1", t)?;
            if family == "logarithmic" {
                Family::Logarithmic { theta: t }
            } else {
                Family::ZeroInflatedLog { theta: t }
            }
        }
        "cmp2" => {
            let t = need(p.theta, "theta", f)?;
            check(t > 0.0, f, "theta > 0", t)?;
            Family::Cmp2 { theta: t }
        }
        "four_param" => {
            let b = need(p.b, "b", f)?;
            check(b > 0.0 && b <= 1.0, f, "0 < b <= 1", b)?;
            let gamma = match (p.gamma, p.m) {
                (Some(g), _) => g,
                (None, Some(m)) => {
                    check(m > 0.0, f, "m > 0", m)?;
                    1.0 / m
                }
                (None, None) => return Err(param("four_param: missing parameter gamma (or m)")),
            };
            check(open01(gamma), f, "0 < gamma < 1", gamma)?;
            let ell = positive_int(need(p.ell, "ell", f)?, "ell", f)?;
            let k = positive_int(need(p.k, "k", f)?, "k", f)?;
            let m = 1.0 / gamma;
            let integral_m = (m - m.round()).abs() < 1e-9;
            let unverified = !integral_m || k as f64 > m.round();
            return Ok(DistributionSpec { family: Family::FourParam { b, gamma, ell, k }, unverified });
        }
        other => {
            return Err(param(format!(
                "unknown family '{other}'; expected one of {}",
                FAMILY_NAMES.join(", ")
            )))
        }
    };
    Ok(DistributionSpec { family: fam, unverified: false })
}

impl From<Family> for DistributionSpec {
    fn from(family: Family) -> Self {
        Self { family, unverified: false }
    }
}

impl DistributionSpec {
    pub fn name(&self) -> &'static str {
        use Family::*;
        match self.family {
            Sibuya { .. } => "sibuya",
            ScaledSibuya { .. } => "scaled_sibuya",
            ShiftedSibuya { .. } => "shifted_sibuya",
            GeneralizedSibuya { .. } => "generalized_sibuya",
            ShiftedGeneralizedSibuya { .. } => "shifted_generalized_sibuya",
            ExtendedSibuya { .. } => "extended_sibuya",
            ShiftedExtendedSibuya { .. } => "shifted_extended_sibuya",
            DiscreteStable { .. } => "discrete_stable",
            MittagLeffler { .. } => "mittag_leffler",
            Nbd { .. } => "nbd",
            Geometric { .. } => "geometric",
            Poisson { .. } => "poisson",
            Bernoulli { .. } => "bernoulli",
            Logarithmic { .. } => "logarithmic",
            ZeroInflatedLog { .. } => "zero_inflated_log",
            Cmp2 { .. } => "cmp2",
            ZeroTruncatedNbd { .. } => "zero_truncated_nbd",
            FourParam { .. } => "four_param",
        }
    }

    /// Smallest state with positive mass.
    pub fn floor(&self) -> usize {
        use Family::*;
        match self.family {
            Sibuya { .. } | GeneralizedSibuya { .. } | ExtendedSibuya { .. } | Logarithmic { .. }
            | ZeroTruncatedNbd { .. } => 1,
            FourParam { ell, .. } => ell as usize,
            ScaledSibuya { lambda, .. } if lambda == 1.0 => 1,
            _ => 0,
        }
    }

    /// Whether `Q(1-a+aw)` is known to be a pgf for every `a > 0`.
    pub fn laplace_representable(&self) -> bool {
        use Family::*;
        match self.family {
            Nbd { .. } | Geometric { .. } | DiscreteStable { .. } | MittagLeffler { .. }
            | ShiftedSibuya { .. } | Poisson { .. } => true,
            ShiftedExtendedSibuya { gamma, .. } => gamma > 0.0,
            _ => false,
        }
    }

    /// Radius of convergence of the pgf power series.
    pub fn convergence_radius(&self) -> f64 {
        use Family::*;
        match self.family {
            ExtendedSibuya { b, .. } | ShiftedExtendedSibuya { b, .. } | FourParam { b, .. } => 1.0 / b,
            Nbd { q, .. } | ZeroTruncatedNbd { q, .. } => 1.0 / q,
            Geometric { lambda } => (1.0 + lambda) / lambda,
            Logarithmic { theta } | ZeroInflatedLog { theta } => 1.0 / theta,
            Poisson { .. } | Bernoulli { .. } | Cmp2 { .. } => f64::INFINITY,
            MittagLeffler { lambda, gamma } if gamma == 1.0 => 1.0 + 1.0 / lambda,
            _ => 1.0,
        }
    }

    /// Whether the law has a power-law tail `p_n ~ n^{-1-γ}`.
    pub fn heavy_tailed(&self) -> bool {
        use Family::*;
        match self.family {
            Sibuya { .. } | ScaledSibuya { .. } | ShiftedSibuya { .. } | GeneralizedSibuya { .. }
            | ShiftedGeneralizedSibuya { .. } | DiscreteStable { .. } => true,
            MittagLeffler { gamma, .. } => gamma < 1.0,
            ExtendedSibuya { b, .. } | ShiftedExtendedSibuya { b, .. } | FourParam { b, .. } => b == 1.0,
            _ => false,
        }
    }

    /// Parameters as `(name, value)` pairs, for reports.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        use Family::*;
        match self.family {
            Sibuya { gamma } | ShiftedSibuya { gamma } => vec![("gamma", gamma)],
            ScaledSibuya { lambda, gamma } | DiscreteStable { lambda, gamma } | MittagLeffler { lambda, gamma } => {
                vec![("lambda", lambda), ("gamma", gamma)]
            }
            GeneralizedSibuya { nu, gamma } | ShiftedGeneralizedSibuya { nu, gamma } => {
                vec![("nu", nu), ("gamma", gamma)]
            }
            ExtendedSibuya { b, gamma } | ShiftedExtendedSibuya { b, gamma } => vec![("b", b), ("gamma", gamma)],
            Nbd { q, k } | ZeroTruncatedNbd { q, k } => vec![("q", q), ("k", k)],
            Geometric { lambda } | Poisson { lambda } => vec![("lambda", lambda)],
            Bernoulli { a } => vec![("a", a)],
            Logarithmic { theta } | ZeroInflatedLog { theta } | Cmp2 { theta } => vec![("theta", theta)],
            FourParam { b, gamma, ell, k } => {
                vec![("b", b), ("gamma", gamma), ("ell", ell as f64), ("k", k as f64)]
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> FamilyParams {
        FamilyParams::default()
    }

    #[test]
    fn constraint_violations_are_named() {
        let e = make_spec("generalized_sibuya", &FamilyParams { nu: Some(1.0), gamma: Some(2.5), ..p() });
        assert!(format!("{}", e.unwrap_err()).contains("gamma < nu + 1"));
        assert!(make_spec("sibuya", &FamilyParams { gamma: Some(1.0), ..p() }).is_err());
        assert!(make_spec("nosuch", &p()).is_err());
    }

    #[test]
    fn limits_map_to_log_families() {
        let s = make_spec("extended_sibuya", &FamilyParams { b: Some(0.4), gamma: Some(0.0), ..p() }).unwrap();
        assert_eq!(s.family, Family::Logarithmic { theta: 0.4 });
        let s = make_spec("shifted_extended_sibuya", &FamilyParams { b: Some(0.4), gamma: Some(0.0), ..p() })
            .unwrap();
        assert_eq!(s.family, Family::ZeroInflatedLog { theta: 0.4 });
    }

    #[test]
    fn mean_parametrization() {
        let s = make_spec("nbd", &FamilyParams { mean: Some(3.0), k: Some(2.0), ..p() }).unwrap();
        assert_eq!(s.family, Family::Nbd { q: 0.6, k: 2.0 });
    }

    #[test]
    fn four_param_flags() {
        let base = FamilyParams { b: Some(1.0), ell: Some(2.0), k: Some(2.0), ..p() };
        assert!(!make_spec("four_param", &FamilyParams { m: Some(2.0), ..base }).unwrap().unverified);
        assert!(make_spec("four_param", &FamilyParams { gamma: Some(0.4), ..base }).unwrap().unverified);
        assert!(make_spec("four_param", &FamilyParams { m: Some(3.0), k: Some(4.0), ..base }).unwrap().unverified);
    }

    #[test]
    fn json_round_trip() {
        let s = make_spec("cmp2", &FamilyParams { theta: Some(2.0), ..p() }).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"family\":\"cmp2\""));
        let back: DistributionSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
