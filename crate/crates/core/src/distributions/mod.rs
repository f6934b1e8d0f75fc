//! The catalog of Sibuya-like families: validated specs, closed-form and
//! series pmfs, pgfs, g-functions and divisibility verdicts.

mod pgf;
mod pmf;
mod spec;
pub mod stable;

use serde::{Deserialize, Serialize};

pub use pgf::{pgf_complex, pgf_real};
#[allow(unused_imports)]
pub(crate) use pgf::cpow;
pub use pmf::{g_function, ln_pmf_closed, pmf, pmf_table, recurrence_table, SEQUENCE_LEN};
#[allow(unused_imports)]
pub(crate) use pmf::{extended_norm, sibuya_series};
pub use spec::{make_spec, DistributionSpec, Family, FamilyParams, FAMILY_NAMES};
pub use stable::{discrete_stable_mixture, pollard_series, StableDensity};

/// Three-valued answer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    No,
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictSource {
    AnalyticRule,
    NumericCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfDivisibilityReport {
    pub spec: DistributionSpec,
    pub infinitely_divisible: Verdict,
    pub self_decomposable: Verdict,
    pub source: VerdictSource,
    pub rule: String,
}

/// Verdicts that follow from known analytic results; `Unknown` otherwise.
pub fn divisibility_report(spec: &DistributionSpec) -> InfDivisibilityReport {
    use Family::*;
    use Verdict::*;
    let (id, sd, rule): (Verdict, Verdict, String) = match spec.family {
        ScaledSibuya { lambda, gamma } => {
            let id = if lambda <= 1.0 - gamma { Yes } else { No };
            let sd = if lambda <= (1.0 - gamma) / (1.0 + gamma) { Yes } else { No };
            (id, sd, "infinitely divisible iff lambda <= 1-gamma; self-decomposable iff lambda <= (1-gamma)/(1+gamma)".into())
        }
        ShiftedSibuya { .. } => (Yes, Yes, "shifted Sibuya law is self-decomposable".into()),
        ShiftedExtendedSibuya { gamma, .. } if gamma > 0.0 => {
            (Yes, Yes, "Bondesson's inequality holds for every j with ratio (j+2)^2/((j+1)(j+3)) or larger".into())
        }
        ShiftedGeneralizedSibuya { nu, .. } => (
            Yes,
            Yes,
            format!(
                "Bondesson's inequality holds for every j: rhs/lhs = (j+2)(j+2+nu)/((j+1)(j+3+nu)) > 1 (excess 1+nu = {})",
                1.0 + nu
            ),
        ),
        Nbd { .. } | Geometric { .. } | Poisson { .. } => {
            (Yes, Yes, "gamma-mixed or degenerate-mixed Poisson with self-decomposable mixing law".into())
        }
        DiscreteStable { .. } => (Yes, Yes, "discrete stable laws are self-decomposable".into()),
        MittagLeffler { .. } => (Yes, Yes, "geometric compounded with Sibuya preserves self-decomposability".into()),
        Bernoulli { .. } => (No, No, "non-degenerate bounded laws are not infinitely divisible".into()),
        Sibuya { .. } | GeneralizedSibuya { .. } | ExtendedSibuya { .. } | Logarithmic { .. }
        | ZeroTruncatedNbd { .. } => {
            (No, No, "p_0 = 0 for a non-degenerate law on the non-negative integers".into())
        }
        FourParam { .. } => (No, No, "p_0 = 0 for a non-degenerate law on the non-negative integers".into()),
        _ => (Unknown, Unknown, "no analytic rule".into()),
    };
    InfDivisibilityReport {
        spec: *spec,
        infinitely_divisible: id,
        self_decomposable: sd,
        source: VerdictSource::AnalyticRule,
        rule,
    }
}
