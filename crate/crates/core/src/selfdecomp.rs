//! Finite evidence for discrete self-decomposability: Bondesson's sufficient
//! inequality and the residual pgf `G(w) / G(1 - a + a w)`.

use serde::{Deserialize, Serialize};

use crate::distributions::{divisibility_report, DistributionSpec, Family, Verdict};
use crate::error::{param, Error, Result};
use crate::gf::{pgf_coefficients, pgf_compound, pgf_thin, GFunction, Pgf, PmfTable, Provenance};
use crate::series;

const INPUT_NOISE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BondessonViolation {
    pub j: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// Absence of violations is only ever claimed up to `holds_up_to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondessonReport {
    pub holds_up_to: Option<usize>,
    pub first_violation: Option<BondessonViolation>,
}

/// Bondesson's inequality
/// `max_{n≤j} r_{n+1}/r_n ≤ ((j+2)/(j+1)) (r_{j+1} - r_{j+2})/(r_j - r_{j+1})`
/// for `j = 0..=j_max`, on a strictly decreasing pmf.
pub fn bondesson_check(pmf: &PmfTable, j_max: usize) -> Result<BondessonReport> {
    let p = &pmf.probs;
    if p.len() < j_max + 3 {
        return Err(param(format!("table of length {} too short for j_max = {j_max}", p.len())));
    }
    if let Some(n) = p[..j_max + 3].iter().position(|&x| x <= 0.0) {
        return Err(Error::NumericalUnderflow(format!(
            "p_{n} = {} is not representable; use the ratio form",
            p[n]
        )));
    }
    let ratios: Vec<f64> = p[..j_max + 3].windows(2).map(|w| w[1] / w[0]).collect();
    check_ratios(&ratios, j_max)
}

/// The same check from the step ratios `r_{n+1}/r_n = g(n)/(n+1)` of a
/// g-function, which never underflows.
pub fn bondesson_check_g(g: &GFunction, j_max: usize) -> Result<BondessonReport> {
    let ratios = (0..=j_max + 1).map(|n| Ok(g.eval(n)? / (n as f64 + 1.0))).collect::<Result<Vec<_>>>()?;
    check_ratios(&ratios, j_max)
}

fn check_ratios(rho: &[f64], j_max: usize) -> Result<BondessonReport> {
    if let Some(n) = rho.iter().position(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::NotDecreasing(format!("r_{} / r_{n} = {}", n + 1, rho[n])));
    }
    let mut running = 0.0f64;
    for j in 0..=j_max {
        running = running.max(rho[j]);
        // (r_{j+1} - r_{j+2}) / (r_j - r_{j+1}) = ρ_j (1 - ρ_{j+1}) / (1 - ρ_j)
        let rhs = (j + 2) as f64 / (j + 1) as f64 * rho[j] * (1.0 - rho[j + 1]) / (1.0 - rho[j]);
        if running > rhs * (1.0 + 1e-12) {
            return Ok(BondessonReport {
                holds_up_to: j.checked_sub(1),
                first_violation: Some(BondessonViolation { j, lhs: running, rhs }),
            });
        }
    }
    Ok(BondessonReport { holds_up_to: Some(j_max), first_violation: None })
}

/// `R(b, j)`, right over left side of Bondesson's inequality for the shifted
/// extended Sibuya law.
pub fn shifted_extended_bondesson_ratio(b: f64, gamma: f64, j: usize) -> f64 {
    let j = j as f64;
    (j + 2.0).powi(2) * (j + 3.0 - b * (j + 2.0 - gamma))
        / ((j + 1.0) * (j + 3.0) * (j + 2.0 - b * (j + 1.0 - gamma)))
}

/// Coefficients of a residual factor, with the magnitude of the terms that
/// produced each one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub table: PmfTable,
    pub scale: Vec<f64>,
    pub first_negative: Option<usize>,
    pub min_coefficient: f64,
}

impl Residual {
    pub fn nonnegative(&self) -> bool {
        self.first_negative.is_none()
    }

    /// A coefficient counts as negative below `-1e-10` times its term
    /// magnitude, or below the absolute error of contour-extracted inputs.
    fn from_division(q: Vec<f64>, scale: Vec<f64>) -> Self {
        let first_negative = q.iter().zip(&scale).position(|(&c, &s)| c < -(1e-10 * s).max(INPUT_NOISE));
        let min_coefficient = q.iter().copied().fold(f64::INFINITY, f64::min);
        Self { table: PmfTable::normalized(q, Provenance::Series), scale, first_negative, min_coefficient }
    }
}

/// `H_a(w) = G(w) / G(1 - a + a w)` by series division.
pub fn residual_pgf(p: &Pgf, a: f64, n_max: usize) -> Result<Residual> {
    if !(a > 0.0 && a < 1.0) {
        return Err(param(format!("a = {a} outside (0,1)")));
    }
    let g = pgf_coefficients(p, n_max)?;
    let t = pgf_coefficients(&pgf_thin(p, a)?, n_max)?;
    if t.probs[0] < 1e-12 {
        return Err(Error::DivisionInstability(format!(
            "thinned pgf has p_0 = {:e} < 1e-12",
            t.probs[0]
        )));
    }
    let (q, scale) = series::divide_tracked(&g.probs, &t.probs, n_max + 1)?;
    Ok(Residual::from_division(q, scale))
}

/// `Sibuya(γ₁) = Sibuya(γ₂) + Y` for `γ₁ < γ₂`: the coefficients of
/// `Q_Y = S(γ₁, w) / S(γ₂, w)`.
pub fn sibuya_split(gamma1: f64, gamma2: f64, n_max: usize) -> Result<Residual> {
    if !(gamma1 > 0.0 && gamma1 < gamma2 && gamma2 <= 1.0) {
        return Err(param(format!("need 0 < gamma1 < gamma2 <= 1, got {gamma1}, {gamma2}")));
    }
    let shifted = |g: f64| -> Result<Vec<f64>> {
        if g == 1.0 {
            let mut v = vec![0.0; n_max + 1];
            v[0] = 1.0;
            return Ok(v);
        }
        let t = pgf_coefficients(&Pgf::family(Family::Sibuya { gamma: g }.into()), n_max + 1)?;
        Ok(t.probs[1..].to_vec())
    };
    let (q, scale) = series::divide_tracked(&shifted(gamma1)?, &shifted(gamma2)?, n_max + 1)?;
    Ok(Residual::from_division(q, scale))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureRow {
    pub a: f64,
    pub nonnegative: bool,
    pub first_negative: Option<usize>,
    pub min_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub spec: DistributionSpec,
    pub gamma: f64,
    pub n_max: usize,
    pub rows: Vec<ClosureRow>,
}

impl ClosureReport {
    pub fn all_nonnegative(&self) -> bool {
        self.rows.iter().all(|r| r.nonnegative)
    }
}

/// Residual nonnegativity of `G = Q ∘ S(γ)` for each `a`.
pub fn sibuya_compound_closure(
    spec: &DistributionSpec,
    gamma: f64,
    a_list: &[f64],
    n_max: usize,
) -> Result<ClosureReport> {
    if divisibility_report(spec).self_decomposable != Verdict::Yes {
        return Err(param(format!("{} is not known to be self-decomposable", spec.name())));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(param(format!("gamma = {gamma} outside (0,1]")));
    }
    let outer = Pgf::family(*spec);
    let g = if gamma == 1.0 {
        outer
    } else {
        pgf_compound(&outer, &Pgf::family(Family::Sibuya { gamma }.into()))?
    };
    let rows = a_list
        .iter()
        .map(|&a| {
            let r = residual_pgf(&g, a, n_max)?;
            Ok(ClosureRow {
                a,
                nonnegative: r.nonnegative(),
                first_negative: r.first_negative,
                min_coefficient: r.min_coefficient,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ClosureReport { spec: *spec, gamma, n_max, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::pmf_table;

    #[test]
    fn poisson_residual_is_poisson() {
        let p = Pgf::family(Family::Poisson { lambda: 3.0 }.into());
        let r = residual_pgf(&p, 0.5, 30).unwrap();
        let want = pmf_table(&Family::Poisson { lambda: 1.5 }.into(), 30).unwrap();
        for n in 0..=30 {
            assert!((r.table.probs[n] - want.probs[n]).abs() < 1e-10, "n={n}");
        }
        assert!(r.nonnegative());
    }

    #[test]
    fn bernoulli_residual_goes_negative() {
        let p = Pgf::family(Family::Bernoulli { a: 0.5 }.into());
        let r = residual_pgf(&p, 0.5, 10).unwrap();
        assert!(!r.nonnegative());
    }

    #[test]
    fn geometric_satisfies_bondesson() {
        let t = pmf_table(&Family::Geometric { lambda: 1.0 }.into(), 60).unwrap();
        let r = bondesson_check(&t, 50).unwrap();
        assert_eq!(r.holds_up_to, Some(50));
    }

    #[test]
    fn increasing_pmf_rejected() {
        let t = pmf_table(&Family::Poisson { lambda: 3.0 }.into(), 20).unwrap();
        assert!(matches!(bondesson_check(&t, 10), Err(Error::NotDecreasing(_))));
    }
}
