//! Total progeny of Galton-Watson processes: inversion of `Q(w) = w H(Q(w))`,
//! the extended Sibuya offspring law, and Monte-Carlo progeny.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::gf::{pgf_coefficients, Pgf, PmfTable, Provenance};
use crate::moments::{derivatives_at_one, factorial_moments};
use crate::rng::stream_rng;
use crate::series;
use crate::special::signed_binomials;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Subcritical,
    Critical,
    Supercritical,
}

impl Criticality {
    fn of(mean: f64) -> Self {
        if (mean - 1.0).abs() <= 1e-12 {
            Criticality::Critical
        } else if mean < 1.0 {
            Criticality::Subcritical
        } else {
            Criticality::Supercritical
        }
    }
}

/// Offspring law `H` with its first two factorial moments and the cached
/// cumulative table used for sampling.
#[derive(Debug, Clone)]
pub struct BranchingModel {
    pub offspring: Pgf,
    pub mean_offspring: f64,
    pub second_factorial: f64,
    pub criticality: Criticality,
    table: PmfTable,
}

/// Cumulative target of the sampling table; the remainder goes to the last state.
const TABLE_MASS: f64 = 1.0 - 1e-12;
const TABLE_MAX: usize = 1 << 15;

impl BranchingModel {
    /// Moments from the family's closed forms when available, otherwise
    /// Cauchy derivatives at `u = 1`.
    pub fn from_offspring(offspring: Pgf) -> Result<Self> {
        let (mean, second) = match offspring.spec() {
            Some(spec) => {
                let m = factorial_moments(spec, 2)?;
                (m.moments[0], m.moments[1])
            }
            None => {
                let d = derivatives_at_one(&offspring, 2)?;
                (d[1], d[2])
            }
        };
        let table = sampling_table(|n| Ok(pgf_coefficients(&offspring, n)?.probs))?;
        Ok(Self { offspring, mean_offspring: mean, second_factorial: second, criticality: Criticality::of(mean), table })
    }

    /// Offspring law whose progeny is extended Sibuya `(b, γ)`.
    pub fn extended_sibuya(b: f64, gamma: f64) -> Result<Self> {
        let (mean, second) = offspring_moments(b, gamma)?;
        let table = sampling_table(|n| offspring_series(b, gamma, n).map(|s| s.coefficients))?;
        Ok(Self {
            offspring: extended_offspring_pgf(b, gamma)?,
            mean_offspring: mean,
            second_factorial: second,
            criticality: Criticality::of(mean),
            table,
        })
    }

    /// Offspring probabilities `p_0..p_N` with `Σ ≥ 1 - 1e-12`.
    pub fn offspring_table(&self) -> &PmfTable {
        &self.table
    }
}

fn sampling_table<F: Fn(usize) -> Result<Vec<f64>>>(coeffs: F) -> Result<PmfTable> {
    let mut n = 64;
    loop {
        let p = coeffs(n)?;
        if let Some(k) = p.iter().position(|&x| x < -1e-12) {
            return Err(param(format!("offspring coefficient {k} is negative ({:e})", p[k])));
        }
        let mut acc = 0.0;
        if let Some(last) = p.iter().position(|&x| {
            acc += x.max(0.0);
            acc >= TABLE_MASS
        }) {
            let probs: Vec<f64> = p[..=last].iter().map(|x| x.max(0.0)).collect();
            return Ok(PmfTable::normalized(probs, Provenance::Series));
        }
        if n >= TABLE_MAX {
            return Err(Error::TailModel(format!(
                "offspring mass {acc} < 1 - 1e-12 after {n} terms"
            )));
        }
        n *= 4;
    }
}

fn check_b(b: f64, gamma: f64) -> Result<()> {
    if !(b > 0.0 && b <= 1.0) {
        return Err(param(format!("b = {b} outside (0,1]")));
    }
    if b == 1.0 && gamma <= 0.0 {
        return Err(param(format!("b = 1 needs gamma > 0, got {gamma}")));
    }
    if !gamma.is_finite() {
        return Err(param(format!("gamma = {gamma}")));
    }
    Ok(())
}

/// Coefficients `d_0..d_n` of `D(u)/u` where `H = b u / D(u)`.
fn denominator_series(b: f64, gamma: f64, n: usize) -> Vec<f64> {
    if gamma == 0.0 {
        // D(u) = 1 - (1-b)^u
        let l = (-b).ln_1p();
        let mut d = Vec::with_capacity(n + 1);
        let mut t = 1.0;
        for k in 0..=n {
            t *= l / (k + 1) as f64;
            d.push(-t);
        }
        d
    } else {
        // D(u) = 1 - (1 - c u)^{1/γ}
        let c = ext_c(b, gamma);
        let s = signed_binomials(1.0 / gamma, n + 1);
        (0..=n).map(|k| -s[k + 1] * c.powi(k as i32 + 1)).collect()
    }
}

fn ext_c(b: f64, gamma: f64) -> f64 {
    -((gamma * (-b).ln_1p()).exp_m1())
}

/// Power-series expansion of `H(u, b, γ)` with the term magnitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffspringSeries {
    pub coefficients: Vec<f64>,
    pub scale: Vec<f64>,
}

/// `H(u, b, γ) = u b / (1 - (1 - u c)^{1/γ})`, `c = 1 - (1-b)^γ`, and at
/// `γ = 0` its limit `b u / (1 - (1-b)^u)`, expanded to order `n_max`.
pub fn offspring_series(b: f64, gamma: f64, n_max: usize) -> Result<OffspringSeries> {
    check_b(b, gamma)?;
    let d = denominator_series(b, gamma, n_max);
    let (q, scale) = series::divide_tracked(&[b], &d, n_max + 1)?;
    Ok(OffspringSeries { coefficients: q, scale })
}

fn series_radius(b: f64, gamma: f64) -> f64 {
    if gamma == 0.0 {
        return 2.0 * PI / (-b).ln_1p().abs();
    }
    let c = ext_c(b, gamma).abs();
    let branch = 1.0 / c;
    // zeros of D inside the principal branch: ln(1 - u c) = 2πiγ
    if gamma.abs() < 0.5 {
        branch.min(2.0 * (PI * gamma.abs()).sin() / c)
    } else {
        branch
    }
}

/// `H(u, b, γ)` as a pgf; small arguments go through the series of `D(u)/u`.
pub fn extended_offspring_pgf(b: f64, gamma: f64) -> Result<Pgf> {
    check_b(b, gamma)?;
    let d = denominator_series(b, gamma, 80);
    let x_scale = if gamma == 0.0 { (-b).ln_1p().abs() } else { ext_c(b, gamma).abs() };
    let c = ext_c(b, gamma);
    let l = (-b).ln_1p();
    let f = move |u: Complex64| -> Result<Complex64> {
        let den = if (u * x_scale).norm() < 0.5 {
            d.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * u + k)
        } else if gamma == 0.0 {
            (Complex64::new(1.0, 0.0) - (u * l).exp()) / u
        } else {
            (Complex64::new(1.0, 0.0) - (Complex64::new(1.0, 0.0) - u * c).powf(1.0 / gamma)) / u
        };
        Ok(b / den)
    };
    Ok(Pgf::custom(format!("extended_sibuya_offspring(b={b}, gamma={gamma})"), f, series_radius(b, gamma), false))
}

/// Real `H(u, b, γ)`.
pub fn extended_offspring_value(b: f64, gamma: f64, u: f64) -> Result<f64> {
    extended_offspring_pgf(b, gamma)?.eval(u)
}

/// `(<k>, <k(k-1)>)` of `H(u, b, γ)`:
/// `<k> = 1 - D'/b`, `<k(k-1)> = (2 D'^2 - b (2 D' + D'')) / b^2` with
/// `D' = (c/γ)(1-b)^{1-γ}` and `D'' = -c^2 (1-γ)(1-b)^{1-2γ} / γ^2`.
pub fn offspring_moments(b: f64, gamma: f64) -> Result<(f64, f64)> {
    check_b(b, gamma)?;
    if gamma == 0.0 {
        return Err(Error::Domain("gamma = 0: use the logarithmic-case closed form".into()));
    }
    let c = ext_c(b, gamma);
    let d1 = c / gamma * (1.0 - b).powf(1.0 - gamma);
    let d2 = -c * c * (1.0 - gamma) * (1.0 - b).powf(1.0 - 2.0 * gamma) / (gamma * gamma);
    let mean = 1.0 - d1 / b;
    let second = if d2.is_infinite() { f64::INFINITY } else { (2.0 * d1 * d1 - b * (2.0 * d1 + d2)) / (b * b) };
    Ok((mean, second))
}

/// Result of inverting a progeny pgf.
#[derive(Debug, Clone)]
pub struct OffspringFromProgeny {
    /// Series truncated at `resolved_order`.
    pub offspring: Pgf,
    pub coefficients: Vec<f64>,
    /// Estimated rounding error of each coefficient.
    pub noise: Vec<f64>,
    /// Last order whose noise estimate stays below `1e-9`.
    pub resolved_order: usize,
    /// Resolved indices whose coefficient is below `-1e-10` times its term
    /// magnitude, ten times its noise estimate and `-1e-15`.
    pub negative: Vec<usize>,
}

fn invert_coefficients(c: &[f64], n_max: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let inv = series::revert(c, n_max + 2)?;
    series::divide_tracked(&[1.0], &inv[1..], n_max + 1)
}

/// `H(u) = u / Q^{-1}(u)` by Newton series reversion and division.
///
/// Reversion loses accuracy geometrically in the order when `Q` converges
/// barely past the unit disk, so the inversion is repeated on inputs
/// perturbed by `1e-10` relative; the spread, rescaled to rounding level
/// with a safety factor of 1000, is the per-coefficient noise estimate.
pub fn offspring_from_progeny(q: &Pgf, n_max: usize) -> Result<OffspringFromProgeny> {
    let mut c = pgf_coefficients(q, n_max + 1)?.probs;
    if c[0].abs() > 1e-14 {
        return Err(param(format!("progeny pgf must vanish at 0, Q(0) = {}", c[0])));
    }
    c[0] = 0.0;
    if c[1] == 0.0 {
        return Err(Error::Inversion("p_1 = 0: Q is not invertible at 0".into()));
    }
    let (h, scale) = invert_coefficients(&c, n_max)?;
    const DELTA: f64 = 1e-10;
    let bumped: Vec<f64> =
        c.iter().enumerate().map(|(k, x)| x * (1.0 + if k % 3 == 1 { DELTA } else { -DELTA })).collect();
    let (h2, _) = invert_coefficients(&bumped, n_max)?;
    let noise: Vec<f64> =
        h.iter().zip(&h2).zip(&scale).map(|((a, b), s)| 1000.0 * (a - b).abs() * f64::EPSILON / DELTA + f64::EPSILON * s).collect();
    let resolved_order = noise.iter().position(|&e| e > 1e-9).map_or(n_max, |k| k.saturating_sub(1));
    let negative = (0..=resolved_order).filter(|&k| h[k] < -(1e-10 * scale[k]).max(10.0 * noise[k]).max(1e-15)).collect();
    let table = PmfTable::normalized(h[..=resolved_order].to_vec(), Provenance::Series);
    Ok(OffspringFromProgeny { offspring: Pgf::series(table), coefficients: h, noise, resolved_order, negative })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignDiagnosis {
    pub b: f64,
    pub gamma: f64,
    pub n_max: usize,
    pub is_progeny_evidence: bool,
    pub first_negative: Option<usize>,
    pub coefficients: Vec<f64>,
}

/// Scan the expansion of `H(u, b, γ)` for negative coefficients.
pub fn progeny_sign_diagnosis(b: f64, gamma: f64, n_max: usize) -> Result<SignDiagnosis> {
    let s = offspring_series(b, gamma, n_max)?;
    let first_negative = s.coefficients.iter().zip(&s.scale).position(|(&x, &sc)| x < -1e-10 * sc);
    Ok(SignDiagnosis {
        b,
        gamma,
        n_max,
        is_progeny_evidence: first_negative.is_none(),
        first_negative,
        coefficients: s.coefficients,
    })
}

/// `Q_1(w), ..., Q_n(w)` from `Q_1 = w H(w)`, `Q_k = w H(Q_{k-1})`.
pub fn progeny_iterates(model: &BranchingModel, w: f64, n: usize) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n);
    let mut q = w;
    for _ in 0..n {
        q = w * model.offspring.eval(q)?;
        out.push(q);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProgenyConfig {
    pub replicas: usize,
    pub seed: u64,
    /// A replica whose total exceeds this many individuals is stopped and
    /// counted in the tail mass.
    pub node_cap: usize,
}

impl ProgenyConfig {
    pub fn new(replicas: usize, seed: u64) -> Self {
        Self { replicas, seed, node_cap: 10_000 }
    }
}

const CHUNK: usize = 1024;

/// Generation-by-generation Galton-Watson simulation of the total progeny.
pub fn simulate_progeny(model: &BranchingModel, cfg: &ProgenyConfig) -> Result<PmfTable> {
    if model.criticality == Criticality::Supercritical {
        return Err(param(format!("supercritical offspring law (mean {})", model.mean_offspring)));
    }
    if cfg.replicas == 0 || cfg.node_cap == 0 {
        return Err(param("replicas and node_cap must be positive"));
    }
    let mut cdf = model.table.cumulative();
    if let Some(last) = cdf.last_mut() {
        *last = 1.0;
    }
    let cap = cfg.node_cap;
    let chunks = cfg.replicas.div_ceil(CHUNK);
    let (counts, hits) = (0..chunks)
        .into_par_iter()
        .fold(
            || (vec![0u64; cap + 1], 0u64),
            |(mut counts, mut hits), chunk| {
                let mut rng = stream_rng(cfg.seed, chunk as u64);
                let n = CHUNK.min(cfg.replicas - chunk * CHUNK);
                for _ in 0..n {
                    let mut generation = 1usize;
                    let mut total = 1usize;
                    while generation > 0 && total <= cap {
                        let mut next = 0usize;
                        for _ in 0..generation {
                            let u = rng.random::<f64>();
                            next += cdf.partition_point(|&c| c <= u).min(cdf.len() - 1);
                        }
                        total += next;
                        generation = next;
                    }
                    if total > cap {
                        hits += 1;
                    } else {
                        counts[total] += 1;
                    }
                }
                (counts, hits)
            },
        )
        .reduce(
            || (vec![0u64; cap + 1], 0u64),
            |(mut a, ha), (b, hb)| {
                for (x, y) in a.iter_mut().zip(&b) {
                    *x += y;
                }
                (a, ha + hb)
            },
        );
    let total = cfg.replicas as f64;
    if hits as f64 > 0.2 * total {
        return Err(Error::Budget(format!(
            "{hits} of {} replicas exceeded {cap} individuals",
            cfg.replicas
        )));
    }
    let last = counts.iter().rposition(|&c| c > 0).unwrap_or(0);
    let probs = counts[..=last].iter().map(|&c| c as f64 / total).collect();
    Ok(PmfTable::with_tail(probs, hits as f64 / total, Provenance::Empirical))
}
