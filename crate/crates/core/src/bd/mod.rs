//! Birth-death chains with polynomial rates: stationary laws, their
//! hypergeometric pgfs, and an event-driven simulator.

mod simulate;
mod stationary;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::gf::{falling_to_monomial, GFunction};

pub use simulate::{simulate_ctmc, SimConfig, TrajectoryStats};
pub use stationary::{
    amplitudes_for, detailed_balance_residual, hypergeometric_pgf, stationary_from_g, stationary_solve,
    HyperParams, Normalization, StationarySolution,
};

/// Birth amplitudes `α_k` and death amplitudes `β_k`:
/// `λ_j = Σ α_k (j)_k`, `μ_j = j Σ β_k (j-1)_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BdModel {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(default)]
    pub floor: usize,
}

pub(crate) fn horner(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

impl BdModel {
    /// Checked constructor: amplitudes must be non-negative and finite, and
    /// some death amplitude positive.
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>, floor: usize) -> Result<Self> {
        let m = Self { alpha, beta, floor };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.is_empty() || self.beta.is_empty() {
            return Err(param("alpha and beta must each have at least one entry"));
        }
        if let Some(x) = self.alpha.iter().chain(&self.beta).find(|x| !x.is_finite()) {
            return Err(param(format!("non-finite amplitude {x}")));
        }
        if let Some((k, a)) = self.alpha.iter().enumerate().find(|(_, a)| **a < 0.0) {
            return Err(Error::NegativeAmplitude(format!("alpha_{k} = {a} < 0")));
        }
        if let Some((k, b)) = self.beta.iter().enumerate().find(|(_, b)| **b < 0.0) {
            return Err(Error::NegativeAmplitude(format!("beta_{k} = {b} < 0")));
        }
        if self.beta.iter().all(|&b| b == 0.0) {
            return Err(param("at least one death amplitude must be positive"));
        }
        Ok(())
    }

    /// `g(n) = λ_n / Σ β_k (n)_k`.
    pub fn g_function(&self) -> GFunction {
        GFunction::amplitude(self.alpha.clone(), self.beta.clone())
    }

    /// Monomial coefficients of `λ_j` and of `μ_j / j` as polynomials in `j`
    /// and `j - 1` respectively.
    pub(crate) fn rate_polys(&self) -> (Vec<f64>, Vec<f64>) {
        (falling_to_monomial(&self.alpha), falling_to_monomial(&self.beta))
    }

    pub fn birth_rate(&self, j: usize) -> f64 {
        horner(&falling_to_monomial(&self.alpha), j as f64)
    }

    pub fn death_rate(&self, j: usize) -> f64 {
        if j == 0 {
            return 0.0;
        }
        j as f64 * horner(&falling_to_monomial(&self.beta), j as f64 - 1.0)
    }

    /// Fails with a rate error when some `λ_j` or `μ_j` is negative for
    /// `j ∈ [lo, hi]`.
    pub fn check_rates(&self, lo: usize, hi: usize) -> Result<()> {
        let (a, b) = self.rate_polys();
        for j in lo..=hi {
            let lam = horner(&a, j as f64);
            let mu = if j == 0 { 0.0 } else { j as f64 * horner(&b, j as f64 - 1.0) };
            if lam < -1e-12 * lam.abs().max(1.0) || mu < -1e-12 * mu.abs().max(1.0) {
                return Err(Error::Rate(format!("negative rate at state {j}: lambda = {lam}, mu = {mu}")));
            }
        }
        Ok(())
    }

    /// Parse the `{"alpha": [...], "beta": [...], "floor": i}` form.
    pub fn from_json(s: &str) -> Result<Self> {
        let m: BdModel = serde_json::from_str(s).map_err(|e| param(format!("model JSON: {e}")))?;
        m.validate()?;
        Ok(m)
    }
}
