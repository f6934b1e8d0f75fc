use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::compensated_sum;

/// How a [`PmfTable`] was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Recurrence,
    Series,
    Contour,
    Quadrature,
    Stationary,
    Empirical,
}

/// A finite prefix `p_0..p_N` of a pmf plus the mass beyond it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfTable {
    pub probs: Vec<f64>,
    pub tail_mass: f64,
    /// Fitted power-law index `α` of `p_n ~ n^{-α}`, when the law is heavy-tailed.
    pub tail_exponent: Option<f64>,
    pub provenance: Provenance,
}

impl PmfTable {
    /// Table whose tail mass is whatever the prefix leaves out of 1.
    pub fn normalized(probs: Vec<f64>, provenance: Provenance) -> Self {
        let total = compensated_sum(probs.iter().copied());
        Self { probs, tail_mass: (1.0 - total).max(0.0), tail_exponent: None, provenance }
    }

    pub fn with_tail(probs: Vec<f64>, tail_mass: f64, provenance: Provenance) -> Self {
        Self { probs, tail_mass, tail_exponent: None, provenance }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn n_max(&self) -> usize {
        self.probs.len().saturating_sub(1)
    }

    pub fn get(&self, n: usize) -> f64 {
        self.probs.get(n).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        compensated_sum(self.probs.iter().copied())
    }

    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect()
    }

    /// Fit `p_n ≈ C n^{-α}` on the last decade of the table by least squares
    /// in log-log coordinates and store `α`.
    pub fn fit_tail_exponent(&mut self) -> Option<f64> {
        let n = self.n_max();
        if n < 20 {
            return None;
        }
        let pts: Vec<(f64, f64)> = ((n / 10).max(1)..=n)
            .filter(|&i| self.probs[i] > 0.0)
            .map(|i| ((i as f64).ln(), self.probs[i].ln()))
            .collect();
        if pts.len() < 10 {
            return None;
        }
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / m, sy / m);
        let (sxy, sxx) = pts
            .iter()
            .fold((0.0, 0.0), |(a, b), (x, y)| (a + (x - mx) * (y - my), b + (x - mx) * (x - mx)));
        let alpha = -sxy / sxx;
        self.tail_exponent = Some(alpha);
        Some(alpha)
    }

    /// Entries in `[-tol, 1 + tol]` and prefix plus tail within `tol` of 1.
    pub fn check(&self, tol: f64) -> Result<()> {
        if let Some((n, p)) =
            self.probs.iter().enumerate().find(|(_, &p)| !(p >= -tol && p <= 1.0 + tol))
        {
            return Err(Error::Domain(format!("entry p_{n} = {p} outside [0,1]")));
        }
        let s = self.total() + self.tail_mass;
        if (s - 1.0).abs() > tol {
            return Err(Error::Domain(format!("table sums to {s}, not 1")));
        }
        Ok(())
    }

    /// `n,p` lines with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,p\n");
        for (n, p) in self.probs.iter().enumerate() {
            out.push_str(&format!("{n},{}\n", fmt17(*p)));
        }
        out
    }
}

/// Format with 17 significant digits, enough for a lossless round trip.
pub fn fmt17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    format!("{x:.16e}")
}
