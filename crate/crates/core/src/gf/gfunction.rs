use std::fmt;

use crate::error::{Error, Result};
use crate::gf::mixture::{mixture_g, LaplaceMixture};

/// The one-step ratio `g(n) = (n+1) p_{n+1} / p_n`.
#[derive(Clone)]
pub enum GFunction {
    /// `Σ α_k (n)_k / Σ β_k (n)_k` with falling factorials `(n)_k`.
    Amplitude { alpha: Vec<f64>, beta: Vec<f64> },
    /// Tabulated values `g(start), g(start+1), ...`.
    Sequence { start: usize, values: Vec<f64> },
    /// Explicit values for `n < head.len()`, then `tail`.
    Piecewise { head: Vec<f64>, tail: Box<GFunction> },
    /// Ratio of Laplace-mixture quadratures.
    Mixture(LaplaceMixture),
}

impl fmt::Debug for GFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GFunction::Amplitude { alpha, beta } => {
                f.debug_struct("Amplitude").field("alpha", alpha).field("beta", beta).finish()
            }
            GFunction::Sequence { start, values } => f
                .debug_struct("Sequence")
                .field("start", start)
                .field("len", &values.len())
                .finish(),
            GFunction::Piecewise { head, tail } => {
                f.debug_struct("Piecewise").field("head", head).field("tail", tail).finish()
            }
            GFunction::Mixture(m) => f.debug_tuple("Mixture").field(&m.label()).finish(),
        }
    }
}

/// Monomial coefficients (lowest degree first) of `Σ c_k (x)_k`.
pub fn falling_to_monomial(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; c.len().max(1)];
    let mut basis = vec![1.0]; // (x)_0
    for (k, &ck) in c.iter().enumerate() {
        for (i, &b) in basis.iter().enumerate() {
            out[i] += ck * b;
        }
        // basis *= (x - k)
        let mut next = vec![0.0; basis.len() + 1];
        for (i, &b) in basis.iter().enumerate() {
            next[i + 1] += b;
            next[i] -= k as f64 * b;
        }
        basis = next;
    }
    trim(out)
}

pub(crate) fn trim(mut p: Vec<f64>) -> Vec<f64> {
    let scale = p.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    while p.len() > 1 && p.last().is_some_and(|c| c.abs() <= 1e-15 * scale) {
        p.pop();
    }
    p
}

fn horner(p: &[f64], x: f64) -> (f64, f64) {
    let mut v = 0.0;
    let mut mag = 0.0;
    for &c in p.iter().rev() {
        v = v * x + c;
        mag = mag * x.abs() + c.abs();
    }
    (v, mag)
}

/// Divide `p` by `(x - r)`, dropping the remainder.
fn deflate(p: &[f64], r: f64) -> Vec<f64> {
    let n = p.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut q = vec![0.0; n - 1];
    let mut carry = 0.0;
    for i in (1..n).rev() {
        carry = p[i] + carry * r;
        q[i - 1] = carry;
    }
    q
}

/// Evaluate `num(x)/den(x)`, cancelling common zeros at `x` by synthetic
/// division so removable singularities give their limit.
pub(crate) fn rational_eval(num: &[f64], den: &[f64], x: f64) -> f64 {
    let mut num = num.to_vec();
    let mut den = den.to_vec();
    loop {
        let (nv, nm) = horner(&num, x);
        let (dv, dm) = horner(&den, x);
        let num_zero = nv.abs() <= 1e-13 * nm || nm == 0.0;
        let den_zero = dv.abs() <= 1e-13 * dm || dm == 0.0;
        if den_zero && num_zero && num.len() > 1 && den.len() > 1 {
            num = deflate(&num, x);
            den = deflate(&den, x);
            continue;
        }
        if den_zero {
            return if num_zero { 0.0 } else { f64::INFINITY * nv.signum() };
        }
        if num_zero {
            return 0.0;
        }
        return nv / dv;
    }
}

impl GFunction {
    pub fn amplitude(alpha: Vec<f64>, beta: Vec<f64>) -> Self {
        GFunction::Amplitude { alpha, beta }
    }

    /// `g(n)`; `+∞` marks a vanishing death rate with positive birth rate.
    pub fn eval(&self, n: usize) -> Result<f64> {
        match self {
            GFunction::Amplitude { alpha, beta } => {
                let num = falling_to_monomial(alpha);
                let den = falling_to_monomial(beta);
                Ok(rational_eval(&num, &den, n as f64))
            }
            GFunction::Sequence { start, values } => {
                if n < *start {
                    return Err(Error::Domain(format!("g({n}) requested below support start {start}")));
                }
                values.get(n - start).copied().ok_or_else(|| {
                    Error::Domain(format!(
                        "g({n}) beyond tabulated range {}..{}",
                        start,
                        start + values.len()
                    ))
                })
            }
            GFunction::Piecewise { head, tail } => match head.get(n) {
                Some(&v) => Ok(v),
                None => tail.eval(n),
            },
            GFunction::Mixture(m) => mixture_g(m, n),
        }
    }

    /// Monomial numerator and denominator, for amplitude forms only.
    pub fn rational_parts(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            GFunction::Amplitude { alpha, beta } => {
                Some((falling_to_monomial(alpha), falling_to_monomial(beta)))
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn falling_basis_conversion() {
        // 2 + 3 (x)_1 + (x)_2 = 2 + 3x + x^2 - x = x^2 + 2x + 2
        assert_eq!(falling_to_monomial(&[2.0, 3.0, 1.0]), vec![2.0, 2.0, 1.0]);
    }

    #[test]
    fn removable_zero_is_deflated() {
        // geometric amplitudes α1 = 2θ, α2 = θ, β1 = 1: g(n) = θ(n+1)
        let theta = 0.3;
        let g = GFunction::amplitude(vec![0.0, 2.0 * theta, theta], vec![0.0, 1.0]);
        assert!((g.eval(0).unwrap() - theta).abs() < 1e-15);
        assert!((g.eval(5).unwrap() - 6.0 * theta).abs() < 1e-14);
    }

    #[test]
    fn sequence_bounds() {
        let g = GFunction::Sequence { start: 2, values: vec![1.0, 2.0] };
        assert_eq!(g.eval(3).unwrap(), 2.0);
        assert!(g.eval(1).is_err());
        assert!(g.eval(4).is_err());
    }
}
