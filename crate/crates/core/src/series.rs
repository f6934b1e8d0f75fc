//! Truncated power-series arithmetic on coefficient vectors.
//!
//! Every routine takes the number of output coefficients `len` explicitly;
//! inputs shorter than `len` are treated as zero-padded.

use crate::error::{Error, Result};
use crate::special::CompensatedSum;

fn at(a: &[f64], i: usize) -> f64 {
    a.get(i).copied().unwrap_or(0.0)
}

pub fn mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `1 / a` as a series; requires `a[0] != 0`.
pub fn reciprocal(a: &[f64], len: usize) -> Result<Vec<f64>> {
    divide(&[1.0], a, len)
}

/// `a / b` as a series; requires `b[0] != 0`.
pub fn divide(a: &[f64], b: &[f64], len: usize) -> Result<Vec<f64>> {
    divide_tracked(a, b, len).map(|(q, _)| q)
}

/// Series division with compensated accumulation.
///
/// Also returns, for each output coefficient, the sum of the absolute values
/// of the terms that produced it. Cancellation shows up as a coefficient much
/// smaller than its scale.
pub fn divide_tracked(a: &[f64], b: &[f64], len: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let b0 = at(b, 0);
    if b0 == 0.0 || !b0.is_finite() {
        return Err(Error::DivisionInstability("leading divisor coefficient is zero".into()));
    }
    let mut q: Vec<f64> = Vec::with_capacity(len);
    let mut scale = Vec::with_capacity(len);
    for n in 0..len {
        let mut acc = CompensatedSum::new();
        let mut mag = at(a, n).abs();
        acc.add(at(a, n));
        for k in 1..=n.min(b.len().saturating_sub(1)) {
            let t = b[k] * q[n - k];
            acc.add(-t);
            mag += t.abs();
        }
        q.push(acc.value() / b0);
        scale.push(mag / b0.abs());
    }
    Ok((q, scale))
}

/// `f(g(u))` for a series `g` with `g[0] == 0`, by Horner's scheme.
pub fn compose(f: &[f64], g: &[f64], len: usize) -> Result<Vec<f64>> {
    if at(g, 0) != 0.0 {
        return Err(Error::Domain("inner series must vanish at the origin".into()));
    }
    let mut out = vec![0.0; len];
    let top = f.len().min(len);
    for k in (0..top).rev() {
        out = mul(&out, g, len);
        if len > 0 {
            out[0] += f[k];
        }
    }
    Ok(out)
}

pub fn derivative(a: &[f64]) -> Vec<f64> {
    a.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

/// Compositional inverse: the series `g` with `f(g(u)) = u`.
///
/// Newton iteration `g ← g - (f∘g - u) / (f'∘g)` doubling the number of
/// correct coefficients per step.
pub fn revert(f: &[f64], len: usize) -> Result<Vec<f64>> {
    if at(f, 0) != 0.0 {
        return Err(Error::Inversion("series must vanish at the origin".into()));
    }
    let f1 = at(f, 1);
    if f1 == 0.0 {
        return Err(Error::Inversion("linear coefficient is zero".into()));
    }
    if len <= 1 {
        return Ok(vec![0.0; len]);
    }
    let df = derivative(f);
    let mut g = vec![0.0, 1.0 / f1];
    let mut m = 2;
    while m < len {
        m = (2 * m).min(len);
        g.resize(m, 0.0);
        let mut resid = compose(f, &g, m)?;
        resid[1] -= 1.0;
        let slope = compose(&df, &g, m)?;
        let step = divide(&resid, &slope, m)?;
        for (gi, si) in g.iter_mut().zip(step) {
            *gi -= si;
        }
    }
    // one polishing step at full length
    let mut resid = compose(f, &g, len)?;
    resid[1] -= 1.0;
    let slope = compose(&df, &g, len)?;
    let step = divide(&resid, &slope, len)?;
    for (gi, si) in g.iter_mut().zip(step) {
        *gi -= si;
    }
    g.truncate(len);
    Ok(g)
}

/// `exp(a)` as a series, via `n b_n = Σ_k k a_k b_{n-k}`.
pub fn exp(a: &[f64], len: usize) -> Vec<f64> {
    if len == 0 {
        return Vec::new();
    }
    let mut b = vec![0.0; len];
    b[0] = at(a, 0).exp();
    for n in 1..len {
        let mut acc = CompensatedSum::new();
        for k in 1..=n.min(a.len().saturating_sub(1)) {
            acc.add(k as f64 * a[k] * b[n - k]);
        }
        b[n] = acc.value() / n as f64;
    }
    b
}

/// `a^e` for a series with `a[0] = 1` and real exponent `e`.
pub fn pow(a: &[f64], e: f64, len: usize) -> Result<Vec<f64>> {
    if (at(a, 0) - 1.0).abs() > 1e-15 {
        return Err(Error::Domain("power series must start with 1".into()));
    }
    if len == 0 {
        return Ok(Vec::new());
    }
    // n b_n = Σ_{k=1}^{n} (e k - (n - k)) a_k b_{n-k}
    let mut b = vec![0.0; len];
    b[0] = 1.0;
    for n in 1..len {
        let mut acc = CompensatedSum::new();
        for k in 1..=n.min(a.len().saturating_sub(1)) {
            acc.add((e * k as f64 - (n - k) as f64) * a[k] * b[n - k]);
        }
        b[n] = acc.value() / n as f64;
    }
    Ok(b)
}

/// Evaluate a real series at a complex point by Horner's scheme.
pub fn eval_complex(a: &[f64], z: num_complex::Complex64) -> num_complex::Complex64 {
    a.iter().rev().fold(num_complex::Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            assert!((x - y).abs() < tol, "index {i}: {x} vs {y}");
        }
    }

    #[test]
    fn reciprocal_of_one_minus_u() {
        let r = reciprocal(&[1.0, -1.0], 6).unwrap();
        close(&r, &[1.0; 6], 1e-15);
    }

    #[test]
    fn exp_and_pow() {
        let e = exp(&[0.0, 1.0], 6);
        let fact = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];
        let want: Vec<f64> = fact.iter().map(|f| 1.0 / f).collect();
        close(&e, &want, 1e-15);
        // (1+u)^2 = 1 + 2u + u^2
        close(&pow(&[1.0, 1.0], 2.0, 4).unwrap(), &[1.0, 2.0, 1.0, 0.0], 1e-15);
    }

    #[test]
    fn reversion_of_catalan_equation() {
        // f(u) = u - u^2 has inverse with Catalan coefficients
        let g = revert(&[0.0, 1.0, -1.0], 8).unwrap();
        close(&g, &[0.0, 1.0, 1.0, 2.0, 5.0, 14.0, 42.0, 132.0], 1e-9);
    }

    #[test]
    fn composition_with_geometric() {
        // 1/(1-x) ∘ u = Σ u^n
        let geo = vec![1.0; 8];
        let c = compose(&geo, &[0.0, 1.0], 8).unwrap();
        close(&c, &geo, 1e-15);
        assert!(compose(&geo, &[0.5, 1.0], 8).is_err());
    }
}
