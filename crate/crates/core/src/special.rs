//! Special functions needed by the distribution catalog.
//!
//! Gamma and log-gamma for positive arguments come from `statrs`; everything
//! else (reflection for negative arguments, generalized binomials, the upper
//! incomplete gamma with negative order, modified Bessel `I_j`, and the
//! hypergeometric series) is implemented here.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// `ln |Γ(x)|` for any real `x` that is not a non-positive integer.
pub fn ln_abs_gamma(x: f64) -> f64 {
    if x >= 0.5 {
        ln_gamma(x)
    } else {
        // Γ(x)Γ(1-x) = π / sin(πx)
        PI.ln() - (PI * x).sin().abs().ln() - ln_gamma(1.0 - x)
    }
}

/// `Γ(x)` for any real `x` that is not a non-positive integer.
pub fn gamma(x: f64) -> f64 {
    if x >= 0.5 {
        statrs::function::gamma::gamma(x)
    } else {
        PI / ((PI * x).sin() * statrs::function::gamma::gamma(1.0 - x))
    }
}

/// `-Γ(-r)` for `r ∈ (0,1)`, written as `Γ(2-r) / (r(1-r))` so that no pole
/// is evaluated.
pub fn neg_gamma_neg(r: f64) -> f64 {
    gamma(2.0 - r) / (r * (1.0 - r))
}

/// Falling factorial `(x)_k = x (x-1) ... (x-k+1)`.
pub fn falling(x: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x - i as f64))
}

/// Rising factorial (Pochhammer) `x (x+1) ... (x+k-1)`.
pub fn rising(x: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// The sequence `(-1)^n C(e, n)` for `n = 0..=n_max`, i.e. the Taylor
/// coefficients of `(1 - w)^e`.
pub fn signed_binomials(e: f64, n_max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut t = 1.0;
    out.push(t);
    for n in 1..=n_max {
        t *= (n as f64 - 1.0 - e) / n as f64;
        out.push(t);
    }
    out
}

/// `ln |C(e, n)|` for non-integer `e`, via `|Γ(n-e)| / (|Γ(-e)| n!)`.
pub fn ln_abs_binomial(e: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    ln_abs_gamma(n as f64 - e) - ln_abs_gamma(-e) - ln_gamma(n as f64 + 1.0)
}

/// `e^x Γ(a, x)` for real `a` (not a non-positive integer) and `x > 0`.
///
/// Continued fraction for `x > 1.5`, power series for the lower function
/// otherwise.
pub fn scaled_upper_gamma(a: f64, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x > 1.5 {
        // modified Lentz on Γ(a,x) = e^{-x} x^a / (x+1-a- 1(1-a)/(x+3-a- ...))
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        x.powf(a) * h
    } else {
        // γ(a,x) = x^a Σ (-x)^k / (k! (a+k))
        let mut sum = CompensatedSum::new();
        let mut term = 1.0;
        for k in 0..200 {
            if k > 0 {
                term *= -x / k as f64;
            }
            let t = term / (a + k as f64);
            sum.add(t);
            if t.abs() < 1e-18 * sum.value().abs() && k > 5 {
                break;
            }
        }
        let lower = x.powf(a) * sum.value();
        x.exp() * (gamma(a) - lower)
    }
}

/// Modified Bessel function `I_j(x)` of integer order by its power series.
pub fn bessel_i(j: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powi(j as i32) / statrs::function::gamma::gamma(j as f64 + 1.0);
    let mut sum = CompensatedSum::new();
    sum.add(term);
    let q = half * half;
    for k in 1..1000 {
        term *= q / (k as f64 * (k + j) as f64);
        sum.add(term);
        if term < 1e-17 * sum.value() {
            break;
        }
    }
    sum.value()
}

/// Generalized hypergeometric series `pFq(a; b; z)` summed directly.
///
/// Fails with a convergence error when the terms are still significant after
/// `max_terms`, which also covers `|z|` outside the radius of convergence.
pub fn hyp_pfq(a: &[f64], b: &[f64], z: Complex64, max_terms: usize) -> Result<Complex64> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut comp = Complex64::new(0.0, 0.0);
    let mut small = 0;
    for n in 0..max_terms {
        let nf = n as f64;
        let num: f64 = a.iter().map(|&ai| ai + nf).product();
        let den: f64 = b.iter().map(|&bi| bi + nf).product();
        if num == 0.0 {
            return Ok(sum + comp);
        }
        term *= z * (num / (den * (nf + 1.0)));
        let t = sum + term;
        // compensated accumulation component-wise
        comp += if sum.norm() >= term.norm() { (sum - t) + term } else { (term - t) + sum };
        sum = t;
        if term.norm() <= 1e-17 * (sum + comp).norm() {
            small += 1;
            if small >= 3 {
                return Ok(sum + comp);
            }
        } else {
            small = 0;
        }
        if !term.norm().is_finite() {
            break;
        }
    }
    Err(Error::Convergence(format!(
        "hypergeometric series did not converge at |z| = {}",
        z.norm()
    )))
}

/// Real Gauss hypergeometric `2F1(a, b; c; z)` for `z ∈ [0, 1]`.
///
/// Uses the power series up to `z = 0.9`, Gauss's summation theorem at
/// `z = 1`, and the `1 - z` connection formula in between when `c - a - b` is
/// not an integer.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let s = c - a - b;
    if z == 1.0 {
        if s <= 0.0 {
            return Err(Error::Domain(format!("2F1 diverges at z=1 with c-a-b={s}")));
        }
        return Ok((ln_abs_gamma(c) + ln_abs_gamma(s) - ln_abs_gamma(c - a) - ln_abs_gamma(c - b))
            .exp()
            * gamma_sign(c)
            * gamma_sign(s)
            * gamma_sign(c - a)
            * gamma_sign(c - b));
    }
    let near_integer = (s - s.round()).abs() < 1e-9;
    if z <= 0.9 || near_integer {
        return hyp_pfq(&[a, b], &[c], Complex64::new(z, 0.0), 2_000_000).map(|v| v.re);
    }
    let y = Complex64::new(1.0 - z, 0.0);
    let f1 = hyp_pfq(&[a, b], &[a + b - c + 1.0], y, 100_000)?.re;
    let f2 = hyp_pfq(&[c - a, c - b], &[s + 1.0], y, 100_000)?.re;
    let coef1 = gamma(c) * gamma(s) / (gamma(c - a) * gamma(c - b));
    let coef2 = gamma(c) * gamma(-s) / (gamma(a) * gamma(b));
    Ok(coef1 * f1 + coef2 * (1.0 - z).powf(s) * f2)
}

fn gamma_sign(x: f64) -> f64 {
    if x > 0.0 || (x.floor() as i64) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
