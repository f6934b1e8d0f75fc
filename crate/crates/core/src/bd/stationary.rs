use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bd::{horner, BdModel};
use crate::distributions::{DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::gf::{rational_eval, trim, GFunction, Pgf, PmfTable, Provenance};
use crate::special::{hyp2f1, CompensatedSum};

/// Most terms summed when normalizing.
const MAX_TERMS: usize = 1 << 22;

/// `H = pFq(upper; lower; z)`, parameters sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub z: f64,
}

/// How the normalizing sum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Normalization {
    FiniteSupport { terms: usize },
    Direct { terms: usize },
    /// Gauss's theorem for `2F1` at unit argument.
    Gauss,
    /// Partial sums plus a Richardson-extrapolated power-law tail.
    TailEstimate { terms: usize, exponent: f64 },
}

#[derive(Debug, Clone)]
pub struct StationarySolution {
    pub pmf: PmfTable,
    pub g: GFunction,
    pub floor: usize,
    pub hyper_params: Option<HyperParams>,
    pub normalization: Normalization,
    /// `ln Σ_n Π_{i<n} g(floor+i)/(floor+i+1)`, so `p_floor = exp(-ln_norm)`.
    pub ln_norm: f64,
    /// `lim g(n)/(n+1)` when it exists; bounds the pgf's series radius.
    pub ratio_limit: f64,
}

/// The step ratio `g(j)/(j+1)` as a closure over `j`.
type Ratio = Box<dyn Fn(usize) -> Result<f64> + Send + Sync>;

fn ratio_of(g: &GFunction) -> Ratio {
    match g.rational_parts() {
        Some((num, den)) => Box::new(move |j| Ok(rational_eval(&num, &den, j as f64) / (j as f64 + 1.0))),
        None => {
            let g = g.clone();
            Box::new(move |j| Ok(g.eval(j)? / (j as f64 + 1.0)))
        }
    }
}

/// Solve the stationary equations of a birth-death chain with polynomial rates.
pub fn stationary_solve(model: &BdModel, n_max: usize) -> Result<StationarySolution> {
    if model.alpha.is_empty() || model.beta.is_empty() {
        return Err(Error::Parameter("alpha and beta must be non-empty".into()));
    }
    if model.beta.iter().all(|&b| b == 0.0) {
        return Err(Error::Parameter("all death amplitudes vanish".into()));
    }
    let g = model.g_function();
    let sol = stationary_from_g(g, model.floor, n_max)?;
    model.check_rates(sol.floor, n_max.max(sol.floor) + 1)?;
    Ok(sol)
}

/// The same solution for any g-function, starting the support search at
/// `floor_hint`.
pub fn stationary_from_g(g: GFunction, floor_hint: usize, n_max: usize) -> Result<StationarySolution> {
    let ratio = ratio_of(&g);
    let floor = find_floor(&ratio, floor_hint)?;
    let shape = g.rational_parts().map(|(n, d)| RationalShape::new(&n, &d, floor));
    if let Some(s) = &shape {
        s.check_convergence()?;
    }

    let norm = normalize(&ratio, floor, shape.as_ref())?;
    let (ln_norm, normalization, ratio_limit) = norm;

    let mut probs = vec![0.0; n_max + 1];
    let mut l = 0.0f64;
    let mut comp = 0.0f64;
    let mut alive = true;
    for (n, p) in probs.iter_mut().enumerate().skip(floor) {
        if !alive {
            break;
        }
        *p = (l - ln_norm).exp();
        let r = ratio(n)?;
        if r <= 0.0 {
            alive = false;
            continue;
        }
        // compensated running sum of log-ratios
        let y = r.ln() - comp;
        let t = l + y;
        comp = (t - l) - y;
        l = t;
    }
    let total = CompensatedSum::from_iter(probs.iter().copied()).value();
    let pmf = PmfTable::with_tail(probs, (1.0 - total).max(0.0), Provenance::Stationary);
    Ok(StationarySolution {
        pmf,
        g,
        floor,
        hyper_params: shape.and_then(|s| s.hyper),
        normalization,
        ln_norm,
        ratio_limit,
    })
}

/// Smallest `j ≥ hint` with `g(j) > 0` and `g(j-1) ≤ 0` (or `j = hint`);
/// a chain with `g ≡ 0` from the hint on sits at the hint.
fn find_floor(ratio: &Ratio, hint: usize) -> Result<usize> {
    for j in hint..hint + 10_000 {
        let r = match ratio(j) {
            Ok(r) => r,
            Err(_) => return Ok(hint),
        };
        if r.is_nan() {
            return Err(Error::Domain(format!("g({j}) is undefined")));
        }
        if r > 0.0 && (j == hint || ratio(j - 1)? <= 0.0) {
            return Ok(j);
        }
        if r > 0.0 {
            break;
        }
    }
    Ok(hint)
}

/// Asymptotics and hypergeometric parameters of a rational `g`.
struct RationalShape {
    /// `deg N - deg D - 1`: sign decides the ratio-test limit.
    excess: isize,
    z: f64,
    /// Raabe exponent when `z = 1`: `p_{n+1}/p_n = 1 - s/n + O(n^-2)`.
    raabe: f64,
    hyper: Option<HyperParams>,
}

impl RationalShape {
    fn new(num: &[f64], den: &[f64], floor: usize) -> Self {
        let num = trim(num.to_vec());
        let den = trim(den.to_vec());
        let dn = num.len() as isize - 1;
        let dd = den.len() as isize - 1;
        let zero_num = num.iter().all(|&c| c == 0.0);
        let z = if zero_num { 0.0 } else { num[num.len() - 1] / den[den.len() - 1] };
        // R(x) = (x + 1) D(x)
        let mut r = vec![0.0; den.len() + 1];
        for (i, &c) in den.iter().enumerate() {
            r[i] += c;
            r[i + 1] += c;
        }
        let d = r.len() - 1;
        let raabe = if num.len() == r.len() && d >= 1 {
            (r[d - 1] - num[d - 1]) / r[d]
        } else {
            f64::NAN
        };
        let hyper = if zero_num { None } else { hyper_params(&num, &den, floor, z) };
        Self { excess: dn - dd - 1, z, raabe, hyper }
    }

    fn check_convergence(&self) -> Result<()> {
        if self.z <= 0.0 {
            // g turns non-positive eventually, so the support is finite
            return Ok(());
        }
        if self.excess > 0 {
            return Err(Error::Divergence("g(n)/(n+1) grows without bound".into()));
        }
        if self.excess == 0 {
            if self.z > 1.0 + 1e-12 {
                return Err(Error::Divergence(format!("g(n)/(n+1) -> {} > 1", self.z)));
            }
            if (self.z - 1.0).abs() <= 1e-12 && self.raabe <= 1.0 {
                return Err(Error::Divergence(format!(
                    "g(n)/(n+1) -> 1 with p_n ~ n^-{}, not summable",
                    self.raabe
                )));
            }
        }
        Ok(())
    }

    fn unit_limit(&self) -> bool {
        self.excess == 0 && (self.z - 1.0).abs() <= 1e-12
    }
}

/// Roots of a real polynomial (lowest degree first).
fn poly_roots(p: &[f64]) -> Vec<Complex64> {
    let p = trim(p.to_vec());
    let deg = p.len() - 1;
    match deg {
        0 => vec![],
        1 => vec![Complex64::new(-p[0] / p[1], 0.0)],
        2 => {
            let (a, b, c) = (p[2], p[1], p[0]);
            let disc = b * b - 4.0 * a * c;
            if disc.abs() <= 1e-12 * b * b {
                let r = Complex64::new(-b / (2.0 * a), 0.0);
                return vec![r, r];
            }
            if disc > 0.0 {
                let q = -0.5 * (b + b.signum() * disc.sqrt());
                let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
                return vec![Complex64::new(r1, 0.0), Complex64::new(r2, 0.0)];
            }
            let re = -b / (2.0 * a);
            let im = (-disc).sqrt() / (2.0 * a);
            vec![Complex64::new(re, im), Complex64::new(re, -im)]
        }
        _ => durand_kerner(&p),
    }
}

fn durand_kerner(p: &[f64]) -> Vec<Complex64> {
    let deg = p.len() - 1;
    let lead = p[deg];
    let monic: Vec<f64> = p.iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| monic.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c);
    let seed = Complex64::new(0.4, 0.9);
    let scale = 1.0 + monic[..deg].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut roots: Vec<Complex64> = (0..deg).map(|k| seed.powu(k as u32) * scale).collect();
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if i != j {
                    den *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / den;
            roots[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-15 * scale {
            break;
        }
    }
    // multiple roots converge slowly but symmetrically: average clusters
    let mut out = roots.clone();
    for i in 0..deg {
        let cluster: Vec<Complex64> =
            roots.iter().copied().filter(|r| (r - roots[i]).norm() < 1e-5 * (1.0 + roots[i].norm())).collect();
        out[i] = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
    }
    out
}

fn real_roots(p: &[f64]) -> Option<Vec<f64>> {
    poly_roots(p)
        .into_iter()
        .map(|r| (r.im.abs() <= 1e-9 * (1.0 + r.re.abs())).then_some(r.re))
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

/// Remove pairs of (approximately) equal entries between the two lists.
fn cancel_pairs(a: &mut Vec<f64>, b: &mut Vec<f64>) {
    let mut i = 0;
    while i < a.len() {
        if let Some(j) = b.iter().position(|&y| close(a[i], y)) {
            a.remove(i);
            b.remove(j);
        } else {
            i += 1;
        }
    }
}

/// `a_i = floor - r_i`, `b_j = floor - s_j`, plus the pair `(1; floor+1)`
/// that turns the product into `z^n/n!` form.
fn hyper_params(num: &[f64], den: &[f64], floor: usize, z: f64) -> Option<HyperParams> {
    let mut rn = real_roots(num)?;
    let mut rd = real_roots(den)?;
    cancel_pairs(&mut rn, &mut rd);
    let f = floor as f64;
    let mut upper: Vec<f64> = rn.iter().map(|r| f - r).chain([1.0]).collect();
    let mut lower: Vec<f64> = rd.iter().map(|s| f - s).chain([f + 1.0]).collect();
    cancel_pairs(&mut upper, &mut lower);
    upper.sort_by(f64::total_cmp);
    lower.sort_by(f64::total_cmp);
    Some(HyperParams { upper, lower, z })
}

/// Returns `(ln Z, method, lim ratio)`.
fn normalize(ratio: &Ratio, floor: usize, shape: Option<&RationalShape>) -> Result<(f64, Normalization, f64)> {
    let limit = shape.map_or(f64::NAN, |s| if s.excess < 0 { 0.0 } else { s.z });
    if let Some(s) = shape {
        if s.unit_limit() {
            if let Some(h) = &s.hyper {
                if h.upper.len() == 2 && h.lower.len() == 1 && h.upper.iter().all(|&a| a > 0.0) {
                    let v = hyp2f1(h.upper[0], h.upper[1], h.lower[0], 1.0)?;
                    return Ok((v.ln(), Normalization::Gauss, 1.0));
                }
            }
        }
    }
    // log terms, stopping once negligible past the peak
    let mut logs: Vec<f64> = vec![0.0];
    let mut l = 0.0f64;
    let mut max_l = 0.0f64;
    let mut finite = false;
    let mut converged = false;
    let mut last_ratio = f64::NAN;
    let mut i = 0usize;
    while logs.len() < MAX_TERMS {
        let r = match ratio(floor + i) {
            Ok(r) => r,
            Err(_) => break,
        };
        if r.is_nan() {
            return Err(Error::Domain(format!("g({}) is undefined", floor + i)));
        }
        if r <= 0.0 {
            finite = true;
            break;
        }
        if r.is_infinite() {
            return Err(Error::Divergence(format!("death rate vanishes at state {}", floor + i + 1)));
        }
        last_ratio = r;
        l += r.ln();
        logs.push(l);
        max_l = max_l.max(l);
        i += 1;
        if r < 1.0 && l - max_l < (1e-18f64).ln() - (logs.len() as f64).ln() {
            converged = true;
            break;
        }
    }
    let sum_from = |logs: &[f64], shift: f64| -> f64 {
        logs.iter().map(|&x| (x - shift).exp()).collect::<CompensatedSum>().value()
    };
    let terms = logs.len();
    if finite {
        let s = sum_from(&logs, max_l);
        return Ok((max_l + s.ln(), Normalization::FiniteSupport { terms }, 0.0));
    }
    if converged {
        let s = sum_from(&logs, max_l);
        return Ok((max_l + s.ln(), Normalization::Direct { terms }, limit));
    }
    // power-law tail: p_n ~ C n^-s
    let s_exp = match shape {
        Some(sh) if sh.unit_limit() => sh.raabe,
        _ => {
            if last_ratio.is_finite() && last_ratio < 0.999 {
                // geometric tail beyond a truncated tabulation
                let s = sum_from(&logs, max_l);
                let tail = (logs[terms - 1] - max_l).exp() * last_ratio / (1.0 - last_ratio);
                return Ok((max_l + (s + tail).ln(), Normalization::TailEstimate { terms, exponent: f64::NAN }, limit));
            }
            let n = terms as f64;
            let local = n * (1.0 - last_ratio);
            if !(local > 1.0) {
                return Err(Error::Divergence("step ratios approach 1 too fast for a summable law".into()));
            }
            local
        }
    };
    let estimate = |n: usize| -> f64 {
        let part = sum_from(&logs[..n], max_l);
        let state = (floor + n - 1) as f64;
        let t = (logs[n - 1] - max_l).exp();
        part + t * state.powf(s_exp) * (state + 0.5).powf(1.0 - s_exp) / (s_exp - 1.0)
    };
    let n2 = terms;
    let n1 = n2 / 2;
    if n1 < 16 {
        return Err(Error::Convergence("too few terms to estimate the tail".into()));
    }
    let (e1, e2) = (estimate(n1), estimate(n2));
    let k = 2f64.powf(s_exp);
    let z = (k * e2 - e1) / (k - 1.0);
    Ok((max_l + z.ln(), Normalization::TailEstimate { terms, exponent: s_exp }, 1.0))
}

/// `max_j |μ_{j+1} p_{j+1} - λ_j p_j| / max(λ_j p_j, 1e-300)` over the
/// tabulated support; the floor is a reflecting boundary, so flow into it
/// from below is not counted.
pub fn detailed_balance_residual(model: &BdModel, sol: &StationarySolution) -> f64 {
    let (a, b) = model.rate_polys();
    let p = &sol.pmf.probs;
    let mut worst = 0.0f64;
    for j in sol.floor..p.len().saturating_sub(1) {
        let lam = horner(&a, j as f64);
        let mu = (j + 1) as f64 * horner(&b, j as f64);
        let flow = lam * p[j];
        let r = (mu * p[j + 1] - flow).abs() / flow.abs().max(1e-300);
        worst = worst.max(r);
    }
    worst
}

/// Amplitudes (largest death amplitude scaled to 1) whose stationary law is
/// the given family.
pub fn amplitudes_for(spec: &DistributionSpec) -> Result<BdModel> {
    use Family::*;
    let (alpha, beta, floor) = match spec.family {
        GeneralizedSibuya { nu, gamma } => (vec![nu - gamma, 2.0 + nu - gamma, 1.0], vec![nu + 1.0, 1.0], 1),
        ShiftedGeneralizedSibuya { nu, gamma } => {
            (vec![1.0 + nu - gamma, 3.0 + nu - gamma, 1.0], vec![nu + 2.0, 1.0], 0)
        }
        ExtendedSibuya { b, gamma } => (vec![0.0, b * (1.0 - gamma), b], vec![0.0, 1.0], 1),
        ShiftedExtendedSibuya { b, gamma } => {
            (vec![b * (1.0 - gamma), b * (3.0 - gamma), b], vec![2.0, 1.0], 0)
        }
        Nbd { q, k } => (vec![q * k, q], vec![1.0], 0),
        Cmp2 { theta } => (vec![theta], vec![1.0, 1.0], 0),
        Logarithmic { theta } => (vec![0.0, theta, theta], vec![0.0, 1.0], 1),
        ZeroInflatedLog { theta } => (vec![theta, 3.0 * theta, theta], vec![2.0, 1.0], 0),
        Geometric { lambda } => {
            let theta = lambda / (1.0 + lambda);
            (vec![0.0, 2.0 * theta, theta], vec![0.0, 1.0], 0)
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "{} has no polynomial birth-death representation",
                spec.name()
            )))
        }
    };
    if let Some((k, a)) = alpha.iter().enumerate().find(|(_, a)| **a < 0.0) {
        return Err(Error::NegativeAmplitude(format!("{}: alpha_{k} = {a} < 0", spec.name())));
    }
    Ok(BdModel { alpha, beta, floor })
}

/// `Q(w) = w^floor H(zw)/H(z)`, summed from the g-product so it agrees with
/// the tabulated solution term by term.
pub fn hypergeometric_pgf(sol: &StationarySolution) -> Pgf {
    let radius = if sol.ratio_limit > 0.0 { 1.0 / sol.ratio_limit } else { f64::INFINITY };
    let ratio = ratio_of(&sol.g);
    let floor = sol.floor;
    let ln_norm = sol.ln_norm;
    let name = match &sol.hyper_params {
        Some(h) => format!("{}F{} hypergeometric pgf, z = {}", h.upper.len(), h.lower.len(), h.z),
        None => "stationary birth-death pgf".to_string(),
    };
    let f = move |w: Complex64| -> Result<Complex64> {
        if w.norm() > radius * (1.0 + 1e-12) {
            return Err(Error::Convergence(format!("|w| = {} outside series radius {radius}", w.norm())));
        }
        if (w - 1.0).norm() < 1e-15 {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        let mut ln_scale = 0.0f64;
        for i in 0..10_000_000usize {
            let r = match ratio(floor + i) {
                Ok(r) => r,
                Err(e) => {
                    return Err(Error::Convergence(format!("pgf series ran past the g table: {e}")));
                }
            };
            if r <= 0.0 {
                return Ok(finish(sum, ln_scale, ln_norm, w, floor));
            }
            term *= w * r;
            sum += term;
            if sum.norm() > 1e200 {
                sum /= 1e200;
                term /= 1e200;
                ln_scale += 200.0 * std::f64::consts::LN_10;
            }
            if r * w.norm() < 1.0 && term.norm() <= 1e-17 * sum.norm() {
                return Ok(finish(sum, ln_scale, ln_norm, w, floor));
            }
            if term.norm() == 0.0 {
                return Ok(finish(sum, ln_scale, ln_norm, w, floor));
            }
        }
        Err(Error::Convergence(format!("pgf series at |w| = {} did not converge", w.norm())))
    };
    Pgf::custom(name, f, radius.max(1.0), false)
}

fn finish(sum: Complex64, ln_scale: f64, ln_norm: f64, w: Complex64, floor: usize) -> Complex64 {
    sum * (ln_scale - ln_norm).exp() * w.powu(floor as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::pmf_table;

    #[test]
    fn nbd_from_amplitudes() {
        let m = BdModel::new(vec![1.0, 0.5], vec![1.0], 0).unwrap();
        let s = stationary_solve(&m, 20).unwrap();
        assert!((s.pmf.probs[0] - 0.25).abs() < 1e-14);
        assert!((s.pmf.probs[2] - 0.1875).abs() < 1e-14);
        let h = s.hyper_params.unwrap();
        assert_eq!(h.upper, vec![2.0]);
        assert!(h.lower.is_empty());
        assert_eq!(h.z, 0.5);
    }

    #[test]
    fn cmp_normaliser() {
        let m = BdModel::new(vec![1.0], vec![1.0, 1.0], 0).unwrap();
        let s = stationary_solve(&m, 10).unwrap();
        assert!((s.pmf.probs[0] - 1.0 / 2.279_585_302_336_067).abs() < 1e-14);
        assert!(detailed_balance_residual(&m, &s) < 1e-12);
    }

    #[test]
    fn generalized_sibuya_uses_gauss() {
        let spec: DistributionSpec = Family::GeneralizedSibuya { nu: 1.0, gamma: 0.5 }.into();
        let m = amplitudes_for(&spec).unwrap();
        assert_eq!(m.alpha, vec![0.5, 2.5, 1.0]);
        assert_eq!(m.beta, vec![2.0, 1.0]);
        let s = stationary_solve(&m, 60).unwrap();
        assert_eq!(s.floor, 1);
        assert_eq!(s.normalization, Normalization::Gauss);
        let t = pmf_table(&spec, 60).unwrap();
        for n in 1..=60 {
            assert!(((s.pmf.probs[n] - t.probs[n]) / t.probs[n]).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn negative_amplitude_for_gamma_above_nu() {
        let spec: DistributionSpec = Family::GeneralizedSibuya { nu: 0.0, gamma: 0.5 }.into();
        assert!(matches!(amplitudes_for(&spec), Err(Error::NegativeAmplitude(_))));
        // the g-function route still works
        let s = stationary_from_g(crate::distributions::g_function(&spec).unwrap(), 1, 30).unwrap();
        assert!((s.pmf.probs[1] - 0.5).abs() < 1e-12);
        assert!((s.pmf.probs[2] - 0.125).abs() < 1e-12);
    }

    #[test]
    fn divergence_detected() {
        let m = BdModel::new(vec![1.0, 1.5], vec![1.0], 0).unwrap();
        assert!(matches!(stationary_solve(&m, 10), Err(Error::Divergence(_))));
        // p_n ~ 1/n: ratio -> 1 with Raabe exponent 1
        let m = BdModel::new(vec![0.0, 1.0], vec![1.0], 1).unwrap();
        assert!(matches!(stationary_solve(&m, 10), Err(Error::Divergence(_))));
    }

    #[test]
    fn point_mass_pgf() {
        let m = BdModel::new(vec![0.0], vec![1.0], 3).unwrap();
        let s = stationary_solve(&m, 6).unwrap();
        assert_eq!(s.pmf.probs[3], 1.0);
        let q = hypergeometric_pgf(&s);
        assert!((q.eval(0.5).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn roots_of_cubic() {
        // (x-1)(x+2)(x-3)
        let r = real_roots(&[6.0, -5.0, -2.0, 1.0]).unwrap();
        let mut r = r;
        r.sort_by(f64::total_cmp);
        for (got, want) in r.iter().zip([-2.0, 1.0, 3.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
