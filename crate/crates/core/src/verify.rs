//! Monte-Carlo comparison helpers: histograms, total variation and
//! chi-square tests.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Counts of each value `0..=max_state`; larger values land in the last slot
/// of the returned `(counts, overflow)` pair.
pub fn histogram(samples: &[u64], max_state: usize) -> (Vec<u64>, u64) {
    let mut counts = vec![0u64; max_state + 1];
    let mut overflow = 0;
    for &s in samples {
        match counts.get_mut(s as usize) {
            Some(c) if s <= max_state as u64 => *c += 1,
            _ => overflow += 1,
        }
    }
    (counts, overflow)
}

/// Empirical frequencies from counts.
pub fn frequencies(counts: &[u64], total: u64) -> Vec<f64> {
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}

/// Half the ℓ1 distance between two pmfs; missing entries count as zero.
pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
    0.5 * (0..n).map(|i| (get(p, i) - get(q, i)).abs()).sum::<f64>()
}

/// Result of a chi-square test.
#[derive(Debug, Clone, Copy)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

fn upper_tail(statistic: f64, dof: usize) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    let chi = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    chi.sf(statistic)
}

/// Goodness of fit of `counts` on `states` against `probs` (same indexing).
///
/// Mass outside the listed states forms one extra cell; cells with expected
/// count below 5 are pooled into it.
pub fn chi_square_gof(counts: &[u64], probs: &[f64], states: std::ops::Range<usize>, total: u64) -> ChiSquare {
    let n = total as f64;
    let mut stat = 0.0;
    let mut cells = 0usize;
    let mut rest_obs = total as f64;
    let mut rest_exp = n;
    for s in states {
        let e = probs.get(s).copied().unwrap_or(0.0) * n;
        let o = counts.get(s).copied().unwrap_or(0) as f64;
        if e < 5.0 {
            continue;
        }
        stat += (o - e) * (o - e) / e;
        cells += 1;
        rest_obs -= o;
        rest_exp -= e;
    }
    if rest_exp >= 5.0 {
        stat += (rest_obs - rest_exp) * (rest_obs - rest_exp) / rest_exp;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    ChiSquare { statistic: stat, dof, p_value: upper_tail(stat, dof) }
}

/// Two-sample chi-square homogeneity test on the listed states plus a
/// remainder cell.
pub fn chi_square_two_sample(a: &[u64], b: &[u64], states: std::ops::Range<usize>) -> ChiSquare {
    let na: u64 = a.iter().sum();
    let nb: u64 = b.iter().sum();
    let (na, nb) = (na as f64, nb as f64);
    let ka = (nb / na).sqrt();
    let kb = (na / nb).sqrt();
    let mut stat = 0.0;
    let mut cells: usize = 0;
    let mut rest_a = na;
    let mut rest_b = nb;
    for s in states {
        let oa = a.get(s).copied().unwrap_or(0) as f64;
        let ob = b.get(s).copied().unwrap_or(0) as f64;
        if oa + ob < 10.0 {
            continue;
        }
        stat += (ka * oa - kb * ob).powi(2) / (oa + ob);
        cells += 1;
        rest_a -= oa;
        rest_b -= ob;
    }
    if rest_a + rest_b >= 10.0 {
        stat += (ka * rest_a - kb * rest_b).powi(2) / (rest_a + rest_b);
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    ChiSquare { statistic: stat, dof, p_value: upper_tail(stat, dof) }
}
