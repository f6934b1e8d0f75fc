use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bd::{horner, stationary_solve, BdModel};
use crate::error::{param, Error, Result};
use crate::gf::fmt17;
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub t_end: f64,
    /// Defaults to 1% of `t_end`.
    pub burn_in: Option<f64>,
    pub seed: u64,
    pub initial: usize,
    /// Defaults to ten times the 99.9% quantile of the stationary law, or 10^4.
    pub n_cap: Option<usize>,
    pub replicas: usize,
    /// Largest tolerated fraction of observed time spent at the cap.
    pub cap_alarm: f64,
}

impl SimConfig {
    pub fn new(t_end: f64, seed: u64, initial: usize) -> Self {
        Self { t_end, burn_in: None, seed, initial, n_cap: None, replicas: 1, cap_alarm: 1e-6 }
    }
}

/// Time-weighted occupancy and transition counts, merged over replicas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStats {
    pub occupancy: Vec<f64>,
    /// `up_flux[j]`: observed jumps `j → j+1`.
    pub up_flux: Vec<u64>,
    /// `down_flux[j]`: observed jumps `j+1 → j`.
    pub down_flux: Vec<u64>,
    pub observed_time: f64,
    pub cap_time: f64,
    pub n_cap: usize,
    pub events: u64,
    pub replicas: usize,
}

impl TrajectoryStats {
    fn empty(n_cap: usize) -> Self {
        Self {
            occupancy: vec![0.0; n_cap + 1],
            up_flux: vec![0; n_cap + 1],
            down_flux: vec![0; n_cap + 1],
            observed_time: 0.0,
            cap_time: 0.0,
            n_cap,
            events: 0,
            replicas: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.occupancy.iter_mut().zip(&other.occupancy) {
            *a += b;
        }
        for (a, b) in self.up_flux.iter_mut().zip(&other.up_flux) {
            *a += b;
        }
        for (a, b) in self.down_flux.iter_mut().zip(&other.down_flux) {
            *a += b;
        }
        self.observed_time += other.observed_time;
        self.cap_time += other.cap_time;
        self.events += other.events;
        self.replicas += other.replicas;
        self
    }

    /// Occupancy fractions, trimmed after the last visited state.
    pub fn probabilities(&self) -> Vec<f64> {
        let last = self.occupancy.iter().rposition(|&t| t > 0.0).map_or(0, |i| i + 1);
        self.occupancy[..last].iter().map(|t| t / self.observed_time).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,occupancy,probability\n");
        for (j, p) in self.probabilities().iter().enumerate() {
            out.push_str(&format!("{j},{},{}\n", fmt17(self.occupancy[j]), fmt17(*p)));
        }
        out
    }
}

fn default_cap(model: &BdModel) -> usize {
    let Ok(sol) = stationary_solve(model, 4096) else {
        return 10_000;
    };
    let mut acc = 0.0;
    for (n, p) in sol.pmf.probs.iter().enumerate() {
        acc += p;
        if acc >= 0.999 {
            return (10 * n.max(1)).max(sol.floor + 10);
        }
    }
    10_000
}

/// Event-driven (Gillespie) simulation with reflecting boundaries at the
/// floor and at the cap. Replicas run in parallel, each on its own stream.
pub fn simulate_ctmc(model: &BdModel, cfg: &SimConfig) -> Result<TrajectoryStats> {
    if !(cfg.t_end > 0.0 && cfg.t_end.is_finite()) {
        return Err(param(format!("t_end = {} must be positive", cfg.t_end)));
    }
    let burn = cfg.burn_in.unwrap_or(0.01 * cfg.t_end);
    if !(0.0..cfg.t_end).contains(&burn) {
        return Err(param(format!("burn-in {burn} outside [0, t_end)")));
    }
    if cfg.replicas == 0 {
        return Err(param("replicas must be at least 1"));
    }
    let n_cap = cfg.n_cap.unwrap_or_else(|| default_cap(model)).max(model.floor + 1);
    model.check_rates(model.floor, n_cap)?;
    let (a, b) = model.rate_polys();
    let floor = model.floor;
    let birth: Vec<f64> = (0..=n_cap).map(|j| if j == n_cap { 0.0 } else { horner(&a, j as f64).max(0.0) }).collect();
    let death: Vec<f64> = (0..=n_cap)
        .map(|j| if j <= floor { 0.0 } else { (j as f64 * horner(&b, j as f64 - 1.0)).max(0.0) })
        .collect();
    let start = cfg.initial.clamp(floor, n_cap);

    let run = |replica: usize| -> TrajectoryStats {
        let mut rng = stream_rng(cfg.seed, replica as u64);
        let mut st = TrajectoryStats::empty(n_cap);
        st.replicas = 1;
        let mut t = 0.0f64;
        let mut j = start;
        loop {
            let rate = birth[j] + death[j];
            let hold = if rate > 0.0 { -(1.0 - rng.random::<f64>()).ln() / rate } else { f64::INFINITY };
            let t_next = (t + hold).min(cfg.t_end);
            let seen = t_next - t.max(burn);
            if seen > 0.0 {
                st.occupancy[j] += seen;
                if j == n_cap {
                    st.cap_time += seen;
                }
            }
            if t_next >= cfg.t_end {
                break;
            }
            t = t_next;
            st.events += 1;
            let up = rng.random::<f64>() * rate < birth[j];
            if up {
                if t >= burn {
                    st.up_flux[j] += 1;
                }
                j += 1;
            } else {
                j -= 1;
                if t >= burn {
                    st.down_flux[j] += 1;
                }
            }
        }
        st.observed_time = cfg.t_end - burn;
        st
    };
    let stats = (0..cfg.replicas)
        .into_par_iter()
        .map(run)
        .reduce(|| TrajectoryStats::empty(n_cap), TrajectoryStats::merge);
    if stats.cap_time > cfg.cap_alarm * stats.observed_time {
        return Err(Error::Explosion(format!(
            "{:.3e} of the observed time spent at the cap state {n_cap}",
            stats.cap_time / stats.observed_time
        )));
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_death_absorbs_at_floor() {
        let m = BdModel::new(vec![0.0], vec![1.0], 0).unwrap();
        let mut cfg = SimConfig::new(1000.0, 1, 10);
        cfg.n_cap = Some(20);
        let s = simulate_ctmc(&m, &cfg).unwrap();
        assert!(s.probabilities()[0] > 0.95);
    }

    #[test]
    fn replicas_are_reproducible() {
        let m = BdModel::new(vec![1.0, 0.5], vec![1.0], 0).unwrap();
        let mut cfg = SimConfig::new(2000.0, 9, 0);
        cfg.replicas = 3;
        let a = simulate_ctmc(&m, &cfg).unwrap();
        let b = simulate_ctmc(&m, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.replicas, 3);
    }

    #[test]
    fn explosion_alarm() {
        let m = BdModel::new(vec![5.0, 2.0], vec![1.0], 0).unwrap();
        let mut cfg = SimConfig::new(100.0, 1, 0);
        cfg.n_cap = Some(5);
        assert!(matches!(simulate_ctmc(&m, &cfg), Err(Error::Explosion(_))));
    }
}
