use num_complex::Complex64;
use sibuya_core::bd::{
    amplitudes_for, detailed_balance_residual, hypergeometric_pgf, simulate_ctmc, stationary_solve, SimConfig,
};
use sibuya_core::distributions::pmf_table;
use sibuya_core::gf::pgf_coefficients;
use sibuya_core::verify::tv_distance;
use sibuya_core::{BdModel, DistributionSpec, Family};

fn supported() -> Vec<DistributionSpec> {
    use Family::*;
    [
        GeneralizedSibuya { nu: 1.0, gamma: 0.5 },
        GeneralizedSibuya { nu: 2.5, gamma: 1.7 },
        ShiftedGeneralizedSibuya { nu: 0.5, gamma: 0.8 },
        ExtendedSibuya { b: 0.8, gamma: 0.4 },
        ExtendedSibuya { b: 1.0, gamma: 0.4 },
        ExtendedSibuya { b: 0.6, gamma: -1.5 },
        ShiftedExtendedSibuya { b: 0.9, gamma: 0.3 },
        ShiftedExtendedSibuya { b: 1.0, gamma: 0.6 },
        Nbd { q: 0.5, k: 2.0 },
        Cmp2 { theta: 1.0 },
        Cmp2 { theta: 7.5 },
        Logarithmic { theta: 0.7 },
        ZeroInflatedLog { theta: 0.5 },
        Geometric { lambda: 1.5 },
    ]
    .into_iter()
    .map(DistributionSpec::from)
    .collect()
}

#[test]
fn stationary_law_matches_catalog_pmf() {
    for spec in supported() {
        let model = amplitudes_for(&spec).unwrap();
        let sol = stationary_solve(&model, 60).unwrap();
        let table = pmf_table(&spec, 60).unwrap();
        for n in 0..=60 {
            let (a, b) = (sol.pmf.probs[n], table.probs[n]);
            let err = if b == 0.0 { a.abs() } else { ((a - b) / b).abs() };
            assert!(err < 1e-10, "{spec:?} n={n}: {a} vs {b}");
        }
        assert!(detailed_balance_residual(&model, &sol) <= 1e-12, "{spec:?}");
    }
}

#[test]
fn hypergeometric_pgf_reproduces_table() {
    for spec in supported() {
        let model = amplitudes_for(&spec).unwrap();
        let sol = stationary_solve(&model, 40).unwrap();
        let q = hypergeometric_pgf(&sol);
        let coeffs = pgf_coefficients(&q, 40).unwrap();
        for n in 0..=40 {
            let (a, b) = (coeffs.probs[n], sol.pmf.probs[n]);
            assert!((a - b).abs() <= 1e-10, "{spec:?} n={n}: {a} vs {b}");
        }
    }
}

#[test]
fn cmp_pgf_ratio_of_bessel_like_sums() {
    let model = BdModel::new(vec![1.0], vec![1.0, 1.0], 0).unwrap();
    let sol = stationary_solve(&model, 30).unwrap();
    let q = hypergeometric_pgf(&sol);
    let h = |z: f64| {
        let mut t = 1.0;
        let mut s = 1.0;
        for n in 1..60 {
            t *= z / (n * n) as f64;
            s += t;
        }
        s
    };
    assert!((q.eval(0.5).unwrap() - h(0.5) / h(1.0)).abs() < 1e-12);
}

#[test]
fn nbd_pgf_closed_form() {
    let model = BdModel::new(vec![1.0, 0.5], vec![1.0], 0).unwrap();
    let q = hypergeometric_pgf(&stationary_solve(&model, 10).unwrap());
    for i in 0..=20 {
        let w = i as f64 / 20.0;
        let want = (0.5 / (1.0 - 0.5 * w)).powi(2);
        assert!((q.eval(w).unwrap() - want).abs() < 1e-10);
    }
    let z = q.eval_complex(Complex64::new(0.3, 0.4)).unwrap();
    let want = (Complex64::new(0.5, 0.0) / (1.0 - 0.5 * Complex64::new(0.3, 0.4))).powu(2);
    assert!((z - want).norm() < 1e-12);
}

#[test]
fn zero_inflated_log_example_values() {
    let model = BdModel::new(vec![0.5, 1.5, 0.5], vec![2.0, 1.0], 0).unwrap();
    let sol = stationary_solve(&model, 20).unwrap();
    let ln2 = std::f64::consts::LN_2;
    for n in 0..=20 {
        let want = 0.5f64.powi(n as i32 + 1) / ((n as f64 + 1.0) * ln2);
        assert!(((sol.pmf.probs[n] - want) / want).abs() < 1e-12);
    }
}

#[test]
fn simulated_fluxes_balance() {
    let model = BdModel::new(vec![1.0, 0.5], vec![1.0], 0).unwrap();
    let mut cfg = SimConfig::new(1e5, 11, 0);
    cfg.replicas = 2;
    let stats = simulate_ctmc(&model, &cfg).unwrap();
    for j in 0..stats.up_flux.len() {
        let (u, d) = (stats.up_flux[j] as f64, stats.down_flux[j] as f64);
        if u + d >= 2000.0 {
            assert!((u - d).abs() <= 3.0 * (u + d).sqrt(), "state {j}: {u} vs {d}");
        }
    }
    let sol = stationary_solve(&model, stats.n_cap).unwrap();
    let emp = stats.probabilities();
    assert!(tv_distance(&emp, &sol.pmf.probs) < 0.02);
}
