use sibuya_core::branching::*;
use sibuya_core::distributions::Family;
use sibuya_core::verify::tv_distance;
use sibuya_core::{series, Error, Pgf};

fn c_of(b: f64, g: f64) -> f64 {
    1.0 - (1.0 - b).powf(g)
}

// H(u) = u b / (1 - (1 - u c)^{1/γ}), with its limit b γ / c at u = 0.
fn h_oracle(b: f64, g: f64, u: f64) -> f64 {
    let c = c_of(b, g);
    if u == 0.0 {
        return b * g / c;
    }
    u * b / (1.0 - (1.0 - u * c).powf(1.0 / g))
}

fn ext_pgf(b: f64, g: f64, w: f64) -> f64 {
    (1.0 - (1.0 - b * w).powf(g)) / c_of(b, g)
}

fn ext_pmf(b: f64, g: f64, len: usize) -> Vec<f64> {
    let mut p = vec![0.0; len];
    p[1] = b * g / c_of(b, g);
    for n in 1..len - 1 {
        p[n + 1] = p[n] * b * (n as f64 - g) / (n as f64 + 1.0);
    }
    p
}

fn sibuya_pmf(g: f64, len: usize) -> Vec<f64> {
    ext_pmf(1.0, g, len)
}

#[test]
fn inversion_of_extended_sibuya() {
    let (b, g) = (0.9, 0.6);
    let q = Pgf::family(Family::ExtendedSibuya { b, gamma: g }.into());
    let r = offspring_from_progeny(&q, 200).unwrap();
    assert!(r.negative.is_empty());
    assert!(r.resolved_order >= 40, "resolved to {}", r.resolved_order);
    for i in 0..=18 {
        let u = 0.05 * i as f64;
        let got = r.offspring.eval(u).unwrap();
        assert!((got - h_oracle(b, g, u)).abs() < 1e-8, "u={u}: {got} vs {}", h_oracle(b, g, u));
    }
}

#[test]
fn inversion_trivial_and_geometric() {
    let r = offspring_from_progeny(&Pgf::identity(), 10).unwrap();
    assert!((r.coefficients[0] - 1.0).abs() < 1e-15);
    assert!(r.coefficients[1..].iter().all(|c| c.abs() < 1e-15));

    let r = offspring_from_progeny(&Pgf::family(Family::Sibuya { gamma: 0.5 }.into()), 40).unwrap();
    assert!(r.resolved_order >= 12, "resolved to {}", r.resolved_order);
    for (k, h) in r.coefficients[..=r.resolved_order].iter().enumerate() {
        assert!((h - 0.5f64.powi(k as i32 + 1)).abs() < 1e-9, "k={k}");
    }
}

#[test]
fn inversion_errors() {
    let q = Pgf::family(Family::ShiftedSibuya { gamma: 0.5 }.into());
    assert!(offspring_from_progeny(&q, 10).is_err());
    let q = Pgf::family(Family::FourParam { b: 1.0, gamma: 0.5, ell: 2, k: 2 }.into());
    assert!(matches!(offspring_from_progeny(&q, 10), Err(Error::Inversion(_)) | Err(Error::Parameter(_))));
}

#[test]
fn reversion_round_trip() {
    let q = sibuya_core::gf::pgf_coefficients(&Pgf::family(Family::ExtendedSibuya { b: 0.8, gamma: 0.7 }.into()), 60)
        .unwrap()
        .probs;
    let inv = series::revert(&q, 61).unwrap();
    let id = series::compose(&q, &inv, 61).unwrap();
    for (k, c) in id.iter().enumerate() {
        let want = if k == 1 { 1.0 } else { 0.0 };
        assert!((c - want).abs() < 1e-9, "k={k}: {c}");
    }
}

fn expected_first_negative(g: f64) -> Option<Option<usize>> {
    // Some(None): no negative coefficient; None: negative somewhere
    if g < -1.0 {
        Some(Some(2))
    } else if g == -1.0 {
        Some(None)
    } else if g < 0.0 {
        Some(Some(3))
    } else if g == 0.0 {
        Some(Some(4))
    } else if g < 0.5 {
        None
    } else {
        Some(None)
    }
}

#[test]
fn sign_pattern_grid() {
    for g in [-2.0, -1.5, -1.0, -0.5, 0.0, 0.25, 0.4, 0.5, 0.7, 0.9] {
        for b in [0.5, 0.8, 1.0] {
            let d = progeny_sign_diagnosis(b, g, 100);
            if b == 1.0 && g <= 0.0 {
                assert!(d.is_err(), "b=1, gamma={g}");
                continue;
            }
            let d = d.unwrap();
            match expected_first_negative(g) {
                Some(want) => assert_eq!(d.first_negative, want, "b={b}, gamma={g}"),
                None => assert!(d.first_negative.is_some(), "b={b}, gamma={g}"),
            }
            assert_eq!(d.is_progeny_evidence, d.first_negative.is_none());
        }
    }
}

#[test]
fn low_order_coefficients_match_expansion() {
    for (b, g) in [(0.8, -1.5), (0.5, -0.5), (0.8, 0.7)] {
        let c = c_of(b, g);
        let d = progeny_sign_diagnosis(b, g, 5).unwrap();
        let want = [
            b * g / c,
            -0.5 * b * (g - 1.0),
            -b * c * (g * g - 1.0) / (12.0 * g),
            -b * c * c * (g * g - 1.0) / (24.0 * g),
        ];
        for k in 0..4 {
            assert!((d.coefficients[k] - want[k]).abs() < 1e-12, "b={b} g={g} k={k}");
        }
    }
}

#[test]
fn moments_against_finite_differences() {
    for (b, g) in [(0.5, 0.5), (0.9, 0.6), (0.3, 0.8), (0.7, -1.5)] {
        let (m, f2) = offspring_moments(b, g).unwrap();
        let h = 1e-4;
        let fd1 = (h_oracle(b, g, 1.0 + h) - h_oracle(b, g, 1.0 - h)) / (2.0 * h);
        let fd2 = (h_oracle(b, g, 1.0 + h) - 2.0 * h_oracle(b, g, 1.0) + h_oracle(b, g, 1.0 - h)) / (h * h);
        assert!((m - fd1).abs() < 1e-6 * fd1.abs(), "b={b} g={g}: {m} vs {fd1}");
        assert!((f2 - fd2).abs() < 1e-5 * fd2.abs().max(1e-3), "b={b} g={g}: {f2} vs {fd2}");
    }
    assert!(matches!(offspring_moments(0.5, 0.0), Err(Error::Domain(_))));
}

#[test]
fn moments_near_critical() {
    let near = |g: f64| offspring_moments(1.0 - 1e-10, g).unwrap();
    assert!((near(0.5).0 - 1.0).abs() < 1e-4);
    // (1-b)^{1-2γ} decay
    let (far, close) = (offspring_moments(1.0 - 1e-5, 0.4).unwrap().1, near(0.4).1);
    assert!(close < far / 5.0 && close < 0.05);
    assert_eq!(offspring_moments(1.0, 0.4).unwrap().1, 0.0);
    assert!((near(0.5).1 - 2.0).abs() < 1e-4);
    assert!(near(0.6).1 > 1e2);
    assert!(offspring_moments(1.0, 0.6).unwrap().1.is_infinite());
}

#[test]
fn fixed_point_and_iterates() {
    for g in [0.5, 0.6, 0.8] {
        let b = 0.9;
        let m = BranchingModel::extended_sibuya(b, g).unwrap();
        assert_eq!(m.criticality, Criticality::Subcritical);
        for i in 0..20 {
            let w = 0.05 * i as f64;
            let q = ext_pgf(b, g, w);
            assert!((q - w * m.offspring.eval(q).unwrap()).abs() < 1e-9, "g={g} w={w}");
            let it = progeny_iterates(&m, w, 400).unwrap();
            // Y_n grows with n, so E w^{Y_n} cannot increase
            assert!(it.windows(2).all(|p| p[1] <= p[0] + 1e-15));
            assert!((it.last().unwrap() - q).abs() < 1e-9);
        }
    }
}

#[test]
fn geometric_offspring_gives_sibuya_half() {
    let m = BranchingModel::from_offspring(Pgf::family(Family::Geometric { lambda: 1.0 }.into())).unwrap();
    assert_eq!(m.criticality, Criticality::Critical);
    let t = simulate_progeny(&m, &ProgenyConfig::new(1_000_000, 11)).unwrap();
    let oracle = sibuya_pmf(0.5, 51);
    let tv = tv_distance(&t.probs[1..t.probs.len().min(51)], &oracle[1..]);
    assert!(tv < 0.01, "tv = {tv}");
}

#[test]
fn extended_offspring_gives_extended_sibuya() {
    let m = BranchingModel::extended_sibuya(0.9, 0.6).unwrap();
    let t = simulate_progeny(&m, &ProgenyConfig::new(1_000_000, 12)).unwrap();
    assert!(t.tail_mass < 1e-4);
    let oracle = ext_pmf(0.9, 0.6, t.probs.len());
    let tv = tv_distance(&t.probs, &oracle);
    assert!(tv < 0.015, "tv = {tv}");
}

#[test]
fn progeny_is_reproducible() {
    let m = BranchingModel::extended_sibuya(0.8, 0.7).unwrap();
    let cfg = ProgenyConfig::new(5000, 4);
    assert_eq!(simulate_progeny(&m, &cfg).unwrap(), simulate_progeny(&m, &cfg).unwrap());
}
