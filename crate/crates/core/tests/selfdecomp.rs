use proptest::prelude::*;
use sibuya_core::distributions::{pmf_table, Family};
use sibuya_core::selfdecomp::*;
use sibuya_core::{series, Error, Pgf};

// Step ratio of the shifted extended Sibuya law: p_{n+1}/p_n = b (n+1-γ)/(n+2).
fn shifted_extended_rho(b: f64, gamma: f64, n: usize) -> f64 {
    b * (n as f64 + 1.0 - gamma) / (n as f64 + 2.0)
}

fn sibuya_coeffs(gamma: f64, len: usize) -> Vec<f64> {
    let mut p = vec![0.0; len];
    p[1] = gamma;
    for n in 1..len - 1 {
        p[n + 1] = p[n] * (n as f64 - gamma) / (n as f64 + 1.0);
    }
    p
}

#[test]
fn shifted_extended_holds_to_200() {
    let spec = Family::ShiftedExtendedSibuya { b: 0.9, gamma: 0.5 }.into();
    let g = sibuya_core::distributions::g_function(&spec).unwrap();
    let r = bondesson_check_g(&g, 200).unwrap();
    assert_eq!(r.holds_up_to, Some(200));
    assert!(r.first_violation.is_none());

    // table form agrees with the ratio form while the table is representable
    let t = pmf_table(&spec, 120).unwrap();
    let r = bondesson_check(&t, 100).unwrap();
    assert_eq!(r.holds_up_to, Some(100));

    // oracle: slack computed from the closed-form step ratio
    for j in 0..=200 {
        let (rj, rj1) = (shifted_extended_rho(0.9, 0.5, j), shifted_extended_rho(0.9, 0.5, j + 1));
        let slack = (j + 2) as f64 / (j + 1) as f64 * (1.0 - rj1) / (1.0 - rj);
        assert!((slack - shifted_extended_bondesson_ratio(0.9, 0.5, j)).abs() < 1e-12 * slack);
        assert!(slack >= 1.0);
    }
}

#[test]
fn geometric_holds() {
    let t = pmf_table(&Family::Geometric { lambda: 2.0 }.into(), 100).unwrap();
    assert_eq!(bondesson_check(&t, 80).unwrap().holds_up_to, Some(80));
}

#[test]
fn underflow_is_reported() {
    let t = pmf_table(&Family::Poisson { lambda: 0.01 }.into(), 400).unwrap();
    assert!(matches!(bondesson_check(&t, 300), Err(Error::NumericalUnderflow(_))));
}

#[test]
fn poisson_residual_matches_closed_form() {
    let lambda = 4.0;
    let r = residual_pgf(&Pgf::family(Family::Poisson { lambda }.into()), 0.5, 40).unwrap();
    let mut want = (-lambda / 2.0f64).exp();
    for n in 0..=40 {
        assert!((r.table.probs[n] - want).abs() < 1e-10, "n={n}");
        want *= lambda / 2.0 / (n as f64 + 1.0);
    }
    assert!(r.nonnegative());
}

#[test]
fn nbd_residual_nonnegative() {
    let p = Pgf::family(Family::Nbd { q: 0.5, k: 1.0 }.into());
    let r = residual_pgf(&p, 0.5, 100).unwrap();
    assert!(r.nonnegative(), "first negative at {:?}", r.first_negative);
}

#[test]
fn mittag_leffler_residual_nonnegative() {
    let p = Pgf::family(Family::MittagLeffler { lambda: 1.0, gamma: 0.5 }.into());
    for a in [0.3, 0.7] {
        let r = residual_pgf(&p, a, 80).unwrap();
        assert!(r.nonnegative(), "a={a}: first negative at {:?}", r.first_negative);
    }
}

#[test]
fn nbd_sibuya_compound_closure() {
    let r = sibuya_compound_closure(&Family::Nbd { q: 0.3, k: 2.0 }.into(), 0.6, &[0.2, 0.5, 0.8], 60).unwrap();
    assert_eq!(r.rows.len(), 3);
    assert!(r.all_nonnegative(), "{:?}", r.rows);
}

#[test]
fn closure_rejects_non_sd_outer_law() {
    let e = sibuya_compound_closure(&Family::Bernoulli { a: 0.5 }.into(), 0.5, &[0.5], 20);
    assert!(e.is_err());
}

#[test]
fn sibuya_split_matches_composition() {
    let (g1, g2, len) = (0.3, 0.6, 50);
    let r = sibuya_split(g1, g2, len - 1).unwrap();
    assert!(r.nonnegative());
    // oracle: S(α, x)/x composed with S(γ₂), α = γ₁/γ₂
    let outer: Vec<f64> = sibuya_coeffs(g1 / g2, len + 1)[1..].to_vec();
    let want = series::compose(&outer, &sibuya_coeffs(g2, len), len).unwrap();
    for n in 0..len {
        assert!((r.table.probs[n] - want[n]).abs() < 1e-10, "n={n}: {} vs {}", r.table.probs[n], want[n]);
    }
}

proptest! {
    #[test]
    fn bondesson_ratio_at_least_one_and_decreasing_in_b(
        b1 in 0.01f64..1.0, b2 in 0.01f64..1.0, gamma in 0.01f64..0.99, j in 0usize..500,
    ) {
        let (lo, hi) = if b1 < b2 { (b1, b2) } else { (b2, b1) };
        let r_lo = shifted_extended_bondesson_ratio(lo, gamma, j);
        let r_hi = shifted_extended_bondesson_ratio(hi, gamma, j);
        prop_assert!(r_hi >= 1.0 - 1e-12);
        prop_assert!(r_lo >= r_hi * (1.0 - 1e-12));
    }

    #[test]
    fn geometric_residual_nonnegative(lambda in 0.1f64..5.0, a in 0.05f64..0.95) {
        let r = residual_pgf(&Pgf::family(Family::Geometric { lambda }.into()), a, 40).unwrap();
        prop_assert!(r.nonnegative());
    }
}
