//! Benchmark fixtures shared by the criterion targets.

use sibuya_core::{BdModel, DistributionSpec, Family};

/// One heavy-tailed and one light-tailed law per construction path.
pub fn catalog() -> Vec<(&'static str, DistributionSpec)> {
    vec![
        ("sibuya", Family::Sibuya { gamma: 0.5 }.into()),
        ("extended_sibuya", Family::ExtendedSibuya { b: 0.9, gamma: 0.6 }.into()),
        ("discrete_stable", Family::DiscreteStable { lambda: 1.0, gamma: 0.6 }.into()),
        ("mittag_leffler", Family::MittagLeffler { lambda: 1.0, gamma: 0.7 }.into()),
        ("nbd", Family::Nbd { q: 0.5, k: 2.0 }.into()),
        ("cmp2", Family::Cmp2 { theta: 4.0 }.into()),
    ]
}

pub fn nbd_model() -> BdModel {
    BdModel::new(vec![1.0, 0.5], vec![1.0], 0).expect("valid amplitudes")
}

pub fn cmp_model() -> BdModel {
    BdModel::new(vec![4.0], vec![1.0, 1.0], 0).expect("valid amplitudes")
}
