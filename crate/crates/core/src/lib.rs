//! Sibuya-like discrete distributions.
//!
//! The crate is organised around a handful of value types:
//!
//! * [`DistributionSpec`] names a catalog family with validated parameters;
//! * [`Pgf`] is a probability generating function (closed form, composition,
//!   thinning, explicit series or Laplace mixture) that can be evaluated and
//!   expanded into a [`PmfTable`];
//! * [`GFunction`] is the one-step ratio `g(n) = (n+1) p_{n+1} / p_n`;
//! * [`BdModel`] holds birth/death amplitudes whose stationary law is solved
//!   by [`bd::stationary_solve`];
//! * [`BranchingModel`] drives Galton-Watson total-progeny simulation.
//!
//! All evaluation is pure; Monte-Carlo entry points take an explicit seed and
//! derive one counter-based stream per replica or block so results do not
//! depend on thread scheduling.

pub mod bd;
pub mod branching;
pub mod distributions;
pub mod error;
pub mod gf;
pub mod moments;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod selfdecomp;
pub mod series;
pub mod special;
pub mod verify;

pub use bd::{BdModel, StationarySolution, TrajectoryStats};
pub use branching::BranchingModel;
pub use distributions::{
    make_spec, DistributionSpec, Family, FamilyParams, InfDivisibilityReport, Verdict,
};
pub use error::{Error, ErrorClass, Result};
pub use gf::{GFunction, LaplaceMixture, Pgf, PmfTable, Provenance};
pub use moments::MomentVerdict;
