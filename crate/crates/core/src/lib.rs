//! Strength statistics of fishnet lattices.
//!
//! The crate covers the whole pipeline: link strength laws ([`dist`]), the
//! diamond lattice ([`mesh`]), the scalar equilibrium solve ([`solver`]), the
//! element-deletion Monte Carlo ([`mc`]), the analytical failure-probability
//! family ([`models`]), and the empirical post-processing ([`stats`],
//! [`report`]).

pub mod dist;
pub mod error;
pub mod mc;
pub mod mesh;
pub mod models;
pub mod numeric;
pub mod report;
pub mod solver;
pub mod stats;

pub use dist::{GraftedGaussianPower, GraftedWeibullGaussian, StrengthDistribution, TruncatedGaussian, Weibull};
pub use error::{Error, Result};
pub use mc::{run_batch, simulate_one, RunConfig, SampleRecord};
pub use mesh::{build_mesh, FishnetGeometry, FishnetMesh};

pub use models::ModelParams;
pub use stats::EmpiricalDistribution;
pub use solver::{solve, DamageState, LinkStressField};

