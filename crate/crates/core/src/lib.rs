//! Simulation and statistical verification of multivariate subordinated Lévy
//! processes `X(t) = L(Θ(t))` on truncated Hilbert spaces.

pub mod base;
pub mod error;
pub mod families;
pub mod mc;
mod quadrature;
pub mod sampling;
pub mod space;
pub mod subordination;
pub mod subordinator;
pub mod verify;

pub use base::{BaseProcessSpec, DiscreteJumps, GrowthBoundConstants};
pub use error::{Error, Result};
pub use families::{Family, HnigParams, HvgParams, ProjectedProcess, StableParams};
pub use mc::SeedSchedule;
pub use space::{CovOperator, CovarianceOperator, RankOneTensor, SpaceLayout, TruncatedVector};
pub use subordination::{
    IntegrabilityCase, IntegrabilityReport, JumpMass, LargeJumpMean, QuadratureConfig, SubordinatedProcessSpec,
    SubordinatedTriplet, TestSet,
};
pub use subordinator::{JumpLaw, SubordinatorJumps, SubordinatorMoments, SubordinatorSpec, UnivariateSubordinator};
