//! Metadata-driven integrability classification of `X = L(Θ)`.

use serde::Serialize;

use super::SubordinatedProcessSpec;
use crate::subordinator::SubordinatorMoments;

/// One label per component. The first four are the square-integrable cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrabilityCase {
    /// `Θ_j` square integrable (and `L_j` square integrable).
    #[serde(rename = "square_integrable_case1")]
    SquareIntegrable,
    /// `L_j` mean zero and `Θ_j` integrable.
    #[serde(rename = "mean_zero_square_integrable_case2")]
    MeanZeroSquareIntegrable,
    /// `Θ_j = 0`.
    #[serde(rename = "theta_trivial_case3")]
    ThetaTrivial,
    /// `L_j = 0`.
    #[serde(rename = "l_trivial_case4")]
    LTrivial,
    /// Integrable with nonzero mean, not square integrable.
    IntegrableOnly,
    /// Mean-zero base with `E√Θ_j < ∞`: integrable and mean zero.
    MeanZeroIntegrable,
    NotIntegrable,
    /// Mean-zero base with jumps and `E√Θ_j = ∞`: neither integrability nor
    /// its failure follows from the available criteria.
    UndeterminedByPaper,
}

impl IntegrabilityCase {
    pub fn label(&self) -> &'static str {
        match self {
            Self::SquareIntegrable => "square integrable, case (1)",
            Self::MeanZeroSquareIntegrable => "mean zero and square integrable, case (2)",
            Self::ThetaTrivial => "case (3): Θ = 0 a.s.",
            Self::LTrivial => "case (4): L = 0 a.s.",
            Self::IntegrableOnly => "integrable, not square integrable",
            Self::MeanZeroIntegrable => "integrable and mean zero, not square integrable",
            Self::NotIntegrable => "not integrable",
            Self::UndeterminedByPaper => "undetermined-by-paper",
        }
    }

    pub fn square_integrable(&self) -> bool {
        matches!(
            self,
            Self::SquareIntegrable | Self::MeanZeroSquareIntegrable | Self::ThetaTrivial | Self::LTrivial
        )
    }

    pub fn integrable(&self) -> bool {
        self.square_integrable() || matches!(self, Self::IntegrableOnly | Self::MeanZeroIntegrable)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentClass {
    pub component: usize,
    pub case: IntegrabilityCase,
    pub integrable: bool,
    pub square_integrable: bool,
    /// Integrable with `E X_j(1) = 0`.
    pub mean_zero: bool,
    /// The criterion that decided the label.
    pub reason: &'static str,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IntegrabilityReport {
    pub components: Vec<ComponentClass>,
    pub x_integrable: bool,
    pub x_mean_zero: bool,
    pub x_square_integrable: bool,
}

impl IntegrabilityReport {
    /// A one-line verdict for the whole process.
    pub fn summary(&self) -> String {
        let mut cases: Vec<&str> = self.components.iter().map(|c| c.case.label()).collect();
        cases.dedup();
        cases.join("; ")
    }
}

/// Integrability of a subordinated strictly α-stable base: holds iff
/// `E|Θ(1)|^{1/α} < ∞`.
pub fn stable_base_integrable(moments: &SubordinatorMoments, alpha: f64) -> bool {
    moments.one_over_alpha_moment_finite(alpha)
}

pub(super) fn classify(spec: &SubordinatedProcessSpec) -> IntegrabilityReport {
    let sub = spec.subordinator();
    let base = spec.base();
    let moments = sub.moments();
    let components: Vec<ComponentClass> = (0..spec.layout().components())
        .map(|j| {
            let l_mean_zero = base.is_component_mean_zero(j);
            let (case, reason) = if sub.is_component_trivial(j) {
                (IntegrabilityCase::ThetaTrivial, "subordinator component vanishes")
            } else if base.is_component_trivial(j) {
                (IntegrabilityCase::LTrivial, "base component vanishes")
            } else if l_mean_zero && moments.mean_finite(j) {
                (
                    IntegrabilityCase::MeanZeroSquareIntegrable,
                    "mean-zero square-integrable base, integrable subordinator",
                )
            } else if moments.variance_finite(j) {
                (
                    IntegrabilityCase::SquareIntegrable,
                    "square-integrable base and subordinator",
                )
            } else if !l_mean_zero {
                if moments.mean_finite(j) {
                    (IntegrabilityCase::IntegrableOnly, "E X = E L(1)·E Θ(1), both finite")
                } else {
                    (IntegrabilityCase::NotIntegrable, "nonzero base mean with E Θ(1) = ∞")
                }
            } else if moments.moment_finite(j, 0.5) {
                (
                    IntegrabilityCase::MeanZeroIntegrable,
                    "mean-zero base with E √Θ(1) < ∞ (martingale criterion)",
                )
            } else if base.is_component_gaussian(j) {
                (
                    IntegrabilityCase::NotIntegrable,
                    "mean-zero Gaussian base: integrable iff E √Θ(1) < ∞",
                )
            } else {
                (
                    IntegrabilityCase::UndeterminedByPaper,
                    "mean-zero base with jumps and E √Θ(1) = ∞",
                )
            };
            let mean_zero = case.integrable()
                && (l_mean_zero || matches!(case, IntegrabilityCase::ThetaTrivial | IntegrabilityCase::LTrivial));
            ComponentClass {
                component: j,
                case,
                integrable: case.integrable(),
                square_integrable: case.square_integrable(),
                mean_zero,
                reason,
            }
        })
        .collect();
    IntegrabilityReport {
        x_integrable: components.iter().all(|c| c.integrable),
        x_mean_zero: components.iter().all(|c| c.mean_zero),
        x_square_integrable: components.iter().all(|c| c.square_integrable),
        components,
    }
}
