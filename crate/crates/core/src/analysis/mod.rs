//! Homogeneous fixed points, period-two orbits, checkerboard patterns and
//! their stability.

mod fixed_point;
mod jacobian;
mod orbit;
mod verdict;

pub use fixed_point::{find_homogeneous_fixed_point, HomogeneousState};
pub use jacobian::{
    assemble_checkerboard_jacobian, assemble_homogeneous_jacobian, checkerboard_block_union,
    positive_feedback_check, PositiveFeedbackCheck, MAX_DENSE_DIM,
};
pub use orbit::{
    build_checkerboard, find_period_two, refine_period_two, verify_period_two, Checkerboards,
    PeriodTwoOrbit,
};
pub use verdict::{
    checkerboard_stability_test, classify_checkerboard, classify_instability, instability_test,
    mode_eigenvalues, ComplexValue, ModeEigenvalues, StabilityVerdict, Verdict,
};

use serde::{Deserialize, Serialize};

/// Numerical tolerances for the analysis pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Fixed-point residual `|T(u) - u|`.
    pub fp_tol: f64,
    /// Minimum `|u1 - u2|` for a genuine period-two orbit.
    pub separation_tol: f64,
    /// Criteria within this distance of their threshold are inconclusive.
    pub margin_tol: f64,
    /// Eigenvalue real parts above this count as unstable.
    pub stab_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            fp_tol: 1e-10,
            separation_tol: 1e-6,
            margin_tol: 1e-9,
            stab_tol: 1e-9,
        }
    }
}
