//! Dirichlet eigenvalues of geodesic balls.

pub mod fem;
pub mod mesh;
pub mod radial;
pub mod sparse;
pub mod tone;
pub mod tridiag;

pub use fem::{fem_ball_lambda1, fem_first_two, fem_lambda1, rayleigh_quotient};
pub use mesh::{geodesic_ball_mesh, rectangle_mesh, TriangulatedDomain};
pub use radial::{radial_lambda1, RadialProblem, RadialVolume, SpaceFormVolume};
pub use tone::{compare_centers, tone_estimate, CenterComparison, CurvePoint, ToneEstimate};

use serde::Serialize;

/// First Dirichlet eigenpair of a discrete problem.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenResult<S> {
    pub lambda1: S,
    /// Nodal values, zero on the Dirichlet boundary.
    pub eigenvector: Vec<S>,
    /// Relative residual of the generalized eigenproblem.
    pub residual_norm: S,
    pub mesh_parameter: S,
    /// Discretisation error estimate from one refinement, when computed.
    pub error_estimate: Option<S>,
    /// Richardson-extrapolated eigenvalue, when computed.
    pub extrapolated: Option<S>,
    /// Inverse-iteration count (0 for the direct tridiagonal solver).
    pub iterations: usize,
}
