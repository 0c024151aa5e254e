//! Numerical toolkit for almost-commuting unitary matrices.
//!
//! Given unitaries `u`, `v` with `||u v - e^{2 pi i theta} v u||` small,
//! the crate computes the K-theoretic obstruction invariants that decide
//! whether a nearby exactly theta-commuting pair can exist — the bott
//! integer of the positive element `e(u, v)` and the winding number of
//! the multiplicative commutator `u v u* v*` — checks the trace formula
//! tying the two together, realizes the finite-dimensional
//! representation theory of the rational rotation relation, and projects
//! feasible pairs onto the exact-pair manifold by alternating
//! minimization.
//!
//! Modules:
//! * [`matcore`] — dense complex kernel: Jacobi eigensolver, branch-cut
//!   logarithm, exponential, polar factor, Kronecker products.
//! * [`generators`] — clock/shift pairs, Haar unitaries, seeded
//!   perturbations, twists, the tensor lift.
//! * [`invariants`] — defect, winding, bott, trace-formula check,
//!   trace determinant, scalar-commutator structure check.
//! * [`rotrep`] — irreducible representations at torus base points,
//!   spectral projections, matrix units, block decomposition.
//! * [`solver`] — feasibility and projection onto exact pairs.
//! * [`pairfile`] / [`sweep`] — the file formats behind the CLI.

pub mod error;
pub mod generators;
pub mod invariants;
pub mod matcore;
pub mod pairfile;
pub mod rotrep;
pub mod solver;
pub mod sweep;

pub use error::{Error, Result};
