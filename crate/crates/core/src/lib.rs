//! Construction and verification of nodal degrees of freedom for
//! `C^m-P_k^(n)` finite elements on simplices.
//!
//! The pipeline is:
//!
//! 1. [`combinatorics`] enumerates the barycentric lattice of degree `k`.
//! 2. [`assignment`] partitions it into `(face, derivative order)` groups.
//! 3. [`counts`] holds the closed-form group sizes for `n = 2, 3, 4`.
//! 4. [`functionals`] turns each lattice index into a point functional on a
//!    physical [`geometry::Simplex`].
//! 5. [`polynomials`] assembles the Bernstein Vandermonde matrix and its
//!    dual basis.
//! 6. [`verify`] runs unisolvency, two-cell continuity and count sweeps.
//!
//! [`export`] writes the tables in the fixed-width report layout, JSON and CSV.

pub mod assignment;
pub mod combinatorics;
pub mod counts;
pub mod error;
pub mod export;
pub mod functionals;
pub mod geometry;
pub mod linalg;
pub mod polynomials;
pub mod verify;

pub use assignment::{assign_dofs, group_summary, DofGroup, DofTable, ElementParams};
pub use combinatorics::{
    dim_pk, enumerate_multiindices, enumerate_subsimplices, MultiIndex, SubSimplex,
};
pub use counts::{closed_form_count, verify_dimension_identity, CountReport, LevelCount};
pub use error::{Error, Result};
pub use functionals::{realize_functionals, FunctionalKind, NodalFunctional};
pub use geometry::{normal_frame, NormalFrame, Simplex};
pub use polynomials::{
    build_vandermonde, dual_basis, BernsteinBasis, DualBasis, ElementDefinition,
};
pub use verify::{
    check_unisolvency, continuity_jump_test, oracle_sweep, CellPair, JumpReport, SweepReport,
    UnisolvencyReport,
};
