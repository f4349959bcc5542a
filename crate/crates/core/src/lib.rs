//! Bloch-vector representation of d-level quantum systems.
//!
//! States, observables and their dynamics are described by real vectors in
//! `R^(d²−1)` relative to an operator tuple of traceless Hermitian matrices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod bloch;
pub mod dynamics;
pub mod entanglement;
pub mod error;
pub mod io;
pub mod linalg;
pub mod ode;
pub mod random;
pub mod section;

pub use basis::{
    change_of_basis, gell_mann_tuple, random_tuple, structure_constants, transform_constants,
    validate_tuple, BasisChange, OperatorTuple, StructureConstants, ValidationReport, Violation,
};
pub use bloch::{
    bloch_to_observable, bloch_to_operator, bloch_to_state, expectation, is_observable_bloch,
    is_pure_state, is_state, observable_to_bloch, operator_norm_bounds, operator_to_bloch,
    positivity_coefficients, purity, state_to_bloch, BlochRole, BlochVector, DensityMatrix,
    Observable, PositivityCoefficients,
};
pub use dynamics::{
    evolve_closed, evolve_open, evolve_unitary_coefficients, hamiltonian_generator,
    lindblad_generator, reconstruct_unitary, BlochGenerator, DissipatorSpec, HamiltonianSpec,
    TimeGrid, Trajectory,
};
pub use entanglement::{
    concurrence, partial_trace, product_tuple, reduced_norm_relation, BipartiteState,
    ConcurrenceNorm, ConcurrenceResult, Keep,
};
pub use error::{BlochError, Result};
pub use linalg::CMatrix;
pub use ode::IntegratorSettings;
