//! Separated-noise and gate-noise compilation for Lindblad dynamics.
//!
//! A Lindblad generator `L = L_H + L_D` is described by a Hamiltonian schedule
//! `H(t) = Σ_p H_p(t) A_p` and a rate matrix `Γ` over an orthonormal traceless
//! operator basis `{A_n}`. The library computes the effective dissipator that
//! acts after the ideal coherent evolution (the separated noise `Γ^S`), combines
//! such terms across the operations of a gate into a single gate-noise channel
//! `Γ^N`, and checks every transform against a direct master-equation integrator.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod config;
pub mod error;
pub mod expr;
pub mod gate;
pub mod integrator;
pub mod linalg;
pub mod output;
pub mod schedule;
pub mod separated;
pub mod superop;
pub mod validation;

pub use basis::{
    frobenius_inner, gell_mann_basis, pauli_basis, structure_tensor, BasisLabel, OperatorBasis,
    StructureTensor,
};
pub use error::{Error, Result};
pub use linalg::{CMat, C64};
pub use schedule::{Coefficient, HamiltonianSchedule, LindbladGenerator, NoiseSchedule, Segment};
pub use superop::{Propagator, RateMatrix};
