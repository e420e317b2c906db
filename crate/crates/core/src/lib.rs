//! Lax-Oleinik solver for Hamilton-Jacobi equations on embedded networks
//! with flux limiters at the vertices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod action;
pub mod error;
pub mod hamiltonian;
pub mod network;
pub mod solver;
pub mod verify;

pub use action::{action, make_admissible, NetworkCurve, NetworkLagrangian, Piece};
pub use error::{ActionError, HamiltonianError, NetworkError, SolverError, VerifyError};
pub use hamiltonian::{
    FluxLimiter, FnHamiltonian, Hamiltonian, HamiltonianRef, PowerHamiltonian, Reversed,
    TableHamiltonian,
};
pub use network::{ArcId, ArcSpec, Network, NetworkPoint, VertexId, VertexSpec};
