//! Noisy toric-code coherence and the random-bond Ising model.
//!
//! The crate covers lattice geometry, exact small-instance engines,
//! Metropolis sampling of the disordered Ising model, the noisy-code
//! experiments built on them, and CSS-code to spin-model duality.

pub mod couplings;
pub mod duality;
pub mod error;
pub mod exact;
pub mod gf2;
pub mod hypergraph;
pub mod lattice;
pub mod mc;
pub mod noisy;
pub mod rng;
pub mod stats;

pub use couplings::{beta_j_from_q, q_from_beta_j, CouplingAssignment, Q_MIN};
pub use error::{Error, Result};
pub use gf2::{gf2_rank, gf2_solve_membership, row_basis, BitVector};
pub use hypergraph::Hypergraph;
pub use lattice::{build_square_lattice, shortest_boundary_path, Boundary, Lattice2D, StringPath};
