//! Hybrid quantum-classical dynamics on a refined state space.
//!
//! A hybrid state maps each value of a discrete classical pointer to a
//! positive-semidefinite operator on a finite-dimensional Hilbert space,
//! with unit total trace. The most general completely positive,
//! normalization-preserving linear dynamics on such states is parametrized
//! by coupling tensors `W^{αβ}(z, y, t)`; special choices recover unitary
//! Schrödinger-Liouville evolution, Lindbladian open-system dynamics, and a
//! dynamical realization of projective measurement that converges
//! exponentially fast to the textbook measurement statistics.
//!
//! The crate provides:
//! - dense complex linear algebra sized for small Hilbert spaces
//!   ([`linalg`]),
//! - the hybrid state space and its induced quantities ([`state`]),
//! - coupling-tensor constructors and positivity validators ([`coupling`]),
//! - a fixed-step RK4 integrator with conservation monitors ([`dynamics`]),
//! - closed-form solutions used as independent ground truth ([`oracle`]),
//! - the qubit specialization for a rotating measurement apparatus
//!   ([`bloch`]),
//! - scenario files, CSV export, and SVG line plots ([`scenario`],
//!   [`output`], [`plot`]).

pub mod bloch;
pub mod coupling;
pub mod dynamics;
pub mod linalg;
pub mod oracle;
pub mod output;
pub mod plot;
pub mod scenario;
pub mod state;

pub use linalg::{ComplexMatrix, OperatorBasis, SpectralDecomposition};
pub use state::HybridState;
pub use coupling::{Coupling, CouplingTensor, VFunction};
pub use dynamics::Trajectory;
