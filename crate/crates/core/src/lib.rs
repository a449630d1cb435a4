//! Synthesis and verification of zero-temperature Ising circuits.
//!
//! A circuit of shape `(n, m)` is a total Boolean function from `n` input
//! spins to `m` output spins. A Hamiltonian *encodes* the circuit when, with
//! the inputs pinned at `x`, the unique minimum-energy output is `f(x)`.
//! Finding such a Hamiltonian is a linear program over the coefficient
//! vector; this crate builds those programs, solves them with a bundled
//! dense simplex, and certifies every answer by exhaustive enumeration.
//!
//! Conventions used throughout:
//!
//! * spins are `-1`/`+1`; the Boolean `0`/`1` convention only appears at
//!   I/O boundaries ([`circuit::Convention`]);
//! * a state of dimension `d` maps to an integer index in `[0, 2^d)` with
//!   spin `i` equal to `+1` iff bit `i` of the index is set (bit 0 is the
//!   least significant);
//! * a full state `(x, y)` of a shape-`(n, m)` Hamiltonian has index
//!   `x.index() + (y.index() << n)`.

pub mod circuit;
pub mod classify;
pub mod constraints;
pub mod dynamics;
mod error;
pub mod hamiltonian;
pub mod lp;
pub mod oracle;
mod par;
pub mod residual;
pub mod synth;
pub mod voronoi;

pub use circuit::{Circuit, Convention, SpinState};
pub use error::{Error, Result};
pub use par::Execution;
pub use hamiltonian::{Couplings, Hamiltonian};

/// Default tolerance for comparing energies of distinct states.
pub const DEFAULT_TOL: f64 = 1e-9;
