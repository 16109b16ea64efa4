//! Deterministic crossing-point automata that reproduce quantum evolution in
//! their slow sector.
//!
//! A model has `N` primary states and one fast lattice phase per state, each
//! cycling with its own period `L_i`. Whenever the pair of phases `(k_i, k_j)`
//! lands on a crossing point, the primary states `i` and `j` swap. Averaged
//! over an even distribution of the fast phases, the primary state follows a
//! real Schrödinger flow generated by an antisymmetric matrix with couplings
//! `π n_ij / (2 L_i L_j)`.
//!
//! The crate is organised by role:
//!
//! - [`model`]: the automaton definition, its file format and validation.
//! - [`automaton`]: exact evolution of a single classical configuration.
//! - [`ensemble`]: classical marginals over the fast-variable ensemble.
//! - [`quantum`]: the effective generator, real and c-bit doubled evolution,
//!   the Born rule and cycle spectra of permutations.
//! - [`synthesis`]: building an automaton for a requested generator.
//! - [`analysis`]: classical-versus-quantum comparison and precision sweeps.
//! - [`io`] and [`plot`]: CSV and SVG artifacts.

pub mod analysis;
pub mod automaton;
pub mod ensemble;
mod error;
pub mod io;
pub mod model;
pub mod numbers;
pub mod plot;
pub mod quantum;
pub mod synthesis;

pub use error::{Error, Result};
pub use model::{CrossingPoint, ModelSpec, Sign, TimeQuantum, ValidationReport};
