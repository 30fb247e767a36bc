//! Exact integer computation of colored sl(N) homology for the trefoil and the
//! Hopf link, together with the SU(N) representation-space side.

// Index loops mirror the matrix formulas they implement.
#![allow(clippy::needless_range_loop, clippy::type_complexity)]

pub mod complex;
pub mod flag_ring;
pub mod koszul;
pub mod laurent;
pub mod link;
pub mod matrix;
pub mod partition;
pub mod perturbation;
pub mod repspace;
pub mod schur;
pub mod unitary;
