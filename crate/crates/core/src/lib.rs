//! Numerical laboratory for lattice incidence statistics.
//!
//! The crate is organised around five building blocks:
//!
//! * [`convex`] — dyadic tuples and their incidence factor, convex bodies
//!   (boxes, slabs, cylinders, balls) with exact membership tests, Haar
//!   rotations and random subspace embeddings;
//! * [`lattice`] — full-rank lattices, exact point enumeration inside convex
//!   bodies, tube point-count maximisation;
//! * [`incidence`] — seeded Monte Carlo experiments: rotated-body tail
//!   counts, containment probabilities, intersection shapes, subspace
//!   densities and a Kakeya-type maximal-function study;
//! * [`surfaces`] — cap partitions of a parametrised base surface, bump
//!   perturbations pinned to nearby lattice points, smoothness certification;
//! * [`mtlab`] — bump profiles with nonnegative Fourier transform,
//!   projected-lattice weights with spatial and frequency-side evaluators,
//!   tube maximal brackets, weighted restriction ratios and their scaling
//!   sweeps.
//!
//! All randomness flows through explicit master seeds (see [`rng`]); parallel
//! trial loops aggregate in trial order so results are independent of the
//! worker count.

pub mod convex;
pub mod error;
pub mod incidence;
pub mod lattice;
pub mod mtlab;
pub mod rng;
pub mod stats;
pub mod surfaces;

pub use error::{Error, Result};
