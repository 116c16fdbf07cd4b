//! Convex geometry primitives: dyadic boxes and their incidence lattice,
//! rotations with Haar sampling, convex bodies, and scaled isometric
//! embeddings.

pub mod body;
pub mod dyadic;
pub mod embedding;
pub mod rotation;

pub use body::{unit_ball_volume, ConvexBody, CylinderBase, JohnBox, Shape};
pub use dyadic::{incidence_factor, Dyadic, DyadicTuple};
pub use embedding::Embedding;
pub use rotation::Rotation;
