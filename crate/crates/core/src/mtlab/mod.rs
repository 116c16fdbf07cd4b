//! Projected-lattice weights and the machinery around them: smooth bump
//! profiles with nonnegative Fourier transform, spatial and frequency-side
//! weight evaluators, tube maximal brackets, surface quadrature for the
//! extension operator, a duality extremizer check, and scaling sweeps of the
//! weighted restriction ratio.

pub mod bump;
pub mod maximal;
pub mod radial;
pub mod weight;

pub use bump::{build_bump, weight_kernel, BumpFunction, WeightKernel};
pub use maximal::{maximal_l, StripMaximalBracket};
pub use weight::{build_weight_rank2, build_weight_rank_n, FourierWeight, Weight};
