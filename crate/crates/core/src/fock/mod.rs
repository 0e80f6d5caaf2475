//! Truncated number-basis oracle: superoperators as matrices, density evolution, moments,
//! spectra and operator-algebra checks.

pub mod algebra;
pub mod density;
pub mod evolve;
pub mod ops;
pub mod spectrum;
pub mod superop;

pub use algebra::{algebra_checks, AlgebraCheck};
pub use density::{gaussian_to_density, moments, suggest_cutoff, FockDensity, FockMoments};
pub use evolve::{evolve_density, evolve_density_with, evolve_driven, stationary_density, EvolveMethod, EvolveOptions};
pub use ops::SparseOp;
pub use spectrum::{full_spectrum, spectrum};
pub use superop::{build_superops, displacement, liouvillian, SuperOp, SuperOpSet};
