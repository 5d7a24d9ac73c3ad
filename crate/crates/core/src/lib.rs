pub mod class_m;
pub mod cli;
pub mod embedding;
pub mod error;
pub mod interpolation;
pub mod model_problem;
pub mod parabolicity;
pub mod plus_spaces;
pub mod quad;
pub mod report;
pub mod spectra;

pub use class_m::{PhiFunction, PhiKind};
pub use error::{Error, Result};
pub use spectra::{AnisotropicIndex, GridFunction, Lattice, SpectralField};
