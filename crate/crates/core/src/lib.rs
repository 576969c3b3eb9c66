//! Dyadic weak-type quasi-norms, mean-oscillation functionals and
//! decompositions for step functions on dyadic trees.

pub mod claims;
pub mod cube;
pub mod decomp;
pub mod error;
pub mod examples;
pub mod exact;
pub mod function;
pub mod halfspace;
pub mod norms;
pub mod profile;
pub mod random;
pub mod report;

pub use cube::{Ball, CubeCollection, DyadicCube, DyadicRectangle, ShiftedLatticeFamily};
pub use error::{Error, Result};
pub use function::{DyadicMeasure, Field, PiecewiseLinear1D, StepFunction};
pub use norms::{Exactness, NormResult};
pub use profile::{Kind, LambdaProfile, LevelWindow, ProfileParams, SupResult, TailFamily, TailKind};
