//! Pairs of orthogonal projections through their difference: the three-space
//! split, Halmos frames, Davis symmetries, the unitary orbit of a generic
//! difference, and its geodesics.

pub mod davis;
pub mod decomp;
pub mod error;
pub mod gallery;
pub mod geodesics;
pub mod orbit;
pub mod sample;
pub mod spectral;
pub mod tol;

pub use davis::DavisSymmetry;
pub use decomp::{GenericPair, HalmosFrame, ProjectionPair, ThreeSpaceSplit};
pub use error::{Error, Result};
pub use geodesics::{Geodesic, HorizontalTangent, LogBranch};
pub use spectral::{ComplexMatrix, HermitianMatrix, Symmetry};
pub use tol::Tolerances;
