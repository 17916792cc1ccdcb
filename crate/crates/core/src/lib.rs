//! Exact machinery for irreducible Pisot substitutions.

pub mod analysis;
pub mod error;
pub mod exact;
pub mod fractal;
pub mod markov;
pub mod modp;
pub mod nfield;
pub mod places;
pub mod poly;
pub mod roots;
pub mod subst;
pub mod tiling;

pub use analysis::{
    EitherVerdict, EntryAnalysis, EntrySeries, GarsiaReport, NeighborhoodRadii, PolyPart,
    SpecialCylinder, Tau2Dist,
};
pub use error::{Error, Result};
pub use exact::{Disk, RatInterval};
pub use fractal::{FractalContext, PointCloud, Projection, ProjectionSpec};
pub use markov::{AdmissiblePath, ParryChain, PathState, TransitionMatrix};
pub use nfield::{EigenData, FieldElem, NumberField};
pub use places::{FinCoord, FinitePlace, PlaceSystem, RepPoint};
pub use subst::{IntMatrix, IntVector, Letter, Substitution, Word};
pub use tiling::{LatticeVec, Patch, PatchItem, QuasiWitness, Region, TilingStats};
