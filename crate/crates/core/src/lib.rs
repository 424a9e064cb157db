//! Rigid-foldability of developable quadrilateral crease patterns.
//!
//! The crate covers single-vertex kinematics ([`vertex`]), two-vertex units
//! ([`unit`]), stitching units into grid patterns ([`pattern`]), sampled
//! rigid-foldability certification ([`foldability`]), 3D realization
//! ([`realization`]) and file formats ([`io`]).

pub mod angle;
pub mod error;
pub mod foldability;
pub mod io;
pub mod pattern;
pub mod realization;
pub mod unit;
pub mod vertex;

pub use angle::Tolerances;
pub use error::{Error, Result};
pub use foldability::{certify, CompatibilityReport, MvLabel, Verdict};
pub use pattern::{QuadPattern, StitchPlan};
pub use unit::{FfMode, Unit, UnitKind};
pub use vertex::{BranchId, ClassTag, FoldInterval, Vertex4, VertexClass, VertexSolution};
