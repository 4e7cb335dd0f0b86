//! Rotation-equivariant planar maps whose origin attracts a bounded
//! neighbourhood and nothing beyond it.
//!
//! The crate builds Szlenk's map `F4`, its unfolding `G4`, the transplanted
//! family `Fn` and the dissipative variants `H`/`Hn`, checks their dynamics
//! numerically, and carries out the exact equivariant singularity
//! computation for `F4`.

pub mod geometry;
pub mod maps;
pub mod analysis;
pub mod topology;
pub mod singularity;
pub mod verification;

pub use geometry::{PlanarPoint, PolarPoint, SectorIndex, GroupElement, SymmetryOrder};
pub use maps::{Jacobian2, MapSpec, PlanarMap, RadialProfile, SzlenkParams, UnfoldParams};
