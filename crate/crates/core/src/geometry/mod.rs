//! Ambient domains, the subregion catalog, membership tests, and conformal
//! maps of the disc.

mod ambient;
mod moebius;
mod region;

pub use ambient::{graded_lex, AmbientDomain, MultiIndex};
pub use moebius::{cayley, geodesic_side_circle, inverse_cayley, HalfPlaneFrame, MoebiusMap};
pub use region::{CellClass, IndicatorFn, PlanarRegion, PlanarSet, RadialInterval, SubregionSpec};

pub(crate) use region::{classify_disc, horodisc_circle};

use num_complex::Complex64;

use crate::error::Result;

/// Open-set membership `z ∈ U` (free-function form of [`SubregionSpec::contains`]).
pub fn contains(region: &SubregionSpec, ambient: &AmbientDomain, z: &[Complex64]) -> Result<bool> {
    region.contains(ambient, z)
}

/// Wedge angles of a lune in the half-plane model.
pub fn lune_to_wedge(lune: &SubregionSpec) -> Result<(f64, f64)> {
    lune.lune_to_wedge()
}
