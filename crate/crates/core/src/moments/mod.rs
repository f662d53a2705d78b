//! Moment matrices of subregions: closed forms and adaptive quadrature.

mod disc;
mod gauss;
mod gram;
mod quadrature;

pub use disc::{disc_gram, disc_moment};
pub use gauss::gauss_legendre;
pub use gram::{gram, has_closed_form, GramMatrix, MomentMethod, MomentRequest};
pub use quadrature::{
    integrate_annulus, integrate_cells, integrate_region, quadrature_integral, Annulus, Intersection, Quadrature,
    QuadratureOptions,
};

pub(crate) use gram::matmul;
pub(crate) use quadrature::polar_pieces;
