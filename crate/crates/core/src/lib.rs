//! Atom-slab radiative dynamics out of thermal equilibrium.

pub mod constants;
pub mod dynamics;
pub mod error;
pub mod matprops;
pub mod quadrature;
pub mod rates;
pub mod slab_optics;
pub mod sweep;

pub use error::{Error, Result};
pub use matprops::{permittivity, surface_resonance, PermittivityModel, TabulatedPermittivity};
pub use slab_optics::{Geometry, Medium, Polarization, SlabCoefficients, SlabThickness};
