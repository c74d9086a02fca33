//! Seismic response of cylindrical liquid-storage tanks.
//!
//! The crate combines reduced-order spring-mass models ([`mechmodel`]), a
//! meridional finite-element sloshing eigensolver ([`sloshfem`]), a
//! flexible-wall impulsive beam model ([`beamtank`]), a bottom-plate uplift
//! model for unanchored tanks ([`uplift`]) and a Newmark time-history engine
//! ([`simulate`]) driven by ground-motion records ([`gmproc`]).

// `!(x > 0.0)` rejects NaN on purpose; index loops mirror the matrix algebra.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod beamtank;
pub mod error;
pub mod gmproc;
pub mod linalg;
pub mod mechmodel;
pub mod model;
pub mod par;
pub mod reference;
pub mod simulate;
pub mod sloshfem;
pub mod special;
pub mod text;
pub mod uplift;

pub use error::{Error, Result};
pub use model::{Anchorage, Liquid, ScaleModel, ShellMaterial, TankGeometry, TankSpec};
pub use par::Exec;
