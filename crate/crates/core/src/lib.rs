//! Pseudospectral lab for the focusing fractional NLS
//! `i u_t = (-Delta)^s u - |u|^{2 sigma} u` on periodic boxes, with localized
//! virial diagnostics for data that are cylindrically symmetric in `y = (x_1, .., x_{N-1})`.
//!
//! Grid-facing code is generic over [`Real`]; the aliases below fix `f64`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod cutoff;
pub mod error;
pub mod evolution;
pub mod field;
pub mod grid;
pub mod ground_state;
pub mod inequality;
pub mod params;
pub mod quadrature;
pub mod scalar;
pub mod special;
pub mod spectral;
pub mod virial;

pub use error::{Error, Result};
pub use field::{Field, Representation};
pub use grid::{Grid, YSymmetry};
pub use params::ModelParams;
pub use scalar::Real;

pub type Grid64 = grid::Grid<f64>;
pub type Field64 = field::Field<f64>;
pub type Params64 = params::ModelParams<f64>;
pub type Propagator64 = evolution::Propagator<f64>;
pub type Field32 = field::Field<f32>;
pub type Grid32 = grid::Grid<f32>;
