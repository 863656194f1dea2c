//! Direction sets, tangent cones and the sequence selection property for
//! set-germs at the origin of `R^n`, with Lipschitz extension tools and
//! empirical checks of tangent-cone invariance under bi-Lipschitz maps.

// `!(x > 0.0)` is used on purpose: it rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod direction;
pub mod examples;
pub mod error;
pub mod expr;
pub mod germ;
pub mod linalg;
pub mod lipschitz;
pub mod lowdisc;
pub mod map;
pub mod sequence;
pub mod shapes;
pub mod ssp;
pub mod transversality;

pub use error::{Error, Result};
pub use germ::{Cone, DirectionSet, GermOracle, SampledGerm, ScaleSchedule, Shell, UnitVector};
pub use map::MapDescriptor;
pub use sequence::SequenceGerm;
