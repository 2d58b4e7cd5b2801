//! Stability laboratory for the stochastic Lorenz '63 system with degenerate damping.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod brackets;
pub mod certificate;
pub mod error;
pub mod fields;
pub mod generator;
pub mod jet;
pub mod lab;
pub mod model;
pub mod rng;
pub mod sampling;
pub mod sde;

pub use error::{Error, Result};
pub use generator::{apply_generator, apply_generator_fd, ScalarField, SharedField};
pub use jet::{Jet2, Real};
pub use model::{ModelParams, Point3};
pub use sde::{simulate, Trajectory};
