//! Linear decomposition attacks on group-based key exchange.
//!
//! The crate is layered bottom-up:
//!
//! * [`field`], [`algebra`], [`linalg`]: exact arithmetic over F_p, over
//!   structure-constant algebras, and matrices over those algebras.
//! * [`actions`]: the F_p-linear maps that protocol operations induce on the
//!   flattened matrix space.
//! * [`spanclosure`]: the basis-with-witnesses computation of the span of an
//!   orbit under a finitely generated monoid of linear maps.
//! * [`attacks`] and [`protocols`]: honest simulators for ten schemes and the
//!   attacks that recover their shared secrets from public data only.

pub mod actions;
pub mod algebra;
pub mod attacks;
pub mod error;
pub mod field;
pub mod linalg;
pub mod protocols;
pub mod spanclosure;

pub use error::{Error, Result};
pub use field::PrimeField;
