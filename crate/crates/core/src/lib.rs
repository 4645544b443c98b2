//! Numerical engine for the open D₂⁽²⁾ spin chain with non-diagonal boundaries.

pub mod bae;
pub mod d22;
pub mod error;
pub mod fusion;
pub mod identities;
pub mod jet;
pub mod sample;
pub mod tensor;
pub mod transfer;
pub mod xxz;

pub use error::{Error, Result};
pub use tensor::{c, DenseOperator, SiteLayout, C64};
