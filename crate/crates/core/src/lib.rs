//! Numerical laboratory for monogamy-of-entanglement games.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod discrimination;
pub mod error;
pub mod game;
pub mod linalg;
pub mod posver;
pub mod qkd;
pub mod random;
pub mod seesaw;
pub mod uncertainty;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DimensionList, C64};
