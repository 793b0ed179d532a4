//! Trace codes with two non-zeros over GF(p^m), their weight distributions
//! and the 2-designs supported by their fixed-weight codewords.

pub mod arith;
pub mod char_sums;
pub mod code;
pub mod cycint;
pub mod designs;
pub mod error;
pub mod field;
pub mod invariance;
mod linalg;
pub mod transform;

pub use cycint::CycInt;
pub use error::{Error, Result};
pub use field::{FieldCtx, FieldElem};
