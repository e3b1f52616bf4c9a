//! Finite-element solver for the periodic Hasegawa–Mima equation written as a
//! transport equation for `w = u − Δu` coupled to the elliptic problem `−Δu + u = w`.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod assembly;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod problems;
pub mod sparse;
pub mod stepper;
pub mod verify;

pub use error::{Error, Result};
pub use harness::RunConfig;
pub use mesh::Mesh;
pub use sparse::CsrMatrix;
