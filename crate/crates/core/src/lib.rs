//! The MOR public-key cryptosystem over finitely generated matrix groups and
//! the linear decomposition attack that recovers its plaintexts from public
//! data.

pub mod error;
pub mod gf;
pub mod groups;
pub mod lindec;
pub mod linalg;
pub mod mor;
pub mod par;

pub use error::{Error, Result};
pub use gf::{FieldElement, Prime};
pub use groups::{sl_generators, sp_generators, Family, GroupSpec, GroupWord};
pub use linalg::{EchelonBasis, FlatVector, Matrix};
pub use par::Execution;
