//! Base fields F_q and residue fields F_𝔭 = F_q[T]/(𝔭).

mod base;
mod ext;

pub use base::{FieldCtx, Fq};
pub use ext::{ExtFieldCtx, ExtFieldElem};

pub(crate) use base::prime_factors;
