//! Rank-2 Drinfeld modules over A = F_q[T].

pub mod error;
pub mod experiments;
pub mod field;
pub mod frobenius;
pub mod linalg;
pub mod matgroups;
pub mod polyring;
pub mod skew;
pub mod torsion;

pub use error::{Error, Result};
