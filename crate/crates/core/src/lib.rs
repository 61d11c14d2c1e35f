//! Invariants of the coadjoint representation of real Lie algebras, computed
//! by a moving-frame normalization of the lifted coordinates.

pub mod algebra;
pub mod catalog;
pub mod closed_form;
pub mod error;
pub mod format;
pub mod linalg;
pub mod mat_exp;
pub mod moving_frame;
pub mod poly;
pub mod sampling;
pub mod scalar;
pub mod symmetrizer;
pub mod verifier;

pub use algebra::{Assumption, AssumptionKind, AssumptionSet, ParamMatrix, RankCertificate, StructureConstants};
pub use error::{DomainKind, Error, Result};
pub use poly::{Poly, RatFunc, Sym};
