//! Geometry of dispersionless integrable systems: characteristic conformal
//! structures, Einstein–Weyl and self-dual conditions, and Lax pairs given
//! as families of null hypersurfaces.

pub mod error;
pub mod conformal;
pub mod corpus;
pub mod dsl;
pub mod ideal;
pub mod lax;
pub mod weyl;

pub use error::{Error, Result};
pub use ideal::{Cofactors, Operator, Ranking, SolvedEquation, System};
