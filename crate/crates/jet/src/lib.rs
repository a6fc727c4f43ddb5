//! Exact rational functions over jet coordinates.
//!
//! Variables are base coordinates, jets `u_α` of finitely many unknowns, the
//! spectral parameter, formal generator jets and named auxiliary symbols.

pub mod error;
pub mod expr;
pub mod gcd;
pub mod jet;
pub mod matrix;
pub mod monomial;
pub mod poly;
pub mod var;

pub use error::{JetError, Result};
pub use expr::Expr;
pub use jet::{jet_symbol, order, substitute, substitute_prolonged, Coordinates, SymTensor};
pub use monomial::Monomial;
pub use poly::{rat, ratio, Coeff, Poly};
pub use var::{aux, JetVar, MultiIndex, Var};
