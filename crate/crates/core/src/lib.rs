//! Dynamical divisibility sequences attached to Laurent polynomials on
//! finite subgroups of the torus.

pub mod analytics;
pub mod config;
pub mod cyclo;
pub mod dd;
pub mod error;
pub mod factor;
pub mod ffield;
pub mod laurent;
pub mod lattice;
pub(crate) mod par;
pub mod poly;
pub mod symbolic;

pub use config::{Execution, Limits};
pub use error::{Error, Result};
pub use factor::FactoredProduct;
pub use laurent::LaurentPoly;
pub use lattice::{FiniteSubgroup, TorsionPoint};
pub use poly::ZPoly;
