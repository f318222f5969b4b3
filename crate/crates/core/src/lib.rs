//! Numerical Hodge theory for line bundles on flat complex tori and the
//! curvature of direct-image bundles over one-parameter families.

pub mod bls;
pub mod config;
pub mod curvature;
pub mod error;
pub mod exterior;
pub mod family;
pub mod field;
pub mod grid;
pub mod hodge;
pub mod identities;
pub mod linalg;
pub mod operator;
pub mod oracle;
pub mod report;
pub mod space;
pub mod torus;

pub use error::{Error, Result};
