//! Frobenius algebra structures on the tangent bundle of `H° x C*`, where
//! `H°` is the complement of the toric mirror arrangement of a reduced
//! irreducible root system, together with numerical certificates for the
//! algebra axioms, flatness of the structure-connection pencil, the
//! potential function and the WDVV equations.
//!
//! Root data is exact ([`roots`]); analysis runs in double-precision complex
//! arithmetic ([`fiber`], [`connection`], [`potential`]); the weighted
//! (toric Lauricella) configuration is exact again ([`lauricella`]).
//! [`suite`] ties everything into a deterministic report.

pub mod connection;
pub mod error;
pub mod fiber;
pub mod lauricella;
pub mod potential;
pub mod rational;
pub mod roots;
pub mod sampling;
pub mod suite;
pub mod tolerances;

pub use num_complex::Complex64;

pub use connection::FrameOperator;
pub use error::{Error, Result};
pub use fiber::{BasePoint, FiberAlgebra, GramVerdict, TangentVec};
pub use lauricella::WeightedSystem;
pub use potential::PotentialContext;
pub use roots::{build_root_system, Family, Multiplicity, RootDatum, RootSystemSpec};
pub use suite::{run_suite, CheckRecord, CheckStatus, RunConfig, VerificationReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
