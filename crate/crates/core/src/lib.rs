//! Orlicz-space toolkit for multiplication conditional expectation (MCE)
//! operators on finitely represented measure spaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`young`]: Young functions, generalized inverses, complementary
//!   functions, growth-condition evidence and dominance.
//! - [`measure`]: atoms, a dyadically refinable non-atomic part, partition
//!   sub-σ-algebras and simple functions.
//! - [`expectation`]: conditional expectation as block-wise averaging.
//! - [`orlicz`]: the modular, the Luxemburg norm and membership trends.
//! - [`mce`]: the operator `f ↦ E(u f)` together with its boundedness
//!   criteria.
//! - [`range`]: zero / finite-rank / closed-range classification.
//! - [`witness`]: constructive unboundedness witnesses with divergence
//!   certificates.
//! - [`request`]: JSON requests and reports used by the `orlicz-mce` binary.
//!
//! Every growth condition over an infinite family is reported as evidence over
//! a configured grid or as a truncation trend, never as a proof.

pub mod error;
pub mod expectation;
pub mod extended;
pub mod formula;
pub mod grid;
pub mod mce;
pub mod measure;
pub mod orlicz;
pub mod range;
pub mod request;
pub mod witness;
pub mod young;

mod numeric;

pub use error::{Error, Result};
pub use expectation::ConditionalExpectation;
pub use extended::ExtendedReal;
pub use mce::{CriterionReport, MceOperator, Verdict};
pub use measure::{MeasureSpace, SimpleFunction, SubSigmaAlgebra};
pub use orlicz::{luxemburg_norm, modular, LuxemburgNorm};
pub use young::{YoungFunction, YoungSpec};
