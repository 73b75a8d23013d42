//! Certified computation of the common terms of the k-generalized Pell and
//! Narayana's cows sequences.
//!
//! The crate is organized around a replayable proof pipeline:
//!
//! - [`certreal`]: ball arithmetic (midpoint + rigorous error radius) over
//!   exact dyadics, with deterministic precision escalation;
//! - [`sequences`]: exact big-integer sequence generation and dominant-root
//!   cross-checks;
//! - [`algebraic`]: certified enclosures of the characteristic roots and
//!   logarithmic heights;
//! - [`linforms`]: evaluators for the linear-forms-in-logarithms bounds;
//! - [`contfrac`]: certified continued fractions and exact convergents;
//! - [`reduction`]: the Baker–Davenport style reduction engine and the two
//!   reduction campaigns;
//! - [`search`]: exhaustive intersection search inside proved bounds;
//! - [`pipeline`]: orchestration and the machine-readable certificate.

pub mod algebraic;
pub mod certreal;
pub mod contfrac;
pub mod linforms;
pub mod pipeline;
pub mod reduction;
pub mod search;
pub mod sequences;

pub use certreal::{CertReal, CertRealError, Dyadic, LazyReal, PrecisionPolicy, Sign};
