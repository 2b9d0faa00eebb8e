//! Explicit non-adaptive group testing schemes built from derandomized
//! Gilbert-Varshamov codes over prime fields.
//!
//! The pipeline is `params` (choose `q`, `k`, `m`) → `gvcode` (construct a
//! linear code whose minimum distance is at least `δm`) → `ssf` (turn the code
//! into a strongly selective family) → `scheme` (encode defective sets as
//! test outcomes and decode them back).

pub mod cli;
pub mod error;
pub mod field;
pub mod format;
pub mod gvcode;
pub mod params;
pub mod scheme;
pub mod ssf;

pub use error::{GtError, Result};
pub use field::{FieldElement, PrimeField};
pub use gvcode::{construct_code, ConstructOptions, GeneratorMatrix, Mode};
pub use params::{derive_params, CodeParams, Rational, SchemeParams};
pub use scheme::{build_gt_scheme, build_scheme, decode, outcomes, DefectiveSet, OutcomeVector};
pub use ssf::{verify_ssf, Scheme, SsfVerdict};
