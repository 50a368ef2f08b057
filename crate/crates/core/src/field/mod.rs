//! Base field arithmetic: `F_q`, `o_L/π^m` and run parameters.

pub mod fq;
pub mod ol;
mod params;

pub use fq::{Fq, FqElem};
pub use ol::{OLElement, OLRing};
pub use params::{FieldParams, PrecisionProfile, RunConfig, REPORT_FORMAT_VERSION};
