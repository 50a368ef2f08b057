//! Precision-tracked arithmetic for Lubin-Tate `(φ_L, Γ_L)`-modules.

pub mod error;
pub mod al;
pub mod charp;
pub mod embed;
pub mod field;
pub mod herr;
pub mod linalg;
pub mod lubin_tate;
pub mod report;
pub mod witt;

pub use error::{Error, Result};
pub use field::{FieldParams, Fq, FqElem, OLElement, OLRing, PrecisionProfile, RunConfig};
pub use lubin_tate::{BivariateSeries, LubinTate, PowerSeries};
pub use al::{ALElement, ALRing};
pub use embed::{check_exact_sequence_finite, Embedding, ExactSequenceReport, OmegaLT, WeakDecompletion};
pub use charp::{CharPRing, FqRing, FqSeries, SeriesRing, Valuation};
pub use witt::{NormValue, WittRing, WittVector};
