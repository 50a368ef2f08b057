//! Ramified Witt vectors `W_n(R)_L` over characteristic-`p` rings.
//!
//! The universal polynomials are solved from the ghost components
//! `Φ_j = Σ_{i≤j} π^i X_i^{q^{j-i}}` over `o_L/π^m`, then reduced mod `π`
//! for evaluation in `R`.

mod norm;
mod poly;
mod ring;

pub use norm::{witt_norm, witt_norm_interval, NormValue};
pub use poly::{ghost, Poly, UniversalWittPolys, MAX_WITT_LEN};
pub use ring::{WittRing, WittVector};
