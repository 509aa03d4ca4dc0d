//! Exact Walsh spectra of the monomial trace functions Tr(x^((q-1)/l^2)) in
//! the index-2 setting, together with a brute-force finite-field oracle that
//! cross-validates every closed form at desk scale.
//!
//! The library splits into:
//! - [`params`]: instance validation and derived parameters (index-2 order
//!   condition, class number, norm-equation pair, residue partition);
//! - [`algebra`] / [`embed`]: exact arithmetic in Q(zeta_p)(sqrt(-l)) and its
//!   precision-controlled complex embedding;
//! - [`closed_form`]: Gauss sums, trace tables, I-sums, the two independent
//!   assembly paths for every Walsh value, and the spectrum tables;
//! - [`field`] / [`oracle`]: explicit F_{p^f} construction and the streaming
//!   brute-force checks;
//! - [`verify`]: the check suite behind the `verify` command.

pub mod algebra;
pub mod arith;
pub mod closed_form;
pub mod embed;
pub mod error;
pub mod field;
pub mod oracle;
pub mod params;
pub mod polyfp;
pub mod verify;

pub use error::{Error, Result};
