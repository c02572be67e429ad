// Negated comparisons are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops follow the matrix formulas they implement.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod kernel;
pub mod laguerre;
pub mod linalg;
pub mod mesh;
pub mod quad;
pub mod psd;
pub mod spectra;
pub mod appendix;
pub mod dd;
pub mod models;
pub mod cli;
