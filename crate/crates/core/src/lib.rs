//! Robust lexicometric analysis of contingency tables.
//!
//! The crate takes a words-by-documents count table and provides:
//!
//! * factorial correspondence analysis (factor coordinates, inertia
//!   shares, center distances);
//! * KORRESP, a self-organizing map that classifies rows and columns
//!   simultaneously on one grid;
//! * neighbor-stability testing over an ensemble of independent map
//!   runs, splitting item pairs into attracting, fickle and repulsing
//!   pairs with a binomial test, and flagging fickle words;
//! * the significant-neighborhood graph with exact maximum clique and
//!   quasi-clique search, glutton quasi-clique decomposition and
//!   spectral seriation;
//! * a CLI pipeline that exports maps, factor planes, stability
//!   matrices, graphs and reports with a hash manifest.

// Index loops over (p, q) cells of symmetric matrices read better than
// the iterator rewrites clippy suggests.
#![allow(clippy::needless_range_loop)]
#![allow(clippy::manual_is_multiple_of)]

pub mod cliquegraph;
pub mod contingency;
pub mod error;
pub mod fca;
mod jacobi;
pub mod korresp;
pub mod pipeline;
pub mod report;
pub mod stability;

pub use error::{Error, Result};
