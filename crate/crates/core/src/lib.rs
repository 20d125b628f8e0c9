//! Exact ℓ^p distances for finitary functors over finite distance spaces.

#![allow(clippy::needless_range_loop)]

pub mod io;
pub mod metric_core;
pub mod tight_span;
pub mod functor_engine;
pub mod hyperspace;
pub mod group_norms;
pub mod entropy_dim;
pub mod random;
pub mod suite;
pub mod reference;
