//! Exact counting and randomized estimation of all matchings of bipartite
//! graphs and permanents of 0-1 matrices.

pub mod closed_forms;
pub mod combinatorics;
pub mod ensembles;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod estimator;
pub mod matrix;
pub mod rational;
pub mod report;
pub mod rng;
pub mod verify;

pub use combinatorics::{ExactCount, ExactRational};
pub use error::{Error, Result};
pub use matrix::{ColumnSet, ZeroOneMatrix};
