//! Certified minimum bisection via the spectral lower bound
//! `h(G) = max_d (2m + Σd − n·λ(B_S)) / 4`.
//!
//! Layout: [`graph`] and [`generators`] build inputs, [`adversary`] edits
//! them monotonically, [`spectral`] and [`linalg`] do the eigen work,
//! [`solver`] maximizes the bound and certifies cuts, [`structure`] and
//! [`sdp`] explain and witness the results, [`oracle`] is brute force
//! ground truth and [`experiments`] runs seeded trial batches.

#![allow(clippy::needless_range_loop)]

pub mod adversary;
pub mod error;
pub mod experiments;
pub mod generators;
pub mod graph;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod rng;
pub mod sdp;
pub mod solver;
pub mod spectral;
pub mod structure;

pub use error::{Error, Result};
pub use graph::{cut_width, BisectionVector, Graph};
pub use solver::{solve, SolveOptions, SolveReport, Status};
