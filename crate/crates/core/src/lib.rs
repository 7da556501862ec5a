//! Finite-window coarse topology over GF(2).
//!
//! Spaces are explicit finite models (group balls with word metrics, lattice
//! fixtures). On top of them the crate builds Rips complexes, computes
//! reduced homology and two-scale images, counts coarse complementary
//! components, probes essential components, assembles Mayer-Vietoris
//! connecting maps and approximates mobility sets. Verdicts are three-valued
//! and always name the window they were computed at.

pub mod cochain;
pub mod error;
pub mod essential;
pub mod fixtures;
pub mod gf2;
pub mod groups;
pub mod homology;
pub mod metric;
pub mod mobility;
pub mod par;
pub mod rips;
pub mod separation;

pub use error::{Error, Result};
pub use gf2::{GF2Matrix, GF2Subspace, SparseBitVec};
pub use metric::{FiniteMetricSpace, Label, PointId, SubsetMask};
