//! Sample-count theory and solvers for signals constrained to algebraic
//! varieties: sparse vectors, low-rank matrices and phase-retrieval lifts.
//!
//! The crate answers three questions for a given measurement ensemble:
//! how many samples are needed in principle ([`bounds`]), whether this
//! particular ensemble is injective on a variety ([`injectivity`]), and how to
//! actually recover a signal from its samples ([`recovery`]).

pub mod bounds;
pub mod checks;
pub mod coords;
pub mod error;
pub mod injectivity;
pub mod json;
pub mod linalg;
pub mod recovery;
pub mod reference;
pub mod rng;
pub mod sampling;
pub mod varieties;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, Field, Shape, C64};
pub use sampling::{MeasurementEnsemble, SampleVector};
pub use varieties::{VarietyKind, VarietySpec};
