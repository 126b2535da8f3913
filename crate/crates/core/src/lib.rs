//! Exact models and solvers for aggregating preferences into weak orders.
//!
//! Items are 0-based in every API and 1-based in every text form.

pub mod analysis;
pub mod error;
pub mod formulations;
pub mod ingest;
pub mod instances;
pub mod matrix;
pub mod order;
pub mod rational;
pub mod solver;
pub mod variant;

pub use error::{Error, Result};
pub use matrix::{distance, utopian, PairOrderMatrix, UtopianResult};
pub use order::{
    bucket_matrix, consistent_linear_extensions, enumerate_weak_orders, ordered_bell, BucketMatrix, BucketOrder,
    Relation,
};
pub use rational::Rational;
pub use solver::{brute_force_solve, enumerate_optima, solve, SolveConfig, SolveResult, Status, Strategy};
pub use variant::{FairVariant, FairnessSpec, VariantSpec};
