//! Query-complexity laboratory: exact decision-tree searches, conflict and
//! sabotage complexity, exact zero-sum game solving, the BITSAMPLER query
//! process, and the Monte Carlo experiments built on them.
//!
//! Probability-carrying types are generic over [`Scalar`]; exact results use
//! [`Rational`] and the aliases below.

pub mod bench;
pub mod bits;
pub mod conflict;
pub mod dist;
pub mod dtree;
pub mod error;
pub mod function;
pub mod games;
pub mod gen;
pub mod infoth;
pub mod io;
pub mod scalar;
pub mod simproc;
pub mod verify;

pub use bits::{BitString, Subcube};
pub use dtree::{DecisionTree, TreeSearchBudget};
pub use error::{Error, Result};
pub use function::{compose, Evaluation, Label, PartialFunction, QueryProblem, Relation};
pub use scalar::{ExactScalar, Scalar};

/// Arbitrary-precision rational used for every exact computation.
pub type Rational = num_rational::BigRational;

pub type ExactDist = dist::Dist<Rational>;
pub type ExactPair = dist::DistPair<Rational>;
pub type ExactMixture = dist::PairMixture<Rational>;
pub type FloatDist = dist::Dist<f64>;
