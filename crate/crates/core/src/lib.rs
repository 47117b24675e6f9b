//! Probabilistic assignment under general feasibility constraints with equal
//! treatment of equals, ordinal and rank-minimizing efficiency checks, serial
//! dictatorship, and manipulation search.

pub mod efficiency;
pub mod error;
pub mod ete;
pub mod feasibility;
pub mod io;
pub mod lottery;
pub mod lp;
pub mod mechanisms;
pub mod problem;
pub mod rational;
pub mod repro;
pub mod strategy;

pub use error::{Error, Result};
pub use ete::{check_ete, derived_set, ete_reassign, lemma1_marginal, DerivedSet, GeneratorMode};
pub use feasibility::{EnumerationBudget, FeasibleSet, PureAssignment};
pub use lottery::{fosd, marginal, marginals, Dominance, Lottery, Marginal};
pub use problem::{AgentId, Bundle, EqualsPartition, ObjectId, PreferenceOrder, Problem};
pub use rational::Rational;
