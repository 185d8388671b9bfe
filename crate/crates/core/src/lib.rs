//! Stable assignments for forking problems.
//!
//! A community of agents votes over alternatives, but may split: every agent
//! ranks outcomes `(alternative, community size)` and prefers larger
//! communities at a fixed alternative. This crate computes stable assignments,
//! runs the query-driven version of the greedy rule, classifies preference
//! domains, and audits manipulability by exhaustive search.

pub mod cli;
pub mod domains;
pub mod elicitation;
pub mod error;
pub mod exhaustive;
pub mod io;
pub mod model;
pub mod multiway;
pub mod solver;

pub use error::{Error, Result};
pub use model::{Alternative, Assignment, Outcome, PreferenceOrder, Profile};
pub use solver::Rule;
