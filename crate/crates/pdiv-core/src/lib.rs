//! Finite-state, discrete-time stochastic processes as joint-probability
//! tensors.
//!
//! The crate provides:
//!
//! - dense joint distributions over a finite state space with
//!   marginalization, conditioning, and transition-matrix extraction
//!   ([`prob`]),
//! - the Kolmogorov consistency checks for a family of joint distributions
//!   ([`consistency`]),
//! - memory transition matrices, the Chapman-Kolmogorov check, a
//!   P-divisibility feasibility solver, the necessary consistency condition
//!   for P-divisible processes, and the Markov condition ([`divisibility`]),
//! - built-in processes (Feller's permutation example, the two-state Markov
//!   chain and its memory perturbation) together with a generic kernel
//!   constructor and exact statistics ([`processes`]),
//! - seedable Monte-Carlo sampling of block processes ([`simulate`]),
//! - the vaccination-schedule compliance model ([`epidemic`]).

pub mod consistency;
pub mod divisibility;
pub mod epidemic;
mod error;
mod linalg;
pub mod prob;
pub mod processes;
mod simplex;
pub mod simulate;
pub mod tolerances;

pub use error::{Error, Result};
pub use prob::{Conditional, ConditionalTable, JointDist, ProbVector, StochMatrix, TransitionMatrix};
pub use consistency::{CheckReport, DistFamily};
pub use divisibility::{FeasibilityResult, MemoryFamily};
pub use processes::BlockProcess;
pub use simulate::{EmpiricalStats, Realization};
pub use epidemic::ScheduleState;
