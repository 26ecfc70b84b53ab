//! Mediated normal-form games.
//!
//! Agents submit an action together with a delegation bit; a mediator then
//! plays on behalf of the delegators. This crate provides exact Pareto and
//! Punishing mediators for explicit games, specialized mediators for a
//! mutual-matching game and a restaurant reservation game, an exact
//! assignment solver, epsilon-greedy learners, and the experiment harness
//! behind the `sim` binary.

pub mod assignment;
pub mod error;
pub mod experiment;
pub mod game;
pub mod learning;
pub mod matching;
pub mod mediator;
pub mod restaurant;

pub use assignment::{solve_assignment, Assignment, AssignmentProblem, FORBIDDEN};
pub use error::{Error, Result};
pub use game::{
    build_mediated_game, enumerate_pure_nash, pareto_dominates, Game, MediatedProfile, PureProfile, DEFAULT_CELL_CAP,
};
pub use learning::{Environment, LearnerState, StepOutcome, Trajectory};
pub use mediator::{pareto_mediate, punish_mediate, resolve, MediatorKind, MediatorOutcome};
