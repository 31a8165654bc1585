//! Numerical toolkit for games with empathic, spiteful and reciprocal
//! preferences.
//!
//! The crate covers static matrix games (collision channel, two-player and
//! crowd forwarding), a spiteful/altruistic procurement bid, an energy
//! demand equilibrium, a linear-quadratic mean-field-type game solved by
//! coupled Riccati recursions, dynamic programming over probability measures
//! on a finite state space, and the scoring pipeline for the Interpersonal
//! Reactivity Index questionnaire.

pub mod auction;
pub mod empathy;
pub mod empathy_data;
pub mod energy;
pub mod error;
pub mod forwarding;
pub mod lq_game;
pub mod matrix_games;
pub mod measure_dp;
pub mod seeding;

pub use empathy::{EmpathyMatrix, Neighbors, PayoffProfile};
pub use error::{Error, Result};
