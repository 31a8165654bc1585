//! Dynamic programming over the state law of finite mean-field-type games.
//!
//! The value of each player is a function of the probability measure on the
//! state set. It is tabulated on a barycentric grid of the simplex and
//! interpolated in between. Best responses search mixed decision rules on a
//! lattice and refine the winner locally.

pub mod dpp;
pub mod game;
pub mod simplex;

pub use dpp::{
    evaluate_policy, linearity_gap, mean_field_equilibrium, measure_flow, resolution_check, solve_dpp, ConstantPolicy,
    DppOptions, DppSolution, EquilibriumOptions, EquilibriumReport, FeedbackPolicy, PlayerPolicy, PolicyProfile,
    ResolutionCheck,
};
pub use game::{propagate, step, DecisionRule, FiniteMftGame, MeanField, StepOutcome, TabularGame};
pub use simplex::{SimplexGrid, SimplexMeasure};
