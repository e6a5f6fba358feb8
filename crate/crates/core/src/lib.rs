//! Club-strength ratings for European club football and the tools to
//! compare them: an Elo engine, the UEFA club coefficient, logistic models
//! of Champions League outcomes, and a seeded draw and simulator for the
//! 36-club league phase.

pub mod cli;
pub mod coefficient;
pub mod data;
pub mod draw;
pub mod elo;
pub mod evaluation;
pub mod glm;
pub mod seed;
pub mod simulate;
pub mod synth;
