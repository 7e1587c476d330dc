//! Scoreline modelling and Monte Carlo simulation of qualification thresholds
//! for 36-team incomplete round-robin league phases.
//!
//! The crate covers the full pipeline:
//!
//! * [`scoreline`] — independent double-Poisson and Dixon-Coles scoreline
//!   probabilities with Elo-difference predictors, plus scoreline sampling.
//! * [`fit`] — maximum-likelihood estimation of the model coefficients from
//!   observed matches, with finite-difference standard errors.
//! * [`draw`] — random generation and validation of league-phase schedules
//!   (eight opponents per team, two per seeding pot, one home and one away).
//! * [`montecarlo`] — seeded, reproducible simulation of full league phases
//!   and estimation of points-to-qualification threshold curves.
//! * [`io`] / [`cli`] — CSV ingestion, result emission and the command-line
//!   surface.
//!
//! With the default `parallel` feature the simulation loops run on a rayon
//! worker pool; results are bit-identical for any worker count because every
//! run draws from its own counter-derived random stream and reductions happen
//! in run order.

pub mod cli;
pub mod domain;
pub mod draw;
pub mod error;
pub mod fit;
pub mod io;
pub mod montecarlo;
pub mod scoreline;

pub use error::{Error, Result};
