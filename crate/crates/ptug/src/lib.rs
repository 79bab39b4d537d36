//! Tug-of-war with noise: games, strategies, and grid solvers.
//!
//! This crate implements the ε-step two-player game whose values approximate
//! p-harmonic functions, on planar and 3D domains with isolated boundary
//! points (punctures). It provides:
//!
//! - exact domain geometry with puncture-aware boundary queries,
//! - boundary payoffs including tent mollifications of indicators,
//! - a refereed game engine with reproducible per-trajectory random streams
//!   and verifiable transcripts,
//! - a dynamic-programming grid solver for game values,
//! - greedy and multi-stage perturbation strategies driven by solved fields,
//! - Monte Carlo estimators for values, boundary measures, and escape
//!   probabilities, and
//! - closed-form radial solutions used as accuracy oracles.
//!
//! The core is generic over the scalar type (`f32`/`f64` via [`scalar::Real`]);
//! the crate root exports `f64` aliases for everyday use.

pub mod boundary;
pub mod estimator;
pub mod game;
pub mod geometry;
pub mod oracles;
pub mod rng;
pub mod scalar;
pub mod solver;
pub mod strategies;

pub use scalar::{real, Real};

/// `f64` aliases for the generic core types.
pub type Point64 = geometry::Point<f64>;
pub type Vector64 = geometry::Vector<f64>;
pub type Domain64 = geometry::Domain<f64>;
pub type Shape64 = geometry::Shape<f64>;
pub type BoundarySet64 = geometry::BoundarySet<f64>;
pub type BoundaryFunction64 = boundary::BoundaryFunction<f64>;
pub type GameParams64 = game::GameParams<f64>;
pub type Transcript64 = game::Transcript<f64>;
pub type ValueField64 = solver::ValueField<f64>;
pub type SolveConfig64 = solver::SolveConfig<f64>;
pub type PerturbationPlan64 = strategies::PerturbationPlan<f64>;
