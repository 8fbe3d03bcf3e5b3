//! A numerical laboratory for fully nonlinear elliptic differential
//! inequalities `−Λ ≤ F(D²u) ≤ Λ`.
//!
//! The crate manufactures grid solutions of such inequalities (Dirichlet and
//! obstacle relaxation), certifies them in a discrete viscosity sense, and
//! measures interior `C^{1,β}` regularity through the decay of
//! `inf_q osc_{B(r)} (u − q·x)` as `r → 0`. A separate module carries out the
//! mollification argument for linear constant-coefficient inequalities.

pub mod campanato;
pub mod discretization;
pub mod error;
pub mod fixtures;
pub mod grid;
pub mod lp;
pub mod matrix;
pub mod mollification;
pub mod operators;
pub mod rng;
pub mod solvers;
pub mod viscosity;

pub use error::{Error, Result};
pub use grid::{oscillation, restrict, Ball, Domain, Grid, GridFunction, PartialField};
pub use matrix::SymMatrix;
pub use operators::{EllipticOperator, EllipticityParams, OperatorKind};
