//! Linearization of holomorphic ℂ*-actions on ℂⁿ near a fixed point.
//!
//! An action is given either in closed form `Φ(s, x)` (polynomial in `x`,
//! Laurent in `s`) or through a polynomial vector field whose time-one flow is
//! the identity. The pipeline validates the action, extracts the integer
//! weights of its linear part, classifies the fixed point, builds the
//! circle-averaged linearizer `F` with `ψᶻ ∘ F = F ∘ φᶻ`, certifies that
//! conjugacy on samples, and extends `F` along orbits for dicritical points.
//!
//! The group parameter is the additive `z` with `s = e^{2π√−1 z}`.

pub mod action;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod extend;
pub mod flow;
pub mod linalg;
pub mod linearize;
pub mod poly;
pub mod sampling;

pub use error::{Error, Result};
