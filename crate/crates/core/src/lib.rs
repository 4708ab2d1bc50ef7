//! Finite-dimensional calculus for Grassmannian-framed bundles: moment maps
//! on Grassmannians, Hilbert-Mumford weight and stability tests, the extended
//! representation variety of a punctured surface and its Grassmannian
//! extension, parabolic reduction and normal forms, and generalized parabolic
//! plane composition.
//!
//! Every quantity with an exact answer (weights, verdicts, parabolic degrees)
//! is computed in integer/rational arithmetic; floating-point enters only
//! through matrix data, behind an explicit [`linalg::Tolerance`].

pub mod error;
pub mod exact;
pub mod linalg;
pub mod rational;

pub mod grassmann;

pub mod correspond;
pub mod extended;
pub mod framed;
pub mod git_weights;
pub mod gpb;
pub mod wire;

pub use error::{Error, Result};
pub use linalg::{CMatrix, Tolerance};
pub use rational::{Rat, RatWire};
