//! Exact symbolic analysis of ReLU feed-forward networks.
//!
//! Networks are read as weighted finite structures for FO(SUM) evaluation, or
//! compiled to piecewise-linear functions whose queries, integrals and Shapley
//! values are decided over a cylindrical decomposition of the input space.

pub mod affine;
pub mod analysis;
pub mod fosum;
pub mod geometry;
pub mod lifted;
pub mod linear;
pub mod network;
pub mod pwl;
pub mod query;
pub mod rational;
pub mod structure;

pub use lifted::LiftedRational;
pub use rational::Rational;
