//! Quasi-Monte Carlo estimation of separability probabilities of two-qubit
//! and qubit-qutrit density matrices, with closed-form reference values.

pub mod acceptance;
pub mod criteria;
pub mod estimator;
pub mod error;
pub mod linalg;
pub mod lowdisc;
pub mod measures;
pub mod oracles;
pub mod poly;
pub mod statespace;

pub use error::{Error, Result};
