//! Asynchronously contracting operators (ACOs) on finite product domains.
//!
//! An operator `σ` on `M = M_1 x ... x M_k` is an ACO when every admissible
//! asynchronous execution reaches its unique fixed point. This crate
//! certifies or refutes that property exactly on small domains, in two
//! independent ways: by searching for a nested box sequence, and by
//! searching for an ultrametric under which `σ` contracts strictly on
//! orbits. It also simulates synchronous and asynchronous runs, and ships
//! two concrete operator families: multipath stable-paths routing and the
//! immediate consequence operator of stratified ground logic programs.

pub mod aco;
pub mod dyadic;
pub mod iteration;
pub mod logic;
pub mod routing;
pub mod trace;
pub mod ultrametric;

pub use dyadic::Dyadic;
