//! Exact and probabilistic combinatorics of maps on surfaces.
//!
//! * [`constants`]: the tau numbers and `t_g`.
//! * [`series`]: truncated rational power series and the series identities.
//! * [`elimination`]: the differential elimination producing the
//!   `(5 theta - 3)_((5))` identity.
//! * [`maps`]: rotation systems, exhaustive enumeration, skeletons and openings.
//! * [`bijections`]: Marcus-Schaeffer and Miermont closures with property checks.
//! * [`montecarlo`]: large random planar quadrangulations and Voronoi cell masses.
//! * [`acceptance`]: the end-to-end checks behind `selftest`.

pub mod acceptance;
pub mod bijections;
pub mod constants;
pub mod elimination;
pub mod maps;
pub mod montecarlo;
pub mod error;
pub mod rational;
pub mod series;

pub use error::{Error, Result};
pub use rational::Rational;
