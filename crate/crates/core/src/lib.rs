//! Degrees-of-freedom calculator, frame planner and link simulator for MIMO
//! relay channels whose three links have unequal coherence times.

pub mod dof;
pub mod error;
pub mod plan;
pub mod rate;
pub mod rational;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use rational::Rational;
pub use scenario::{AntennaConfig, Coherence, CoherenceConfig, RelayConfig, Scenario};
