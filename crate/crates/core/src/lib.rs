//! Simulation of actively controlled soft nets capturing a large piece of
//! orbital debris.
//!
//! The crate is organised the way the simulation loop runs:
//!
//! * [`dynamics`] owns node and rigid-body state and the semi-implicit
//!   integrator.
//! * [`net_models`] computes internal forces for the three net formulations.
//! * [`contact`] handles net/debris penalty contact and net self-contact.
//! * [`orbital`] supplies Clohessy-Wiltshire relative dynamics.
//! * [`guidance`] is the orienting / approaching / capture state machine.
//! * [`actuation`] implements the PID and sliding-mode corner controllers
//!   together with thrust saturation and propellant accounting.
//! * [`sim`] wires everything into an episode.
//! * [`harness`] runs batches of episodes and aggregates statistics.
//! * [`scenario`] loads and validates scenario files.

pub mod actuation;
pub mod contact;
pub mod dynamics;
pub mod error;
pub mod guidance;
pub mod harness;
pub mod net_models;
pub mod orbital;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};

/// Three-component real vector used for positions, velocities and forces.
pub type Vec3 = nalgebra::Vector3<f64>;
