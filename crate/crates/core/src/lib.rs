//! Decoherence and spectrum broadcast structure formation for an NV center
//! qubit coupled to a ¹³C nuclear spin bath.
//!
//! Units: rad/μs for frequencies, μs for times, nm for lengths, tesla for
//! fields unless a name says otherwise.

pub mod dynamics;
pub mod environment;
pub mod error;
pub mod fidelity;
pub mod oracle;
pub mod product;
pub mod runner;

pub use dynamics::{QubitPair, TimeGrid};
pub use environment::{EnvironmentRealization, LatticeSpec, NuclearSpin, PhysicalConstants};
pub use error::{Error, Result};
