//! Energy-aware QoS routing for wireless sensor networks: geometric network
//! model, load and topology optimization models, and a request-sequence
//! simulator.

pub mod error;
pub mod net;
pub mod qos;
pub mod sim;

pub use error::{NetError, QosError, SimError, ValidationError};
pub use net::{Link, NetworkModel, NodeId, Point};
pub use qos::{EnergyLedger, Request};
pub use sim::{RunReport, Scenario, ScenarioParams, SweepResult};
