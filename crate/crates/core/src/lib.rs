//! Planning tools for wireless backhaul of linear millimeter-wave relay
//! deployments.
//!
//! * [`channel`]: path loss and link budgets.
//! * [`rate`]: ideal and pilot-penalized link rates and their inversion.
//! * [`beam`]: effective array gain under angular spread.
//! * [`netgraph`]: deployments, topologies and flow/power constraint matrices.
//! * [`solver`]: minimum-bandwidth routing, bandwidth and power allocation.
//! * [`config`]: scenario files and figure presets.

pub mod beam;
pub mod channel;
pub mod config;
pub mod error;
pub mod netgraph;
pub mod numeric;
pub mod rate;
pub mod solver;
pub mod units;

pub use channel::{path_loss_db, LinkBudget, PathLossModel};
pub use config::ScenarioConfig;
pub use error::{Error, Result};
pub use netgraph::{build_linear_scenario, NetworkScenario, ScenarioParams, Topology};
pub use rate::{LinkCurve, RateModel};
pub use solver::{minimize_total_bandwidth, Scheme, SolveOptions, SolveReport, Status};
