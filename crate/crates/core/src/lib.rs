//! Outage, error-rate and capacity analysis of RIS-assisted links under
//! co-channel interference.

pub mod channel;
mod error;
pub mod metrics;
pub mod monte_carlo;
pub mod special;

pub use channel::{fit_kg_parameters, kg_moment, product_moment, sum_moment, KgParams, SystemConfig};
pub use error::{Error, Result};
pub use metrics::{MetricResult, Method, ModulationScheme};
pub use monte_carlo::{McEstimate, PhaseModelKind, PhaseShiftModel};
