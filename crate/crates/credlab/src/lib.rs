pub mod agent;
pub mod detection;
pub mod error;
pub mod market;
pub mod numerics;
pub mod oversight;
pub mod scoring;
pub use agent::{AgentParams, ApprovalFunction};
pub use error::{Error, Result};
pub use oversight::{OversightGame, PrincipalParams, TypeDistribution};
pub use scoring::Generator;
