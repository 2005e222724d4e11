//! Client and server decision rules.

mod federation;
mod linucb;
mod robin;

pub use federation::{Federation, LocalOnly, RobinFederation, Traffic};
pub use linucb::{compute_alpha, LinUcbState};
pub use robin::{
    compute_u, robin_c1, Aggregator, BroadcastMsg, ClientMode, RobinClient, RobinParams,
    RobinServer, UChoice, UploadMsg,
};
