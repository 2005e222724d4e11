//! Differentially private aggregation and privacy accounting.

mod accounting;
pub mod audit;
mod mechanisms;

pub use accounting::{
    compose_advanced, compose_simplified, robin_budget, verify_robin_budget, BudgetCheck,
    BudgetSplit, PrivacyParams,
};
pub use mechanisms::{
    highd_coordinate_params, highd_error_bound, highd_tail_term, private_range, range_midpoints,
    winsorized_mean_1d, winsorized_mean_highd, RangeInterval,
};
