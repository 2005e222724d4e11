//! Empirical privacy check: run a mechanism on two neighboring datasets a
//! million times each and compare binned output frequencies.
//!
//! cargo run --release --example dp_audit

use fedbandit::dp::audit::{run_dp_audit, AuditConfig, AuditMechanism};

fn main() -> fedbandit::Result<()> {
    for (mech, eps) in [
        (AuditMechanism::Winsorized1d, 0.5),
        (AuditMechanism::Winsorized1d, 1.0),
        (AuditMechanism::Winsorized1d, 2.0),
        (AuditMechanism::ExactMean, 1.0),
    ] {
        let cfg = AuditConfig::new(mech, eps, 1_000_000, 0);
        let report = run_dp_audit(&cfg)?;
        println!(
            "{mech:?} eps = {eps}: max |log ratio| = {:.4} over {} bins -> {}",
            report.max_log_ratio,
            report.bins.len(),
            if report.passed {
                "consistent with eps-DP"
            } else {
                "violates eps-DP"
            }
        );
    }
    Ok(())
}
