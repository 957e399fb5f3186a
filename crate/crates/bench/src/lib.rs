//! Fixtures shared by the criterion benches.

use ris_est_core::harness::generate_trial;
use ris_est_core::{SystemConfig, TrialData};

/// Desk-scale configuration with `P_j` paths per user.
pub fn desk_with_paths(paths_ris_user: usize) -> SystemConfig {
    let mut cfg = SystemConfig::desk();
    cfg.paths_ris_user = paths_ris_user;
    cfg.common_columns = cfg.common_columns.min(paths_ris_user);
    cfg
}

/// Trial 0 of `cfg`; panics on an invalid configuration.
pub fn trial(cfg: &SystemConfig) -> TrialData {
    generate_trial(cfg, 0).expect("bench fixture")
}
