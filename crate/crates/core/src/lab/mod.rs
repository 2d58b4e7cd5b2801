//! Monte Carlo experiments: hitting times, empirical stationary laws and the
//! degenerate-noise drift diagnostic.

pub mod diagnostic;
pub mod hitting;
pub mod stationary;

pub use diagnostic::{nonstationarity_drift_diagnostic, DriftDiagnostic};
pub use hitting::{estimate_hitting, hitting_samples, write_hitting_csv, HitSample, HittingTimeStats, Target};
pub use stationary::{estimate_stationary, ks_distance_normal, tv_distance, EmpiricalLaw, Histogram, StationaryOptions};
