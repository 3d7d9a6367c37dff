//! Quantities conserved in mean under the coupled evolution.
//!
//! The map observable `M = (f′)^{Δ+θ} f^{−2(Δ+θ)}` has dual Itô drift
//! `M·D/f²` with `D` from [`drift_coefficient`], which vanishes exactly when
//! `k = 6/(2h+1)`. [`mc_drift_report`] checks this by simulation;
//! [`module_expected_state`] and [`module_mc_state`] do the same for the
//! walk on the truncated module.

mod mc;
mod module;
mod observable;
mod report;

pub use mc::{mc_drift_report, mc_drift_report_with, mean_se, zscore, Absorption, McOptions, MIN_PATHS};
pub use module::{module_expected_state, module_mc_state, ModuleEstimate, ModuleScheme};
pub use observable::{drift_coefficient, observable_m, observable_with_exponent};
pub use report::{ComponentStats, McReport, MC_CSV_HEADER};
