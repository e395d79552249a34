//! Residual checks for the weak-solution structure of a level-set
//! evolution: perimeter bound, L² velocity, the distributional velocity and
//! curvature identities, Brakke's inequality, avoidance, comparison, L¹
//! time continuity, fattening, and the aggregate variational verdict.
//!
//! Every check returns a [`ReportEntry`] carrying the residual, its
//! normalization scale, the tolerance and the verdict, so reports are
//! scale-invariant and machine-diffable.

mod checks;
mod family;
mod report;
mod test_fn;

pub use checks::{
    brakke_residual, check_avoidance, check_comparison, check_perimeter_bound, check_velocity_l2,
    detect_fattening, l1_continuity_modulus, residual_distributional_curvature,
    residual_distributional_velocity, verify_variational,
};
pub use family::{LevelFamily, LevelSeries, Provenance};
pub use report::{json_f64, report_csv, ReportEntry, Verdict, VerificationReport};
pub use test_fn::{
    build_localization_fe, standard_battery, CheckBattery, RadialBump, TestFunction, TimeWindow,
};

/// Default relative tolerance of the residual checks at production
/// resolution (n = 257); discretization error scales like O(h + dt^{1/2}).
pub const DEFAULT_TOLERANCE: f64 = 0.05;

/// Arc-length fraction of degenerate-gradient vertices above which a
/// μ-integral is considered unreliable.
pub const DEGENERATE_FRACTION_LIMIT: f64 = 0.05;
