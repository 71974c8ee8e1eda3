//! Finite-size and thermodynamic scaling analysis of the susceptibility.
//!
//! Everything here works in `f64`: peak location per size, the √χ_m vs ln N
//! fit, the χ vs ln(1/|1−λ|) fit in the thermodynamic limit, and the data
//! collapse onto a single function of N^ν(λ − λ_m).

mod collapse;
mod fit;
mod peak;
mod search;

pub use collapse::{
    collapse_from_peaks, collapse_quality, data_collapse, optimal_nu, q_function_tail_fit,
    CollapseCurve, CollapsePoint, Side, DEFAULT_WINDOW, MATCH_POINTS, SAMPLES_PER_SIZE,
};
pub use fit::{
    fit_finite_size, fit_line, fit_thermo, fit_thermo_data, FitFlag, FitModel, LineFit, ScalingFit,
    MIN_R_SQUARED,
};
pub use peak::{
    coarse_scan, find_peak, PeakRecord, CERTIFICATE_STEP, DEFAULT_BRACKET, PEAK_TOLERANCE,
    SCAN_POINTS,
};
pub use search::{golden_section_max, golden_section_min};

use crate::error::Result;
use crate::rdm::build_rdm;
use crate::rfs::rfs_closed_form;
use crate::tfim::{correlators_finite, correlators_thermo, ChainSpec};

/// Closed-form susceptibility χ(λ, N) for a finite chain.
pub fn chi_finite(n_sites: usize, lambda: f64) -> Result<f64> {
    let spec = ChainSpec::new(n_sites, lambda)?;
    Ok(rfs_closed_form(&build_rdm(&correlators_finite(&spec))?)?.chi)
}

/// Closed-form susceptibility in the thermodynamic limit; fails at λ = 1.
pub fn chi_thermo(lambda: f64) -> Result<f64> {
    Ok(rfs_closed_form(&build_rdm(&correlators_thermo(lambda)?)?)?.chi)
}

/// Analytic coefficient of (ln N)² in the critical susceptibility,
/// (27π⁴ − 144π² − 1024) / [π²(9π² + 32)(3π² − 32) + 4096] ≈ 0.1485.
pub fn a1() -> f64 {
    use std::f64::consts::PI;
    let p2 = PI * PI;
    (27.0 * p2 * p2 - 144.0 * p2 - 1024.0) / (p2 * (9.0 * p2 + 32.0) * (3.0 * p2 - 32.0) + 4096.0)
}
