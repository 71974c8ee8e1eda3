use super::chi_finite;
use super::search::golden_section_max;
use crate::error::{Error, Result};

pub const DEFAULT_BRACKET: (f64, f64) = (0.8, 1.1);
pub const SCAN_POINTS: usize = 41;
/// Final bracket width of the golden-section refinement.
pub const PEAK_TOLERANCE: f64 = 1e-8;
/// Offset used for the local-maximum certificate χ(λ_m) ≥ χ(λ_m ± step).
pub const CERTIFICATE_STEP: f64 = 1e-6;

/// Location and height of the susceptibility maximum for one size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakRecord {
    pub n_sites: usize,
    pub lambda_m: f64,
    pub chi_m: f64,
    /// χ at λ = 1 for comparison with χ_m.
    pub chi_at_critical: f64,
}

/// χ(λ, N) on `points` evenly spaced couplings spanning `bracket`.
pub fn coarse_scan(n_sites: usize, bracket: (f64, f64), points: usize) -> Result<Vec<(f64, f64)>> {
    let (lo, hi) = bracket;
    if points < 2 {
        return Err(Error::Domain("a scan needs at least two points".into()));
    }
    let step = (hi - lo) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let lambda = if i + 1 == points {
                hi
            } else {
                lo + step * i as f64
            };
            chi_finite(n_sites, lambda).map(|chi| (lambda, chi))
        })
        .collect()
}

/// Maximum of χ(·, N) inside `bracket`.
///
/// A 41-point scan must rise and then fall exactly once; the golden-section
/// refinement then runs on the two grid cells around the best grid point
/// until the bracket is 1e−8 wide, and the result is certified against
/// χ(λ_m ± 1e−6).
pub fn find_peak(n_sites: usize, bracket: (f64, f64)) -> Result<PeakRecord> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && lo < hi && hi <= 2.0) {
        return Err(Error::Domain(format!(
            "peak bracket must satisfy 0 < lo < hi <= 2, got ({lo}, {hi})"
        )));
    }
    let scan = coarse_scan(n_sites, bracket, SCAN_POINTS)?;
    let best = scan
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .expect("scan is non-empty");
    if best == 0 || best + 1 == scan.len() || !unimodal(&scan, best) {
        return Err(Error::NoInteriorMaximum {
            n_sites,
            lo,
            hi,
            scan,
        });
    }

    let (lambda_m, chi_m) = golden_section_max(
        |lambda| chi_finite(n_sites, lambda),
        scan[best - 1].0,
        scan[best + 1].0,
        PEAK_TOLERANCE,
    )?;

    for probe in [lambda_m - CERTIFICATE_STEP, lambda_m + CERTIFICATE_STEP] {
        let chi = chi_finite(n_sites, probe)?;
        if chi > chi_m {
            return Err(Error::NoInteriorMaximum {
                n_sites,
                lo: lambda_m - CERTIFICATE_STEP,
                hi: lambda_m + CERTIFICATE_STEP,
                scan: vec![(probe, chi), (lambda_m, chi_m)],
            });
        }
    }

    Ok(PeakRecord {
        n_sites,
        lambda_m,
        chi_m,
        chi_at_critical: chi_finite(n_sites, 1.0)?,
    })
}

/// Strictly increasing up to `peak`, strictly decreasing after it.
fn unimodal(scan: &[(f64, f64)], peak: usize) -> bool {
    let rising = scan[..=peak].windows(2).all(|w| w[1].1 > w[0].1);
    let falling = scan[peak..].windows(2).all(|w| w[1].1 < w[0].1);
    rising && falling
}
