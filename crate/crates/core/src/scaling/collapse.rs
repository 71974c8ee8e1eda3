//! Data collapse of √χ_m − √χ(λ) onto a function of x = N^ν (λ − λ_m).

use super::chi_finite;
use super::fit::{fit_line, LineFit};
use super::peak::{find_peak, PeakRecord, DEFAULT_BRACKET};
use super::search::golden_section_min;
use crate::error::{Error, Result};

/// Sampling window in units of N·(λ − λ_m): λ ∈ [λ_m + lo/N, λ_m + hi/N].
pub const DEFAULT_WINDOW: (f64, f64) = (-10.0, 10.0);
pub const SAMPLES_PER_SIZE: usize = 201;
/// Matched-x grid used by [`collapse_quality`].
pub const MATCH_POINTS: usize = 201;

const NU_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollapsePoint {
    pub n_sites: usize,
    /// λ − λ_m
    pub offset: f64,
    /// N^ν (λ − λ_m)
    pub x: f64,
    /// √χ_m − √χ(λ)
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollapseCurve {
    /// Grouped by size in the order the sizes were given, x ascending
    /// within each size.
    pub points: Vec<CollapsePoint>,
    pub nu: f64,
    pub peaks: Vec<PeakRecord>,
}

impl CollapseCurve {
    pub fn sizes(&self) -> Vec<usize> {
        self.peaks.iter().map(|p| p.n_sites).collect()
    }

    /// The same samples with x recomputed for exponent `nu`.
    pub fn rescaled(&self, nu: f64) -> Self {
        let points = self
            .points
            .iter()
            .map(|p| CollapsePoint {
                x: (p.n_sites as f64).powf(nu) * p.offset,
                ..*p
            })
            .collect();
        Self {
            points,
            nu,
            peaks: self.peaks.clone(),
        }
    }

    fn series(&self, n_sites: usize) -> (Vec<f64>, Vec<f64>) {
        self.points
            .iter()
            .filter(|p| p.n_sites == n_sites)
            .map(|p| (p.x, p.y))
            .unzip()
    }
}

/// Locates the peak for each size and samples the collapse.
pub fn data_collapse(sizes: &[usize], nu: f64, window: (f64, f64)) -> Result<CollapseCurve> {
    let peaks = sizes
        .iter()
        .map(|n| find_peak(*n, DEFAULT_BRACKET))
        .collect::<Result<Vec<_>>>()?;
    collapse_from_peaks(&peaks, nu, window, SAMPLES_PER_SIZE)
}

/// Samples each size on `samples` evenly spaced couplings of the window.
pub fn collapse_from_peaks(
    peaks: &[PeakRecord],
    nu: f64,
    window: (f64, f64),
    samples: usize,
) -> Result<CollapseCurve> {
    let (lo, hi) = window;
    if !(lo < hi) || samples < 2 || !nu.is_finite() {
        return Err(Error::Domain(format!(
            "collapse needs lo < hi, >= 2 samples and finite nu; got ({lo}, {hi}), {samples}, {nu}"
        )));
    }
    let mut points = Vec::with_capacity(peaks.len() * samples);
    for peak in peaks {
        let n = peak.n_sites as f64;
        let sqrt_chi_m = peak.chi_m.sqrt();
        for i in 0..samples {
            let scaled = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            let offset = scaled / n;
            let chi = chi_finite(peak.n_sites, peak.lambda_m + offset)?;
            points.push(CollapsePoint {
                n_sites: peak.n_sites,
                offset,
                x: n.powf(nu) * offset,
                y: sqrt_chi_m - chi.sqrt(),
            });
        }
    }
    Ok(CollapseCurve {
        points,
        nu,
        peaks: peaks.to_vec(),
    })
}

/// Mean pairwise |yᵢ − yⱼ| across sizes on a matched x grid, divided by the
/// range of the across-size mean curve. Zero is a perfect collapse.
///
/// Each size is interpolated with a monotone piecewise cubic on the
/// overlap of all sizes' x ranges.
pub fn collapse_quality(curve: &CollapseCurve) -> Result<f64> {
    let sizes = curve.sizes();
    let series: Vec<(Vec<f64>, Vec<f64>)> = sizes.iter().map(|n| curve.series(*n)).collect();
    if series.iter().any(|(xs, _)| xs.len() < 2) {
        return Err(Error::Domain(
            "every size needs at least two samples".into(),
        ));
    }
    let lo = series
        .iter()
        .map(|(xs, _)| xs[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = series
        .iter()
        .map(|(xs, _)| xs[xs.len() - 1])
        .fold(f64::INFINITY, f64::min);
    if !(hi > lo) {
        return Err(Error::EmptyOverlap);
    }
    if series.len() < 2 {
        return Ok(0.0);
    }

    let interpolants = series
        .iter()
        .map(|(xs, ys)| MonotoneCubic::new(xs, ys))
        .collect::<Result<Vec<_>>>()?;
    let pairs = (series.len() * (series.len() - 1) / 2) as f64;
    let mut spread_total = 0.0;
    let (mut mean_min, mut mean_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut values = vec![0.0; interpolants.len()];
    for i in 0..MATCH_POINTS {
        let x = lo + (hi - lo) * i as f64 / (MATCH_POINTS - 1) as f64;
        for (v, interp) in values.iter_mut().zip(&interpolants) {
            *v = interp.eval(x);
        }
        let mut spread = 0.0;
        for (a, ya) in values.iter().enumerate() {
            for yb in &values[a + 1..] {
                spread += (ya - yb).abs();
            }
        }
        spread_total += spread / pairs;
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        mean_min = mean_min.min(mean);
        mean_max = mean_max.max(mean);
    }
    let spread = spread_total / MATCH_POINTS as f64;
    let range = mean_max - mean_min;
    if range > 0.0 {
        Ok(spread / range)
    } else if spread == 0.0 {
        Ok(0.0)
    } else {
        Err(Error::Domain("collapse curve has zero y-range".into()))
    }
}

/// The exponent in `range` minimizing [`collapse_quality`], with its quality.
pub fn optimal_nu(curve: &CollapseCurve, range: (f64, f64)) -> Result<(f64, f64)> {
    golden_section_min(
        |nu| collapse_quality(&curve.rescaled(nu)),
        range.0,
        range.1,
        NU_TOLERANCE,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Negative,
    Positive,
}

/// Line fit of y against ln|x| over the outer third of the window on one
/// side of the peak, one fit per size in curve order.
pub fn q_function_tail_fit(curve: &CollapseCurve, side: Side) -> Result<Vec<(usize, LineFit)>> {
    curve
        .sizes()
        .into_iter()
        .map(|n| {
            let (xs, ys) = curve.series(n);
            let on_side: Vec<(f64, f64)> = xs
                .into_iter()
                .zip(ys)
                .filter(|(x, _)| match side {
                    Side::Negative => *x < 0.0,
                    Side::Positive => *x > 0.0,
                })
                .collect();
            let reach = on_side.iter().map(|(x, _)| x.abs()).fold(0.0, f64::max);
            let (log_x, tail): (Vec<f64>, Vec<f64>) = on_side
                .into_iter()
                .filter(|(x, _)| x.abs() >= reach * 2.0 / 3.0)
                .map(|(x, y)| (x.abs().ln(), y))
                .unzip();
            fit_line(&log_x, &tail).map(|line| (n, line))
        })
        .collect()
}

/// Fritsch–Carlson monotone piecewise-cubic Hermite interpolant.
struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    fn new(xs: &[f64], ys: &[f64]) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 || xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain(
                "interpolation needs >= 2 strictly increasing abscissae".into(),
            ));
        }
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = ys
            .windows(2)
            .zip(&h)
            .map(|(w, h)| (w[1] - w[0]) / h)
            .collect();
        let mut slopes = vec![0.0; n];
        if n == 2 {
            slopes.fill(delta[0]);
        } else {
            for k in 1..n - 1 {
                let (d0, d1) = (delta[k - 1], delta[k]);
                if d0 * d1 > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    slopes[k] = (w1 + w2) / (w1 / d0 + w2 / d1);
                }
            }
            slopes[0] = edge_slope(h[0], h[1], delta[0], delta[1]);
            slopes[n - 1] = edge_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Ok(Self {
            xs: xs.to_vec(),
            ys: ys.to_vec(),
            slopes,
        })
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        let k = match self.xs.partition_point(|xk| *xk <= x) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        };
        let h = self.xs[k + 1] - self.xs[k];
        let t = ((x - self.xs[k]) / h).clamp(0.0, 1.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[k]
            + h10 * h * self.slopes[k]
            + h01 * self.ys[k + 1]
            + h11 * h * self.slopes[k + 1]
    }
}

/// One-sided three-point end slope, limited to preserve monotonicity.
fn edge_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(curves: &[(usize, f64)]) -> CollapseCurve {
        let mut points = Vec::new();
        let mut peaks = Vec::new();
        for (n, shift) in curves {
            peaks.push(PeakRecord {
                n_sites: *n,
                lambda_m: 1.0,
                chi_m: 1.0,
                chi_at_critical: 1.0,
            });
            for i in 0..=50 {
                let x = i as f64 / 50.0;
                points.push(CollapsePoint {
                    n_sites: *n,
                    offset: x / *n as f64,
                    x,
                    y: x + shift,
                });
            }
        }
        CollapseCurve {
            points,
            nu: 1.0,
            peaks,
        }
    }

    #[test]
    fn identical_curves_have_zero_quality() {
        let curve = synthetic(&[(64, 0.0), (128, 0.0), (256, 0.0)]);
        assert_eq!(collapse_quality(&curve).unwrap(), 0.0);
    }

    #[test]
    fn offset_curves_have_quality_equal_to_offset() {
        let curve = synthetic(&[(64, 0.0), (128, 0.1)]);
        assert!((collapse_quality(&curve).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_size_has_zero_spread() {
        let curve = synthetic(&[(64, 0.3)]);
        assert_eq!(collapse_quality(&curve).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_windows_have_no_overlap() {
        let mut curve = synthetic(&[(64, 0.0), (128, 0.0)]);
        for p in curve.points.iter_mut().filter(|p| p.n_sites == 128) {
            p.x += 5.0;
        }
        assert!(matches!(collapse_quality(&curve), Err(Error::EmptyOverlap)));
    }

    #[test]
    fn rescaling_changes_only_x() {
        let curve = synthetic(&[(64, 0.0), (256, 0.0)]);
        let scaled = curve.rescaled(2.0);
        for (a, b) in curve.points.iter().zip(&scaled.points) {
            assert_eq!(a.y, b.y);
            assert!((b.x - (a.n_sites as f64).powi(2) * a.offset).abs() < 1e-12);
        }
        assert_eq!(scaled.nu, 2.0);
    }

    #[test]
    fn monotone_cubic_reproduces_nodes_without_overshoot() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        let ys = [0.0, 0.0, 1.0, 1.0, 1.0];
        let interp = MonotoneCubic::new(&xs, &ys).unwrap();
        for (x, y) in xs.iter().zip(ys) {
            assert_eq!(interp.eval(*x), y);
        }
        for i in 0..=400 {
            let v = interp.eval(i as f64 / 100.0);
            assert!((-1e-15..=1.0 + 1e-15).contains(&v), "overshoot {v}");
        }
    }

    #[test]
    fn monotone_cubic_is_exact_for_lines() {
        let xs = [0.0, 0.5, 2.0, 3.5];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let interp = MonotoneCubic::new(&xs, &ys).unwrap();
        for x in [0.1, 1.3, 2.9] {
            assert!((interp.eval(x) - (2.0 * x - 1.0)).abs() < 1e-14);
        }
        assert!(MonotoneCubic::new(&[0.0, 0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn tail_fit_of_logarithm() {
        let mut points = Vec::new();
        for i in 1..=60 {
            let x = i as f64 / 6.0;
            points.push(CollapsePoint {
                n_sites: 64,
                offset: x / 64.0,
                x,
                y: 0.5 * x.ln() + 0.2,
            });
        }
        let curve = CollapseCurve {
            points,
            nu: 1.0,
            peaks: vec![PeakRecord {
                n_sites: 64,
                lambda_m: 1.0,
                chi_m: 1.0,
                chi_at_critical: 1.0,
            }],
        };
        let fits = q_function_tail_fit(&curve, Side::Positive).unwrap();
        assert_eq!(fits.len(), 1);
        assert_eq!(fits[0].0, 64);
        assert!((fits[0].1.slope - 0.5).abs() < 1e-12);
        assert!(q_function_tail_fit(&curve, Side::Negative).is_err());
    }
}
