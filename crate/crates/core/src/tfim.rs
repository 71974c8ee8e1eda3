//! Exact ground-state correlators of the periodic transverse-field Ising chain
//!
//! ```text
//! H = −Σ_j [ λ σˣ_j σˣ_{j+1} + σᶻ_j ]
//! ```
//!
//! After the Jordan–Wigner/Bogoliubov reduction every nearest-neighbour
//! correlator is an average over the half-odd momentum grid
//! φ_q = 2πq/N, q ∈ {−M, …, M}, M = (N−1)/2, of a single-mode term weighted
//! by 1/ω_φ with ω_φ = √(1 + λ² − 2λ cos φ). In the thermodynamic limit the
//! averages become complete elliptic integrals of modulus k = 2√λ/(1+λ).

use crate::elliptic::elliptic_ke_complementary;
use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Below this coupling (or above its inverse) the elliptic closed forms lose
/// digits to 1/λ cancellation and the periodic trapezoid rule is used instead.
const ELLIPTIC_MIN_COUPLING: f64 = 0.05;

/// Node count for the trapezoid route; its error is ~min(λ, 1/λ)^N.
const TRAPEZOID_NODES: usize = 256;

/// System size and coupling: one point of parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec<T> {
    n_sites: usize,
    lambda: T,
}

impl<T: Real> ChainSpec<T> {
    /// `n_sites` must be even and at least 4, `lambda` finite and non-negative.
    pub fn new(n_sites: usize, lambda: T) -> Result<Self> {
        if n_sites < 4 || !n_sites.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "number of sites must be even and >= 4, got {n_sites}"
            )));
        }
        if !lambda.is_finite() || lambda < T::zero() {
            return Err(Error::Domain(format!(
                "coupling must be finite and >= 0, got {lambda}"
            )));
        }
        Ok(Self { n_sites, lambda })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    /// Same size, different coupling.
    pub fn with_lambda(&self, lambda: T) -> Result<Self> {
        Self::new(self.n_sites, lambda)
    }
}

/// The N mode angles φ_q, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid<T> {
    phis: Vec<T>,
}

impl<T: Real> MomentumGrid<T> {
    pub fn phis(&self) -> &[T] {
        &self.phis
    }

    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }
}

/// φ_q = 2πq/N for half-odd q from −M to M.
pub fn momentum_grid<T: Real>(spec: &ChainSpec<T>) -> MomentumGrid<T> {
    let n = spec.n_sites();
    let half = (n / 2) as i64;
    let phis = (-half..half)
        .map(|j| mode_angle::<T>(2 * j + 1, n))
        .collect();
    MomentumGrid { phis }
}

/// π·odd/N, i.e. 2πq/N with q = odd/2.
#[inline]
fn mode_angle<T: Real>(odd: i64, n_sites: usize) -> T {
    T::PI() * T::from_i64(odd).expect("mode index representable") / T::from_usize_lossy(n_sites)
}

/// Quasiparticle energy ω_φ = √(1 + λ² − 2λ cos φ).
#[inline]
pub fn dispersion<T: Real>(lambda: T, phi: T) -> T {
    dispersion_from_cos(lambda, phi.cos())
}

#[inline]
fn dispersion_from_cos<T: Real>(lambda: T, cos_phi: T) -> T {
    // (1 − λ)² + 2λ(1 − cos φ) is non-negative term by term.
    let gap = T::one() - lambda;
    (gap * gap + (lambda + lambda) * (T::one() - cos_phi)).sqrt()
}

/// Which correlator a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorrelatorTag {
    /// ⟨σᶻ⟩
    Sz,
    /// ⟨σˣ₀σˣ₁⟩
    Xx,
    /// ⟨σʸ₀σʸ₁⟩
    Yy,
    /// ⟨σᶻ₀σᶻ₁⟩
    Zz,
}

impl CorrelatorTag {
    pub const ALL: [CorrelatorTag; 4] = [Self::Sz, Self::Xx, Self::Yy, Self::Zz];

    pub fn name(self) -> &'static str {
        match self {
            Self::Sz => "sz",
            Self::Xx => "xx",
            Self::Yy => "yy",
            Self::Zz => "zz",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Finite(usize),
    Thermodynamic,
}

/// The four nearest-neighbour correlators and their λ-derivatives.
///
/// In the thermodynamic limit at λ = 1 the derivative fields are signed
/// infinities (the logarithmic divergence); see
/// [`CorrelatorSet::derivatives_finite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorSet<T> {
    pub sz: T,
    pub xx: T,
    pub yy: T,
    pub zz: T,
    pub d_sz: T,
    pub d_xx: T,
    pub d_yy: T,
    pub d_zz: T,
    pub regime: Regime,
}

impl<T: Real> CorrelatorSet<T> {
    /// Completes the set from (sz, xx, yy) and their derivatives using
    /// ⟨σᶻ₀σᶻ₁⟩ = ⟨σᶻ⟩² − ⟨σˣ₀σˣ₁⟩⟨σʸ₀σʸ₁⟩ and its product-rule derivative.
    pub fn from_independent(values: [T; 3], derivatives: [T; 3], regime: Regime) -> Self {
        let [sz, xx, yy] = values;
        let [d_sz, d_xx, d_yy] = derivatives;
        let two = T::lit(2.0);
        Self {
            sz,
            xx,
            yy,
            zz: sz * sz - xx * yy,
            d_sz,
            d_xx,
            d_yy,
            d_zz: two * sz * d_sz - d_xx * yy - xx * d_yy,
            regime,
        }
    }

    pub fn value(&self, tag: CorrelatorTag) -> T {
        match tag {
            CorrelatorTag::Sz => self.sz,
            CorrelatorTag::Xx => self.xx,
            CorrelatorTag::Yy => self.yy,
            CorrelatorTag::Zz => self.zz,
        }
    }

    pub fn derivative(&self, tag: CorrelatorTag) -> T {
        match tag {
            CorrelatorTag::Sz => self.d_sz,
            CorrelatorTag::Xx => self.d_xx,
            CorrelatorTag::Yy => self.d_yy,
            CorrelatorTag::Zz => self.d_zz,
        }
    }

    pub fn values(&self) -> [T; 4] {
        [self.sz, self.xx, self.yy, self.zz]
    }

    pub fn derivatives(&self) -> [T; 4] {
        [self.d_sz, self.d_xx, self.d_yy, self.d_zz]
    }

    pub fn derivatives_finite(&self) -> bool {
        self.derivatives().iter().all(|d| d.is_finite())
    }
}

/// Finite-N correlators as averages over the half-odd momentum grid.
///
/// Derivatives are taken mode by mode. With s = sin φ, c = cos φ the
/// summand derivatives reduce to s²/ω³ times (−λ, 1, 2λc − 1) for
/// (sz, xx, yy), which is free of cancellation. The half-odd grid never
/// contains φ = 0, so ω > 0 for every λ including λ = 1.
pub fn correlators_finite<T: Real>(spec: &ChainSpec<T>) -> CorrelatorSet<T> {
    let (values, derivatives) = mode_averages(spec.n_sites(), spec.lambda());
    CorrelatorSet::from_independent(values, derivatives, Regime::Finite(spec.n_sites()))
}

/// Averages of the three independent summands over the grid of `n` modes.
///
/// The summands are even in φ, so only the positive half is visited.
fn mode_averages<T: Real>(n: usize, lambda: T) -> ([T; 3], [T; 3]) {
    let mut sums: [CompensatedSum<T>; 6] = Default::default();
    let two = T::lit(2.0);
    for j in 0..(n / 2) {
        let phi = mode_angle::<T>(2 * j as i64 + 1, n);
        let (s, c) = phi.sin_cos();
        let omega = dispersion_from_cos(lambda, c);
        let inv = omega.recip();
        let cos2 = c * c - s * s;
        sums[0].add((T::one() - lambda * c) * inv);
        sums[1].add((lambda - c) * inv);
        sums[2].add((lambda * cos2 - c) * inv);
        let weight = s * s * inv * inv * inv;
        sums[3].add(-lambda * weight);
        sums[4].add(weight);
        sums[5].add((two * lambda * c - T::one()) * weight);
    }
    let scale = two / T::from_usize_lossy(n);
    let avg = |i: usize| sums[i].value() * scale;
    ([avg(0), avg(1), avg(2)], [avg(3), avg(4), avg(5)])
}

/// Thermodynamic-limit correlators via complete elliptic integrals.
///
/// With k = 2√λ/(1+λ), k′ = |1−λ|/(1+λ):
///
/// ```text
/// ⟨σᶻ⟩      = [(1−λ)K + (1+λ)E] / π
/// ⟨σˣ₀σˣ₁⟩ = [(λ−1)K + (1+λ)E] / (πλ)
/// ⟨σʸ₀σʸ₁⟩ = [K(λ−1)(2λ²+1) − E(λ+1)(2λ²−1)] / (3πλ)
/// ```
///
/// At λ = 1 the values are (2/π, 2/π, −2/(3π), 16/(3π²)) and the
/// derivatives diverge; they are returned as signed infinities.
pub fn correlators_thermo<T: Real>(lambda: T) -> Result<CorrelatorSet<T>> {
    if !lambda.is_finite() || lambda < T::zero() {
        return Err(Error::Domain(format!(
            "coupling must be finite and >= 0, got {lambda}"
        )));
    }
    let pi = T::PI();
    let one = T::one();
    if lambda == one {
        let inf = T::infinity();
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let (sz, xx, yy) = (two / pi, two / pi, -two / (three * pi));
        // The product rule would give ∞ − ∞ for d_zz; its sign is that of −16/(3π²).
        return Ok(CorrelatorSet {
            sz,
            xx,
            yy,
            zz: sz * sz - xx * yy,
            d_sz: -inf,
            d_xx: inf,
            d_yy: inf,
            d_zz: -inf,
            regime: Regime::Thermodynamic,
        });
    }

    let small = T::lit(ELLIPTIC_MIN_COUPLING);
    if lambda < small || lambda > small.recip() {
        let (values, derivatives) = mode_averages(TRAPEZOID_NODES, lambda);
        return Ok(CorrelatorSet::from_independent(
            values,
            derivatives,
            Regime::Thermodynamic,
        ));
    }

    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let sum = one + lambda;
    let gap = one - lambda;
    let modulus = two * lambda.sqrt() / sum;
    let complement = gap.abs() / sum;
    let ke = elliptic_ke_complementary(modulus, complement);
    let (k, e) = (ke.k, ke.e);

    // dK/dλ and dE/dλ through dk/dλ = (1−λ)/(√λ(1+λ)²) and the standard
    // dK/dk = [E/(1−k²) − K]/k, dE/dk = (E − K)/k.
    let dk = e * sum / (two * lambda * gap) - k * gap / (two * lambda * sum);
    let de = (e - k) * gap / (two * lambda * sum);

    let sz = (gap * k + sum * e) / pi;
    let d_sz = (-k + gap * dk + e + sum * de) / pi;

    let p = -gap * k + sum * e;
    let dp = k - gap * dk + e + sum * de;
    let xx = p / (pi * lambda);
    let d_xx = (dp * lambda - p) / (pi * lambda * lambda);

    let l2 = lambda * lambda;
    let a = -gap * (two * l2 + one);
    let da = (two * l2 + one) - gap * four * lambda;
    let b = sum * (two * l2 - one);
    let db = (two * l2 - one) + sum * four * lambda;
    let q = k * a - e * b;
    let dq = dk * a + k * da - de * b - e * db;
    let yy = q / (three * pi * lambda);
    let d_yy = (dq * lambda - q) / (three * pi * l2);

    Ok(CorrelatorSet::from_independent(
        [sz, xx, yy],
        [d_sz, d_xx, d_yy],
        Regime::Thermodynamic,
    ))
}

/// Coefficient of ln N (equivalently ln 1/|1−λ|) in the critical
/// derivative of each correlator.
pub fn log_divergence_coefficient<T: Real>(which: CorrelatorTag) -> T {
    let pi = T::PI();
    match which {
        CorrelatorTag::Sz => -pi.recip(),
        CorrelatorTag::Xx | CorrelatorTag::Yy => pi.recip(),
        CorrelatorTag::Zz => -T::lit(16.0) / (T::lit(3.0) * pi * pi),
    }
}
