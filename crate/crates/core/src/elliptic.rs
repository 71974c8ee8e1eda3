//! Complete elliptic integrals K(k) and E(k) by the arithmetic-geometric mean.
//!
//! Both integrals use the modulus convention:
//!
//! ```text
//! K(k) = ∫₀^{π/2} dθ / √(1 − k² sin²θ)
//! E(k) = ∫₀^{π/2} √(1 − k² sin²θ) dθ
//! ```
//!
//! The AGM of (1, k′) with k′ = √(1 − k²) gives K = π / (2·AGM), and the
//! accumulated squared half-differences give E alongside it. Callers that
//! already know k′ in closed form (the TFIM has k′ = |1−λ|/(1+λ)) should
//! use [`elliptic_ke_complementary`] to avoid forming 1 − k² near k = 1.

use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_AGM_STEPS: usize = 64;

/// K(k) and E(k) evaluated from one AGM run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticPair<T> {
    pub k: T,
    pub e: T,
}

fn agm_tolerance<T: Real>() -> T {
    T::lit(1e-15).max(T::epsilon() * T::lit(4.0))
}

/// Complete elliptic integral of the first kind, 0 ≤ k < 1.
pub fn elliptic_k<T: Real>(k: T) -> Result<T> {
    check_modulus(k)?;
    if k >= T::one() {
        return Err(Error::Domain(format!("K(k) diverges for k = {k} >= 1")));
    }
    Ok(elliptic_ke_complementary(k, complementary_modulus(k)).k)
}

/// Complete elliptic integral of the second kind, 0 ≤ k ≤ 1.
pub fn elliptic_e<T: Real>(k: T) -> Result<T> {
    check_modulus(k)?;
    if k > T::one() {
        return Err(Error::Domain(format!("E(k) undefined for k = {k} > 1")));
    }
    if k == T::one() {
        return Ok(T::one());
    }
    Ok(elliptic_ke_complementary(k, complementary_modulus(k)).e)
}

fn check_modulus<T: Real>(k: T) -> Result<()> {
    if !k.is_finite() || k < T::zero() {
        return Err(Error::Domain(format!(
            "elliptic modulus must be in [0, 1], got {k}"
        )));
    }
    Ok(())
}

fn complementary_modulus<T: Real>(k: T) -> T {
    ((T::one() - k) * (T::one() + k)).sqrt()
}

/// K and E from a modulus `k` and its complement `kc = √(1 − k²)`.
///
/// The pair is not re-derived from `k`; passing an exact `kc` keeps full
/// relative accuracy of K as k → 1. `kc = 0` yields K = ∞, E = 1.
pub fn elliptic_ke_complementary<T: Real>(k: T, kc: T) -> EllipticPair<T> {
    let half = T::lit(0.5);
    if kc == T::zero() {
        return EllipticPair {
            k: T::infinity(),
            e: T::one(),
        };
    }
    let tol = agm_tolerance::<T>();
    let mut a = T::one();
    let mut b = kc;
    // Σ 2^{n−1} c_n² with c₀ = k.
    let mut weight = half;
    let mut sum = weight * k * k;
    for _ in 0..MAX_AGM_STEPS {
        if (a - b).abs() <= tol * a {
            break;
        }
        let c = (a - b) * half;
        let a_next = (a + b) * half;
        b = (a * b).sqrt();
        a = a_next;
        weight = weight + weight;
        sum = sum + weight * c * c;
    }
    let k_val = T::PI() / (a + a);
    EllipticPair {
        k: k_val,
        e: k_val * (T::one() - sum),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn defining_values_at_zero() {
        assert_eq!(elliptic_k(0.0_f64).unwrap(), FRAC_PI_2);
        assert_eq!(elliptic_e(0.0_f64).unwrap(), FRAC_PI_2);
        assert_eq!(elliptic_e(1.0_f64).unwrap(), 1.0);
    }

    #[test]
    fn reference_values() {
        // K(1/√2) = Γ(1/4)² / (4√π)
        let gamma_quarter = 3.625_609_908_221_908_f64;
        let k_ref = gamma_quarter * gamma_quarter / (4.0 * PI.sqrt());
        let k = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(elliptic_k(k).unwrap(), k_ref, max_relative = 1e-14);
        // E(1/√2) from Legendre's relation with k = k′
        let e_ref = (PI / 2.0 + k_ref * k_ref) / (2.0 * k_ref);
        assert_relative_eq!(elliptic_e(k).unwrap(), e_ref, max_relative = 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(elliptic_k(1.0_f64).is_err());
        assert!(elliptic_k(1.5_f64).is_err());
        assert!(elliptic_e(1.0001_f64).is_err());
        assert!(elliptic_k(-0.1_f64).is_err());
        assert!(elliptic_e(f64::NAN).is_err());
    }

    #[test]
    fn legendre_relation() {
        for k in [0.1_f64, 0.5, 0.9] {
            let kp = (1.0 - k * k).sqrt();
            let a = elliptic_ke_complementary(k, kp);
            let b = elliptic_ke_complementary(kp, k);
            let lhs = a.e * b.k + b.e * a.k - a.k * b.k;
            assert!((lhs - FRAC_PI_2).abs() <= 1e-10, "k={k}: {lhs}");
        }
    }

    #[test]
    fn single_precision_tracks_double() {
        for k in [0.2_f32, 0.7, 0.95] {
            let k32 = elliptic_k(k).unwrap() as f64;
            let k64 = elliptic_k(k as f64).unwrap();
            assert_relative_eq!(k32, k64, max_relative = 1e-6);
            let e32 = elliptic_e(k).unwrap() as f64;
            let e64 = elliptic_e(k as f64).unwrap();
            assert_relative_eq!(e32, e64, max_relative = 1e-6);
        }
    }
}
