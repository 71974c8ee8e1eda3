//! Two-neighbouring-site reduced density matrix.
//!
//! In the basis {↑↑, ↓↓, ↑↓, ↓↑} the RDM is block diagonal,
//!
//! ```text
//! ⎡u₊ z₋ 0  0 ⎤
//! ⎢z₋ u₋ 0  0 ⎥      u± = (1 ± 2⟨σᶻ⟩ + ⟨σᶻσᶻ⟩)/4,  w = (1 − ⟨σᶻσᶻ⟩)/4,
//! ⎢0  0  w  z₊⎥      z± = (⟨σˣσˣ⟩ ± ⟨σʸσʸ⟩)/4
//! ⎣0  0  z₊ w ⎦
//! ```
//!
//! and the λ-derivative has the same shape, obtained by applying the same
//! linear map to the correlator derivatives.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tfim::CorrelatorSet;

const POSITIVITY_TOL: f64 = 1e-10;
const SINGULAR_DET: f64 = 1e-12;

/// Matrix elements of the RDM and of its λ-derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSiteRdm<T> {
    pub u_plus: T,
    pub u_minus: T,
    pub w: T,
    pub z_plus: T,
    pub z_minus: T,
    pub d_u_plus: T,
    pub d_u_minus: T,
    pub d_w: T,
    pub d_z_plus: T,
    pub d_z_minus: T,
}

/// Real symmetric 2×2 matrix `[[a, c], [c, b]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block2x2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T: Real> Block2x2<T> {
    pub fn new(a: T, b: T, c: T) -> Self {
        Self { a, b, c }
    }

    pub fn trace(&self) -> T {
        self.a + self.b
    }

    pub fn det(&self) -> T {
        self.a * self.b - self.c * self.c
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [T; 2] {
        let half = T::lit(0.5);
        let mean = (self.a + self.b) * half;
        let radius = ((self.a - self.b) * half).hypot(self.c);
        [mean - radius, mean + radius]
    }

    /// tr(self · other) for two symmetric blocks.
    pub fn trace_product(&self, other: &Self) -> T {
        self.a * other.a + self.b * other.b + T::lit(2.0) * self.c * other.c
    }
}

/// A block together with its λ-derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockPair<T> {
    pub value: Block2x2<T>,
    pub derivative: Block2x2<T>,
}

impl<T: Real> BlockPair<T> {
    /// ∂_λ det of the value block.
    pub fn det_derivative(&self) -> T {
        let (v, d) = (&self.value, &self.derivative);
        v.a * d.b + d.a * v.b - T::lit(2.0) * v.c * d.c
    }
}

impl<T: Real> TwoSiteRdm<T> {
    pub fn trace(&self) -> T {
        self.u_plus + self.u_minus + T::lit(2.0) * self.w
    }

    pub fn derivative_trace(&self) -> T {
        self.d_u_plus + self.d_u_minus + T::lit(2.0) * self.d_w
    }

    /// The four eigenvalues, block 1 first.
    pub fn eigenvalues(&self) -> [T; 4] {
        let (b1, b2) = rdm_blocks(self);
        let [a, b] = b1.value.eigenvalues();
        let [c, d] = b2.value.eigenvalues();
        [a, b, c, d]
    }

    /// Indices (1, 2) of blocks whose determinant is at or below the
    /// singularity threshold. The closed-form susceptibility needs none.
    pub fn singular_blocks(&self) -> Vec<usize> {
        let (b1, b2) = rdm_blocks(self);
        let threshold = T::tol(SINGULAR_DET);
        [(1, b1), (2, b2)]
            .into_iter()
            .filter(|(_, pair)| pair.value.det() <= threshold)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_degenerate(&self) -> bool {
        !self.singular_blocks().is_empty()
    }

    /// Trace-one and positivity checks with tolerance `tol`.
    pub fn validate(&self, tol: T) -> Result<()> {
        let one = T::one();
        if (self.trace() - one).abs() > tol {
            return Err(Error::InconsistentRdm(format!(
                "trace {} differs from 1",
                self.trace()
            )));
        }
        let checks = [
            ("u_plus", self.u_plus),
            ("u_minus", self.u_minus),
            ("w", self.w),
            (
                "u_plus*u_minus - z_minus^2",
                self.u_plus * self.u_minus - self.z_minus * self.z_minus,
            ),
            (
                "w^2 - z_plus^2",
                self.w * self.w - self.z_plus * self.z_plus,
            ),
        ];
        for (name, v) in checks {
            if !(v >= -tol) {
                return Err(Error::InconsistentRdm(format!("{name} = {v} is negative")));
            }
        }
        Ok(())
    }
}

/// Assembles the RDM from the correlators.
///
/// Rejects correlator sets whose derivatives are not finite (the
/// thermodynamic limit at λ = 1) and matrices that fail positivity beyond
/// 1e−10. Singular blocks are accepted; see [`TwoSiteRdm::singular_blocks`].
pub fn build_rdm<T: Real>(c: &CorrelatorSet<T>) -> Result<TwoSiteRdm<T>> {
    if let Some(tag) = crate::tfim::CorrelatorTag::ALL
        .into_iter()
        .find(|t| !c.derivative(*t).is_finite())
    {
        return Err(Error::DivergentDerivative {
            quantity: tag.name(),
        });
    }
    let rho = map_correlators(c);
    rho.validate(T::tol(POSITIVITY_TOL))?;
    Ok(rho)
}

fn map_correlators<T: Real>(c: &CorrelatorSet<T>) -> TwoSiteRdm<T> {
    let quarter = T::lit(0.25);
    let one = T::one();
    let two = T::lit(2.0);
    TwoSiteRdm {
        u_plus: (one + two * c.sz + c.zz) * quarter,
        u_minus: (one - two * c.sz + c.zz) * quarter,
        w: (one - c.zz) * quarter,
        z_plus: (c.xx + c.yy) * quarter,
        z_minus: (c.xx - c.yy) * quarter,
        d_u_plus: (two * c.d_sz + c.d_zz) * quarter,
        d_u_minus: (-two * c.d_sz + c.d_zz) * quarter,
        d_w: -c.d_zz * quarter,
        d_z_plus: (c.d_xx + c.d_yy) * quarter,
        d_z_minus: (c.d_xx - c.d_yy) * quarter,
    }
}

/// Splits the RDM into its two 2×2 blocks, each paired with its derivative:
/// block 1 = [[u₊, z₋], [z₋, u₋]], block 2 = [[w, z₊], [z₊, w]].
pub fn rdm_blocks<T: Real>(rho: &TwoSiteRdm<T>) -> (BlockPair<T>, BlockPair<T>) {
    let block1 = BlockPair {
        value: Block2x2::new(rho.u_plus, rho.u_minus, rho.z_minus),
        derivative: Block2x2::new(rho.d_u_plus, rho.d_u_minus, rho.d_z_minus),
    };
    let block2 = BlockPair {
        value: Block2x2::new(rho.w, rho.w, rho.z_plus),
        derivative: Block2x2::new(rho.d_w, rho.d_w, rho.d_z_plus),
    };
    (block1, block2)
}
