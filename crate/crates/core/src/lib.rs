//! Exact two-site reduced fidelity susceptibility of the 1D transverse-field
//! Ising model.
//!
//! The pipeline runs correlators → reduced density matrix → susceptibility:
//!
//! * [`tfim`]: nearest-neighbour correlators and their λ-derivatives, for
//!   finite even N (momentum sums) and for N → ∞ (elliptic integrals);
//! * [`rdm`]: the block-diagonal two-site density matrix built from them;
//! * [`rfs`]: the susceptibility in closed form, plus an independent route
//!   through the Uhlmann fidelity at finite step;
//! * [`scaling`]: peak search, the (ln N)² and (ln 1/|1−λ|)² fits, and the
//!   data collapse.
//!
//! The exact-solution modules are generic over [`Real`] (`f32` or `f64`);
//! the aliases below fix the scalar type.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod elliptic;
pub mod error;
pub mod rdm;
pub mod rfs;
pub mod scalar;
pub mod scaling;
pub mod tfim;

pub use elliptic::{elliptic_e, elliptic_k, elliptic_ke_complementary, EllipticPair};
pub use error::{Error, Result};
pub use rdm::{build_rdm, rdm_blocks, Block2x2, BlockPair, TwoSiteRdm};
pub use rfs::{
    block_susceptibility, fidelity_susceptibility_estimate, rfs_closed_form, rfs_oracle,
    rfs_oracle_with, uhlmann_fidelity, Method, RfsValue,
};
pub use scalar::{CompensatedSum, Real};
pub use tfim::{
    correlators_finite, correlators_thermo, dispersion, log_divergence_coefficient, momentum_grid,
    ChainSpec, CorrelatorSet, CorrelatorTag, MomentumGrid, Regime,
};

pub type ChainSpec64 = ChainSpec<f64>;
pub type ChainSpec32 = ChainSpec<f32>;
pub type CorrelatorSet64 = CorrelatorSet<f64>;
pub type CorrelatorSet32 = CorrelatorSet<f32>;
pub type TwoSiteRdm64 = TwoSiteRdm<f64>;
pub type TwoSiteRdm32 = TwoSiteRdm<f32>;
pub type RfsValue64 = RfsValue<f64>;
pub type RfsValue32 = RfsValue<f32>;
pub type MomentumGrid64 = MomentumGrid<f64>;
pub type MomentumGrid32 = MomentumGrid<f32>;
