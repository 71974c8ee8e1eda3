use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("derivative of {quantity} diverges (thermodynamic limit at the critical point)")]
    DivergentDerivative { quantity: &'static str },

    /// A constructed density matrix failed a positivity or trace check.
    #[error("inconsistent reduced density matrix: {0}")]
    InconsistentRdm(String),

    #[error("block {block} is singular (det = {det:e}); use the fidelity oracle instead")]
    SingularBlock { block: usize, det: f64 },

    #[error("no interior maximum of chi(lambda, N={n_sites}) in [{lo}, {hi}]")]
    NoInteriorMaximum {
        n_sites: usize,
        lo: f64,
        hi: f64,
        /// The coarse scan as (lambda, chi) pairs.
        scan: Vec<(f64, f64)>,
    },

    #[error("fit error: {0}")]
    Fit(String),

    #[error("collapse curves for the given sizes have no overlapping x window")]
    EmptyOverlap,
}
