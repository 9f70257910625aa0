//! Numerical toolkit for renewal equations and Tauberian side conditions.
//!
//! * [`measures`]: lattice, arithmetic and gridded densities.
//! * [`renewal`]: renewal sequences, Dirichlet renewal and continuous renewal.
//! * [`transforms`]: Laplace, Stieltjes, Dirichlet and power-series
//!   evaluators, and boundary-approach sampling.
//! * [`tauber`]: checks of the boundary and side conditions, limit
//!   extrapolation and the Fejér-kernel probe.

pub mod error;
pub mod measures;
pub mod numeric;
pub mod renewal;
pub mod serde_float;
pub mod sieve;
pub mod tauber;
pub mod trace;
pub mod transforms;

pub use error::{Error, Result};
pub use measures::{
    check_power_support, discretize_density, lattice_mean, normalize_lattice, ArithWeights, GridDensity,
    LatticeDist, PowerSupport,
};
pub use renewal::{
    blackwell_increments, continuous_renewal, dirichlet_renewal, partial_sum_ratio, renewal_sequence,
    ArithRenewal, RenewalGrid, RenewalSeq,
};
pub use trace::Trace;
pub use transforms::{
    asymptotic_ratio, dirichlet_series, laplace_sampled, pole_subtracted, power_series, sample_boundary,
    stieltjes_lattice, stieltjes_renewal, BoundaryGrid, Domain, SampledFunction, SeriesSpec, TransformValue,
};
