//! Local Whittle estimation of the memory parameter d of fractionally
//! integrated time series, covering the nonstationary and unit-root range.
//!
//! The pieces, in dependency order:
//!
//! - [`fracsim`]: truncated fractional integration and seeded simulation of
//!   I(d) paths, valid for every real d, with optional power trends.
//! - [`spectral`]: DFT and periodogram in the (2 pi n)^{-1/2} convention the
//!   estimator is written in.
//! - [`asymptotics`]: the regime-dependent limit laws of the estimator as
//!   the true d crosses 3/4 and 1, their constants, and samplers.
//! - [`whittle`]: the concentrated objective, its minimizer, and the
//!   difference-then-add-one variant for heavily nonstationary or trended
//!   data.
//! - [`oracle`]: exact DFT identities used as implementation cross-checks.
//! - [`montecarlo`]: seeded, reproducible replication harness and kernel
//!   density utilities.

pub mod asymptotics;
pub mod error;
pub mod fracsim;
pub mod montecarlo;
pub mod oracle;
pub mod spectral;
pub mod whittle;

pub use asymptotics::{limit_law, sample_limit_law, theoretical_sd, LimitLaw, Regime};
pub use error::{Error, Result};
pub use fracsim::{frac_integrate, frac_trend, simulate, Innovation, Series, SimConfig, Trend};
pub use montecarlo::{kde, run_mc, run_mc_with_threads, Estimator, MCResult, MCSpec};
pub use spectral::{dft, periodogram, periodogram_full, Periodogram};
pub use whittle::{
    bandwidth, estimate, estimate_differenced, Method, WhittleFit, DEFAULT_BOUNDS,
    DEFAULT_EXPONENT,
};
