//! Stein-method total variation bounds for sums of independent power
//! series distributed variables, approximated by Poisson and negative
//! binomial laws, with an exact convolution oracle to check them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convolution;
pub mod error;
pub mod family;
pub mod instance;
pub mod nb;
pub mod oracle;
pub mod poisson;
pub mod report;
pub mod scenario;
pub mod table;
pub mod truncation;

pub use convolution::ConvolutionSpec;
pub use error::{Error, Result};
pub use family::{PowerSeriesFamily, SeriesFamily};
pub use instance::{GapEstimate, Moments, PmfKind, PsdInstance};
pub use nb::{FitMode, FitRequest, NbParams, RRule, TauEstimate};
pub use report::{BoundEntry, BoundReport, Metric, Target};
pub use truncation::TruncatedPmf;

/// Default truncation tolerance.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Environment variable overriding [`DEFAULT_EPS`].
pub const EPS_ENV: &str = "PSD_APPROX_EPS";

/// Truncation tolerance from `PSD_APPROX_EPS`, or the default.
pub fn eps_from_env() -> Result<f64> {
    match std::env::var(EPS_ENV) {
        Ok(raw) => {
            let eps: f64 = raw
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{EPS_ENV}={raw} is not a number")))?;
            instance::check_eps(eps)?;
            Ok(eps)
        }
        Err(_) => Ok(DEFAULT_EPS),
    }
}
