//! Power series distribution families.
//!
//! A family is fixed by its coefficients `a_k >= 0`; the normalizer is
//! `h(theta) = sum_k a_k theta^k`. Built-in families carry closed forms for
//! `h`, `h'` and `h''`; anything else is evaluated as a series whose tail is
//! bounded through a coefficient-ratio envelope.

use std::fmt;

use crate::error::{Error, Result};

/// Maximum number of series terms examined before giving up.
pub const MAX_TERMS: usize = 1_000_000;

/// Relative size of the certified remainder when `h` is summed as a series.
const SERIES_REL_TOL: f64 = 1e-14;

/// A family described only by its coefficients.
///
/// `ratio_sup(k)` must return an upper bound on `a_{j+1} / a_j` over every
/// `j >= k` (zero once the coefficients vanish for good). Tail bounds are
/// only as trustworthy as this envelope.
#[derive(Clone, Copy)]
pub struct SeriesFamily {
    pub name: &'static str,
    pub coefficient: fn(u64) -> f64,
    pub ratio_sup: fn(u64) -> f64,
    /// Upper end of the open parameter interval `(0, theta_max)`.
    pub theta_max: f64,
}

impl fmt::Debug for SeriesFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesFamily")
            .field("name", &self.name)
            .field("theta_max", &self.theta_max)
            .finish()
    }
}

impl PartialEq for SeriesFamily {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.theta_max == other.theta_max
    }
}

/// A named power series family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerSeriesFamily {
    /// `a_k = 1/k!`, `h = e^theta`.
    Poisson,
    /// `a_0 = a_1 = 1`, `h = 1 + theta`, with theta the odds `p/(1-p)`.
    Bernoulli,
    /// `a_k = 1`, `h = 1/(1-theta)`, with theta the failure probability.
    Geometric,
    /// Logarithmic series shifted to start at zero: `a_k = 1/(k+1)`,
    /// `h = -ln(1-theta)/theta`.
    LogarithmicShifted,
    Series(SeriesFamily),
}

impl PowerSeriesFamily {
    pub const BUILT_IN: [PowerSeriesFamily; 4] = [
        PowerSeriesFamily::Poisson,
        PowerSeriesFamily::Bernoulli,
        PowerSeriesFamily::Geometric,
        PowerSeriesFamily::LogarithmicShifted,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Poisson => "poisson",
            Self::Bernoulli => "bernoulli",
            Self::Geometric => "geometric",
            Self::LogarithmicShifted => "logarithmic-shifted",
            Self::Series(s) => s.name,
        }
    }

    /// Looks up a built-in family by name.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::BUILT_IN.into_iter().find(|f| f.name() == name)
    }

    pub fn coefficient(&self, k: u64) -> f64 {
        match self {
            Self::Poisson => libm::exp(-libm::lgamma(k as f64 + 1.0)),
            Self::Bernoulli => {
                if k <= 1 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Geometric => 1.0,
            Self::LogarithmicShifted => 1.0 / (k as f64 + 1.0),
            Self::Series(s) => (s.coefficient)(k),
        }
    }

    /// `ln a_k`, or `-inf` when the coefficient is zero.
    pub fn ln_coefficient(&self, k: u64) -> f64 {
        match self {
            Self::Poisson => -libm::lgamma(k as f64 + 1.0),
            Self::Geometric => 0.0,
            Self::LogarithmicShifted => -(k as f64 + 1.0).ln(),
            _ => {
                let a = self.coefficient(k);
                if a > 0.0 {
                    a.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Upper bound on `a_{j+1}/a_j` for all `j >= k`.
    pub fn ratio_sup(&self, k: u64) -> f64 {
        match self {
            Self::Poisson => 1.0 / (k as f64 + 1.0),
            Self::Bernoulli => {
                if k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Geometric | Self::LogarithmicShifted => 1.0,
            Self::Series(s) => (s.ratio_sup)(k),
        }
    }

    /// Open interval of admissible theta.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            Self::Poisson | Self::Bernoulli => (0.0, f64::INFINITY),
            Self::Geometric | Self::LogarithmicShifted => (0.0, 1.0),
            Self::Series(s) => (0.0, s.theta_max),
        }
    }

    pub fn contains(&self, theta: f64) -> bool {
        let (lo, hi) = self.domain();
        theta.is_finite() && theta > lo && theta < hi
    }

    pub(crate) fn check_domain(&self, theta: f64) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            Err(Error::Domain {
                family: self.name().to_string(),
                theta,
            })
        }
    }

    /// Closed-form `h`, `h'` or `h''`, when the family has one.
    pub fn h_closed(&self, theta: f64, order: u8) -> Option<f64> {
        let t = theta;
        match (self, order) {
            (Self::Poisson, 0..=2) => Some(t.exp()),
            (Self::Bernoulli, 0) => Some(1.0 + t),
            (Self::Bernoulli, 1) => Some(1.0),
            (Self::Bernoulli, 2) => Some(0.0),
            (Self::Geometric, 0) => Some(1.0 / (1.0 - t)),
            (Self::Geometric, 1) => Some((1.0 - t).powi(-2)),
            (Self::Geometric, 2) => Some(2.0 * (1.0 - t).powi(-3)),
            (Self::LogarithmicShifted, 0) => Some(-(-t).ln_1p() / t),
            (Self::LogarithmicShifted, 1) => Some((t / (1.0 - t) + (-t).ln_1p()) / (t * t)),
            (Self::LogarithmicShifted, 2) => {
                let u = 1.0 - t;
                Some((-(2.0 - 3.0 * t) * t / (u * u) - 2.0 * (-t).ln_1p()) / (t * t * t))
            }
            _ => None,
        }
    }

    /// Whether the closed form loses no more than a couple of digits at this
    /// theta. The logarithmic derivatives cancel catastrophically near zero,
    /// where the series converges quickly anyway.
    fn closed_form_stable(&self, theta: f64, order: u8) -> bool {
        !matches!(self, Self::LogarithmicShifted) || order == 0 || theta >= 0.25
    }

    /// `h^(order)(theta)` summed term by term, with a certified remainder
    /// below `1e-14` relative to the partial sum.
    pub fn h_series(&self, theta: f64, order: u8) -> Result<f64> {
        self.check_domain(theta)?;
        let d = order as u64;
        let ln_theta = theta.ln();
        let mut sum = 0.0;
        let mut k = d;
        while (k as usize) < MAX_TERMS {
            let ln_a = self.ln_coefficient(k);
            let term = if ln_a == f64::NEG_INFINITY {
                0.0
            } else {
                let falling = libm::lgamma(k as f64 + 1.0) - libm::lgamma((k - d) as f64 + 1.0);
                (ln_a + falling + (k - d) as f64 * ln_theta).exp()
            };
            sum += term;
            let rho = theta * self.ratio_sup(k) * (k as f64 + 1.0) / ((k - d) as f64 + 1.0);
            if rho < 1.0 {
                let tail = term * rho / (1.0 - rho);
                if tail <= SERIES_REL_TOL * sum || (tail == 0.0 && k > d) {
                    return Ok(sum);
                }
            }
            k += 1;
        }
        Err(Error::Convergence {
            family: self.name().to_string(),
            theta,
        })
    }

    /// `h`, `h'` or `h''` at theta: the closed form when it is available and
    /// numerically sound, the certified series otherwise.
    pub fn eval_h(&self, theta: f64, order: u8) -> Result<f64> {
        if order > 2 {
            return Err(Error::InvalidArgument(format!(
                "derivative order {order} not supported"
            )));
        }
        self.check_domain(theta)?;
        match self.h_closed(theta, order) {
            Some(v) if self.closed_form_stable(theta, order) => Ok(v),
            _ => self.h_series(theta, order),
        }
    }

    /// `ln h^(order)(theta)`; avoids overflow for large Poisson means.
    pub(crate) fn ln_h(&self, theta: f64, order: u8) -> Result<f64> {
        match self {
            Self::Poisson => {
                self.check_domain(theta)?;
                Ok(theta)
            }
            _ => Ok(self.eval_h(theta, order)?.ln()),
        }
    }
}

impl fmt::Display for PowerSeriesFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn geometric_h_at_half() {
        assert_eq!(PowerSeriesFamily::Geometric.eval_h(0.5, 0).unwrap(), 2.0);
    }

    #[test]
    fn bernoulli_derivative_is_one() {
        assert_eq!(PowerSeriesFamily::Bernoulli.eval_h(0.25, 1).unwrap(), 1.0);
        assert_eq!(PowerSeriesFamily::Bernoulli.eval_h(0.25, 2).unwrap(), 0.0);
    }

    #[test]
    fn logarithmic_h_matches_fifty_term_sum() {
        let theta: f64 = 0.2;
        let direct: f64 = (0..50).map(|k| theta.powi(k) / (k as f64 + 1.0)).sum();
        let closed = PowerSeriesFamily::LogarithmicShifted
            .eval_h(theta, 0)
            .unwrap();
        assert!(rel(closed, -(0.8f64).ln() / 0.2) < 1e-15);
        assert!(rel(closed, direct) < 1e-14);
        assert!((closed - 1.11572).abs() < 1e-5);
    }

    #[test]
    fn series_agrees_with_closed_forms() {
        let cases = [
            (PowerSeriesFamily::Poisson, 3.7),
            (PowerSeriesFamily::Bernoulli, 0.4),
            (PowerSeriesFamily::Geometric, 0.6),
            (PowerSeriesFamily::LogarithmicShifted, 0.3),
            (PowerSeriesFamily::LogarithmicShifted, 0.7),
        ];
        for (fam, theta) in cases {
            for order in 0..=2u8 {
                let closed = fam.h_closed(theta, order).unwrap();
                let series = fam.h_series(theta, order).unwrap();
                if closed == 0.0 {
                    assert_eq!(series, 0.0);
                } else {
                    assert!(
                        rel(series, closed) < 1e-10,
                        "{fam} theta={theta} order={order}: {series} vs {closed}"
                    );
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        for theta in [0.0, -1.0, 1.0, f64::NAN] {
            assert!(matches!(
                PowerSeriesFamily::Geometric.eval_h(theta, 0),
                Err(Error::Domain { .. })
            ));
        }
        assert!(PowerSeriesFamily::Poisson.eval_h(0.0, 0).is_err());
        assert!(PowerSeriesFamily::Poisson.eval_h(1.0, 3).is_err());
    }

    #[test]
    fn non_convergent_series_is_rejected() {
        // a_k = 2^k has radius 1/2; the declared domain wrongly claims (0, 1).
        let bad = PowerSeriesFamily::Series(SeriesFamily {
            name: "doubling",
            coefficient: |k| 2f64.powi(k as i32),
            ratio_sup: |_| 2.0,
            theta_max: 1.0,
        });
        assert!(matches!(
            bad.h_series(0.75, 0),
            Err(Error::Convergence { .. })
        ));
        assert!((bad.h_series(0.25, 0).unwrap() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn names_round_trip() {
        for fam in PowerSeriesFamily::BUILT_IN {
            assert_eq!(PowerSeriesFamily::from_name(fam.name()), Some(fam));
        }
        assert_eq!(PowerSeriesFamily::from_name("zipf"), None);
    }
}
