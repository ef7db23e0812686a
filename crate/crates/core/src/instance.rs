//! A power series family bound to a parameter value.

use crate::error::{Error, Result};
use crate::family::{PowerSeriesFamily, MAX_TERMS};
use crate::truncation::{dominated_tail, TruncatedPmf};

/// Selects the base pmf `p(k) = a_k theta^k / h(theta)` or its star
/// companion `p*(k) = (k+1) a_{k+1} theta^k / h'(theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmfKind {
    Base,
    Star,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub star_mean: f64,
}

/// Result of [`PsdInstance::weighted_l1_gap`]: the truncated sum and a
/// certified upper bound on the full series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapEstimate {
    pub value: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdInstance {
    family: PowerSeriesFamily,
    theta: f64,
    /// `ln h`, `ln h'`, `ln h''` at theta.
    ln_h: [f64; 3],
}

/// Base and star pmfs on `0..=cut` with certified moment tails past `cut`.
#[derive(Debug, Clone)]
pub(crate) struct Window {
    pub cut: usize,
    pub base: Vec<f64>,
    pub star: Vec<f64>,
    /// `tail_base[d]` bounds `sum_{k > cut} k^d p(k)`.
    pub tail_base: [f64; 3],
    pub tail_star: [f64; 3],
}

pub(crate) fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1e-3 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "truncation eps must lie in (0, 1e-3], got {eps}"
        )))
    }
}

impl PsdInstance {
    pub fn new(family: PowerSeriesFamily, theta: f64) -> Result<Self> {
        family.check_domain(theta)?;
        let mut ln_h = [0.0; 3];
        for (order, slot) in ln_h.iter_mut().enumerate() {
            *slot = family.ln_h(theta, order as u8)?;
        }
        if !ln_h[0].is_finite() {
            return Err(Error::Convergence {
                family: family.name().to_string(),
                theta,
            });
        }
        Ok(Self {
            family,
            theta,
            ln_h,
        })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(PowerSeriesFamily::Poisson, lambda)
    }

    /// Bernoulli with success probability `p`, stored as odds.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain {
                family: "bernoulli".into(),
                theta: p,
            });
        }
        Self::new(PowerSeriesFamily::Bernoulli, p / (1.0 - p))
    }

    /// Geometric on `{0, 1, ...}` with failure probability `q`.
    pub fn geometric(q: f64) -> Result<Self> {
        Self::new(PowerSeriesFamily::Geometric, q)
    }

    pub fn logarithmic_shifted(theta: f64) -> Result<Self> {
        Self::new(PowerSeriesFamily::LogarithmicShifted, theta)
    }

    /// Builds from the user-facing parameter: success probability for
    /// Bernoulli, theta for everything else.
    pub fn from_param(family: PowerSeriesFamily, param: f64) -> Result<Self> {
        match family {
            PowerSeriesFamily::Bernoulli => Self::bernoulli(param),
            _ => Self::new(family, param),
        }
    }

    pub fn family(&self) -> PowerSeriesFamily {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Inverse of [`PsdInstance::from_param`].
    pub fn param(&self) -> f64 {
        match self.family {
            PowerSeriesFamily::Bernoulli => self.theta / (1.0 + self.theta),
            _ => self.theta,
        }
    }

    pub fn h(&self, order: u8) -> f64 {
        self.ln_h[order as usize].exp()
    }

    pub fn pmf(&self, k: u64) -> f64 {
        let ln_a = self.family.ln_coefficient(k);
        if ln_a == f64::NEG_INFINITY {
            return 0.0;
        }
        (ln_a + k as f64 * self.theta.ln() - self.ln_h[0]).exp()
    }

    fn star_unchecked(&self, k: u64) -> f64 {
        let ln_a = self.family.ln_coefficient(k + 1);
        if ln_a == f64::NEG_INFINITY {
            return 0.0;
        }
        ((k as f64 + 1.0).ln() + ln_a + k as f64 * self.theta.ln() - self.ln_h[1]).exp()
    }

    fn check_star(&self) -> Result<()> {
        if self.ln_h[1] == f64::NEG_INFINITY {
            Err(Error::Degenerate {
                family: self.family.name().to_string(),
            })
        } else {
            Ok(())
        }
    }

    pub fn star_pmf(&self, k: u64) -> Result<f64> {
        self.check_star()?;
        Ok(self.star_unchecked(k))
    }

    pub fn mean(&self) -> f64 {
        self.theta * (self.ln_h[1] - self.ln_h[0]).exp()
    }

    /// Mean of the star companion, `theta h''/h'`.
    pub fn star_mean(&self) -> f64 {
        if self.ln_h[1] == f64::NEG_INFINITY {
            return 0.0;
        }
        self.theta * (self.ln_h[2] - self.ln_h[1]).exp()
    }

    pub fn moments(&self) -> Moments {
        Moments {
            mean: self.mean(),
            star_mean: self.star_mean(),
        }
    }

    /// `theta d/dtheta mean = mean + theta^2 h''/h - mean^2`.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        m + self.theta * self.theta * (self.ln_h[2] - self.ln_h[0]).exp() - m * m
    }

    /// Ratio envelope for the base pmf from `k` on.
    fn base_ratio(&self, k: u64) -> f64 {
        self.theta * self.family.ratio_sup(k)
    }

    /// Ratio envelope for the star pmf from `k` on.
    fn star_ratio(&self, k: u64) -> f64 {
        self.theta * self.family.ratio_sup(k + 1) * (k as f64 + 2.0) / (k as f64 + 1.0)
    }

    /// Finite truncation of the base or star pmf with tail mass at most `eps`.
    pub fn truncate(&self, eps: f64, which: PmfKind) -> Result<TruncatedPmf> {
        check_eps(eps)?;
        if which == PmfKind::Star {
            self.check_star()?;
        }
        let mut probs = Vec::new();
        for k in 0..MAX_TERMS as u64 {
            let (s, rho) = match which {
                PmfKind::Base => (self.pmf(k), self.base_ratio(k)),
                PmfKind::Star => (self.star_unchecked(k), self.star_ratio(k)),
            };
            probs.push(s);
            if let Some(tail) = dominated_tail(s, rho, k, 0) {
                if tail <= eps {
                    return TruncatedPmf::new(probs, tail);
                }
            }
        }
        Err(Error::Truncation {
            eps,
            limit: MAX_TERMS,
        })
    }

    /// Base and star pmfs up to a cut where the tails of `k^d`-weighted
    /// sums, `d <= degree`, are all below `eps`.
    pub(crate) fn window(&self, eps: f64, degree: u32) -> Result<Window> {
        check_eps(eps)?;
        self.check_star()?;
        let mut base = Vec::new();
        let mut star = Vec::new();
        for k in 0..MAX_TERMS as u64 {
            let (p, ps) = (self.pmf(k), self.star_unchecked(k));
            base.push(p);
            star.push(ps);
            let (rb, rs) = (self.base_ratio(k), self.star_ratio(k));
            let mut tail_base = [0.0; 3];
            let mut tail_star = [0.0; 3];
            let mut ok = true;
            for d in 0..=degree.min(2) {
                match (dominated_tail(p, rb, k, d), dominated_tail(ps, rs, k, d)) {
                    (Some(tb), Some(ts)) if tb <= eps && ts <= eps => {
                        tail_base[d as usize] = tb;
                        tail_star[d as usize] = ts;
                    }
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok(Window {
                    cut: k as usize,
                    base,
                    star,
                    tail_base,
                    tail_star,
                });
            }
        }
        Err(Error::Truncation {
            eps,
            limit: MAX_TERMS,
        })
    }

    /// `sum_{k >= 1} k |p(k) - p*(k)|`, truncated, with a certified upper
    /// bound that includes the tail.
    pub fn weighted_l1_gap(&self, eps: f64) -> Result<GapEstimate> {
        let w = self.window(eps, 1)?;
        let value: f64 = (1..=w.cut)
            .map(|k| k as f64 * (w.base[k] - w.star[k]).abs())
            .sum();
        let upper = (value + (w.tail_base[1] + w.tail_star[1])).next_up();
        Ok(GapEstimate { value, upper })
    }
}
