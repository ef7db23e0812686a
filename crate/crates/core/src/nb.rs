//! Negative binomial approximation bounds.
//!
//! `NB(r, p)` counts failures before the `r`-th success:
//! `P(M = k) = C(r+k-1, k) p^r q^k`, with real `r > 0`.

use crate::convolution::ConvolutionSpec;
use crate::error::{Error, Result};
use crate::family::{PowerSeriesFamily, MAX_TERMS};
use crate::instance::{check_eps, Window};
use crate::report::{BoundEntry, Target};
use crate::truncation::{dominated_tail, TruncatedPmf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    OneMoment,
    TwoMoment,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbParams {
    r: f64,
    p: f64,
    q: f64,
    mode: FitMode,
}

impl NbParams {
    pub fn new(r: f64, p: f64, mode: FitMode) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "r must be positive, got {r}"
            )));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "p must lie in (0, 1), got {p}"
            )));
        }
        Ok(Self {
            r,
            p,
            q: 1.0 - p,
            mode,
        })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn mode(&self) -> FitMode {
        self.mode
    }

    pub fn mean(&self) -> f64 {
        self.r * self.q / self.p
    }

    pub fn variance(&self) -> f64 {
        self.r * self.q / (self.p * self.p)
    }

    pub fn target(&self) -> Target {
        Target::NegativeBinomial {
            r: self.r,
            p: self.p,
        }
    }
}

/// `P(M_{r,p} = k)`, evaluated in log space.
pub fn nb_pmf(params: &NbParams, k: u64) -> f64 {
    let (r, kf) = (params.r, k as f64);
    let ln_coeff = libm::lgamma(r + kf) - libm::lgamma(r) - libm::lgamma(kf + 1.0);
    (ln_coeff + r * params.p.ln() + kf * params.q.ln()).exp()
}

/// Truncation of `NB(r, p)` with certified tail mass at most `eps`.
pub fn nb_truncate(params: &NbParams, eps: f64) -> Result<TruncatedPmf> {
    check_eps(eps)?;
    let mut probs = Vec::new();
    for k in 0..MAX_TERMS as u64 {
        let s = nb_pmf(params, k);
        probs.push(s);
        // pmf(j+1)/pmf(j) = q (r+j)/(j+1) is monotone in j with limit q.
        let rho = (params.q * (params.r + k as f64) / (k as f64 + 1.0)).max(params.q);
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

/// How the one-moment `r` is chosen for an `n`-term sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RRule {
    Fixed(f64),
    N,
    NOver5,
}

impl RRule {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            Self::Fixed(r) => r,
            Self::N => n as f64,
            Self::NOver5 => n as f64 / 5.0,
        }
    }

    /// `n` for Bernoulli and geometric sums, `n/5` for logarithmic ones.
    pub fn default_for(family: PowerSeriesFamily) -> Self {
        match family {
            PowerSeriesFamily::LogarithmicShifted => Self::NOver5,
            _ => Self::N,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitRequest {
    /// Match `E S_n = r q/p` for the given `r`.
    OneMoment { r: f64 },
    /// Match mean and variance.
    TwoMoment,
}

pub fn fit_params(spec: &ConvolutionSpec, request: FitRequest) -> Result<NbParams> {
    let mean = spec.mean();
    match request {
        FitRequest::OneMoment { r } => {
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "r must be positive, got {r}"
                )));
            }
            NbParams::new(r, r / (r + mean), FitMode::OneMoment)
        }
        FitRequest::TwoMoment => {
            let var = spec.variance();
            if !(var > mean) {
                return Err(Error::Infeasible(format!(
                    "two-moment matching needs Var S_n > E S_n (got {var} <= {mean})"
                )));
            }
            NbParams::new(mean * mean / (var - mean), mean / var, FitMode::TwoMoment)
        }
    }
}

/// Smoothing factor bound for the two-moment bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TauEstimate {
    pub tau_upper: f64,
    /// `tau_i = min(1/2, 1 - d_TV(X_i, X_i + 1))`.
    pub per_i: Vec<f64>,
    pub tau_star: f64,
}

impl TauEstimate {
    /// A caller-supplied value, e.g. a closed-form smoothing bound.
    pub fn from_value(tau_upper: f64) -> Self {
        Self {
            tau_upper,
            per_i: Vec::new(),
            tau_star: 0.0,
        }
    }
}

const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

/// Certified upper bound on `d_TV(X, X + 1) = (1/2) sum_k |p(k-1) - p(k)|`.
pub fn shift_tv_upper(inst: &crate::instance::PsdInstance, eps: f64) -> Result<f64> {
    let t = inst.truncate(eps, crate::instance::PmfKind::Base)?;
    let probs = t.probs();
    let next = inst.pmf(probs.len() as u64);
    let mut sum = probs[0];
    for k in 1..probs.len() {
        sum += (probs[k - 1] - probs[k]).abs();
    }
    sum += (probs[probs.len() - 1] - next).abs();
    // sum_{k > cut+1} |p(k-1) - p(k)| <= 2 * tail.
    Ok((0.5 * (sum + 2.0 * t.tail_bound())).next_up())
}

/// `tau <= sqrt(2/pi) (1/4 + sum tau_i - tau*)^{-1/2}`, with each `tau_i`
/// computed from an upper bound on `d_TV(X_i, X_i + 1)` so the result stays
/// an upper bound.
pub fn tau_upper(spec: &ConvolutionSpec, eps: f64) -> Result<TauEstimate> {
    let per_i = spec
        .instances()
        .iter()
        .map(|inst| Ok((1.0 - shift_tv_upper(inst, eps)?).clamp(0.0, 0.5)))
        .collect::<Result<Vec<f64>>>()?;
    let tau_star = per_i.iter().copied().fold(0.0, f64::max);
    let sum: f64 = per_i.iter().sum();
    let tau_upper = SQRT_2_OVER_PI / (0.25 + sum - tau_star).sqrt();
    Ok(TauEstimate {
        tau_upper,
        per_i,
        tau_star,
    })
}

fn check_matched(spec: &ConvolutionSpec, params: &NbParams) -> Result<f64> {
    let mean = spec.mean();
    if (params.mean() - mean).abs() > 1e-9 * mean.max(1.0) {
        return Err(Error::InvalidArgument(format!(
            "NB mean {} does not match E S_n = {mean}",
            params.mean()
        )));
    }
    Ok(mean)
}

/// `sum_k w(k) |p p_i(k) + q p*_i(k-1) - p*_i(k)|` with `p*_i(-1) = 0`,
/// truncated at the window cut, plus a certified bound on the remainder.
///
/// `w(k) = k` when `quadratic` is false, `k((k-1)/2 + m)` otherwise.
fn nb_inner(w: &Window, params: &NbParams, m: f64, quadratic: bool) -> f64 {
    let (p, q) = (params.p, params.q);
    let weight = |k: f64| {
        if quadratic {
            k * ((k - 1.0) / 2.0 + m)
        } else {
            k
        }
    };
    let mut sum = 0.0;
    for k in 1..=w.cut {
        let d = p * w.base[k] + q * w.star[k - 1] - w.star[k];
        sum += weight(k as f64) * d.abs();
    }
    let cut = w.cut as f64;
    let (tb, ts) = (w.tail_base, w.tail_star);
    // |p a + q b - c| <= p a + q b + c, then weights expanded in powers of k.
    let tail = if quadratic {
        let c1 = (m - 0.5).max(0.0);
        let direct = |t: [f64; 3]| 0.5 * t[2] + c1 * t[1];
        // sum_{k > cut} w(k) p*(k-1) = w(cut+1) p*(cut) + sum_{j > cut} w(j+1) p*(j),
        // w(j+1) = j^2/2 + (m + 1/2) j + m.
        let shifted =
            weight(cut + 1.0) * w.star[w.cut] + 0.5 * ts[2] + (m + 0.5) * ts[1] + m * ts[0];
        p * direct(tb) + direct(ts) + q * shifted
    } else {
        let shifted = (cut + 1.0) * w.star[w.cut] + ts[1] + ts[0];
        p * tb[1] + ts[1] + q * shifted
    };
    sum + tail
}

/// One-parameter bound:
/// `(1/(r q)) sum_i E X_i sum_{k>=1} k |p p_i(k) + q p*_i(k-1) - p*_i(k)|`.
pub fn nb_bound_one(spec: &ConvolutionSpec, params: &NbParams, eps: f64) -> Result<BoundEntry> {
    check_eps(eps)?;
    check_matched(spec, params)?;
    let mut total = 0.0;
    for inst in spec.instances() {
        let w = inst.window(eps, 1)?;
        total += inst.mean() * nb_inner(&w, params, inst.mean(), false);
    }
    let value = (total / (params.r * params.q)).next_up();
    Ok(BoundEntry::new("nb_one", value, params.target())
        .with_param("r", params.r)
        .with_param("p", params.p))
}

/// Two-parameter bound:
/// `(tau/(r q)) sum_i E X_i sum_{k>=1} k((k-1)/2 + E X_i) |p p_i(k) + q p*_i(k-1) - p*_i(k)|`.
pub fn nb_bound_two(
    spec: &ConvolutionSpec,
    params: &NbParams,
    tau: &TauEstimate,
    eps: f64,
) -> Result<BoundEntry> {
    check_eps(eps)?;
    if params.mode != FitMode::TwoMoment {
        return Err(Error::InvalidArgument(
            "the two-parameter bound needs two-moment matched parameters".into(),
        ));
    }
    check_matched(spec, params)?;
    let mut total = 0.0;
    for inst in spec.instances() {
        let w = inst.window(eps, 2)?;
        let m = inst.mean();
        total += m * nb_inner(&w, params, m, true);
    }
    let value = (tau.tau_upper * total / (params.r * params.q)).next_up();
    Ok(BoundEntry::new("nb_two", value, params.target())
        .with_param("r", params.r)
        .with_param("p", params.p)
        .with_param("tau", tau.tau_upper))
}

fn geometric_pairs(spec: &ConvolutionSpec) -> Result<Vec<(f64, f64)>> {
    if spec.common_family() != Some(PowerSeriesFamily::Geometric) {
        return Err(Error::UnsupportedClosedForm(
            "needs every summand to be geometric".into(),
        ));
    }
    Ok(spec
        .instances()
        .iter()
        .map(|i| (i.theta(), 1.0 - i.theta()))
        .collect())
}

/// Geometric one-moment closed form: `(1/(r q)) sum_i |p - p_i| q_i / p_i^2`.
pub fn nb_eqn1(spec: &ConvolutionSpec, r: f64) -> Result<BoundEntry> {
    let pairs = geometric_pairs(spec)?;
    let params = fit_params(spec, FitRequest::OneMoment { r })?;
    let sum: f64 = pairs
        .iter()
        .map(|(qi, pi)| (params.p - pi).abs() * qi / (pi * pi))
        .sum();
    let entry = BoundEntry::new("nb_eqn1", sum / (params.r * params.q), params.target())
        .with_param("r", params.r)
        .with_param("p", params.p);
    if pairs.iter().all(|(qi, _)| *qi <= 0.5) {
        Ok(entry)
    } else {
        Ok(entry.uncertified("closed form assumes every q_i <= 1/2"))
    }
}

/// Smoothing bound used by the geometric two-moment closed form,
/// `sqrt(2/pi) (sum q_i - 1/4)^{-1/2}`.
pub fn geometric_closed_tau(spec: &ConvolutionSpec) -> Result<f64> {
    let pairs = geometric_pairs(spec)?;
    let sum_q: f64 = pairs.iter().map(|(q, _)| q).sum();
    if !(sum_q > 0.25) {
        return Err(Error::Infeasible(format!(
            "closed-form smoothing bound needs sum q_i > 1/4 (got {sum_q})"
        )));
    }
    Ok(SQRT_2_OVER_PI / (sum_q - 0.25).sqrt())
}

/// Geometric two-moment closed form:
/// `3 tau (sum q_i/p_i)^{-1} sum_i |1/p_i - 1/p| (q_i/p_i)^2`.
pub fn nb_eqn2(spec: &ConvolutionSpec) -> Result<BoundEntry> {
    let pairs = geometric_pairs(spec)?;
    let params = fit_params(spec, FitRequest::TwoMoment)?;
    let tau = geometric_closed_tau(spec)?;
    let mean: f64 = pairs.iter().map(|(q, p)| q / p).sum();
    let sum: f64 = pairs
        .iter()
        .map(|(qi, pi)| (1.0 / pi - 1.0 / params.p).abs() * (qi / pi).powi(2))
        .sum();
    let entry = BoundEntry::new("nb_eqn2", 3.0 * tau / mean * sum, params.target())
        .with_param("r", params.r)
        .with_param("p", params.p)
        .with_param("tau", tau);
    if pairs.iter().all(|(qi, _)| *qi <= 0.5) {
        Ok(entry)
    } else {
        Ok(entry.uncertified("closed form assumes every q_i <= 1/2"))
    }
}

/// Bernoulli one-moment closed form at `r = n`: `2 sum p_i^2 / sum p_i`.
pub fn nb_qwqw(spec: &ConvolutionSpec) -> Result<BoundEntry> {
    if spec.common_family() != Some(PowerSeriesFamily::Bernoulli) {
        return Err(Error::UnsupportedClosedForm(
            "needs every summand to be bernoulli".into(),
        ));
    }
    let n = spec.len() as f64;
    let ps: Vec<f64> = spec.instances().iter().map(|i| i.param()).collect();
    let sum: f64 = ps.iter().sum();
    let sq: f64 = ps.iter().map(|p| p * p).sum();
    let params = fit_params(spec, FitRequest::OneMoment { r: n })?;
    Ok(BoundEntry::new("nb_qwqw", 2.0 * sq / sum, params.target())
        .with_param("r", n)
        .with_param("p", params.p))
}

/// Every closed form that applies to the spec. Two-moment forms that are
/// infeasible for it are left out.
pub fn nb_closed_forms(spec: &ConvolutionSpec, r: f64) -> Result<Vec<BoundEntry>> {
    match spec.common_family() {
        Some(PowerSeriesFamily::Geometric) => {
            let mut out = vec![nb_eqn1(spec, r)?];
            match nb_eqn2(spec) {
                Ok(e) => out.push(e),
                Err(Error::Infeasible(_)) => {}
                Err(e) => return Err(e),
            }
            Ok(out)
        }
        Some(PowerSeriesFamily::Bernoulli) => Ok(vec![nb_qwqw(spec)?]),
        _ => Err(Error::UnsupportedClosedForm(
            "closed forms exist for all-bernoulli or all-geometric summands only".into(),
        )),
    }
}
