//! Total variation bounds between `S_n` and a Poisson law.
//!
//! The Stein solution itself is never built; only its two norm bounds enter:
//! `||g|| <= 1/max(1, sqrt(lambda))` and `||Δg|| <= c(lambda)`, where
//! `c` is [`StepConstant`].

use crate::convolution::ConvolutionSpec;
use crate::error::{Error, Result};
use crate::family::PowerSeriesFamily;
use crate::instance::{check_eps, PsdInstance};
use crate::report::{BoundEntry, BoundReport, Target};

/// Bound used for `||Δg||`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepConstant {
    /// `1/max(1, lambda)`.
    #[default]
    Sharpened,
    /// `(1 - e^{-lambda})/lambda`.
    BarbourHall,
}

impl StepConstant {
    pub fn value(self, lambda: f64) -> f64 {
        match self {
            Self::Sharpened => 1.0 / lambda.max(1.0),
            Self::BarbourHall => -(-lambda).exp_m1() / lambda,
        }
    }
}

/// Bound on `||g||`, multiplying the mean mismatch `|lambda - E S_n|`.
pub fn location_constant(lambda: f64) -> f64 {
    1.0 / lambda.sqrt().max(1.0)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "lambda must be positive, got {lambda}"
        )))
    }
}

/// General bound for any `lambda > 0`:
///
/// `|lambda - E S_n|/max(1, sqrt(lambda)) + c(lambda) * sum_i E X_i * sum_{k>=1} k |p_i(k) - p*_i(k)|`.
///
/// Each inner series is replaced by its certified upper value. If a summand
/// cannot be truncated, its series falls back to `E X_i + E X*_i`, which
/// dominates it by the triangle inequality, and a note is attached.
pub fn poisson_bound_general(
    spec: &ConvolutionSpec,
    lambda: f64,
    eps: f64,
    constant: StepConstant,
) -> Result<BoundEntry> {
    check_lambda(lambda)?;
    check_eps(eps)?;
    let mean = spec.mean();
    let mut weighted = 0.0;
    let mut fallbacks = Vec::new();
    for (i, inst) in spec.instances().iter().enumerate() {
        let gap = match inst.weighted_l1_gap(eps) {
            Ok(g) => g.upper,
            Err(Error::Truncation { .. }) => {
                fallbacks.push(i);
                inst.mean() + inst.star_mean()
            }
            Err(e) => return Err(e),
        };
        weighted += inst.mean() * gap;
    }
    let value = ((lambda - mean).abs() * location_constant(lambda)
        + constant.value(lambda) * weighted)
        .next_up();
    let method = match constant {
        StepConstant::Sharpened => "poisson",
        StepConstant::BarbourHall => "poisson_bh",
    };
    let mut entry = BoundEntry::new(method, value, Target::Poisson { lambda })
        .with_param("lambda", lambda)
        .with_param("mean", mean)
        .with_param("n", spec.len() as f64);
    if !fallbacks.is_empty() {
        entry.note = Some(format!(
            "summands {fallbacks:?} used the moment bound E X + E X* in place of the truncated series"
        ));
    }
    Ok(entry)
}

/// General bound with `lambda = E S_n`, so the first term vanishes.
pub fn poisson_bound_matched(spec: &ConvolutionSpec, eps: f64) -> Result<BoundEntry> {
    poisson_bound_general(spec, spec.mean(), eps, StepConstant::Sharpened)
}

/// `sup_i [h'(theta_i)^2 + h''(theta_i) h(theta_i)]` over the given summands.
pub fn crude_sup(spec: &ConvolutionSpec) -> Result<f64> {
    let mut m = 0.0f64;
    for inst in spec.instances() {
        let v = inst.h(1).powi(2) + inst.h(2) * inst.h(0);
        if !v.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "h'^2 + h''h is not finite at theta = {}",
                inst.theta()
            )));
        }
        m = m.max(v);
    }
    Ok(m)
}

/// Crude bound:
/// `|lambda - E S_n|/max(1, sqrt(lambda)) + M_n/(a_0^2 max(1, lambda)) * sum_i theta_i^2`.
///
/// For mixed families the smallest `a_0` is used, which keeps the bound valid.
pub fn poisson_bound_crude(spec: &ConvolutionSpec, lambda: f64) -> Result<BoundEntry> {
    check_lambda(lambda)?;
    let m = crude_sup(spec)?;
    let a0 = spec
        .instances()
        .iter()
        .map(|i| i.family().coefficient(0))
        .fold(f64::INFINITY, f64::min);
    if !(a0 > 0.0) {
        return Err(Error::InvalidArgument("crude bound needs a_0 > 0".into()));
    }
    let theta_sq: f64 = spec.instances().iter().map(|i| i.theta().powi(2)).sum();
    let mean = spec.mean();
    let value = (lambda - mean).abs() * location_constant(lambda)
        + m / (a0 * a0 * lambda.max(1.0)) * theta_sq;
    Ok(
        BoundEntry::new("poisson_crude", value.next_up(), Target::Poisson { lambda })
            .with_param("lambda", lambda)
            .with_param("mean", mean)
            .with_param("M_n", m)
            .with_param("a0", a0),
    )
}

/// Identical-summands form: `mu_n = n E X`, and a single inner series.
pub fn iid_bound(inst: &PsdInstance, n: usize, lambda: f64, eps: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let mu = n as f64 * inst.mean();
    let gap = inst.weighted_l1_gap(eps)?.upper;
    Ok((lambda - mu).abs() * location_constant(lambda) + mu / lambda.max(1.0) * gap)
}

/// Identical-summands crude form.
pub fn iid_crude_bound(inst: &PsdInstance, n: usize, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let mu = n as f64 * inst.mean();
    let a0 = inst.family().coefficient(0);
    let bracket = inst.h(1).powi(2) + inst.h(2) * inst.h(0);
    Ok((lambda - mu).abs() * location_constant(lambda)
        + n as f64 * inst.theta().powi(2) * bracket / (a0 * a0 * lambda.max(1.0)))
}

fn require_family(spec: &ConvolutionSpec, family: PowerSeriesFamily) -> Result<()> {
    if spec.common_family() == Some(family) {
        Ok(())
    } else {
        Err(Error::UnsupportedClosedForm(format!(
            "needs every summand to be {family}"
        )))
    }
}

/// Bernoulli closed form with `lambda = sum p_i`: `sum p_i^2 / max(1, lambda)`.
pub fn poisson_ber(spec: &ConvolutionSpec) -> Result<BoundEntry> {
    require_family(spec, PowerSeriesFamily::Bernoulli)?;
    let lambda = spec.mean();
    let sq: f64 = spec.instances().iter().map(|i| i.param().powi(2)).sum();
    Ok(BoundEntry::new(
        "poisson_ber",
        sq / lambda.max(1.0),
        Target::Poisson { lambda },
    )
    .with_param("lambda", lambda))
}

/// Geometric closed form with `lambda = sum q_i/p_i`:
/// `sum (q_i/p_i)^2 / max(1, lambda)`. Certified only when every `q_i <= 1/2`.
pub fn poisson_eqn(spec: &ConvolutionSpec) -> Result<BoundEntry> {
    require_family(spec, PowerSeriesFamily::Geometric)?;
    let lambda = spec.mean();
    let sq: f64 = spec
        .instances()
        .iter()
        .map(|i| (i.theta() / (1.0 - i.theta())).powi(2))
        .sum();
    let entry = BoundEntry::new(
        "poisson_eqn",
        sq / lambda.max(1.0),
        Target::Poisson { lambda },
    )
    .with_param("lambda", lambda);
    if spec.instances().iter().all(|i| i.theta() <= 0.5) {
        Ok(entry)
    } else {
        Ok(entry.uncertified("closed form assumes every q_i <= 1/2"))
    }
}

const LITERATURE: &str = "literature comparison value";

/// The family closed form plus literature comparison bounds, all at
/// `lambda = E S_n`. Only homogeneous Bernoulli or geometric specs have them.
pub fn poisson_closed_forms(spec: &ConvolutionSpec) -> Result<BoundReport> {
    let lambda = spec.mean();
    let target = Target::Poisson { lambda };
    let mut report = BoundReport::new(lambda);
    let lit = |method: &str, value: f64| {
        BoundEntry::new(method, value, target)
            .with_param("lambda", lambda)
            .uncertified(LITERATURE)
    };
    match spec.common_family() {
        Some(PowerSeriesFamily::Bernoulli) => {
            let sq: f64 = spec.instances().iter().map(|i| i.param().powi(2)).sum();
            report.push(poisson_ber(spec)?);
            report.push(lit("le_cam", sq));
            report.push(lit("kerstan", 1.05 * sq / lambda));
            report.push(lit("barbour_hall", -(-lambda).exp_m1() / lambda * sq));
        }
        Some(PowerSeriesFamily::Geometric) => {
            report.push(poisson_eqn(spec)?);
            let qs: Vec<(f64, f64)> = spec
                .instances()
                .iter()
                .map(|i| (i.theta(), 1.0 - i.theta()))
                .collect();
            let ratio_sq: f64 = qs.iter().map(|(q, p)| (q / p).powi(2)).sum();
            if spec.is_iid() {
                let (q, p) = qs[0];
                report.push(lit("barbour", -(-lambda).exp_m1() * q / p));
            }
            let vu = ratio_sq * (1.0 / (2.0 * lambda * std::f64::consts::E).sqrt()).min(1.0);
            report.push(lit("vellaisamy_upadhye", vu));
            let hg: f64 = 2.0 * qs.iter().map(|(q, p)| q * q + q / (p * p)).sum::<f64>();
            let mut hung = lit("hung_giang", hg).pointwise();
            hung.note =
                Some("bounds |P(S_n = k) - P(N = k)| pointwise, not total variation".into());
            report.push(hung);
            let c = -(-lambda).exp_m1() / lambda;
            let tw: f64 = qs.iter().map(|(q, p)| (c / p).min(1.0) * q * q / p).sum();
            report.push(lit("teerapabolarn_wongkasem", tw));
        }
        _ => {
            return Err(Error::UnsupportedClosedForm(
                "closed forms exist for all-bernoulli or all-geometric summands only".into(),
            ))
        }
    }
    Ok(report)
}

/// One row of a convergence probe.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRow {
    pub n: usize,
    /// `sum_i theta_i`.
    pub theta_sum: f64,
    /// Limit mean `theta_sum * a_1/a_0`.
    pub lambda0: f64,
    pub mean: f64,
    /// General bound against `Poi(lambda0)`.
    pub bound_limit: f64,
    /// Crude bound against `Poi(lambda0)`.
    pub crude_limit: f64,
    /// General bound against `Poi(E S_n)`.
    pub bound_matched: f64,
}

/// Evaluates the bounds along a parameter schedule. `schedule(n)` returns
/// the user-facing parameters of the `n` summands.
pub fn convergence_probe(
    family: PowerSeriesFamily,
    schedule: impl Fn(usize) -> Vec<f64>,
    n_values: &[usize],
    eps: f64,
) -> Result<Vec<ProbeRow>> {
    let ratio = family.coefficient(1) / family.coefficient(0);
    n_values
        .iter()
        .map(|&n| {
            let spec = ConvolutionSpec::from_params(family, &schedule(n))?;
            let theta_sum: f64 = spec.instances().iter().map(|i| i.theta()).sum();
            let lambda0 = theta_sum * ratio;
            Ok(ProbeRow {
                n,
                theta_sum,
                lambda0,
                mean: spec.mean(),
                bound_limit: poisson_bound_general(&spec, lambda0, eps, StepConstant::Sharpened)?
                    .value,
                crude_limit: poisson_bound_crude(&spec, lambda0)?.value,
                bound_matched: poisson_bound_matched(&spec, eps)?.value,
            })
        })
        .collect()
}

/// Whether a probe column is strictly decreasing.
pub fn is_decreasing(rows: &[ProbeRow], column: impl Fn(&ProbeRow) -> f64) -> bool {
    rows.windows(2).all(|w| column(&w[1]) < column(&w[0]))
}
