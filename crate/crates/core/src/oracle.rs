//! Exact distribution of `S_n` by direct convolution, and the total
//! variation distance to the approximating laws.
//!
//! Used to check that every certified bound really dominates `d_TV`.

use crate::convolution::ConvolutionSpec;
use crate::error::{Error, Result};
use crate::instance::{PmfKind, PsdInstance};
use crate::nb::{nb_truncate, NbParams};
use crate::report::{BoundReport, Metric, Target};
use crate::truncation::TruncatedPmf;

pub const DEFAULT_SUPPORT_CAP: usize = 1_000_000;

/// Slack allowed for floating rounding when comparing a bound to the oracle.
pub const CERTIFY_TOLERANCE: f64 = 1e-10;

/// Iterated direct convolution. The tail bound is the union bound
/// `sum_i tail_i`.
pub fn convolve(pmfs: &[TruncatedPmf], cap: usize) -> Result<TruncatedPmf> {
    let (first, rest) = pmfs.split_first().ok_or(Error::EmptySpec)?;
    let len: usize = pmfs.iter().map(|p| p.len() - 1).sum::<usize>() + 1;
    if len > cap {
        return Err(Error::SupportCap { len, cap });
    }
    let mut acc = first.probs().to_vec();
    let mut tail = first.tail_bound();
    for next in rest {
        let b = next.probs();
        let mut out = vec![0.0; acc.len() + b.len() - 1];
        for (i, &a) in acc.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] += a * bj;
            }
        }
        acc = out;
        tail += next.tail_bound();
    }
    TruncatedPmf::new(acc, tail)
}

/// Truncated pmf of `S_n`, each summand cut at tail mass `eps`.
pub fn spec_pmf(spec: &ConvolutionSpec, eps: f64, cap: usize) -> Result<TruncatedPmf> {
    let parts = spec
        .instances()
        .iter()
        .map(|i| i.truncate(eps, PmfKind::Base))
        .collect::<Result<Vec<_>>>()?;
    convolve(&parts, cap)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    Poisson { lambda: f64 },
    NegativeBinomial(NbParams),
}

impl Reference {
    pub fn from_target(target: Target) -> Result<Self> {
        Ok(match target {
            Target::Poisson { lambda } => Self::Poisson { lambda },
            Target::NegativeBinomial { r, p } => {
                Self::NegativeBinomial(NbParams::new(r, p, crate::nb::FitMode::OneMoment)?)
            }
        })
    }
}

pub fn reference_pmf(reference: &Reference, eps: f64) -> Result<TruncatedPmf> {
    match reference {
        Reference::Poisson { lambda } => {
            PsdInstance::poisson(*lambda)?.truncate(eps, PmfKind::Base)
        }
        Reference::NegativeBinomial(params) => nb_truncate(params, eps),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvEstimate {
    pub value: f64,
    /// The true distance lies within `value ± error_bar`.
    pub error_bar: f64,
}

/// Half the L1 distance over the union of both supports.
pub fn tv_distance(a: &TruncatedPmf, b: &TruncatedPmf) -> TvEstimate {
    let len = a.len().max(b.len());
    let l1: f64 = (0..len).map(|k| (a.get(k) - b.get(k)).abs()).sum();
    TvEstimate {
        value: 0.5 * l1,
        error_bar: 0.5 * (a.tail_bound() + b.tail_bound()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub method: String,
    pub bound: f64,
    pub oracle_tv: TvEstimate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub n: usize,
    pub mean: f64,
    pub checks: Vec<Check>,
    pub violations: Vec<Check>,
    pub skipped: Option<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares every certified total variation entry against the oracle
/// distance to its target law.
pub fn certify(
    spec: &ConvolutionSpec,
    reports: &[BoundReport],
    eps: f64,
    cap: usize,
) -> Result<ValidationReport> {
    let mut report = ValidationReport {
        n: spec.len(),
        mean: spec.mean(),
        checks: Vec::new(),
        violations: Vec::new(),
        skipped: None,
    };
    let exact = match spec_pmf(spec, eps, cap) {
        Ok(p) => p,
        Err(e @ Error::SupportCap { .. }) => {
            report.skipped = Some(e.to_string());
            return Ok(report);
        }
        Err(e) => return Err(e),
    };
    let mut cache: Vec<(Target, TvEstimate)> = Vec::new();
    let entries = reports
        .iter()
        .flat_map(|r| r.entries.iter())
        .filter(|e| e.certified && e.metric == Metric::TotalVariation);
    for entry in entries {
        let tv = match cache.iter().find(|(t, _)| *t == entry.target) {
            Some((_, tv)) => *tv,
            None => {
                let reference = reference_pmf(&Reference::from_target(entry.target)?, eps)?;
                let tv = tv_distance(&exact, &reference);
                cache.push((entry.target, tv));
                tv
            }
        };
        let check = Check {
            method: entry.method.clone(),
            bound: entry.value,
            oracle_tv: tv,
        };
        if entry.value < tv.value - tv.error_bar - CERTIFY_TOLERANCE {
            report.violations.push(check.clone());
        }
        report.checks.push(check);
    }
    Ok(report)
}
