#![allow(dead_code)]

use psd_approx::nb::{self, FitRequest, RRule};
use psd_approx::poisson::{self, StepConstant};
use psd_approx::{BoundEntry, BoundReport, ConvolutionSpec, PowerSeriesFamily, PsdInstance};
use rand::rngs::StdRng;
use rand::Rng;

pub const EPS: f64 = 1e-12;

/// Parameter ranges kept away from the domain edges, in user-facing units.
pub fn safe_range(family: PowerSeriesFamily) -> (f64, f64) {
    match family {
        PowerSeriesFamily::Poisson => (0.05, 3.0),
        PowerSeriesFamily::Bernoulli => (0.02, 0.6),
        PowerSeriesFamily::Geometric => (0.02, 0.6),
        PowerSeriesFamily::LogarithmicShifted => (0.02, 0.7),
        PowerSeriesFamily::Series(_) => unreachable!(),
    }
}

pub fn random_instance(rng: &mut StdRng, family: PowerSeriesFamily) -> PsdInstance {
    let (lo, hi) = safe_range(family);
    PsdInstance::from_param(family, rng.gen_range(lo..hi)).unwrap()
}

/// Up to `max_n` summands; half of the specs share one family.
pub fn random_spec(rng: &mut StdRng, max_n: usize) -> ConvolutionSpec {
    let n = rng.gen_range(1..=max_n);
    let families = PowerSeriesFamily::BUILT_IN;
    let homogeneous = rng.gen_bool(0.5);
    let shared = families[rng.gen_range(0..families.len())];
    let instances = (0..n)
        .map(|_| {
            let f = if homogeneous {
                shared
            } else {
                families[rng.gen_range(0..families.len())]
            };
            random_instance(rng, f)
        })
        .collect();
    ConvolutionSpec::new(instances).unwrap()
}

/// Every certified Poisson and NB bound that applies to the spec.
pub fn all_bounds(spec: &ConvolutionSpec, lambda_scale: f64) -> Vec<BoundReport> {
    let mean = spec.mean();
    let mut poisson_report = BoundReport::new(mean);
    let push = |r: &mut BoundReport, e: psd_approx::Result<BoundEntry>| {
        if let Ok(e) = e {
            r.push(e);
        }
    };
    push(
        &mut poisson_report,
        poisson::poisson_bound_matched(spec, EPS),
    );
    push(
        &mut poisson_report,
        poisson::poisson_bound_general(spec, mean, EPS, StepConstant::BarbourHall),
    );
    push(
        &mut poisson_report,
        poisson::poisson_bound_crude(spec, mean),
    );
    let shifted = mean * lambda_scale;
    let mut shifted_report = BoundReport::new(shifted);
    push(
        &mut shifted_report,
        poisson::poisson_bound_general(spec, shifted, EPS, StepConstant::Sharpened),
    );
    push(
        &mut shifted_report,
        poisson::poisson_bound_crude(spec, shifted),
    );
    if let Ok(closed) = poisson::poisson_closed_forms(spec) {
        for e in closed.entries {
            poisson_report.push(e);
        }
    }

    let mut nb_report = BoundReport::new(mean);
    let family = spec.common_family().unwrap_or(PowerSeriesFamily::Geometric);
    let r = RRule::default_for(family).resolve(spec.len());
    if let Ok(params) = nb::fit_params(spec, FitRequest::OneMoment { r }) {
        push(&mut nb_report, nb::nb_bound_one(spec, &params, EPS));
    }
    if let (Ok(params), Ok(tau)) = (
        nb::fit_params(spec, FitRequest::TwoMoment),
        nb::tau_upper(spec, EPS),
    ) {
        push(&mut nb_report, nb::nb_bound_two(spec, &params, &tau, EPS));
    }
    if let Ok(closed) = nb::nb_closed_forms(spec, r) {
        for e in closed {
            nb_report.push(e);
        }
    }
    vec![poisson_report, shifted_report, nb_report]
}
