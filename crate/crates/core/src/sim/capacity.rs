//! Maximum sustainable query rate.
//!
//! Rates are probed on the ladder `min_rate * rate_step^j`. The search grows
//! `j` exponentially until a probe is unstable, then bisects between the last
//! stable and the first unstable rung.

use rayon::prelude::*;

use super::metrics::stability_test;
use super::{Scenario, SimError};

#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub rate: f64,
    pub stable: bool,
    pub slope: f64,
    pub theta: f64,
    pub mean_ms: f64,
    /// Timed-out or rejected queries, summed over trials. Trials stop at
    /// their first timeout.
    pub timed_out: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    /// Highest stable rate found, in queries per second.
    pub rate: f64,
    /// True when `max_probes` ran out before any unstable rate was seen.
    pub saturated: bool,
    pub probes: Vec<Probe>,
}

/// Run `trials` trials at `rate` in parallel and judge stability of their
/// elementwise-averaged response-time series.
///
/// A timed-out query caps its response time at the timeout, which can make
/// an overloaded series look flat, so any timeout also counts as unstable
/// and ends the trial early.
pub fn probe_rate(scn: &Scenario, rate: f64) -> Result<Probe, SimError> {
    let c = &scn.cfg;
    let runs: Vec<_> = (0..c.trials.max(1) as u64)
        .into_par_iter()
        .map(|t| scn.run_trial_with(rate, t, |sim| sim.stop_on_timeout(true)).0)
        .collect();
    let len = runs.iter().map(|m| m.queries.len()).min().unwrap_or(0);
    let mut avg = vec![0.0; len];
    for m in &runs {
        for (a, x) in avg.iter_mut().zip(m.response_times_ms()) {
            *a += x / runs.len() as f64;
        }
    }
    let timed_out = runs.iter().map(|m| m.timed_out() + m.rejected as usize).sum();
    let mean_ms = avg.iter().sum::<f64>() / len.max(1) as f64;
    if timed_out > 0 {
        // trials stop at the first timeout, the series is incomplete
        return Ok(Probe {
            rate,
            stable: false,
            slope: f64::NAN,
            theta: f64::NAN,
            mean_ms,
            timed_out,
        });
    }
    let theta = (c.stability_theta > 0.0).then_some(c.stability_theta);
    let s = stability_test(&avg, c.stability_window, theta)?;
    Ok(Probe {
        rate,
        stable: s.stable,
        slope: s.slope,
        theta: s.theta,
        mean_ms,
        timed_out,
    })
}

pub fn find_max_query_rate(scn: &Scenario) -> Result<CapacityResult, SimError> {
    let c = &scn.cfg;
    let rung = |j: u32| c.min_rate * c.rate_step.powi(j as i32);
    let mut probes = Vec::new();
    let stable = |j: u32, probes: &mut Vec<Probe>| -> Result<bool, SimError> {
        let p = probe_rate(scn, rung(j))?;
        let ok = p.stable;
        probes.push(p);
        Ok(ok)
    };
    if !stable(0, &mut probes)? {
        return Err(SimError::UnstableAtMinimum(c.min_rate));
    }
    let (mut lo, mut step) = (0u32, 1u32);
    let mut hi = None;
    while probes.len() < c.max_probes {
        let j = lo + step;
        if stable(j, &mut probes)? {
            lo = j;
            step *= 2;
        } else {
            hi = Some(j);
            break;
        }
    }
    let Some(mut hi) = hi else {
        return Ok(CapacityResult {
            rate: rung(lo),
            saturated: true,
            probes,
        });
    };
    while hi - lo > 1 && probes.len() < c.max_probes {
        let mid = (lo + hi) / 2;
        if stable(mid, &mut probes)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CapacityResult {
        rate: rung(lo),
        saturated: false,
        probes,
    })
}
