//! Per-link and end-to-end coverage from a contact law and the fading CDF.

use crate::channel::{SrParams, SrSeries};
use crate::error::{domain, Result};
use crate::quadrature::{try_integrate_with_breakpoints, Tolerance};

use super::contact::ContactLaw;

/// Probability that the serving link meets its threshold: the contact mass
/// minus the mass on which the fading falls below `c·D²`.
pub fn coverage_link_integral(law: &dyn ContactLaw, sr: &SrParams, c: f64, z_max: usize) -> Result<f64> {
    coverage_link_integral_with_exponent(law, sr, c, 2.0, z_max)
}

/// As [`coverage_link_integral`] with the threshold `c·D^alpha`.
pub fn coverage_link_integral_with_exponent(
    law: &dyn ContactLaw,
    sr: &SrParams,
    c: f64,
    alpha: f64,
    z_max: usize,
) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(domain(format!("threshold constant must be non-negative, got {c}")));
    }
    let series = SrSeries::new(*sr, z_max)?;
    let pts = law.quadrature_points();
    let tol = Tolerance::default();
    let mass = try_integrate_with_breakpoints(|d| law.density(d), &pts, &tol)?.value;
    if c == 0.0 {
        return Ok(mass.clamp(0.0, 1.0));
    }
    if c == f64::INFINITY {
        return Ok(0.0);
    }
    let outage = try_integrate_with_breakpoints(
        |d| Ok(law.density(d)? * series.cdf(c * d.powf(alpha))),
        &pts,
        &tol,
    )?
    .value;
    Ok((mass - outage).clamp(0.0, 1.0))
}

pub fn coverage_end_to_end(p_ts: f64, p_sr: f64) -> Result<f64> {
    for p in [p_ts, p_sr] {
        if !(0.0..=1.0).contains(&p) {
            return Err(domain(format!("probability {p} outside [0, 1]")));
        }
    }
    Ok(p_ts * p_sr)
}
