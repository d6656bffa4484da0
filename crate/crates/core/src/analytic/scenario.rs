//! Scenario-level direct-relay coverage, for a fixed gateway separation or
//! averaged over the nearest-neighbour separation of the gateway field.

use std::f64::consts::PI;

use crate::channel::{SrParams, SrSeries, DEFAULT_Z_MAX};
use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::geometry::{central_angle, slant_range, EARTH_RADIUS_KM};
use crate::quadrature::{try_integrate_with_breakpoints, Tolerance};

use super::contact::{ContactLaw, ContactLawConfig, ContactPdfVariant, OverlapContactLaw};
use super::coverage::coverage_link_integral_with_exponent;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnalyticForm {
    /// Product of two per-link coverages, each using the contact law seen
    /// from its own gateway.
    Product,
    /// Both links evaluated at the same relay: the satellite in the overlap
    /// nearest the transmitter. This is the relay the simulator selects.
    RelayConditioned,
}

fn contact_config(cfg: &ScenarioConfig, delta: f64) -> Result<ContactLawConfig> {
    let chord = 2.0 * EARTH_RADIUS_KM * (delta / 2.0).sin();
    ContactLawConfig::new(cfg.ns, cfg.ds, cfg.theta_m, cfg.theta_m, chord.max(0.0))
}

/// Probability that a link of length `d` meets the threshold `c·d^alpha`.
struct LinkSuccess {
    series: SrSeries,
    c: f64,
    alpha: f64,
}

impl LinkSuccess {
    fn new(sr: &SrParams, c: f64, alpha: f64) -> Result<Self> {
        Ok(Self {
            series: SrSeries::new(*sr, DEFAULT_Z_MAX)?,
            c,
            alpha,
        })
    }

    fn at(&self, d: f64) -> f64 {
        if self.c == 0.0 {
            return 1.0;
        }
        1.0 - self.series.cdf(self.c * d.powf(self.alpha))
    }
}

/// Direct-relay coverage for gateways `delta` radians apart.
pub fn tsr_coverage_at(cfg: &ScenarioConfig, delta: f64, form: AnalyticForm) -> Result<f64> {
    cfg.validate()?;
    if cfg.ns == 0 || delta >= cfg.theta_m {
        return Ok(0.0);
    }
    let ch = &cfg.channel;
    let c = ch.threshold_constant(cfg.gamma_db, true, ch.surface_noise_db);
    let alpha = ch.path_loss_exponent;
    let up_sr = ch.sr;
    let down_sr = ch.downlink_sr();
    let contact = contact_config(cfg, delta)?;
    let law_t = OverlapContactLaw::new(contact, ContactPdfVariant::Geometric)?;
    match form {
        AnalyticForm::Product => {
            let law_r = OverlapContactLaw::new(contact.swapped(), ContactPdfVariant::Geometric)?;
            let p_ts = coverage_link_integral_with_exponent(&law_t, &up_sr, c, alpha, DEFAULT_Z_MAX)?;
            let p_sr = coverage_link_integral_with_exponent(&law_r, &down_sr, c, alpha, DEFAULT_Z_MAX)?;
            Ok(p_ts * p_sr)
        }
        AnalyticForm::RelayConditioned => relay_conditioned(&law_t, &up_sr, &down_sr, c, alpha),
    }
}

fn relay_conditioned(law: &OverlapContactLaw, up: &SrParams, down: &SrParams, c: f64, alpha: f64) -> Result<f64> {
    let g = *law.geometry();
    let up = LinkSuccess::new(up, c, alpha)?;
    let down = LinkSuccess::new(down, c, alpha)?;
    let tol = Tolerance::default();
    let (sd, cd) = g.delta.sin_cos();
    // Given its angle psi from the transmitter axis, the relay is uniform
    // on the part of that circle inside the receiver cap.
    let downlink_given_psi = |psi: f64| -> Result<f64> {
        let half_arc = g.arc_inside(psi) / 2.0;
        if half_arc <= 0.0 {
            return Ok(0.0);
        }
        let (sp, cp) = psi.sin_cos();
        let at = |phi: f64| -> Result<f64> {
            let chi = (cp * cd + sp * sd * phi.cos()).clamp(-1.0, 1.0).acos();
            Ok(down.at(slant_range(chi, g.r, g.re)?))
        };
        if sp * sd == 0.0 {
            return at(0.0);
        }
        let mean = try_integrate_with_breakpoints(at, &[0.0, half_arc.min(PI)], &tol)?.value;
        Ok(mean / half_arc.min(PI))
    };
    let pts = law.quadrature_points();
    let value = try_integrate_with_breakpoints(
        |d| {
            let f = law.density(d)?;
            if f == 0.0 {
                return Ok(0.0);
            }
            let psi = central_angle(d, g.r, g.re)?;
            Ok(f * up.at(d) * downlink_given_psi(psi)?)
        },
        &pts,
        &tol,
    )?
    .value;
    Ok(value.clamp(0.0, 1.0))
}

/// Density of `u = 1 - cos(delta)` for the nearest other gateway of a
/// Poisson field, restricted to pairs whose caps overlap.
pub fn separation_density(u: f64, lambda_gw: f64, theta_m: f64) -> f64 {
    let span = 1.0 - theta_m.cos();
    if !(0.0..=span).contains(&u) {
        return 0.0;
    }
    let k = 2.0 * PI * lambda_gw * EARTH_RADIUS_KM * EARTH_RADIUS_KM;
    if k == 0.0 {
        return 1.0 / span;
    }
    k * (-k * u).exp() / -(-k * span).exp_m1()
}

/// Direct-relay coverage under the configured separation: the fixed chord
/// when one is set, otherwise averaged over the separation law.
pub fn tsr_coverage(cfg: &ScenarioConfig, form: AnalyticForm) -> Result<f64> {
    if let Some(d) = cfg.ground_separation {
        let delta = 2.0 * (d / (2.0 * EARTH_RADIUS_KM)).asin();
        return tsr_coverage_at(cfg, delta, form);
    }
    let span = 1.0 - cfg.theta_m.cos();
    let k = 2.0 * PI * cfg.lambda_gw * EARTH_RADIUS_KM * EARTH_RADIUS_KM;
    let mut pts = vec![0.0, span];
    if k > 0.0 {
        pts.extend([0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0].iter().map(|m| m / k).filter(|&u| u < span));
    }
    pts.sort_by(f64::total_cmp);
    let value = try_integrate_with_breakpoints(
        |u| {
            let delta = (1.0 - u).clamp(-1.0, 1.0).acos();
            Ok(separation_density(u, cfg.lambda_gw, cfg.theta_m) * tsr_coverage_at(cfg, delta, form)?)
        },
        &pts,
        &Tolerance {
            absolute: 1e-6,
            relative: 1e-5,
            ..Tolerance::default()
        },
    )?
    .value;
    Ok(value.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn base() -> ScenarioConfig {
        ScenarioConfig {
            ns: 2000,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn separation_density_normalised() {
        for lambda in [0.0, 1e-8, 1.96e-7, 1e-6] {
            let span = 1.0 - crate::config::DEFAULT_THETA_M.cos();
            let v = integrate(
                |u| separation_density(u, lambda, crate::config::DEFAULT_THETA_M),
                0.0,
                span,
                &Tolerance::default(),
            )
            .unwrap()
            .value;
            assert!((v - 1.0).abs() < 1e-6, "lambda {lambda}: {v}");
        }
    }

    #[test]
    fn relay_form_at_zero_separation_squares_link_success() {
        let cfg = base();
        let a = tsr_coverage_at(&cfg, 0.0, AnalyticForm::RelayConditioned).unwrap();
        let simple = {
            let contact = contact_config(&cfg, 0.0).unwrap();
            let law = OverlapContactLaw::new(contact, ContactPdfVariant::Geometric).unwrap();
            let ch = &cfg.channel;
            let c = ch.threshold_constant(cfg.gamma_db, true, ch.surface_noise_db);
            let up = LinkSuccess::new(&ch.sr, c, 2.0).unwrap();
            let pts = law.quadrature_points();
            try_integrate_with_breakpoints(
                |d| Ok(law.density(d)? * up.at(d).powi(2)),
                &pts,
                &Tolerance::default(),
            )
            .unwrap()
            .value
        };
        assert!((a - simple).abs() < 1e-6, "{a} vs {simple}");
    }

    #[test]
    fn vacuous_threshold_gives_overlap_mass() {
        let cfg = ScenarioConfig {
            gamma_db: f64::NEG_INFINITY,
            ..base()
        };
        let delta = 0.3;
        let mass = OverlapContactLaw::new(contact_config(&cfg, delta).unwrap(), ContactPdfVariant::Geometric)
            .unwrap()
            .mass()
            .unwrap();
        let a = tsr_coverage_at(&cfg, delta, AnalyticForm::RelayConditioned).unwrap();
        let p = tsr_coverage_at(&cfg, delta, AnalyticForm::Product).unwrap();
        assert!((a - mass).abs() < 1e-6);
        assert!((p - mass * mass).abs() < 1e-6);
    }

    #[test]
    fn disjoint_caps_give_zero() {
        let cfg = base();
        assert_eq!(tsr_coverage_at(&cfg, cfg.theta_m * 1.01, AnalyticForm::Product).unwrap(), 0.0);
        assert_eq!(tsr_coverage_at(&cfg, cfg.theta_m * 1.01, AnalyticForm::RelayConditioned).unwrap(), 0.0);
    }
}
