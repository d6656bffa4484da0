//! Single Monte Carlo trials.
//!
//! Every random quantity of trial `i` is drawn from its own stream derived
//! from `(seed, i)` and a fixed tag, so outcomes do not depend on worker
//! count or scheduling.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::channel::{fit_inverse_cdf_with, link_snr, ExactSrSampler, FadingSampler, FitOptions, InverseCdfFit};
use crate::config::{FadingModel, Mode, ScenarioConfig};
use crate::error::{invalid, Result};
use crate::geometry::{offset_direction, SphericalCap, SurfacePoint, EARTH_RADIUS_KM};
use crate::point_process::{
    sample_neighbour_separation, sample_outside_cap, sample_uniform_sphere, CapOrderedSampler, NeighborIndex,
};
use crate::rng::RngStream;

use super::routing::greedy_route_in;
use super::types::{FailureReason, TrialOutcome};

const GEOMETRY: u64 = 1;
const SATS_IN_CAP: u64 = 2;
const SATS_OUTSIDE: u64 = 3;
const FADING_UP: u64 = 4;
const FADING_DOWN: u64 = 5;
const FADING_SS: u64 = 6;

/// Scenario with everything that is shared across trials computed once.
#[derive(Clone, Debug)]
pub struct PreparedScenario {
    pub config: ScenarioConfig,
    pub uplink_fading: FadingSampler,
    pub downlink_fading: FadingSampler,
    pub ss_fading: FadingSampler,
    orbit_radius: f64,
    half_angle: f64,
}

impl PreparedScenario {
    pub fn new(config: &ScenarioConfig) -> Result<Self> {
        config.validate()?;
        if config.ns > u32::MAX as u64 {
            return Err(invalid(format!("ns must not exceed {}, got {}", u32::MAX, config.ns)));
        }
        let channel = &config.channel;
        let up_params = channel.sr;
        let down_params = channel.downlink_sr();
        let (uplink_fading, downlink_fading) = match config.fading_model {
            FadingModel::Polynomial => {
                let up = fit(&up_params)?;
                let down = if down_params == up_params { up.clone() } else { fit(&down_params)? };
                (FadingSampler::Polynomial(up), FadingSampler::Polynomial(down))
            }
            FadingModel::Exact => (
                FadingSampler::Exact(ExactSrSampler::new(&up_params)?),
                FadingSampler::Exact(ExactSrSampler::new(&down_params)?),
            ),
        };
        let ss_fading = if config.ss_fading { uplink_fading.clone() } else { FadingSampler::Unit };
        Ok(Self {
            config: config.clone(),
            uplink_fading,
            downlink_fading,
            ss_fading,
            orbit_radius: config.orbit_radius(),
            half_angle: config.cap_half_angle(),
        })
    }

    pub fn orbit_radius(&self) -> f64 {
        self.orbit_radius
    }

    fn stream(&self, trial: u64) -> RngStream {
        RngStream::new(self.config.seed, trial)
    }
}

fn fit(params: &crate::channel::SrParams) -> Result<InverseCdfFit> {
    fit_inverse_cdf_with(params, &FitOptions::default())
}

/// Gateway pair of a trial.
fn sample_gateways(scn: &PreparedScenario, stream: &RngStream, conditioned: bool) -> (SurfacePoint, SurfacePoint) {
    let mut rng = stream.substream(GEOMETRY).rng();
    let tx = sample_uniform_sphere(&mut rng, EARTH_RADIUS_KM);
    if !conditioned {
        let rx = sample_uniform_sphere(&mut rng, EARTH_RADIUS_KM);
        return (tx, rx);
    }
    let cfg = &scn.config;
    let delta = match cfg.ground_separation {
        Some(d) => 2.0 * (d / (2.0 * EARTH_RADIUS_KM)).asin(),
        None => sample_neighbour_separation(&mut rng, cfg.lambda_gw, EARTH_RADIUS_KM, cfg.theta_m),
    };
    let azimuth = rng.random::<f64>() * 2.0 * PI;
    let rx = SurfacePoint::from_unit(offset_direction(tx.direction(), delta, azimuth), EARTH_RADIUS_KM);
    (tx, rx)
}

fn in_cap_count(scn: &PreparedScenario, rng: &mut impl Rng) -> Result<u64> {
    let p = (1.0 - scn.half_angle.cos()) / 2.0;
    Ok(Binomial::new(scn.config.ns, p)
        .map_err(|e| invalid(format!("cannot sample satellite count: {e}")))?
        .sample(rng))
}

/// Satellites inside the transmitter's cap, nearest first. The count is
/// binomial and the points are uniform in the cap, which is the restriction
/// of a uniform constellation to the cap.
fn satellites_in_cap(scn: &PreparedScenario, stream: &RngStream, cap_t: &SphericalCap) -> Result<Vec<SurfacePoint>> {
    let mut rng = stream.substream(SATS_IN_CAP).rng();
    let count = in_cap_count(scn, &mut rng)?;
    Ok(CapOrderedSampler::new(&mut rng, *cap_t, scn.orbit_radius, count).collect())
}

/// Rank and position of the satellite nearest the transmitter that the
/// receiver can also see. Draws the same points as [`satellites_in_cap`]
/// but stops at the first match.
fn first_in_overlap(
    scn: &PreparedScenario,
    stream: &RngStream,
    cap_t: &SphericalCap,
    cap_r: &SphericalCap,
) -> Result<Option<(usize, SurfacePoint)>> {
    let mut rng = stream.substream(SATS_IN_CAP).rng();
    let count = in_cap_count(scn, &mut rng)?;
    Ok(CapOrderedSampler::new(&mut rng, *cap_t, scn.orbit_radius, count)
        .enumerate()
        .find(|(_, s)| cap_r.contains_direction(s.direction())))
}

fn satellites_outside(scn: &PreparedScenario, stream: &RngStream, cap_t: &SphericalCap, inside: usize) -> Vec<SurfacePoint> {
    let mut rng = stream.substream(SATS_OUTSIDE).rng();
    let rest = scn.config.ns as usize - inside;
    (0..rest).map(|_| sample_outside_cap(&mut rng, cap_t, scn.orbit_radius)).collect()
}

fn fading_draw(stream: &RngStream, sampler: &FadingSampler, tag: u64, key: u64) -> f64 {
    if matches!(sampler, FadingSampler::Unit) {
        return 1.0;
    }
    sampler.sample(&mut stream.keyed(tag, key).rng())
}

fn ground_link_snr(scn: &PreparedScenario, distance: f64, fading: f64) -> Result<f64> {
    let ch = &scn.config.channel;
    Ok(link_snr(ch, distance, fading, true, ch.surface_noise_db)?.snr_db)
}

fn space_link_snr(scn: &PreparedScenario, distance: f64, fading: f64) -> Result<f64> {
    let ch = &scn.config.channel;
    Ok(link_snr(ch, distance, fading, false, ch.space_noise_db)?.snr_db)
}

fn finish(per_link_snr_db: Vec<f64>, hop_count: usize, gamma_db: f64) -> TrialOutcome {
    let snr_ok = per_link_snr_db.iter().all(|&s| s >= gamma_db);
    TrialOutcome {
        geometric_ok: true,
        snr_ok,
        per_link_snr_db,
        hop_count,
        failure_reason: if snr_ok { FailureReason::Ok } else { FailureReason::SnrBelowThreshold },
    }
}

/// Direct relay: the satellite in both caps nearest to the transmitter.
pub fn run_tsr_trial(scn: &PreparedScenario, trial: u64) -> Result<TrialOutcome> {
    let conditioned = scn.config.mode == Mode::TsrConditioned;
    let stream = scn.stream(trial);
    let (tx, rx) = sample_gateways(scn, &stream, conditioned);
    let cap_t = SphericalCap::around(&tx, scn.half_angle)?;
    let cap_r = SphericalCap::around(&rx, scn.half_angle)?;
    let relay = first_in_overlap(scn, &stream, &cap_t, &cap_r)?;
    tsr_on(scn, &stream, &tx, &rx, relay)
}

fn tsr_on(
    scn: &PreparedScenario,
    stream: &RngStream,
    tx: &SurfacePoint,
    rx: &SurfacePoint,
    relay: Option<(usize, SurfacePoint)>,
) -> Result<TrialOutcome> {
    let Some((relay, sat)) = relay else {
        return Ok(TrialOutcome::geometric_failure(FailureReason::NoOverlapSatellite));
    };
    let sat = &sat;
    let h_up = fading_draw(stream, &scn.uplink_fading, FADING_UP, relay as u64);
    let h_down = fading_draw(stream, &scn.downlink_fading, FADING_DOWN, relay as u64);
    let up = ground_link_snr(scn, tx.distance_to(sat), h_up)?;
    let down = ground_link_snr(scn, sat.distance_to(rx), h_down)?;
    Ok(finish(vec![up, down], 1, scn.config.gamma_db))
}

/// Routed relay: uplink to the nearest visible satellite, greedy
/// inter-satellite hops toward the receiver, then a downlink from the first
/// satellite the receiver can see.
pub fn run_tssr_trial(scn: &PreparedScenario, trial: u64) -> Result<TrialOutcome> {
    let stream = scn.stream(trial);
    let (tx, rx) = sample_gateways(scn, &stream, false);
    tssr_on(scn, &stream, &tx, &rx)
}

/// Routed relay between two given gateways, with the constellation and
/// fading of trial `trial`.
pub fn run_tssr_between(scn: &PreparedScenario, trial: u64, tx: &SurfacePoint, rx: &SurfacePoint) -> Result<TrialOutcome> {
    tssr_on(scn, &scn.stream(trial), tx, rx)
}

fn tssr_on(scn: &PreparedScenario, stream: &RngStream, tx: &SurfacePoint, rx: &SurfacePoint) -> Result<TrialOutcome> {
    let cfg = &scn.config;
    let cap_t = SphericalCap::around(tx, scn.half_angle)?;
    let cap_r = SphericalCap::around(rx, scn.half_angle)?;
    let mut sats = satellites_in_cap(scn, stream, &cap_t)?;
    // Points come nearest first.
    let first = 0;
    if sats.is_empty() {
        return Ok(TrialOutcome::geometric_failure(FailureReason::NoOverlapSatellite));
    }
    let inside = sats.len();
    sats.extend(satellites_outside(scn, stream, &cap_t, inside));
    let index = NeighborIndex::new(&sats, cfg.d_max);
    let target = rx.direction() * scn.orbit_radius;
    let Some(path) = greedy_route_in(first, &cap_r, &target, &sats, &index, cfg.d_max, cfg.max_hops) else {
        return Ok(TrialOutcome::geometric_failure(FailureReason::NoRoute));
    };
    let mut snr = Vec::with_capacity(path.len() + 1);
    let h_up = fading_draw(stream, &scn.uplink_fading, FADING_UP, first as u64);
    snr.push(ground_link_snr(scn, tx.distance_to(&sats[first]), h_up)?);
    for w in path.windows(2) {
        let key = ((w[0] as u64) << 32) | w[1] as u64;
        let h = fading_draw(stream, &scn.ss_fading, FADING_SS, key);
        snr.push(space_link_snr(scn, sats[w[0]].distance_to(&sats[w[1]]), h)?);
    }
    let last = *path.last().expect("routes are non-empty");
    let h_down = fading_draw(stream, &scn.downlink_fading, FADING_DOWN, last as u64);
    snr.push(ground_link_snr(scn, sats[last].distance_to(rx), h_down)?);
    Ok(finish(snr, path.len(), cfg.gamma_db))
}

/// Direct relay when one succeeds, routed relay otherwise, on the same
/// any-pair geometry and constellation.
pub fn run_combined_trial(scn: &PreparedScenario, trial: u64) -> Result<TrialOutcome> {
    let stream = scn.stream(trial);
    let (tx, rx) = sample_gateways(scn, &stream, false);
    let cap_t = SphericalCap::around(&tx, scn.half_angle)?;
    let cap_r = SphericalCap::around(&rx, scn.half_angle)?;
    let relay = first_in_overlap(scn, &stream, &cap_t, &cap_r)?;
    let direct = tsr_on(scn, &stream, &tx, &rx, relay)?;
    if direct.success() {
        return Ok(direct);
    }
    tssr_on(scn, &stream, &tx, &rx)
}

pub fn run_trial(scn: &PreparedScenario, trial: u64) -> Result<TrialOutcome> {
    match scn.config.mode {
        Mode::TsrConditioned | Mode::TsrAnyPair => run_tsr_trial(scn, trial),
        Mode::TssrAnyPair => run_tssr_trial(scn, trial),
        Mode::Combined => run_combined_trial(scn, trial),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{tsr_coverage, AnalyticForm};
    use crate::simulator::estimate::estimate_coverage_with_workers;

    #[test]
    fn direct_relay_matches_relay_conditioned_integral() {
        for sep in [Some(800.0), Some(1800.0), None] {
            let cfg = ScenarioConfig {
                ns: 5000,
                n_trials: 20_000,
                seed: 31,
                ground_separation: sep,
                fading_model: FadingModel::Exact,
                ..ScenarioConfig::default()
            };
            let mc = estimate_coverage_with_workers(&cfg, 1).unwrap();
            let exact = tsr_coverage(&cfg, AnalyticForm::RelayConditioned).unwrap();
            let z = (mc.p_hat - exact) / mc.standard_error();
            assert!(z.abs() < 4.0, "{sep:?}: {} vs {exact} (z = {z})", mc.p_hat);
        }
    }

    #[test]
    fn antipodal_gateways_need_several_hops() {
        let cfg = ScenarioConfig {
            ns: 10_000,
            mode: Mode::TssrAnyPair,
            ..ScenarioConfig::default()
        };
        let scn = PreparedScenario::new(&cfg).unwrap();
        let tx = SurfacePoint::from_unit(crate::geometry::Vec3::z(), EARTH_RADIUS_KM);
        let rx = SurfacePoint::from_unit(-crate::geometry::Vec3::z(), EARTH_RADIUS_KM);
        let mut routed = 0;
        for t in 0..20 {
            let o = run_tssr_between(&scn, t, &tx, &rx).unwrap();
            if o.geometric_ok {
                routed += 1;
                assert!(o.hop_count > 2);
                assert_eq!(o.per_link_snr_db.len(), o.hop_count + 1);
            }
        }
        assert!(routed >= 19);
    }

    #[test]
    fn combined_contains_direct_successes() {
        let base = ScenarioConfig {
            ns: 1000,
            seed: 5,
            ..ScenarioConfig::default()
        };
        let direct = PreparedScenario::new(&ScenarioConfig { mode: Mode::TsrAnyPair, ..base.clone() }).unwrap();
        let combined = PreparedScenario::new(&ScenarioConfig { mode: Mode::Combined, ..base }).unwrap();
        let mut extra = 0;
        for t in 0..300 {
            let d = run_trial(&direct, t).unwrap();
            let c = run_trial(&combined, t).unwrap();
            if d.success() {
                assert_eq!(d, c);
            }
            if c.success() && !d.success() {
                extra += 1;
            }
        }
        assert!(extra > 0);
    }

    /// The product of the two per-link integrals evaluates the downlink at
    /// the satellite nearest the receiver, not at the relay actually used,
    /// and overstates direct-relay coverage by a wide margin.
    #[test]
    fn product_form_overstates_direct_relay_coverage() {
        let cfg = ScenarioConfig {
            ns: 10_000,
            n_trials: 20_000,
            seed: 32,
            ..ScenarioConfig::default()
        };
        let mc = estimate_coverage_with_workers(&cfg, 1).unwrap();
        let product = tsr_coverage(&cfg, AnalyticForm::Product).unwrap();
        assert!(product - mc.p_hat > 0.15, "product {product} vs simulated {}", mc.p_hat);
    }
}
