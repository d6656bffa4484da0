//! Link budget: path loss, gains, rain, shadowed-Rician fading and SNR.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{domain, Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default number of series terms beyond the leading one.
pub const DEFAULT_Z_MAX: usize = 50;

/// Relative size of the last series term above which a truncation warning
/// is raised.
pub const TAIL_WARNING_RATIO: f64 = 1e-10;

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Shadowed-Rician fading parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SrParams {
    /// Average power of the line-of-sight component.
    pub omega: f64,
    /// Half the average power of the scattered component.
    pub b0: f64,
    /// Nakagami shadowing parameter.
    pub m: f64,
}

impl SrParams {
    pub const TABLE_II: SrParams = SrParams {
        omega: 1.29,
        b0: 0.158,
        m: 19.4,
    };

    pub fn new(omega: f64, b0: f64, m: f64) -> Result<Self> {
        let p = Self { omega, b0, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega", self.omega), ("b0", self.b0), ("m", self.m)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(domain(format!("SR parameter {name} must be positive and finite, got {v}")));
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        2.0 * self.b0 + self.omega
    }

    /// `K = 2·b0·m / (2·b0·m + Ω)`; the mixing law is negative binomial with
    /// success probability `K`.
    fn mixing(&self) -> (f64, f64) {
        let denom = 2.0 * self.b0 * self.m + self.omega;
        (2.0 * self.b0 * self.m / denom, self.omega / denom)
    }
}

impl Default for SrParams {
    fn default() -> Self {
        Self::TABLE_II
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesEval {
    pub value: f64,
    pub tail_warning: bool,
}

/// Truncated series for the SR power CDF and density. The power law is a
/// negative-binomial mixture of gamma laws: `X = 2·b0·G`, `G ~ Gamma(z+1, 1)`,
/// with `z` weighted by `K^m (m)_z / z! · w^z`.
#[derive(Clone, Debug)]
pub struct SrSeries {
    params: SrParams,
    weights: Vec<f64>,
}

impl SrSeries {
    pub fn new(params: SrParams, z_max: usize) -> Result<Self> {
        params.validate()?;
        if z_max < 1 {
            return Err(domain("z_max must be at least 1"));
        }
        let (k, w) = params.mixing();
        let base = params.m * k.ln() - ln_gamma(params.m);
        let weights = (0..=z_max)
            .map(|z| {
                let z = z as f64;
                (base + ln_gamma(params.m + z) - ln_gamma(z + 1.0) + z * w.ln()).exp()
            })
            .collect();
        Ok(Self { params, weights })
    }

    pub fn params(&self) -> &SrParams {
        &self.params
    }

    pub fn z_max(&self) -> usize {
        self.weights.len() - 1
    }

    pub fn cdf_checked(&self, x: f64) -> SeriesEval {
        if !(x > 0.0) {
            return SeriesEval {
                value: 0.0,
                tail_warning: false,
            };
        }
        if x == f64::INFINITY {
            return SeriesEval {
                value: self.weights.iter().sum::<f64>().min(1.0),
                tail_warning: false,
            };
        }
        let y = x / (2.0 * self.params.b0);
        let top = self.z_max();
        // Regularized P(a, y) by downward recurrence from a = top + 1:
        // P(a, y) = P(a + 1, y) + y^a e^{-y} / Γ(a + 1).
        let mut p = gamma_lr(top as f64 + 1.0, y);
        let ln_y = y.ln();
        let mut sum = 0.0;
        let mut last = 0.0;
        for a in (0..=top).rev() {
            let term = self.weights[a] * p;
            if a == top {
                last = term;
            }
            sum += term;
            if a > 0 {
                let af = a as f64;
                p += (af * ln_y - y - ln_gamma(af + 1.0)).exp();
                p = p.min(1.0);
            }
        }
        SeriesEval {
            value: sum.clamp(0.0, 1.0),
            tail_warning: sum > 0.0 && last / sum > TAIL_WARNING_RATIO,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.cdf_checked(x).value
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if !(x >= 0.0) || !x.is_finite() {
            return 0.0;
        }
        let scale = 2.0 * self.params.b0;
        let y = x / scale;
        if y == 0.0 {
            return self.weights[0] / scale;
        }
        let ln_y = y.ln();
        self.weights
            .iter()
            .enumerate()
            .map(|(z, w)| {
                let zf = z as f64;
                w * (zf * ln_y - y - ln_gamma(zf + 1.0)).exp()
            })
            .sum::<f64>()
            / scale
    }

    /// Inverse CDF by bracketed bisection, accurate to about 1e-13 relative.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&u) {
            return Err(domain(format!("quantile level must lie in [0, 1), got {u}")));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        if u >= self.cdf(f64::INFINITY) {
            return Err(domain(format!("quantile level {u} exceeds the truncated series mass")));
        }
        let mut hi = self.params.mean();
        while self.cdf(hi) < u {
            hi *= 2.0;
        }
        Ok(bisect(|x| self.cdf(x) - u, 0.0, hi))
    }
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) || hi - lo <= 1e-14 * hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn sr_cdf(x: f64, params: &SrParams, z_max: usize) -> Result<SeriesEval> {
    if !(x >= 0.0) {
        return Err(domain(format!("fading power must be non-negative, got {x}")));
    }
    Ok(SrSeries::new(*params, z_max)?.cdf_checked(x))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub degree: usize,
    pub grid_size: usize,
    pub u_min: f64,
    pub u_max: f64,
    /// Largest accepted relative residual `|q(u) − x| / x` on the fit grid.
    pub tolerance: f64,
    pub z_max: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            degree: 10,
            grid_size: 400,
            u_min: 0.005,
            u_max: 0.995,
            tolerance: 0.1,
            z_max: DEFAULT_Z_MAX,
        }
    }
}

/// Polynomial approximation of the SR inverse CDF on `[u_min, u_max]`.
#[derive(Clone, Debug)]
pub struct InverseCdfFit {
    /// Coefficients in the normalized variable `t ∈ [−1, 1]`, lowest first.
    pub coefficients: Vec<f64>,
    pub u_min: f64,
    pub u_max: f64,
    /// Largest relative residual on the fit grid.
    pub max_residual: f64,
    pub rms_residual: f64,
}

impl InverseCdfFit {
    pub fn evaluate(&self, u: f64) -> f64 {
        let t = (2.0 * u - self.u_min - self.u_max) / (self.u_max - self.u_min);
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

pub fn fit_inverse_cdf(params: &SrParams, degree: usize, grid_size: usize) -> Result<InverseCdfFit> {
    fit_inverse_cdf_with(
        params,
        &FitOptions {
            degree,
            grid_size,
            ..FitOptions::default()
        },
    )
}

pub fn fit_inverse_cdf_with(params: &SrParams, opts: &FitOptions) -> Result<InverseCdfFit> {
    if opts.degree < 1 {
        return Err(domain("polynomial degree must be at least 1"));
    }
    if opts.grid_size < opts.degree + 1 {
        return Err(domain(format!(
            "grid of {} points cannot determine a degree-{} fit",
            opts.grid_size, opts.degree
        )));
    }
    if !(0.0 < opts.u_min && opts.u_min < opts.u_max && opts.u_max < 1.0) {
        return Err(domain(format!(
            "fit domain [{}, {}] must lie strictly inside (0, 1)",
            opts.u_min, opts.u_max
        )));
    }
    let series = SrSeries::new(*params, opts.z_max)?;
    let n = opts.grid_size;
    let ts: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
    let us: Vec<f64> = ts
        .iter()
        .map(|t| 0.5 * (opts.u_min + opts.u_max) + 0.5 * (opts.u_max - opts.u_min) * t)
        .collect();
    let xs = us.iter().map(|&u| series.quantile(u)).collect::<Result<Vec<_>>>()?;
    let cols = opts.degree + 1;
    // Rows are scaled by 1/x so the fit minimizes relative error.
    let design = DMatrix::from_fn(n, cols, |i, j| ts[i].powi(j as i32) / xs[i]);
    let rhs = DVector::from_element(n, 1.0);
    let coefficients = design
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map_err(|e| domain(format!("least-squares solve failed: {e}")))?;
    let fit = InverseCdfFit {
        coefficients: coefficients.iter().copied().collect(),
        u_min: opts.u_min,
        u_max: opts.u_max,
        max_residual: 0.0,
        rms_residual: 0.0,
    };
    let residuals: Vec<f64> = us.iter().zip(&xs).map(|(&u, &x)| (fit.evaluate(u) - x) / x).collect();
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let rms_residual = (residuals.iter().map(|r| r * r).sum::<f64>() / n as f64).sqrt();
    if max_residual > opts.tolerance {
        return Err(Error::FitFailure {
            residual: max_residual,
            tolerance: opts.tolerance,
        });
    }
    Ok(InverseCdfFit {
        max_residual,
        rms_residual,
        ..fit
    })
}

/// Draws `max(q(U), 0)` with `U` uniform on the fit domain.
pub fn sample_sr<R: Rng + ?Sized>(rng: &mut R, fit: &InverseCdfFit) -> f64 {
    let u = rng.random_range(fit.u_min..=fit.u_max);
    fit.evaluate(u).max(0.0)
}

/// Exact SR sampler built on the mixture representation.
#[derive(Clone, Debug)]
pub struct ExactSrSampler {
    scale: f64,
    cumulative: Vec<f64>,
    gammas: Vec<Gamma<f64>>,
}

impl ExactSrSampler {
    pub fn new(params: &SrParams) -> Result<Self> {
        params.validate()?;
        let (k, w) = params.mixing();
        let base = params.m * k.ln() - ln_gamma(params.m);
        let mut cumulative = Vec::new();
        let mut total = 0.0;
        let mut z = 0usize;
        while total < 1.0 - 1e-16 && z < 100_000 {
            let zf = z as f64;
            total += (base + ln_gamma(params.m + zf) - ln_gamma(zf + 1.0) + zf * w.ln()).exp();
            cumulative.push(total);
            z += 1;
        }
        let gammas = (0..cumulative.len())
            .map(|z| Gamma::new(z as f64 + 1.0, 1.0).map_err(|e| domain(e.to_string())))
            .collect::<Result<_>>()?;
        Ok(Self {
            scale: 2.0 * params.b0,
            cumulative,
            gammas,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let z = self.cumulative.partition_point(|&c| c <= u).min(self.gammas.len() - 1);
        self.scale * self.gammas[z].sample(rng)
    }
}

/// Fading source used by the simulator.
#[derive(Clone, Debug)]
pub enum FadingSampler {
    Polynomial(InverseCdfFit),
    Exact(ExactSrSampler),
    /// No small-scale fading: every draw is 1.
    Unit,
}

impl FadingSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Polynomial(fit) => sample_sr(rng, fit),
            Self::Exact(s) => s.sample(rng),
            Self::Unit => 1.0,
        }
    }
}

/// Path loss in dB for a distance in km.
pub fn path_loss_db(distance_km: f64, freq_hz: f64, alpha: f64) -> Result<f64> {
    if !(distance_km > 0.0 && distance_km.is_finite()) {
        return Err(domain(format!("distance must be positive, got {distance_km}")));
    }
    if !(freq_hz > 0.0 && freq_hz.is_finite()) {
        return Err(domain(format!("frequency must be positive, got {freq_hz}")));
    }
    let d_m = distance_km * 1000.0;
    Ok(10.0 * alpha * d_m.log10() + 20.0 * freq_hz.log10() + 20.0 * (4.0 * PI / SPEED_OF_LIGHT).log10())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelParams {
    /// Fading on the transmitter-to-satellite link.
    pub sr: SrParams,
    /// Fading on the satellite-to-receiver link; the uplink law when absent.
    pub sr_downlink: Option<SrParams>,
    pub rain_attenuation_db: f64,
    pub gw_antenna_gain_db: f64,
    pub sat_antenna_gain_db: f64,
    pub surface_noise_db: f64,
    pub space_noise_db: f64,
    pub carrier_freq_hz: f64,
    pub path_loss_exponent: f64,
    pub tx_power_db: f64,
}

impl ChannelParams {
    pub const DEFAULT_TX_POWER_DB: f64 = -60.5;

    pub fn table_ii() -> Self {
        Self {
            sr: SrParams::TABLE_II,
            sr_downlink: None,
            rain_attenuation_db: -2.0,
            gw_antenna_gain_db: 80.0,
            sat_antenna_gain_db: 60.0,
            surface_noise_db: -80.0,
            space_noise_db: -100.0,
            carrier_freq_hz: 300e6,
            path_loss_exponent: 2.0,
            tx_power_db: Self::DEFAULT_TX_POWER_DB,
        }
    }

    pub fn downlink_sr(&self) -> SrParams {
        self.sr_downlink.unwrap_or(self.sr)
    }

    pub fn validate(&self) -> Result<()> {
        self.sr.validate()?;
        if let Some(sr) = &self.sr_downlink {
            sr.validate()?;
        }
        if !(2.0..=4.0).contains(&self.path_loss_exponent) {
            return Err(crate::error::invalid(format!(
                "path_loss_exponent must lie in [2, 4], got {}",
                self.path_loss_exponent
            )));
        }
        if !(self.carrier_freq_hz > 0.0 && self.carrier_freq_hz.is_finite()) {
            return Err(crate::error::invalid(format!(
                "carrier_freq_hz must be positive, got {}",
                self.carrier_freq_hz
            )));
        }
        for (name, v) in [
            ("rain_attenuation_db", self.rain_attenuation_db),
            ("gw_antenna_gain_db", self.gw_antenna_gain_db),
            ("sat_antenna_gain_db", self.sat_antenna_gain_db),
            ("surface_noise_db", self.surface_noise_db),
            ("space_noise_db", self.space_noise_db),
            ("tx_power_db", self.tx_power_db),
        ] {
            if !v.is_finite() {
                return Err(crate::error::invalid(format!("{name} must be finite, got {v}")));
            }
        }
        Ok(())
    }

    fn fixed_gain_db(&self, rain_active: bool) -> f64 {
        let rain = if rain_active { self.rain_attenuation_db } else { 0.0 };
        self.tx_power_db + self.gw_antenna_gain_db + self.sat_antenna_gain_db + rain
    }

    /// Smallest fading power meeting `gamma_db` at `distance_km`.
    pub fn fading_threshold(&self, distance_km: f64, gamma_db: f64, rain_active: bool, noise_db: f64) -> Result<f64> {
        let pl = path_loss_db(distance_km, self.carrier_freq_hz, self.path_loss_exponent)?;
        Ok(to_linear(gamma_db + noise_db + pl - self.fixed_gain_db(rain_active)))
    }

    /// Constant `c` with `SNR ≥ γ ⇔ h ≥ c·D^α` for `D` in km.
    pub fn threshold_constant(&self, gamma_db: f64, rain_active: bool, noise_db: f64) -> f64 {
        let alpha = self.path_loss_exponent;
        let pl_1km = 30.0 * alpha
            + 20.0 * self.carrier_freq_hz.log10()
            + 20.0 * (4.0 * PI / SPEED_OF_LIGHT).log10();
        to_linear(gamma_db + noise_db + pl_1km - self.fixed_gain_db(rain_active))
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::table_ii()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkBudget {
    pub received_power_db: f64,
    pub noise_db: f64,
    pub snr_db: f64,
    pub fading_draw: f64,
}

pub fn link_snr(
    cfg: &ChannelParams,
    distance_km: f64,
    fading: f64,
    rain_active: bool,
    noise_db: f64,
) -> Result<LinkBudget> {
    if !(fading >= 0.0) {
        return Err(domain(format!("fading power must be non-negative, got {fading}")));
    }
    let pl = path_loss_db(distance_km, cfg.carrier_freq_hz, cfg.path_loss_exponent)?;
    let fade_db = if fading == 0.0 { f64::NEG_INFINITY } else { to_db(fading) };
    let received_power_db = cfg.fixed_gain_db(rain_active) - pl + fade_db;
    Ok(LinkBudget {
        received_power_db,
        noise_db,
        snr_db: received_power_db - noise_db,
        fading_draw: fading,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};
    use crate::rng::RngStream;
    use crate::stats::{ks_statistic, mean_variance};
    use proptest::prelude::*;

    fn series() -> SrSeries {
        SrSeries::new(SrParams::TABLE_II, DEFAULT_Z_MAX).unwrap()
    }

    #[test]
    fn cdf_limits() {
        let s = series();
        assert_eq!(s.cdf(0.0), 0.0);
        assert!((s.cdf(100.0) - 1.0).abs() < 1e-6);
        assert!(!s.cdf_checked(1.6).tail_warning);
    }

    #[test]
    fn recurrence_matches_direct_incomplete_gamma() {
        let s = series();
        let p = SrParams::TABLE_II;
        for &x in &[0.01, 0.3, 1.0, 1.6, 3.0, 8.0] {
            let y = x / (2.0 * p.b0);
            let direct: f64 = s
                .weights
                .iter()
                .enumerate()
                .map(|(z, w)| w * gamma_lr(z as f64 + 1.0, y))
                .sum();
            assert!((s.cdf(x) - direct).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn mean_from_survival_integral() {
        let s = series();
        let mean = integrate(|x| 1.0 - s.cdf(x), 0.0, 40.0, &Tolerance::tight()).unwrap().value;
        assert!((mean - 1.606).abs() < 1e-6, "mean {mean}");
    }

    #[test]
    fn density_integrates_to_cdf() {
        let s = series();
        for &x in &[0.5, 1.2, 2.5] {
            let i = integrate(|t| s.pdf(t), 0.0, x, &Tolerance::tight()).unwrap().value;
            assert!((i - s.cdf(x)).abs() < 1e-9);
        }
    }

    #[test]
    fn fewer_terms_raise_the_tail_warning() {
        let short = SrSeries::new(SrParams::TABLE_II, 2).unwrap();
        assert!(short.cdf_checked(3.0).tail_warning);
        assert!(sr_cdf(-1.0, &SrParams::TABLE_II, 50).is_err());
        assert!(SrSeries::new(SrParams::TABLE_II, 0).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let s = series();
        for &u in &[1e-6, 0.01, 0.5, 0.9, 0.999999] {
            let x = s.quantile(u).unwrap();
            assert!((s.cdf(x) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_round_trip_on_central_mass() {
        let s = series();
        let fit = fit_inverse_cdf(&SrParams::TABLE_II, 10, 400).unwrap();
        let (x_lo, x_hi) = (s.quantile(0.05).unwrap(), s.quantile(0.95).unwrap());
        for i in 0..=200 {
            let x = x_lo + (x_hi - x_lo) * i as f64 / 200.0;
            let back = fit.evaluate(s.cdf(x));
            assert!((back - x).abs() < 0.02 * x, "x = {x}, q(F(x)) = {back}");
        }
    }

    #[test]
    fn fit_is_monotone_on_its_domain() {
        let fit = fit_inverse_cdf(&SrParams::TABLE_II, 10, 400).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for i in 0..10_000 {
            let u = fit.u_min + (fit.u_max - fit.u_min) * i as f64 / 9_999.0;
            let q = fit.evaluate(u);
            assert!(q >= prev, "not monotone at u = {u}");
            prev = q;
        }
    }

    #[test]
    fn linear_fit_on_a_short_segment() {
        let s = series();
        let opts = FitOptions {
            degree: 1,
            grid_size: 50,
            u_min: 0.45,
            u_max: 0.55,
            tolerance: 1.0,
            ..FitOptions::default()
        };
        let fit = fit_inverse_cdf_with(&SrParams::TABLE_II, &opts).unwrap();
        // Chord error bound: (Δu)²/8 · max |q''| with q'' = −f'/f³.
        let (a, b) = (s.quantile(0.45).unwrap(), s.quantile(0.55).unwrap());
        let h = 1e-5;
        let curvature = (0..=20)
            .map(|i| a + (b - a) * i as f64 / 20.0)
            .map(|x| {
                let f = s.pdf(x);
                ((s.pdf(x + h) - s.pdf(x - h)) / (2.0 * h) / f.powi(3)).abs()
            })
            .fold(0.0, f64::max);
        assert!(fit.max_residual <= 0.1f64.powi(2) / 8.0 * curvature * 1.5 / a + 1e-12);
    }

    #[test]
    fn fit_failure_is_reported() {
        let opts = FitOptions {
            degree: 1,
            tolerance: 1e-6,
            ..FitOptions::default()
        };
        assert!(matches!(
            fit_inverse_cdf_with(&SrParams::TABLE_II, &opts),
            Err(Error::FitFailure { .. })
        ));
        assert!(fit_inverse_cdf(&SrParams::TABLE_II, 10, 5).is_err());
    }

    #[test]
    fn polynomial_sampler_moments_and_ks() {
        let fit = fit_inverse_cdf(&SrParams::TABLE_II, 10, 400).unwrap();
        let mut rng = RngStream::new(21, 0).rng();
        let mut xs: Vec<f64> = (0..200_000).map(|_| sample_sr(&mut rng, &fit)).collect();
        assert!(xs.iter().all(|&x| x >= 0.0));
        let (m, _) = mean_variance(xs.iter().copied());
        assert!((m / 1.606 - 1.0).abs() < 0.02);
        xs.sort_by(f64::total_cmp);
        let s = series();
        assert!(ks_statistic(&xs, |x| s.cdf(x)) < 0.01);
    }

    #[test]
    fn exact_sampler_matches_series() {
        let sampler = ExactSrSampler::new(&SrParams::TABLE_II).unwrap();
        let mut rng = RngStream::new(22, 0).rng();
        let n = 200_000;
        let mut xs: Vec<f64> = (0..n).map(|_| sampler.sample(&mut rng)).collect();
        let (m, v) = mean_variance(xs.iter().copied());
        assert!((m - 1.606).abs() < 4.0 * (v / n as f64).sqrt());
        xs.sort_by(f64::total_cmp);
        let s = series();
        // 99.9% critical value of the KS statistic is about 1.95/√n.
        assert!(ks_statistic(&xs, |x| s.cdf(x)) < 1.95 / (n as f64).sqrt());
    }

    #[test]
    fn free_space_reference_values() {
        // FSPL = 20·log10(4π·d·f/c) evaluated at d = 1 m.
        let fspl_1m = 20.0 * (4.0 * PI * 1.0 * 300e6 / SPEED_OF_LIGHT).log10();
        let pl = path_loss_db(1e-3, 300e6, 2.0).unwrap();
        assert!((pl - fspl_1m).abs() < 1e-9);
        assert!((pl - 22.0).abs() < 0.1);
        let d2 = path_loss_db(2.0, 300e6, 2.0).unwrap() - path_loss_db(1.0, 300e6, 2.0).unwrap();
        assert!((d2 - 6.0206).abs() < 1e-3);
        let d4 = path_loss_db(2.0, 300e6, 4.0).unwrap() - path_loss_db(1.0, 300e6, 4.0).unwrap();
        assert!((d4 - 12.0412).abs() < 1e-3);
        assert!(path_loss_db(0.0, 300e6, 2.0).is_err());
        assert!(path_loss_db(1.0, -1.0, 2.0).is_err());
    }

    #[test]
    fn budget_additivity() {
        let cfg = ChannelParams {
            gw_antenna_gain_db: 0.0,
            sat_antenna_gain_db: 0.0,
            tx_power_db: 10.0,
            ..ChannelParams::table_ii()
        };
        let b = link_snr(&cfg, 1000.0, 1.0, false, -50.0).unwrap();
        let pl = path_loss_db(1000.0, 300e6, 2.0).unwrap();
        assert!((b.snr_db - (10.0 - pl + 50.0)).abs() < 1e-12);
        assert_eq!(b.snr_db, b.received_power_db - b.noise_db);
    }

    #[test]
    fn rain_and_noise_offsets() {
        let cfg = ChannelParams::table_ii();
        let dry = link_snr(&cfg, 800.0, 1.3, false, cfg.surface_noise_db).unwrap();
        let wet = link_snr(&cfg, 800.0, 1.3, true, cfg.surface_noise_db).unwrap();
        assert!((dry.snr_db - wet.snr_db - 2.0).abs() < 1e-12);
        let ss = link_snr(&cfg, 800.0, 1.3, false, cfg.space_noise_db).unwrap();
        assert!((ss.snr_db - wet.snr_db - 22.0).abs() < 1e-12);
        let deep = link_snr(&cfg, 800.0, 0.0, true, cfg.surface_noise_db).unwrap();
        assert_eq!(deep.snr_db, f64::NEG_INFINITY);
    }

    #[test]
    fn threshold_constant_is_consistent_with_snr() {
        let cfg = ChannelParams::table_ii();
        let c = cfg.threshold_constant(12.0, true, cfg.surface_noise_db);
        for &d in &[600.0, 1500.0, 3000.0] {
            let h = c * f64::powf(d, cfg.path_loss_exponent);
            let b = link_snr(&cfg, d, h, true, cfg.surface_noise_db).unwrap();
            assert!((b.snr_db - 12.0).abs() < 1e-9);
            let t = cfg.fading_threshold(d, 12.0, true, cfg.surface_noise_db).unwrap();
            assert!((t / h - 1.0).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn cdf_is_monotone_and_bounded(omega in 0.1f64..5.0, b0 in 0.02f64..1.0, m in 0.5f64..30.0) {
            let s = SrSeries::new(SrParams::new(omega, b0, m).unwrap(), 50).unwrap();
            let top = 10.0 * (2.0 * b0 + omega);
            let mut prev = 0.0;
            for i in 0..=400 {
                let v = s.cdf(top * i as f64 / 400.0);
                prop_assert!((0.0..=1.0).contains(&v));
                prop_assert!(v >= prev - 1e-14);
                prev = v;
            }
        }

        #[test]
        fn more_terms_never_decrease_cdf(x in 0.0f64..10.0, z in 1usize..60) {
            let a = SrSeries::new(SrParams::TABLE_II, z).unwrap().cdf(x);
            let b = SrSeries::new(SrParams::TABLE_II, z + 1).unwrap().cdf(x);
            prop_assert!(b >= a - 1e-13);
        }

        #[test]
        fn snr_monotone(d in 100.0f64..5000.0, h in 0.01f64..10.0) {
            let cfg = ChannelParams::table_ii();
            let base = link_snr(&cfg, d, h, true, -80.0).unwrap().snr_db;
            prop_assert!(link_snr(&cfg, d * 1.1, h, true, -80.0).unwrap().snr_db < base);
            prop_assert!(link_snr(&cfg, d, h * 1.1, true, -80.0).unwrap().snr_db > base);
        }

        #[test]
        fn db_round_trip(x in -200.0f64..200.0) {
            prop_assert!((to_db(to_linear(x)) - x).abs() < 1e-12);
        }
    }
}
