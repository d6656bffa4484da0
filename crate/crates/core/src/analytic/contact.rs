//! Contact-distance laws: nearest satellite on the whole sphere and nearest
//! satellite inside the overlap of two visibility caps.

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::geometry::{central_angle, central_angle_cosine, slant_range, EARTH_RADIUS_KM};
use crate::quadrature::{integrate_with_breakpoints, Tolerance};

/// Geometry of a transmitter/receiver pair and the constellation they share.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContactLawConfig {
    pub ns: u64,
    pub ds: f64,
    /// Full lobe angle at the transmitter (radians).
    pub theta_m1: f64,
    /// Full lobe angle at the receiver (radians).
    pub theta_m2: f64,
    /// Straight-line (chord) distance between the two gateways, km.
    pub ground_separation: f64,
    pub earth_radius: f64,
}

impl ContactLawConfig {
    pub fn new(ns: u64, ds: f64, theta_m1: f64, theta_m2: f64, ground_separation: f64) -> Result<Self> {
        let cfg = Self {
            ns,
            ds,
            theta_m1,
            theta_m2,
            ground_separation,
            earth_radius: EARTH_RADIUS_KM,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns < 1 {
            return Err(domain("Ns must be at least 1"));
        }
        if !(self.ds > 0.0 && self.ds.is_finite()) {
            return Err(domain(format!("altitude must be positive, got {}", self.ds)));
        }
        for (name, a) in [("theta_m1", self.theta_m1), ("theta_m2", self.theta_m2)] {
            if !(a > 0.0 && a < PI) {
                return Err(domain(format!("{name} must lie in (0, π), got {a}")));
            }
        }
        if !(self.ground_separation >= 0.0 && self.ground_separation <= 2.0 * self.earth_radius) {
            return Err(domain(format!(
                "ground separation must lie in [0, 2·Re], got {}",
                self.ground_separation
            )));
        }
        Ok(())
    }

    pub fn orbit_radius(&self) -> f64 {
        self.earth_radius + self.ds
    }

    /// Central angle between the two gateways.
    pub fn separation_angle(&self) -> f64 {
        2.0 * (self.ground_separation / (2.0 * self.earth_radius)).min(1.0).asin()
    }

    /// The same pair seen from the receiver.
    pub fn swapped(&self) -> Self {
        Self {
            theta_m1: self.theta_m2,
            theta_m2: self.theta_m1,
            ..*self
        }
    }
}

/// A (possibly defective) law of the distance to the serving satellite.
/// Missing mass is the probability that no satellite qualifies.
pub trait ContactLaw: Sync {
    fn density(&self, d: f64) -> Result<f64>;
    fn support(&self) -> (f64, f64);
    /// Points inside the support where the density has kinks or sharp peaks.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Support endpoints plus interior breakpoints, sorted.
    fn quadrature_points(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        let mut pts = vec![lo, hi];
        pts.extend(self.breakpoints().into_iter().filter(|&p| p > lo && p < hi));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

/// Breakpoints crowding the lower end of `[lo, hi]`, where the density of
/// the nearest of many satellites concentrates.
pub(crate) fn lower_end_breakpoints(lo: f64, hi: f64) -> Vec<f64> {
    (1..=9).map(|k| lo + (hi - lo) * 10f64.powi(-k)).collect()
}

fn check_slant(d: f64, ds: f64, r: f64, re: f64) -> Result<()> {
    if !(d >= ds - 1e-9 && d <= r + re + 1e-9) {
        return Err(domain(format!("distance {d} km outside [{ds}, {}]", r + re)));
    }
    Ok(())
}

/// Probability that no satellite lies within slant range `d` of a ground
/// observer.
pub fn contact_ccdf_simple(d: f64, ns: u64, ds: f64) -> Result<f64> {
    let re = EARTH_RADIUS_KM;
    let r = re + ds;
    check_slant(d, ds, r, re)?;
    let cos_psi = central_angle_cosine(d.clamp(ds, r + re), r, re);
    // Cap fraction (1 − cos ψ)/2 of the orbital sphere.
    Ok(((1.0 + cos_psi) / 2.0).clamp(0.0, 1.0).powf(ns as f64))
}

/// `1 − Π P(D_i ≥ d)` for independent per-satellite distances.
pub fn contact_cdf_product(per_satellite_ccdf: &[f64]) -> Result<f64> {
    if let Some(p) = per_satellite_ccdf.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(1.0 - per_satellite_ccdf.iter().product::<f64>())
}

/// Distance to the nearest of `ns` satellites, without visibility limits.
#[derive(Clone, Copy, Debug)]
pub struct SimpleContactLaw {
    pub ns: u64,
    pub ds: f64,
    pub earth_radius: f64,
}

impl SimpleContactLaw {
    pub fn new(ns: u64, ds: f64) -> Self {
        Self {
            ns,
            ds,
            earth_radius: EARTH_RADIUS_KM,
        }
    }

    pub fn cdf(&self, d: f64) -> Result<f64> {
        Ok(1.0 - contact_ccdf_simple(d, self.ns, self.ds)?)
    }
}

impl ContactLaw for SimpleContactLaw {
    fn density(&self, d: f64) -> Result<f64> {
        let re = self.earth_radius;
        let r = re + self.ds;
        check_slant(d, self.ds, r, re)?;
        let cos_psi = central_angle_cosine(d, r, re);
        let n = self.ns as f64;
        let base = ((1.0 + cos_psi) / 2.0).clamp(0.0, 1.0);
        Ok(n * base.powf(n - 1.0) * d / (2.0 * r * re))
    }

    fn support(&self) -> (f64, f64) {
        (self.ds, 2.0 * self.earth_radius + self.ds)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        lower_end_breakpoints(lo, hi)
    }
}

/// Which form of the overlap contact density to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ContactPdfVariant {
    /// Term-by-term evaluation of the published closed form.
    Literal,
    /// Exact density from the spherical geometry of the two caps.
    Geometric,
}

/// Angular layout of the overlap between the transmitter cap (half-angle
/// `beta1`) and the receiver cap (half-angle `beta2`), centers `delta` apart,
/// on the orbital sphere.
#[derive(Clone, Copy, Debug)]
pub struct OverlapGeometry {
    pub r: f64,
    pub re: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub delta: f64,
}

impl OverlapGeometry {
    pub fn from_config(cfg: &ContactLawConfig) -> Self {
        Self {
            r: cfg.orbit_radius(),
            re: cfg.earth_radius,
            beta1: cfg.theta_m1 / 2.0,
            beta2: cfg.theta_m2 / 2.0,
            delta: cfg.separation_angle(),
        }
    }

    /// Angular measure of the circle at angle `t` from the transmitter axis
    /// that lies inside the receiver cap.
    pub fn arc_inside(&self, t: f64) -> f64 {
        let (st, ct) = t.sin_cos();
        let (sd, cd) = self.delta.sin_cos();
        if st * sd <= 0.0 {
            let angle = if self.delta == 0.0 { t } else { self.delta };
            return if angle <= self.beta2 { 2.0 * PI } else { 0.0 };
        }
        let c = (self.beta2.cos() - ct * cd) / (st * sd);
        if c <= -1.0 {
            2.0 * PI
        } else if c >= 1.0 {
            0.0
        } else {
            2.0 * c.acos()
        }
    }

    /// Range of angles from the transmitter axis that meet the overlap.
    pub fn angle_support(&self) -> Option<(f64, f64)> {
        let lo = (self.delta - self.beta2).max(0.0);
        let hi = self.beta1.min(self.delta + self.beta2);
        (lo < hi).then_some((lo, hi))
    }

    /// Area (km²) of the part of the overlap within angle `psi` of the
    /// transmitter axis.
    pub fn area_within(&self, psi: f64) -> Result<f64> {
        let Some((lo, hi)) = self.angle_support() else {
            return Ok(0.0);
        };
        let top = psi.min(hi);
        if top <= lo {
            return Ok(0.0);
        }
        let mut pts = vec![lo, top];
        for b in [(self.delta - self.beta2).abs(), self.delta + self.beta2] {
            if b > lo && b < top {
                pts.push(b);
            }
        }
        pts.sort_by(f64::total_cmp);
        let tol = Tolerance {
            absolute: 1e-15,
            relative: 1e-12,
            max_intervals: 4000,
        };
        let v = integrate_with_breakpoints(|t| t.sin() * self.arc_inside(t), &pts, &tol)?;
        Ok(self.r * self.r * v.value)
    }

    pub fn overlap_area(&self) -> Result<f64> {
        self.area_within(PI)
    }

    pub fn distance_at(&self, psi: f64) -> f64 {
        slant_range(psi, self.r, self.re).expect("valid radii")
    }
}

/// Distance from the transmitter to the nearest satellite inside the overlap
/// of the two caps. The law is defective: its mass is the probability that
/// at least one satellite lies in the overlap.
#[derive(Clone, Debug)]
pub struct OverlapContactLaw {
    pub config: ContactLawConfig,
    pub variant: ContactPdfVariant,
    geometry: OverlapGeometry,
    support: (f64, f64),
}

impl OverlapContactLaw {
    pub fn new(config: ContactLawConfig, variant: ContactPdfVariant) -> Result<Self> {
        config.validate()?;
        let geometry = OverlapGeometry::from_config(&config);
        let support = match geometry.angle_support() {
            Some((lo, hi)) => (geometry.distance_at(lo), geometry.distance_at(hi)),
            None => (config.ds, config.ds),
        };
        Ok(Self {
            config,
            variant,
            geometry,
            support,
        })
    }

    pub fn geometry(&self) -> &OverlapGeometry {
        &self.geometry
    }

    fn empty_fraction(&self, area: f64) -> f64 {
        let sigma2 = 4.0 * PI * self.geometry.r * self.geometry.r;
        (1.0 - area / sigma2).clamp(0.0, 1.0)
    }

    /// `P(contact ≤ d)`, including the defect.
    pub fn cdf(&self, d: f64) -> Result<f64> {
        let g = &self.geometry;
        check_slant(d, self.config.ds, g.r, g.re)?;
        let psi = central_angle(d, g.r, g.re)?;
        let a = g.area_within(psi)?;
        Ok(1.0 - self.empty_fraction(a).powf(self.config.ns as f64))
    }

    /// Probability that at least one satellite lies in the overlap.
    pub fn mass(&self) -> Result<f64> {
        let a = self.geometry.overlap_area()?;
        Ok(1.0 - self.empty_fraction(a).powf(self.config.ns as f64))
    }

    pub fn geometric_density(&self, d: f64) -> Result<f64> {
        let g = &self.geometry;
        let (lo, hi) = self.support;
        if !(d >= lo && d <= hi) || lo == hi {
            return Ok(0.0);
        }
        let psi = central_angle(d, g.r, g.re)?;
        if psi > g.beta1 {
            return Ok(0.0);
        }
        let da_dd = g.r / g.re * d * g.arc_inside(psi);
        let a = g.area_within(psi)?;
        let sigma2 = 4.0 * PI * g.r * g.r;
        let n = self.config.ns as f64;
        Ok(n / sigma2 * self.empty_fraction(a).powf(n - 1.0) * da_dd)
    }
}

impl ContactLaw for OverlapContactLaw {
    fn density(&self, d: f64) -> Result<f64> {
        match self.variant {
            ContactPdfVariant::Geometric => self.geometric_density(d),
            ContactPdfVariant::Literal => {
                let (lo, hi) = self.support;
                if !(d > lo && d < hi) {
                    return Ok(0.0);
                }
                super::sigma::literal_density(d, &self.config).map(|v| v.max(0.0))
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support;
        let g = &self.geometry;
        let mut pts = lower_end_breakpoints(lo, hi);
        for psi in [(g.delta - g.beta2).abs(), g.delta + g.beta2, g.beta1] {
            if psi < PI {
                let d = g.distance_at(psi);
                if d > lo && d < hi {
                    pts.push(d);
                }
            }
        }
        pts
    }
}

/// Overlap contact density in its published form.
pub fn contact_pdf_overlap(d: f64, cfg: &ContactLawConfig) -> Result<f64> {
    contact_pdf_overlap_with(d, cfg, ContactPdfVariant::Literal)
}

pub fn contact_pdf_overlap_with(d: f64, cfg: &ContactLawConfig, variant: ContactPdfVariant) -> Result<f64> {
    OverlapContactLaw::new(*cfg, variant)?.density(d)
}
