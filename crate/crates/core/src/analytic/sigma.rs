//! Auxiliary terms σ1–σ18 of the published overlap contact density and a
//! term-by-term evaluation of that density.
//!
//! σ17 is the law-of-cosines value `(R² + Re² − D²)/(2·R·Re)`, i.e. the cosine
//! of the transmitter–satellite central angle. Wherever the closed form takes
//! `cos(σ17)` or `sin(σ17)`, this module uses that cosine and the matching
//! sine. σ16 takes `d` as the chord between the two gateways.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{domain, Error, Result};
use crate::quadrature::{try_integrate, Integral, Tolerance};

use super::contact::ContactLawConfig;

/// The scalar σ-terms at one distance `D`, plus the inputs needed for the
/// three that depend on the integration variable `l` (σ4, σ6, σ10).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaSet {
    pub d_km: f64,
    pub orbit_radius: f64,
    pub earth_radius: f64,
    pub sigma_1: f64,
    pub sigma_2: f64,
    pub sigma_3: f64,
    pub sigma_5: f64,
    pub sigma_7: f64,
    pub sigma_8: f64,
    pub sigma_9: f64,
    pub sigma_11: f64,
    pub sigma_12: f64,
    pub sigma_13: f64,
    pub sigma_14: f64,
    pub sigma_15: f64,
    pub sigma_16: f64,
    pub sigma_17: f64,
    pub sigma_18: f64,
    /// `sin(σ17)` under the cosine reading of σ17.
    pub sin_17: f64,
    /// `cos(θ_m,2 / 2)`.
    pub c2: f64,
}

impl SigmaSet {
    pub fn cos_17(&self) -> f64 {
        self.sigma_17
    }

    /// Upper limit `R·sin(σ17)` of the second pair of integrals.
    pub fn upper_limit(&self) -> f64 {
        self.orbit_radius * self.sin_17
    }

    pub fn sigma_10(&self, l: f64) -> f64 {
        (self.sigma_13 - l * l).sqrt()
    }

    pub fn sigma_6(&self, l: f64) -> f64 {
        let r = self.orbit_radius;
        2.0 * r * (self.sigma_10(l) / r).asin()
    }

    pub fn sigma_4(&self, l: f64) -> f64 {
        let (r, re, d) = (self.orbit_radius, self.earth_radius, self.d_km);
        let s10 = self.sigma_10(l);
        -2.0 * d * r * self.cos_17() * self.sin_17 / (re * (1.0 - (self.sigma_13 - l * l) / (r * r)).sqrt() * s10)
    }

    /// Values in index order, `None` for the `l`-dependent terms.
    pub fn scalars(&self) -> [(u8, Option<f64>); 18] {
        [
            (1, Some(self.sigma_1)),
            (2, Some(self.sigma_2)),
            (3, Some(self.sigma_3)),
            (4, None),
            (5, Some(self.sigma_5)),
            (6, None),
            (7, Some(self.sigma_7)),
            (8, Some(self.sigma_8)),
            (9, Some(self.sigma_9)),
            (10, None),
            (11, Some(self.sigma_11)),
            (12, Some(self.sigma_12)),
            (13, Some(self.sigma_13)),
            (14, Some(self.sigma_14)),
            (15, Some(self.sigma_15)),
            (16, Some(self.sigma_16)),
            (17, Some(self.sigma_17)),
            (18, Some(self.sigma_18)),
        ]
    }
}

pub fn sigma_terms(d: f64, cfg: &ContactLawConfig) -> Result<SigmaSet> {
    cfg.validate()?;
    let (r, re) = (cfg.orbit_radius(), cfg.earth_radius);
    if !(d > 0.0 && d.is_finite()) {
        return Err(domain(format!("distance must be positive, got {d}")));
    }
    let singular = |index: u8, detail: &'static str| Error::Singularity {
        index,
        d_km: d,
        detail,
    };

    let half2 = cfg.theta_m2 / 2.0;
    let (s2, c2) = half2.sin_cos();
    let cs = (-d * d + r * r + re * re) / (2.0 * r * re);
    if !(-1.0..=1.0).contains(&cs) {
        return Err(singular(17, "law-of-cosines value outside [-1, 1]"));
    }
    let sn = (1.0 - cs * cs).sqrt();

    let sigma_1 = r * s2;
    let sigma_2 = 4.0 * PI * r * r;
    let ratio = cfg.ground_separation / (2.0 * re);
    if ratio > 1.0 {
        return Err(singular(16, "ground separation exceeds the Earth's diameter"));
    }
    let sigma_16 = ratio.asin();
    let sigma_18 = c2 * c2;
    let radicand_15 = sigma_18 + 2.0 * c2 * sigma_16 * sigma_16 * cs - 2.0 * c2 * cs + cs * cs;
    if radicand_15 < 0.0 {
        return Err(singular(15, "negative radicand"));
    }
    let sigma_15 = radicand_15.sqrt();
    let sigma_14 = 2.0 * sigma_16 * cs - SQRT_2 * sigma_15;
    let sigma_13 = r * r * sn * sn;
    let sigma_12 = 2.0 * c2 * sigma_16 - SQRT_2 * sigma_15;
    if cs.abs() < 1e-12 {
        return Err(singular(7, "cos(σ17) vanishes"));
    }
    let sigma_11 = (c2 - sigma_14 / cs).tan();
    let sigma_9 = (c2 + sigma_12 / cs).tan();
    let sigma_7 = r * re * cs * cs;
    let sigma_8 = -r * sigma_11 * cs;
    let sigma_5 = -r * sigma_9 * c2;
    let k = 2.0 * d * sn / (r * re);
    let sigma_3 = SQRT_2 * (k * cs - k * c2 + k * c2 * sigma_16 * sigma_16);

    let set = SigmaSet {
        d_km: d,
        orbit_radius: r,
        earth_radius: re,
        sigma_1,
        sigma_2,
        sigma_3,
        sigma_5,
        sigma_7,
        sigma_8,
        sigma_9,
        sigma_11,
        sigma_12,
        sigma_13,
        sigma_14,
        sigma_15,
        sigma_16,
        sigma_17: cs,
        sigma_18,
        sin_17: sn,
        c2,
    };
    if let Some((index, _)) = set.scalars().iter().find(|(_, v)| v.is_some_and(|v| !v.is_finite())) {
        return Err(singular(*index, "not finite"));
    }
    Ok(set)
}

/// Pieces of the closed form at one distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiteralTerms {
    /// `∫σ6 over [σ5, σ1] + ∫σ6 over [σ8, R·sin σ17]`: the area term.
    pub area: f64,
    /// The bracketed factor multiplying the power term.
    pub bracket: f64,
    pub integral_4: f64,
    pub term_11: f64,
    pub term_9: f64,
    pub density: f64,
}

fn l_integral<F: FnMut(f64) -> f64>(s: &SigmaSet, mut f: F, a: f64, b: f64) -> Result<Integral> {
    let lim = s.upper_limit();
    let slack = 1e-9 * lim.max(1.0);
    if a.abs() > lim + slack || b.abs() > lim + slack {
        return Err(Error::Singularity {
            index: 10,
            d_km: s.d_km,
            detail: "integration limit beyond R·sin(σ17) makes the square root imaginary",
        });
    }
    let tol = Tolerance {
        absolute: 1e-8,
        relative: 1e-6,
        max_intervals: 2000,
    };
    try_integrate(|l| Ok(f(l.clamp(-lim, lim))), a, b, &tol)
}

pub fn literal_terms(d: f64, cfg: &ContactLawConfig) -> Result<LiteralTerms> {
    let s = sigma_terms(d, cfg)?;
    let (r, re) = (s.orbit_radius, s.earth_radius);
    let (cs, sn) = (s.cos_17(), s.sin_17);
    let upper = s.upper_limit();

    let area = l_integral(&s, |l| s.sigma_6(l), s.sigma_5, s.sigma_1)?.value
        + l_integral(&s, |l| s.sigma_6(l), s.sigma_8, upper)?.value;
    let integral_4 = l_integral(&s, |l| s.sigma_4(l), s.sigma_5, s.sigma_1)?.value
        + l_integral(&s, |l| s.sigma_4(l), s.sigma_8, upper)?.value;

    let rad_11 = s.sigma_13 - r * r * s.sigma_11 * s.sigma_11 * cs * cs;
    if rad_11 < 0.0 {
        return Err(Error::Singularity {
            index: 11,
            d_km: d,
            detail: "negative radicand in the σ11 boundary term",
        });
    }
    let rad_9 = s.sigma_13 - r * r * s.sigma_9 * s.sigma_9 * s.sigma_18;
    if rad_9 < 0.0 {
        return Err(Error::Singularity {
            index: 9,
            d_km: d,
            detail: "negative radicand in the σ9 boundary term",
        });
    }
    let term_11 = 2.0
        * r
        * (rad_11.sqrt() / r).asin()
        * (d * s.sigma_11 * sn / re
            + r * cs
                * ((s.sigma_3 / (2.0 * s.sigma_15) - 2.0 * d * s.sigma_16 * sn / (r * re)) / cs
                    + d * sn * s.sigma_14 / s.sigma_7)
                * (s.sigma_11 * s.sigma_11 + 1.0));
    let term_9 = 2.0
        * r
        * r
        * s.c2
        * (rad_9.sqrt() / r).asin()
        * (s.sigma_9 * s.sigma_9 + 1.0)
        * (s.sigma_3 / (2.0 * cs * s.sigma_15) + d * sn * s.sigma_12 / s.sigma_7);
    // Final term of the bracket: 2·D·R·asin(0)·cos(σ17)/Re.
    let term_zero = 2.0 * d * r * 0f64.asin() * cs / re;
    let bracket = integral_4 + term_11 - term_9 - term_zero;

    let n = cfg.ns as f64;
    let empty = 1.0 - area / s.sigma_2;
    let density = n / s.sigma_2 * empty.powf(n - 1.0) * bracket;
    if !density.is_finite() {
        return Err(Error::Singularity {
            index: 2,
            d_km: d,
            detail: "density is not finite",
        });
    }
    Ok(LiteralTerms {
        area,
        bracket,
        integral_4,
        term_11,
        term_9,
        density,
    })
}

/// The closed-form density as written, before clamping negative values.
pub fn literal_density(d: f64, cfg: &ContactLawConfig) -> Result<f64> {
    literal_terms(d, cfg).map(|t| t.density)
}
