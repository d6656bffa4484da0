//! Satellite (binomial) and gateway (Poisson) point processes.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{domain, Result};
use crate::geometry::{offset_direction, SphericalCap, SurfacePoint, Vec3, EARTH_RADIUS_KM};

#[derive(Clone, Debug)]
pub struct Constellation {
    pub satellites: Vec<SurfacePoint>,
    pub altitude_km: f64,
}

impl Constellation {
    pub fn radius(&self) -> f64 {
        EARTH_RADIUS_KM + self.altitude_km
    }

    pub fn len(&self) -> usize {
        self.satellites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.satellites.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct GatewayField {
    pub gateways: Vec<SurfacePoint>,
    pub density: f64,
}

/// Inverse-CDF map from two uniforms to a point on the sphere:
/// azimuth `2π·u1`, polar angle `acos(1 − 2·u2)`.
pub fn point_from_uniforms(u1: f64, u2: f64, radius: f64) -> SurfacePoint {
    let azimuth = 2.0 * PI * u1;
    let cos_polar = 1.0 - 2.0 * u2;
    SurfacePoint::from_spherical(cos_polar.clamp(-1.0, 1.0).acos(), azimuth, radius)
}

pub fn sample_uniform_sphere<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> SurfacePoint {
    point_from_uniforms(rng.random(), rng.random(), radius)
}

/// Uniform point inside `cap` (cosine of the offset angle is uniform).
pub fn sample_in_cap<R: Rng + ?Sized>(rng: &mut R, cap: &SphericalCap, radius: f64) -> SurfacePoint {
    let cos_min = cap.half_angle().cos();
    let c = 1.0 - rng.random::<f64>() * (1.0 - cos_min);
    let azimuth = 2.0 * PI * rng.random::<f64>();
    SurfacePoint::from_unit(offset_direction(cap.center(), c.clamp(-1.0, 1.0).acos(), azimuth), radius)
}

/// Uniform point on the sphere outside `cap`.
pub fn sample_outside_cap<R: Rng + ?Sized>(rng: &mut R, cap: &SphericalCap, radius: f64) -> SurfacePoint {
    let cos_max = cap.half_angle().cos();
    let c = -1.0 + rng.random::<f64>() * (cos_max + 1.0);
    let azimuth = 2.0 * PI * rng.random::<f64>();
    SurfacePoint::from_unit(offset_direction(cap.center(), c.clamp(-1.0, 1.0).acos(), azimuth), radius)
}

/// Uniform points inside a cap, produced in order of increasing angle from
/// the cap center.
///
/// With `v = (1 − cos θ) / (1 − cos β)` the offsets of `count` uniform
/// points are i.i.d. uniform on `[0, 1]`, so the sorted offsets follow from
/// `1 − v₍ⱼ₊₁₎ = (1 − v₍ⱼ₎)·U^{1/(count − j)}`. Consumers that only need the
/// nearest point satisfying some predicate can stop early.
pub struct CapOrderedSampler<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
    cap: SphericalCap,
    radius: f64,
    remaining: u64,
    survival: f64,
    one_minus_cos: f64,
}

impl<'a, R: Rng + ?Sized> CapOrderedSampler<'a, R> {
    pub fn new(rng: &'a mut R, cap: SphericalCap, radius: f64, count: u64) -> Self {
        let one_minus_cos = 1.0 - cap.half_angle().cos();
        Self {
            rng,
            cap,
            radius,
            remaining: count,
            survival: 1.0,
            one_minus_cos,
        }
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }
}

impl<R: Rng + ?Sized> Iterator for CapOrderedSampler<'_, R> {
    type Item = SurfacePoint;

    fn next(&mut self) -> Option<SurfacePoint> {
        if self.remaining == 0 {
            return None;
        }
        let u: f64 = self.rng.random();
        // 1 − u is in (0, 1], so the logarithm is finite.
        self.survival *= ((1.0 - u).ln() / self.remaining as f64).exp();
        self.remaining -= 1;
        let v = 1.0 - self.survival;
        let c = 1.0 - v * self.one_minus_cos;
        let azimuth = 2.0 * PI * self.rng.random::<f64>();
        let dir = offset_direction(self.cap.center(), c.clamp(-1.0, 1.0).acos(), azimuth);
        Some(SurfacePoint::from_unit(dir, self.radius))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.remaining as usize;
        (n, Some(n))
    }
}

pub fn sample_bpp<R: Rng + ?Sized>(rng: &mut R, count: usize, altitude_km: f64) -> Result<Constellation> {
    if !(altitude_km > 0.0) {
        return Err(domain(format!("altitude must be positive, got {altitude_km}")));
    }
    let radius = EARTH_RADIUS_KM + altitude_km;
    let satellites = (0..count).map(|_| sample_uniform_sphere(rng, radius)).collect();
    Ok(Constellation {
        satellites,
        altitude_km,
    })
}

pub fn sample_ppp<R: Rng + ?Sized>(rng: &mut R, density: f64, radius: f64) -> Result<GatewayField> {
    if !(density >= 0.0 && density.is_finite()) {
        return Err(domain(format!("density must be finite and non-negative, got {density}")));
    }
    if !(radius > 0.0) {
        return Err(domain(format!("radius must be positive, got {radius}")));
    }
    let mean = density * 4.0 * PI * radius * radius;
    let count = if mean > 0.0 {
        Poisson::new(mean).map_err(|e| domain(e.to_string()))?.sample(rng) as usize
    } else {
        0
    };
    let gateways = (0..count).map(|_| sample_uniform_sphere(rng, radius)).collect();
    Ok(GatewayField { gateways, density })
}

/// Index of the satellite closest (by chord) to `origin` among those inside
/// both caps. Ties go to the smaller index.
pub fn nearest_in_region(
    origin: &SurfacePoint,
    satellites: &[SurfacePoint],
    first: &SphericalCap,
    second: &SphericalCap,
) -> Option<usize> {
    nearest_matching(origin, satellites, |s| {
        first.contains_direction(s.direction()) && second.contains_direction(s.direction())
    })
}

pub fn nearest_matching<F>(origin: &SurfacePoint, satellites: &[SurfacePoint], mut keep: F) -> Option<usize>
where
    F: FnMut(&SurfacePoint) -> bool,
{
    let o = origin.position();
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in satellites.iter().enumerate() {
        if !keep(s) {
            continue;
        }
        let d2 = (s.position() - o).norm_squared();
        if best.is_none_or(|(_, b)| d2 < b) {
            best = Some((i, d2));
        }
    }
    best.map(|(i, _)| i)
}

/// Central angle from a gateway to its nearest neighbour in a Poisson field of
/// the given density on a sphere of radius `radius`, conditioned on that
/// neighbour lying within `max_angle`.
///
/// Without conditioning `1 − cos δ = E / k` with `E ~ Exp(1)` and
/// `k = 2π·density·radius²`; the truncation is applied by inverse CDF. With
/// zero density the neighbour is placed uniformly in the cap.
pub fn sample_neighbour_separation<R: Rng + ?Sized>(rng: &mut R, density: f64, radius: f64, max_angle: f64) -> f64 {
    let u: f64 = rng.random();
    let span = 1.0 - max_angle.cos();
    let k = 2.0 * PI * density * radius * radius;
    let one_minus_cos = if k > 0.0 {
        // E truncated to [0, k·span]: E = −ln(1 − u·(1 − e^{−k·span})).
        let mass = -(-k * span).exp_m1();
        -(-u * mass).ln_1p() / k
    } else {
        u * span
    };
    (1.0 - one_minus_cos.min(span)).clamp(-1.0, 1.0).acos()
}

/// Uniform grid over 3D positions for fixed-radius neighbour queries.
#[derive(Debug)]
pub struct NeighborIndex {
    cell: f64,
    buckets: HashMap<[i64; 3], Vec<usize>>,
}

impl NeighborIndex {
    pub fn new(points: &[SurfacePoint], cell: f64) -> Self {
        let mut buckets: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(&p.position(), cell)).or_default().push(i);
        }
        Self { cell, buckets }
    }

    fn key(p: &Vec3, cell: f64) -> [i64; 3] {
        [
            (p.x / cell).floor() as i64,
            (p.y / cell).floor() as i64,
            (p.z / cell).floor() as i64,
        ]
    }

    /// Indices of points within `range` (≤ cell size) of `center`, in
    /// ascending order.
    pub fn within(&self, points: &[SurfacePoint], center: &Vec3, range: f64) -> Vec<usize> {
        debug_assert!(range <= self.cell * (1.0 + 1e-12));
        let k = Self::key(center, self.cell);
        let r2 = range * range;
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(bucket) = self.buckets.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                        out.extend(
                            bucket
                                .iter()
                                .copied()
                                .filter(|&j| (points[j].position() - center).norm_squared() <= r2),
                        );
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }
}
