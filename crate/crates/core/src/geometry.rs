//! Spherical trigonometry on concentric spheres: slant ranges, central angles,
//! spherical caps and their overlaps.
//!
//! Angles are radians throughout. Distances are kilometres. Gateways live on the
//! Earth sphere of radius [`EARTH_RADIUS_KM`]; satellites live on an orbital
//! sphere of radius `R = EARTH_RADIUS_KM + altitude`.

use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::error::{domain, Result};

pub type Vec3 = Vector3<f64>;

/// Mean Earth radius.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Slack applied to the closed-cap boundary so that points constructed at
/// exactly the half-angle are not rejected by rounding in `acos`/`atan2`.
const BOUNDARY_SLACK_RAD: f64 = 1e-12;

/// A point on a sphere centred at the Earth's centre.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfacePoint {
    direction: Vec3,
    radius: f64,
}

impl SurfacePoint {
    /// Builds a point from any non-zero direction (normalised here) and a
    /// positive radius.
    pub fn new(direction: Vec3, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(domain(format!("radius must be positive, got {radius}")));
        }
        let norm = direction.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(domain("direction must be a non-zero finite vector"));
        }
        Ok(Self {
            direction: direction / norm,
            radius,
        })
    }

    /// Builds a point from polar angle (from +z) and azimuth (from +x).
    pub fn from_spherical(polar: f64, azimuth: f64, radius: f64) -> Self {
        let (sp, cp) = polar.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Self {
            direction: Vec3::new(sp * ca, sp * sa, cp),
            radius,
        }
    }

    pub fn from_unit(direction: Vec3, radius: f64) -> Self {
        debug_assert!((direction.norm() - 1.0).abs() < 1e-9);
        Self { direction, radius }
    }

    pub fn direction(&self) -> &Vec3 {
        &self.direction
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Cartesian position in kilometres.
    pub fn position(&self) -> Vec3 {
        self.direction * self.radius
    }

    /// The same direction lifted (or lowered) onto another sphere.
    pub fn with_radius(&self, radius: f64) -> Self {
        Self {
            direction: self.direction,
            radius,
        }
    }

    /// Angle subtended at the Earth's centre between two points.
    pub fn central_angle_to(&self, other: &SurfacePoint) -> f64 {
        angle_between(&self.direction, &other.direction)
    }

    /// Straight-line (chord) distance in kilometres.
    pub fn distance_to(&self, other: &SurfacePoint) -> f64 {
        (self.position() - other.position()).norm()
    }
}

/// A closed spherical cap: every direction within `half_angle` of `center`.
///
/// The cap is a set of directions, so the same cap can be applied to the Earth
/// sphere and to an orbital sphere. Boundary points count as inside.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalCap {
    center: Vec3,
    half_angle: f64,
}

impl SphericalCap {
    pub fn new(center: Vec3, half_angle: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&half_angle) {
            return Err(domain(format!(
                "cap half-angle must lie in [0, pi], got {half_angle}"
            )));
        }
        let norm = center.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(domain("cap centre must be a non-zero finite vector"));
        }
        Ok(Self {
            center: center / norm,
            half_angle,
        })
    }

    /// Cap centred on the direction of `point`.
    pub fn around(point: &SurfacePoint, half_angle: f64) -> Result<Self> {
        Self::new(point.direction, half_angle)
    }

    pub fn center(&self) -> &Vec3 {
        &self.center
    }

    pub fn half_angle(&self) -> f64 {
        self.half_angle
    }

    pub fn contains_direction(&self, direction: &Vec3) -> bool {
        angle_between(&self.center, direction) <= self.half_angle + BOUNDARY_SLACK_RAD
    }

    /// Area of the cap on a sphere of the given radius.
    pub fn area(&self, radius: f64) -> f64 {
        2.0 * PI * radius * radius * (1.0 - self.half_angle.cos())
    }
}

/// Angle between two vectors, accurate near 0 and pi.
pub fn angle_between(a: &Vec3, b: &Vec3) -> f64 {
    a.cross(b).norm().atan2(a.dot(b))
}

/// Line-of-sight distance between a ground point and a point on the orbital
/// sphere separated by central angle `theta` (law of cosines).
pub fn slant_range(theta: f64, orbit_radius: f64, earth_radius: f64) -> Result<f64> {
    check_radii(orbit_radius, earth_radius)?;
    if !(0.0..=PI).contains(&theta) {
        return Err(domain(format!("central angle must lie in [0, pi], got {theta}")));
    }
    let (r, re) = (orbit_radius, earth_radius);
    // 4 R Re sin^2(theta/2) avoids cancellation near the zenith.
    let half = (0.5 * theta).sin();
    let d2 = (r - re) * (r - re) + 4.0 * r * re * half * half;
    Ok(d2.sqrt())
}

/// Inverse of [`slant_range`].
pub fn central_angle(distance: f64, orbit_radius: f64, earth_radius: f64) -> Result<f64> {
    check_radii(orbit_radius, earth_radius)?;
    let (r, re) = (orbit_radius, earth_radius);
    let (lo, hi) = (r - re, r + re);
    let tol = 1e-9 * hi;
    if !(distance >= lo - tol && distance <= hi + tol) {
        return Err(domain(format!(
            "slant range {distance} km outside [{lo}, {hi}] km"
        )));
    }
    let d = distance.clamp(lo, hi);
    // sin^2(theta/2) = (D^2 - (R - Re)^2) / (4 R Re), stable at both ends.
    let s2 = ((d - lo) * (d + lo) / (4.0 * r * re)).clamp(0.0, 1.0);
    Ok(2.0 * s2.sqrt().asin())
}

/// Cosine of the central angle for a given slant range.
pub fn central_angle_cosine(distance: f64, orbit_radius: f64, earth_radius: f64) -> f64 {
    let (r, re) = (orbit_radius, earth_radius);
    (r * r + re * re - distance * distance) / (2.0 * r * re)
}

/// Area of a cap of angular radius `half_angle` on a sphere of radius `radius`.
pub fn cap_area(radius: f64, half_angle: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&half_angle) {
        return Err(domain(format!(
            "cap half-angle must lie in [0, pi], got {half_angle}"
        )));
    }
    let s = (0.5 * half_angle).sin();
    Ok(4.0 * PI * radius * radius * s * s)
}

/// Closed-cap membership. The caller guarantees that `p` lies on the sphere the
/// cap is being applied to.
pub fn in_cap(p: &SurfacePoint, cap: &SphericalCap) -> bool {
    cap.contains_direction(&p.direction)
}

/// Membership in the intersection of two caps on the same sphere.
pub fn overlap_region_contains(p: &SurfacePoint, first: &SphericalCap, second: &SphericalCap) -> bool {
    in_cap(p, first) && in_cap(p, second)
}

/// Geodesic distance between two points on the same sphere.
pub fn great_circle_distance(a: &SurfacePoint, b: &SurfacePoint) -> f64 {
    let cos = a.direction.dot(&b.direction).clamp(-1.0, 1.0);
    a.radius * cos.acos()
}

/// Two unit vectors orthogonal to `axis` and to each other.
pub(crate) fn tangent_basis(axis: &Vec3) -> (Vec3, Vec3) {
    let helper = if axis.x.abs() < 0.9 {
        Vec3::x()
    } else {
        Vec3::y()
    };
    let e1 = axis.cross(&helper).normalize();
    let e2 = axis.cross(&e1);
    (e1, e2)
}

/// Direction at angular distance `angle` from `axis`, at azimuth `azimuth`
/// measured in the tangent basis of `axis`.
pub fn offset_direction(axis: &Vec3, angle: f64, azimuth: f64) -> Vec3 {
    let (e1, e2) = tangent_basis(axis);
    let (sa, ca) = angle.sin_cos();
    let (sp, cp) = azimuth.sin_cos();
    (axis * ca + (e1 * cp + e2 * sp) * sa).normalize()
}

fn check_radii(orbit_radius: f64, earth_radius: f64) -> Result<()> {
    if !(earth_radius > 0.0 && orbit_radius > earth_radius) {
        return Err(domain(format!(
            "need R > Re > 0, got R = {orbit_radius}, Re = {earth_radius}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const RE: f64 = EARTH_RADIUS_KM;
    const R: f64 = EARTH_RADIUS_KM + 550.0;

    fn random_direction(rng: &mut impl Rng) -> Vec3 {
        let z: f64 = rng.random_range(-1.0..1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let s = (1.0 - z * z).sqrt();
        Vec3::new(s * phi.cos(), s * phi.sin(), z)
    }

    #[test]
    fn slant_range_endpoints() {
        assert!((slant_range(0.0, R, RE).unwrap() - 550.0).abs() < 1e-9);
        assert!((slant_range(PI, R, RE).unwrap() - 13292.0).abs() < 1e-9);
    }

    #[test]
    fn slant_range_matches_vector_construction() {
        let theta = 0.2;
        let gw = SurfacePoint::from_spherical(0.0, 0.0, RE);
        let sat = SurfacePoint::from_spherical(theta, 1.1, R);
        let direct = (R * R + RE * RE - 2.0 * R * RE * theta.cos()).sqrt();
        let d = slant_range(theta, R, RE).unwrap();
        assert!((d - gw.distance_to(&sat)).abs() < 1e-9);
        assert!((d - direct).abs() < 1e-9);
    }

    #[test]
    fn slant_range_rejects_bad_radii() {
        assert!(slant_range(0.1, RE, RE).is_err());
        assert!(slant_range(0.1, 6000.0, RE).is_err());
        assert!(central_angle(100.0, R, RE).is_err());
        assert!(central_angle(14000.0, R, RE).is_err());
    }

    #[test]
    fn central_angle_endpoints() {
        assert_eq!(central_angle(550.0, R, RE).unwrap(), 0.0);
        assert!((central_angle(R + RE, R, RE).unwrap() - PI).abs() < 1e-12);
    }

    #[test]
    fn central_angle_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x: f64 = rng.random_range(1e-6..PI);
            let back = central_angle(slant_range(x, R, RE).unwrap(), R, RE).unwrap();
            assert!((back - x).abs() <= 1e-9 * x, "{x} -> {back}");
        }
    }

    #[test]
    fn cap_area_examples() {
        assert!((cap_area(R, PI).unwrap() - 4.0 * PI * R * R).abs() < 1e-6);
        assert_eq!(cap_area(R, 0.0).unwrap(), 0.0);
        assert!((cap_area(1.0, PI / 2.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert!(cap_area(1.0, 4.0).is_err());
    }

    #[test]
    fn cap_membership_is_closed() {
        let cap = SphericalCap::new(Vec3::z(), 0.3).unwrap();
        let centre = SurfacePoint::from_spherical(0.0, 0.0, R);
        assert!(in_cap(&centre, &cap));
        for k in 0..32 {
            let edge = SurfacePoint::from_spherical(0.3, k as f64 * 0.2, R);
            assert!(in_cap(&edge, &cap));
        }
        let outside = SurfacePoint::from_spherical(0.3 + 1e-9, 0.0, R);
        assert!(!in_cap(&outside, &cap));
    }

    #[test]
    fn cap_membership_agrees_with_dot_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20_000 {
            let cap = SphericalCap::new(random_direction(&mut rng), rng.random_range(0.0..PI)).unwrap();
            let p = SurfacePoint::new(random_direction(&mut rng), R).unwrap();
            let by_dot = p.direction().dot(cap.center()) >= cap.half_angle().cos();
            let margin = (p.direction().dot(cap.center()) - cap.half_angle().cos()).abs();
            if margin > 1e-10 {
                assert_eq!(in_cap(&p, &cap), by_dot);
            }
        }
    }

    #[test]
    fn disjoint_caps_have_empty_overlap() {
        let a = SphericalCap::new(Vec3::z(), 0.4).unwrap();
        let b = SphericalCap::new(-Vec3::z(), 0.4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let p = SurfacePoint::new(random_direction(&mut rng), R).unwrap();
            assert!(!overlap_region_contains(&p, &a, &b));
        }
    }

    #[test]
    fn overlap_with_itself_is_membership() {
        let a = SphericalCap::new(Vec3::new(1.0, 2.0, 0.5), 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10_000 {
            let p = SurfacePoint::new(random_direction(&mut rng), R).unwrap();
            assert_eq!(overlap_region_contains(&p, &a, &a), in_cap(&p, &a));
        }
    }

    /// Lune area by nested quadrature: the outer integral runs over the polar
    /// angle inside the first cap, the inner azimuthal extent is located by
    /// bisection on the membership predicate.
    fn lune_area_by_quadrature(first: &SphericalCap, second: &SphericalCap, radius: f64) -> f64 {
        // Orient azimuth 0 towards the second cap's centre.
        let toward = (second.center() - first.center() * first.center().dot(second.center()))
            .try_normalize(1e-15)
            .unwrap_or_else(|| tangent_basis(first.center()).0);
        let side = first.center().cross(&toward);
        let inside = |polar: f64, az: f64| {
            let (s, c) = polar.sin_cos();
            let d = first.center() * c + (toward * az.cos() + side * az.sin()) * s;
            second.contains_direction(&d)
        };
        let extent = |polar: f64| -> f64 {
            let near = inside(polar, 0.0);
            let far = inside(polar, PI);
            match (near, far) {
                (true, true) => 2.0 * PI,
                (false, _) => 0.0,
                (true, false) => {
                    let (mut lo, mut hi) = (0.0, PI);
                    for _ in 0..80 {
                        let mid = 0.5 * (lo + hi);
                        if inside(polar, mid) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    2.0 * lo
                }
            }
        };
        let tol = Tolerance {
            absolute: 1e-12,
            relative: 1e-10,
            max_intervals: 4000,
        };
        radius
            * radius
            * integrate(|t| t.sin() * extent(t), 0.0, first.half_angle(), &tol)
                .unwrap()
                .value
    }

    #[test]
    fn overlap_monte_carlo_area_matches_quadrature() {
        let first = SphericalCap::new(Vec3::z(), 0.5).unwrap();
        let second = SphericalCap::new(offset_direction(&Vec3::z(), 0.6, 0.3), 0.45).unwrap();
        let reference = lune_area_by_quadrature(&first, &second, R);

        // Uniform draws inside the first cap; the overlap is the fraction that
        // also lands in the second cap.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = 4_000_000;
        let cos_max = first.half_angle().cos();
        let mut hits = 0u64;
        for _ in 0..n {
            let z = 1.0 - rng.random::<f64>() * (1.0 - cos_max);
            let phi = 2.0 * PI * rng.random::<f64>();
            let s = (1.0 - z * z).sqrt();
            let p = SurfacePoint::new(Vec3::new(s * phi.cos(), s * phi.sin(), z), R).unwrap();
            if overlap_region_contains(&p, &first, &second) {
                hits += 1;
            }
        }
        let estimate = first.area(R) * hits as f64 / n as f64;
        let rel = (estimate - reference).abs() / reference;
        assert!(rel < 1e-3, "mc {estimate} vs quad {reference} (rel {rel})");
    }

    #[test]
    fn great_circle_examples() {
        let a = SurfacePoint::from_spherical(0.4, 0.2, RE);
        assert_eq!(great_circle_distance(&a, &a), 0.0);
        let b = SurfacePoint::new(-a.direction(), RE).unwrap();
        assert!((great_circle_distance(&a, &b) - PI * RE).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn slant_range_is_increasing(a in 0.0..PI, b in 0.0..PI) {
            prop_assume!((a - b).abs() > 1e-9);
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(slant_range(lo, R, RE).unwrap() < slant_range(hi, R, RE).unwrap());
        }

        #[test]
        fn central_angle_inverts_slant_range(theta in 1e-4..PI) {
            let back = central_angle(slant_range(theta, R, RE).unwrap(), R, RE).unwrap();
            prop_assert!((back - theta).abs() <= 1e-9 * theta);
        }

        #[test]
        fn cap_area_is_monotone_and_bounded(a in 0.0..PI, b in 0.0..PI, radius in 1.0..1e4) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let full = cap_area(radius, PI).unwrap();
            prop_assert!(cap_area(radius, lo).unwrap() <= cap_area(radius, hi).unwrap());
            prop_assert!(cap_area(radius, hi).unwrap() <= full * (1.0 + 1e-15));
            prop_assert!((cap_area(radius, PI / 2.0).unwrap() - 0.5 * full).abs() <= 1e-12 * full);
        }

        #[test]
        fn great_circle_is_symmetric_and_triangular(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = SurfacePoint::new(random_direction(&mut rng), RE).unwrap();
            let b = SurfacePoint::new(random_direction(&mut rng), RE).unwrap();
            let c = SurfacePoint::new(random_direction(&mut rng), RE).unwrap();
            prop_assert_eq!(great_circle_distance(&a, &b), great_circle_distance(&b, &a));
            let ab = great_circle_distance(&a, &b);
            let bc = great_circle_distance(&b, &c);
            let ac = great_circle_distance(&a, &c);
            prop_assert!(ac <= ab + bc + 1e-7);
        }
    }
}
