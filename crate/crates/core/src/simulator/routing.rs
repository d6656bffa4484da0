//! Local greedy routing over inter-satellite links.

use std::collections::HashSet;

use crate::geometry::{angle_between, SphericalCap, SurfacePoint, Vec3};
use crate::point_process::{Constellation, NeighborIndex};

/// Greedy route from satellite `start` until a satellite inside
/// `target_cap` is reached. Each step moves to the satellite within chord
/// `d_max` whose direction of travel makes the smallest angle with the
/// direction toward `target_point`. Returns the visited satellite indices,
/// or `None` when stuck, looping, or over `max_hops` hops.
pub fn greedy_route_in(
    start: usize,
    target_cap: &SphericalCap,
    target_point: &Vec3,
    satellites: &[SurfacePoint],
    index: &NeighborIndex,
    d_max: f64,
    max_hops: usize,
) -> Option<Vec<usize>> {
    let mut path = vec![start];
    let mut visited = HashSet::from([start]);
    let mut current = start;
    loop {
        if target_cap.contains_direction(satellites[current].direction()) {
            return Some(path);
        }
        if path.len() > max_hops {
            return None;
        }
        let here = satellites[current].position();
        let heading = target_point - here;
        let mut best: Option<(usize, f64)> = None;
        for j in index.within(satellites, &here, d_max) {
            if j == current {
                continue;
            }
            let angle = angle_between(&(satellites[j].position() - here), &heading);
            if best.is_none_or(|(_, a)| angle < a) {
                best = Some((j, angle));
            }
        }
        let (next, _) = best?;
        if !visited.insert(next) {
            return None;
        }
        path.push(next);
        current = next;
    }
}

/// [`greedy_route_in`] toward the center of `target_cap` on the
/// constellation's sphere, with a freshly built neighbour index.
pub fn greedy_route(
    start: usize,
    target_cap: &SphericalCap,
    constellation: &Constellation,
    d_max: f64,
    max_hops: usize,
) -> Option<Vec<usize>> {
    let index = NeighborIndex::new(&constellation.satellites, d_max);
    let target = target_cap.center() * constellation.radius();
    greedy_route_in(start, target_cap, &target, &constellation.satellites, &index, d_max, max_hops)
}

/// Total chord length along a path of satellite indices.
pub fn path_length(path: &[usize], satellites: &[SurfacePoint]) -> f64 {
    path.windows(2).map(|w| satellites[w[0]].distance_to(&satellites[w[1]])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{offset_direction, EARTH_RADIUS_KM};
    use crate::point_process::{sample_bpp, sample_uniform_sphere};
    use crate::rng::RngStream;
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    fn sat(dir: Vec3, r: f64) -> SurfacePoint {
        SurfacePoint::new(dir, r).unwrap()
    }

    #[test]
    fn start_inside_target() {
        let r = 6921.0;
        let c = Constellation {
            satellites: vec![sat(Vec3::z(), r)],
            altitude_km: 550.0,
        };
        let cap = SphericalCap::new(Vec3::z(), 0.1).unwrap();
        assert_eq!(greedy_route(0, &cap, &c, 500.0, 200), Some(vec![0]));
    }

    #[test]
    fn forced_chain() {
        let r = 6921.0;
        let step = 0.1;
        let sats: Vec<SurfacePoint> = (0..4)
            .map(|i| sat(offset_direction(&Vec3::z(), step * i as f64, 0.0), r))
            .collect();
        let c = Constellation {
            satellites: sats,
            altitude_km: 550.0,
        };
        let target = SphericalCap::new(offset_direction(&Vec3::z(), 0.32, 0.0), 0.05).unwrap();
        let hop = 2.0 * r * (step / 2.0).sin() * 1.01;
        assert_eq!(greedy_route(0, &target, &c, hop, 200), Some(vec![0, 1, 2, 3]));
        assert_eq!(greedy_route(0, &target, &c, hop * 0.5, 200), None);
        assert_eq!(greedy_route(0, &target, &c, hop, 2), None);
    }

    fn dijkstra(sats: &[SurfacePoint], start: usize, cap: &SphericalCap, d_max: f64) -> Option<f64> {
        let n = sats.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        dist[start] = 0.0;
        heap.push((Reverse(0u64), start));
        while let Some((Reverse(dbits), u)) = heap.pop() {
            let du = f64::from_bits(dbits);
            if du > dist[u] {
                continue;
            }
            if cap.contains_direction(sats[u].direction()) {
                return Some(du);
            }
            for v in 0..n {
                let w = sats[u].distance_to(&sats[v]);
                if v != u && w <= d_max && du + w < dist[v] {
                    dist[v] = du + w;
                    heap.push((Reverse((du + w).to_bits()), v));
                }
            }
        }
        None
    }

    #[test]
    fn greedy_never_beats_shortest_path() {
        let mut failures = 0;
        for t in 0..30 {
            let mut rng = RngStream::new(13, t).rng();
            let c = sample_bpp(&mut rng, 1500, 550.0).unwrap();
            let target = sample_uniform_sphere(&mut rng, EARTH_RADIUS_KM);
            let cap = SphericalCap::around(&target, 0.567).unwrap();
            let route = greedy_route(0, &cap, &c, 2000.0, 200);
            let best = dijkstra(&c.satellites, 0, &cap, 2000.0);
            match (route, best) {
                (Some(path), Some(opt)) => {
                    assert!(path.len() <= 201);
                    let unique: HashSet<_> = path.iter().collect();
                    assert_eq!(unique.len(), path.len());
                    assert!(path_length(&path, &c.satellites) >= opt - 1e-6);
                }
                (Some(_), None) => panic!("greedy found a route the graph does not have"),
                (None, Some(_)) => failures += 1,
                (None, None) => {}
            }
        }
        assert!(failures <= 3);
    }
}
