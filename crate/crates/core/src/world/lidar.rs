//! 360-ray planar range finder mounted on the head link.

use std::sync::OnceLock;

use super::arena::Arena;
use super::geometry::{ray_circle, ray_rect, Ray, Vec2};

pub const RAYS: usize = 360;
pub const STRIDE: usize = 3;
pub const INPUTS: usize = RAYS / STRIDE;
pub const DEFAULT_MAX_RANGE: f64 = 5.0;

/// `(cos k°, sin k°)` for every ray index.
fn offsets() -> &'static [(f64, f64); RAYS] {
    static TABLE: OnceLock<[(f64, f64); RAYS]> = OnceLock::new();
    TABLE.get_or_init(|| {
        std::array::from_fn(|k| {
            let (s, c) = (k as f64).to_radians().sin_cos();
            (c, s)
        })
    })
}

/// Unit direction of ray `k` for a head at angle `theta_head`.
pub fn ray_direction(theta_head: f64, k: usize) -> Vec2 {
    let (s, c) = theta_head.sin_cos();
    rotate(Vec2::new(c, s), k)
}

fn rotate(head: Vec2, k: usize) -> Vec2 {
    let (c, s) = offsets()[k];
    Vec2::new(head.x * c - head.y * s, head.x * s + head.y * c)
}

/// Range along ray `k` (`θ_head + k°`), capped at `max_range`.
/// The snake body is invisible to its own sensor.
pub fn cast(arena: &Arena, origin: Vec2, theta_head: f64, k: usize, max_range: f64) -> f64 {
    let (s, c) = theta_head.sin_cos();
    cast_dir(arena, origin, rotate(Vec2::new(c, s), k), max_range)
}

fn cast_dir(arena: &Arena, origin: Vec2, dir: Vec2, max_range: f64) -> f64 {
    let ray = Ray { origin, dir };
    let mut best = max_range;
    for w in &arena.walls {
        if w.distance(origin) < best {
            if let Some(t) = ray_rect(&ray, w) {
                best = best.min(t);
            }
        }
    }
    let circles = arena.obstacles.iter().chain(std::iter::once(&arena.beacon));
    for c in circles {
        if (c.center - origin).norm() - c.radius < best {
            if let Some(t) = ray_circle(&ray, c) {
                best = best.min(t);
            }
        }
    }
    best
}

pub fn scan(arena: &Arena, origin: Vec2, theta_head: f64, max_range: f64) -> Vec<f64> {
    let (s, c) = theta_head.sin_cos();
    let head = Vec2::new(c, s);
    (0..RAYS).map(|k| cast_dir(arena, origin, rotate(head, k), max_range)).collect()
}

/// Every third range, divided by `max_range`.
pub fn downsample(scan: &[f64], max_range: f64) -> Vec<f64> {
    scan.iter().step_by(STRIDE).map(|r| r / max_range).collect()
}

/// Same values as `downsample(scan(..))` but only casts the rays it keeps.
pub fn sense(arena: &Arena, origin: Vec2, theta_head: f64, max_range: f64, out: &mut Vec<f64>) {
    let (s, c) = theta_head.sin_cos();
    let head = Vec2::new(c, s);
    out.clear();
    out.extend(
        (0..RAYS)
            .step_by(STRIDE)
            .map(|k| cast_dir(arena, origin, rotate(head, k), max_range) / max_range),
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::geometry::Circle;
    use std::f64::consts::FRAC_PI_2;

    fn lone(c: Circle) -> Arena {
        let mut a = Arena::preset("open").unwrap();
        a.beacon = c;
        a
    }

    #[test]
    fn forward_ray_hits_obstacle() {
        let a = lone(Circle { center: Vec2::new(0.0, 2.0), radius: 0.25 });
        let s = scan(&a, Vec2::zeros(), FRAC_PI_2, DEFAULT_MAX_RANGE);
        assert!((s[0] - 1.75).abs() < 1e-12);
        assert_eq!(s[180], 5.0);
    }

    #[test]
    fn empty_arena_reads_max() {
        let a = lone(Circle { center: Vec2::new(100.0, 100.0), radius: 0.15 });
        let s = scan(&a, Vec2::new(1.5, 0.5), 0.3, DEFAULT_MAX_RANGE);
        assert_eq!(s.len(), RAYS);
        assert!(s.iter().all(|&r| r == 5.0));
        assert!(downsample(&s, 5.0).iter().all(|&r| r == 1.0));
    }

    #[test]
    fn downsample_indexing() {
        let mut s = vec![5.0; RAYS];
        s[3] = 2.5;
        let d = downsample(&s, 5.0);
        assert_eq!(d.len(), INPUTS);
        assert_eq!(d[1], 0.5);
    }

    #[test]
    fn sense_matches_full_scan() {
        let a = Arena::preset("default").unwrap();
        for (x, y, th) in [(1.5, 0.5, FRAC_PI_2), (0.2, 6.1, 1.0), (3.0, 12.9, -2.0)] {
            let p = Vec2::new(x, y);
            let mut fast = Vec::new();
            sense(&a, p, th, 5.0, &mut fast);
            assert_eq!(fast, downsample(&scan(&a, p, th, 5.0), 5.0));
        }
    }
}
