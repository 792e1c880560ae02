//! Planar primitives and the intersection kernels used by the LiDAR and
//! the contact solver.

use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

/// Rotates `v` by +90°.
#[inline]
pub fn perp(v: Vec2) -> Vec2 {
    Vec2::new(-v.y, v.x)
}

#[inline]
pub fn heading(theta: f64) -> Vec2 {
    let (s, c) = theta.sin_cos();
    Vec2::new(c, s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    /// Builds from any two opposite corners.
    pub fn from_corners(a: Vec2, b: Vec2) -> Self {
        Self {
            min: Vec2::new(a.x.min(b.x), a.y.min(b.y)),
            max: Vec2::new(a.x.max(b.x), a.y.max(b.y)),
        }
    }

    pub fn closest_point(&self, p: Vec2) -> Vec2 {
        Vec2::new(p.x.clamp(self.min.x, self.max.x), p.y.clamp(self.min.y, self.max.y))
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Euclidean distance from `p` to the rectangle (0 inside).
    pub fn distance(&self, p: Vec2) -> f64 {
        (p - self.closest_point(p)).norm()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec2,
    /// Unit direction.
    pub dir: Vec2,
}

impl Ray {
    pub fn from_angle(origin: Vec2, angle: f64) -> Self {
        Self { origin, dir: heading(angle) }
    }

    pub fn at(&self, t: f64) -> Vec2 {
        self.origin + self.dir * t
    }
}

/// Distance to the first boundary crossing of `c` at `t > 0`.
pub fn ray_circle(ray: &Ray, c: &Circle) -> Option<f64> {
    let oc = ray.origin - c.center;
    let b = oc.dot(&ray.dir);
    let cc = oc.norm_squared() - c.radius * c.radius;
    let disc = b * b - cc;
    if disc < 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let (t0, t1) = (-b - s, -b + s);
    if t0 > 0.0 {
        Some(t0)
    } else if t1 > 0.0 {
        Some(t1)
    } else {
        None
    }
}

/// Slab test: distance to the first boundary crossing of `r` at `t > 0`.
pub fn ray_rect(ray: &Ray, r: &Rect) -> Option<f64> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    for axis in 0..2 {
        let o = ray.origin[axis];
        let d = ray.dir[axis];
        let (lo, hi) = (r.min[axis], r.max[axis]);
        if d == 0.0 {
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let (mut a, mut b) = ((lo - o) / d, (hi - o) / d);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        t_near = t_near.max(a);
        t_far = t_far.min(b);
        if t_near > t_far {
            return None;
        }
    }
    if t_near > 0.0 {
        Some(t_near)
    } else if t_far > 0.0 {
        Some(t_far)
    } else {
        None
    }
}

/// Penetration of a disc into something: depth > 0 when overlapping,
/// `normal` points out of the obstacle toward the disc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Penetration {
    /// Signed gap; negative when overlapping.
    pub gap: f64,
    pub normal: Vec2,
}

pub fn disc_vs_circle(center: Vec2, radius: f64, c: &Circle) -> Penetration {
    let d = center - c.center;
    let dist = d.norm();
    let normal = if dist > 1e-12 { d / dist } else { Vec2::new(0.0, 1.0) };
    Penetration {
        gap: dist - radius - c.radius,
        normal,
    }
}

pub fn disc_vs_rect(center: Vec2, radius: f64, r: &Rect) -> Penetration {
    if !r.contains(center) {
        let q = r.closest_point(center);
        let d = center - q;
        let dist = d.norm();
        return Penetration {
            gap: dist - radius,
            normal: d / dist,
        };
    }
    // Centre inside: push out through the nearest face.
    let faces = [
        (center.x - r.min.x, Vec2::new(-1.0, 0.0)),
        (r.max.x - center.x, Vec2::new(1.0, 0.0)),
        (center.y - r.min.y, Vec2::new(0.0, -1.0)),
        (r.max.y - center.y, Vec2::new(0.0, 1.0)),
    ];
    let (depth, normal) = faces
        .into_iter()
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("four faces");
    Penetration {
        gap: -depth - radius,
        normal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ray_hits_circle_ahead() {
        let ray = Ray::from_angle(Vec2::zeros(), std::f64::consts::FRAC_PI_2);
        let c = Circle { center: Vec2::new(0.0, 2.0), radius: 0.25 };
        assert!((ray_circle(&ray, &c).unwrap() - 1.75).abs() < 1e-12);
        let back = Ray::from_angle(Vec2::zeros(), -std::f64::consts::FRAC_PI_2);
        assert_eq!(ray_circle(&back, &c), None);
    }

    #[test]
    fn ray_from_inside_exits() {
        let ray = Ray::from_angle(Vec2::zeros(), 0.0);
        let c = Circle { center: Vec2::zeros(), radius: 1.0 };
        assert!((ray_circle(&ray, &c).unwrap() - 1.0).abs() < 1e-12);
        let r = Rect::from_corners(Vec2::new(-1.0, -1.0), Vec2::new(2.0, 1.0));
        assert!((ray_rect(&ray, &r).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn ray_rect_basic() {
        let r = Rect::from_corners(Vec2::new(1.0, -1.0), Vec2::new(2.0, 1.0));
        let ray = Ray::from_angle(Vec2::zeros(), 0.0);
        assert_eq!(ray_rect(&ray, &r), Some(1.0));
        let miss = Ray::from_angle(Vec2::new(0.0, 2.0), 0.0);
        assert_eq!(ray_rect(&miss, &r), None);
        let away = Ray::from_angle(Vec2::zeros(), std::f64::consts::PI);
        assert_eq!(ray_rect(&away, &r), None);
    }

    #[test]
    fn disc_rect_penetration() {
        let r = Rect::from_corners(Vec2::new(0.0, 0.0), Vec2::new(1.0, 1.0));
        let p = disc_vs_rect(Vec2::new(1.02, 0.5), 0.05, &r);
        assert!((p.gap + 0.03).abs() < 1e-12);
        assert_eq!(p.normal, Vec2::new(1.0, 0.0));
        let inside = disc_vs_rect(Vec2::new(0.9, 0.5), 0.05, &r);
        assert!((inside.gap + 0.15).abs() < 1e-12);
        assert_eq!(inside.normal, Vec2::new(1.0, 0.0));
    }
}
