//! Axis-aligned bounding boxes.

use nalgebra::{Point3, Vector3};

use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb<R: Real> {
    pub min: Point3<R>,
    pub max: Point3<R>,
}

impl<R: Real> Aabb<R> {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3<R>>) -> Option<Self>
    where
        R: 'a,
    {
        let mut iter = points.into_iter();
        let first = *iter.next()?;
        let mut aabb = Self {
            min: first,
            max: first,
        };
        for p in iter {
            aabb.grow(p);
        }
        Some(aabb)
    }

    pub fn grow(&mut self, p: &Point3<R>) {
        for i in 0..3 {
            if p[i] < self.min[i] {
                self.min[i] = p[i];
            }
            if p[i] > self.max[i] {
                self.max[i] = p[i];
            }
        }
    }

    pub fn merge(&self, other: &Self) -> Self {
        let mut out = *self;
        out.grow(&other.min);
        out.grow(&other.max);
        out
    }

    pub fn extents(&self) -> Vector3<R> {
        self.max - self.min
    }

    pub fn center(&self) -> Point3<R> {
        Point3::from((self.min.coords + self.max.coords) * R::of_f64(0.5))
    }

    pub fn contains(&self, p: &Point3<R>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    /// Uniformly inflates the box about its center by `factor`.
    pub fn scaled(&self, factor: R) -> Self {
        let c = self.center().coords;
        Self {
            min: Point3::from(c + (self.min.coords - c) * factor),
            max: Point3::from(c + (self.max.coords - c) * factor),
        }
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn distance_sq(&self, p: &Point3<R>) -> R {
        let mut d = R::zero();
        for i in 0..3 {
            let v = if p[i] < self.min[i] {
                self.min[i] - p[i]
            } else if p[i] > self.max[i] {
                p[i] - self.max[i]
            } else {
                R::zero()
            };
            d += v * v;
        }
        d
    }

    /// Slab test for ray `origin + t * dir`, returning the entry parameter if
    /// the ray hits the box within `[0, t_max]`.
    pub fn ray_entry(&self, origin: &Point3<R>, inv_dir: &Vector3<R>, t_max: R) -> Option<R> {
        let mut t0 = R::zero();
        let mut t1 = t_max;
        for i in 0..3 {
            let ta = (self.min[i] - origin[i]) * inv_dir[i];
            let tb = (self.max[i] - origin[i]) * inv_dir[i];
            let (near, far) = if ta <= tb { (ta, tb) } else { (tb, ta) };
            // NaN from 0 * inf means the ray is parallel and inside the slab.
            if near.finite() && near > t0 {
                t0 = near;
            }
            if far.finite() && far < t1 {
                t1 = far;
            }
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grows_to_cover_points() {
        let pts = [
            Point3::new(1.0f64, 2.0, 3.0),
            Point3::new(-1.0, 5.0, 0.0),
            Point3::new(0.0, 0.0, 9.0),
        ];
        let b = Aabb::from_points(pts.iter()).unwrap();
        assert_eq!(b.min, Point3::new(-1.0, 0.0, 0.0));
        assert_eq!(b.max, Point3::new(1.0, 5.0, 9.0));
        assert!(pts.iter().all(|p| b.contains(p)));
    }

    #[test]
    fn ray_entry_hits_box() {
        let b = Aabb {
            min: Point3::new(1.0f64, -1.0, -1.0),
            max: Point3::new(2.0, 1.0, 1.0),
        };
        let origin = Point3::new(0.0, 0.0, 0.0);
        let dir = Vector3::new(1.0, 0.0, 0.0);
        let inv = Vector3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let t = b.ray_entry(&origin, &inv, f64::MAX).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        let miss_dir = Vector3::new(-1.0, 0.0, 0.0);
        let inv_miss = Vector3::new(-1.0, f64::INFINITY, f64::INFINITY);
        assert!(b.ray_entry(&origin, &inv_miss, f64::MAX).is_none());
        let _ = miss_dir;
    }
}
