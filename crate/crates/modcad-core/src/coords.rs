//! Coordinate systems: the Nature/Paper pair related by a per-view scale,
//! and the axonometric 3D projection onto the nature plane.

use crate::geom::{Point2, Point3};

/// A plane view: paper-mm origin plus a scale in nature-mm per paper-mm
/// (100 means 1:100).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneCs {
    pub origin: Point2,
    pub scale: f64,
}

impl PlaneCs {
    /// `scale` must be positive.
    pub fn new(origin: Point2, scale: f64) -> Self {
        assert!(scale > 0.0, "view scale must be positive");
        Self { origin, scale }
    }

    pub fn identity() -> Self {
        Self::new(Point2::default(), 1.0)
    }

    pub fn nature_to_paper(&self, p: Point2) -> Point2 {
        self.origin.add(p.scale(1.0 / self.scale))
    }

    pub fn paper_to_nature(&self, q: Point2) -> Point2 {
        q.sub(self.origin).scale(self.scale)
    }
}

/// Axonometric projection of nature (x, y, z) onto the 2D nature plane:
/// the depth axis y is drawn at `depth_angle_deg` with factor
/// `depth_factor`, so (X, Y) = (x + k*y*cos a, z + k*y*sin a).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxonoProjection {
    pub depth_angle_deg: f64,
    pub depth_factor: f64,
}

impl Default for AxonoProjection {
    fn default() -> Self {
        Self {
            depth_angle_deg: 45.0,
            depth_factor: 1.0,
        }
    }
}

impl AxonoProjection {
    /// Angle must lie strictly between 0 and 90 degrees, factor positive.
    pub fn new(depth_angle_deg: f64, depth_factor: f64) -> Self {
        assert!(
            depth_angle_deg > 0.0 && depth_angle_deg < 90.0,
            "depth angle out of range"
        );
        assert!(depth_factor > 0.0, "depth factor must be positive");
        Self {
            depth_angle_deg,
            depth_factor,
        }
    }

    pub fn project(&self, p: Point3) -> Point2 {
        let a = self.depth_angle_deg.to_radians();
        Point2::new(
            p.x + self.depth_factor * p.y * a.cos(),
            p.z + self.depth_factor * p.y * a.sin(),
        )
    }
}
