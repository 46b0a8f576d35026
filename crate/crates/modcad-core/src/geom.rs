//! Geometry vocabulary shared by the whole engine: points, rectangles and
//! the primitive set every generator emits (segments, polylines, circles,
//! arcs, texts, markers). All coordinates are millimetres.

use std::fmt;

/// Factor used to estimate text width from character count and height.
pub const TEXT_WIDTH_FACTOR: f64 = 0.6;

/// Half-width of the rendered marker glyph in mm.
pub const MARKER_HALF_SIZE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn add(self, other: Point2) -> Self {
        Self::new(self.x + other.x, self.y + other.y)
    }

    pub fn sub(self, other: Point2) -> Self {
        Self::new(self.x - other.x, self.y - other.y)
    }

    pub fn scale(self, factor: f64) -> Self {
        Self::new(self.x * factor, self.y * factor)
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point2) -> f64 {
        self.sub(other).norm()
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", fmt_mm(self.x), fmt_mm(self.y))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn add(self, other: Point3) -> Self {
        Self::new(self.x + other.x, self.y + other.y, self.z + other.z)
    }

    pub fn distance(self, other: Point3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Axis-aligned rectangle. `min` and `max` are opposite corners with
/// `min.x <= max.x` and `min.y <= max.y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn from_points(a: Point2, b: Point2) -> Self {
        Self {
            min: Point2::new(a.x.min(b.x), a.y.min(b.y)),
            max: Point2::new(a.x.max(b.x), a.y.max(b.y)),
        }
    }

    pub fn include(&mut self, p: Point2) {
        self.min.x = self.min.x.min(p.x);
        self.min.y = self.min.y.min(p.y);
        self.max.x = self.max.x.max(p.x);
        self.max.y = self.max.y.max(p.y);
    }

    pub fn union(&mut self, other: &Rect) {
        self.include(other.min);
        self.include(other.max);
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    /// Euclidean distance from a point to this rectangle (0 inside).
    pub fn distance_to(&self, p: Point2) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        dx.hypot(dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LineType {
    #[default]
    Solid,
    Dashed,
    DashDot,
}

impl LineType {
    pub fn id(self) -> u8 {
        match self {
            LineType::Solid => 0,
            LineType::Dashed => 1,
            LineType::DashDot => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(LineType::Solid),
            1 => Some(LineType::Dashed),
            2 => Some(LineType::DashDot),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkerKind {
    /// Plain position marker, rendered as a small cross.
    Dot,
    /// Elevation mark, rendered as a small triangle.
    Elevation,
}

impl MarkerKind {
    pub fn id(self) -> u8 {
        match self {
            MarkerKind::Dot => 0,
            MarkerKind::Elevation => 1,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            0 => Some(MarkerKind::Dot),
            1 => Some(MarkerKind::Elevation),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Segment {
        a: Point2,
        b: Point2,
    },
    Polyline {
        points: Vec<Point2>,
    },
    Circle {
        center: Point2,
        radius: f64,
    },
    /// Circular arc; `start_deg` is measured CCW from +x, `sweep_deg` may be
    /// negative for clockwise arcs.
    Arc {
        center: Point2,
        radius: f64,
        start_deg: f64,
        sweep_deg: f64,
    },
    /// `pos` is the left end of the baseline.
    Text {
        pos: Point2,
        height: f64,
        angle_deg: f64,
        content: String,
    },
    Marker {
        pos: Point2,
        kind: MarkerKind,
    },
}

impl Shape {
    /// Structural validity: positive radii and heights, polylines with at
    /// least two points. Generators uphold this by construction; file
    /// readers must call it on decoded data.
    pub fn is_valid(&self) -> bool {
        match self {
            Shape::Segment { .. } => true,
            Shape::Polyline { points } => points.len() >= 2,
            Shape::Circle { radius, .. } => *radius > 0.0,
            Shape::Arc { radius, .. } => *radius > 0.0,
            Shape::Text { height, .. } => *height > 0.0,
            Shape::Marker { .. } => true,
        }
    }
}

/// A drawable element: a shape plus display attributes.
#[derive(Debug, Clone, PartialEq)]
pub struct Primitive {
    pub shape: Shape,
    pub color: u16,
    pub line_type: LineType,
}

impl Primitive {
    pub fn new(shape: Shape, color: u16, line_type: LineType) -> Self {
        Self {
            shape,
            color,
            line_type,
        }
    }

    pub fn segment(a: Point2, b: Point2, color: u16, line_type: LineType) -> Self {
        Self::new(Shape::Segment { a, b }, color, line_type)
    }

    pub fn text(pos: Point2, height: f64, angle_deg: f64, content: impl Into<String>, color: u16) -> Self {
        Self::new(
            Shape::Text {
                pos,
                height,
                angle_deg,
                content: content.into(),
            },
            color,
            LineType::Solid,
        )
    }

    pub fn marker(pos: Point2, kind: MarkerKind, color: u16) -> Self {
        Self::new(Shape::Marker { pos, kind }, color, LineType::Solid)
    }

    /// Translate by a vector.
    pub fn translated(&self, delta: Point2) -> Self {
        let shape = match &self.shape {
            Shape::Segment { a, b } => Shape::Segment {
                a: a.add(delta),
                b: b.add(delta),
            },
            Shape::Polyline { points } => Shape::Polyline {
                points: points.iter().map(|p| p.add(delta)).collect(),
            },
            Shape::Circle { center, radius } => Shape::Circle {
                center: center.add(delta),
                radius: *radius,
            },
            Shape::Arc {
                center,
                radius,
                start_deg,
                sweep_deg,
            } => Shape::Arc {
                center: center.add(delta),
                radius: *radius,
                start_deg: *start_deg,
                sweep_deg: *sweep_deg,
            },
            Shape::Text {
                pos,
                height,
                angle_deg,
                content,
            } => Shape::Text {
                pos: pos.add(delta),
                height: *height,
                angle_deg: *angle_deg,
                content: content.clone(),
            },
            Shape::Marker { pos, kind } => Shape::Marker {
                pos: pos.add(delta),
                kind: *kind,
            },
        };
        Self::new(shape, self.color, self.line_type)
    }

    /// Tight axis-aligned bounding box. Text extent uses the cached-extent
    /// formula (character count x height x width factor).
    pub fn bounds(&self) -> Rect {
        match &self.shape {
            Shape::Segment { a, b } => Rect::from_points(*a, *b),
            Shape::Polyline { points } => {
                let mut r = Rect::from_points(points[0], points[0]);
                for p in &points[1..] {
                    r.include(*p);
                }
                r
            }
            Shape::Circle { center, radius } => Rect::from_points(
                Point2::new(center.x - radius, center.y - radius),
                Point2::new(center.x + radius, center.y + radius),
            ),
            Shape::Arc {
                center,
                radius,
                start_deg,
                sweep_deg,
            } => arc_bounds(*center, *radius, *start_deg, *sweep_deg),
            Shape::Text {
                pos,
                height,
                content,
                ..
            } => text_extent(*pos, *height, content),
            Shape::Marker { pos, .. } => Rect::from_points(
                Point2::new(pos.x - MARKER_HALF_SIZE, pos.y - MARKER_HALF_SIZE),
                Point2::new(pos.x + MARKER_HALF_SIZE, pos.y + MARKER_HALF_SIZE),
            ),
        }
    }

    /// Distance from a point to the drawn ink of this primitive.
    /// Texts measure to their extent rectangle, circles to the ring.
    pub fn distance_to(&self, p: Point2) -> f64 {
        match &self.shape {
            Shape::Segment { a, b } => segment_distance(*a, *b, p),
            Shape::Polyline { points } => points
                .windows(2)
                .map(|w| segment_distance(w[0], w[1], p))
                .fold(f64::INFINITY, f64::min),
            Shape::Circle { center, radius } => (center.distance(p) - radius).abs(),
            Shape::Arc {
                center,
                radius,
                start_deg,
                sweep_deg,
            } => arc_distance(*center, *radius, *start_deg, *sweep_deg, p),
            Shape::Text {
                pos,
                height,
                content,
                ..
            } => text_extent(*pos, *height, content).distance_to(p),
            Shape::Marker { pos, .. } => pos.distance(p),
        }
    }
}

/// Extent rectangle of a text primitive: baseline-left at `pos`, width from
/// the character-count formula, height above the baseline.
pub fn text_extent(pos: Point2, height: f64, content: &str) -> Rect {
    let width = text_width(content, height);
    Rect::from_points(pos, Point2::new(pos.x + width, pos.y + height))
}

/// Estimated text width: character count x height x 0.6.
pub fn text_width(content: &str, height: f64) -> f64 {
    content.chars().count() as f64 * height * TEXT_WIDTH_FACTOR
}

pub fn segment_distance(a: Point2, b: Point2, p: Point2) -> f64 {
    let ab = b.sub(a);
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return a.distance(p);
    }
    let t = (p.sub(a).dot(ab) / len2).clamp(0.0, 1.0);
    a.add(ab.scale(t)).distance(p)
}

fn arc_point(center: Point2, radius: f64, angle_deg: f64) -> Point2 {
    let a = angle_deg.to_radians();
    Point2::new(center.x + radius * a.cos(), center.y + radius * a.sin())
}

/// True when `angle_deg` lies within the arc's swept range.
fn arc_contains_angle(start_deg: f64, sweep_deg: f64, angle_deg: f64) -> bool {
    let (lo, hi) = if sweep_deg >= 0.0 {
        (start_deg, start_deg + sweep_deg)
    } else {
        (start_deg + sweep_deg, start_deg)
    };
    // Compare modulo 360, walking from lo upward.
    let mut a = (angle_deg - lo).rem_euclid(360.0);
    if a == 0.0 && hi > lo {
        return true;
    }
    if (hi - lo) >= 360.0 {
        return true;
    }
    a += lo;
    a <= hi
}

fn arc_bounds(center: Point2, radius: f64, start_deg: f64, sweep_deg: f64) -> Rect {
    let mut r = Rect::from_points(
        arc_point(center, radius, start_deg),
        arc_point(center, radius, start_deg + sweep_deg),
    );
    for quadrant in [0.0, 90.0, 180.0, 270.0] {
        if arc_contains_angle(start_deg, sweep_deg, quadrant) {
            r.include(arc_point(center, radius, quadrant));
        }
    }
    r
}

fn arc_distance(center: Point2, radius: f64, start_deg: f64, sweep_deg: f64, p: Point2) -> f64 {
    let v = p.sub(center);
    if v.norm() == 0.0 {
        return radius;
    }
    let angle = v.y.atan2(v.x).to_degrees();
    if arc_contains_angle(start_deg, sweep_deg, angle) {
        (v.norm() - radius).abs()
    } else {
        let e1 = arc_point(center, radius, start_deg);
        let e2 = arc_point(center, radius, start_deg + sweep_deg);
        e1.distance(p).min(e2.distance(p))
    }
}

/// Fixed three-decimal formatting used by dumps and SVG output.
/// Values rounding to zero print as "0.000" (never "-0.000").
pub fn fmt_mm(v: f64) -> String {
    let r = (v * 1000.0).round() / 1000.0;
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.3}")
}
