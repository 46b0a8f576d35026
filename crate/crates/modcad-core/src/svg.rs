//! Deterministic SVG 1.1 output. Paper mm map 1:1 onto SVG user units
//! with the y axis flipped to screen convention; every coordinate is
//! printed with three decimals, so identical drawings yield identical
//! bytes.

use crate::geom::{fmt_mm, MarkerKind, Point2, Primitive, Shape, MARKER_HALF_SIZE};
use crate::model::{Drawing, Element};
use std::fmt::Write;

/// Fixed palette indexed by color id; ids beyond the table fall back to
/// black.
const PALETTE: &[&str] = &[
    "#000000", "#c00000", "#008000", "#0000c0", "#008080", "#800080", "#c06000", "#606060",
];

fn color(id: u16) -> &'static str {
    PALETTE.get(id as usize).copied().unwrap_or("#000000")
}

fn dash_array(line_type: crate::geom::LineType) -> Option<&'static str> {
    match line_type {
        crate::geom::LineType::Solid => None,
        crate::geom::LineType::Dashed => Some("4,2"),
        crate::geom::LineType::DashDot => Some("8,2,1,2"),
    }
}

struct Canvas {
    out: String,
    height: f64,
}

impl Canvas {
    fn flip(&self, p: Point2) -> Point2 {
        Point2::new(p.x, self.height - p.y)
    }

    fn stroke_attrs(&self, p: &Primitive) -> String {
        let mut s = format!(" stroke=\"{}\" stroke-width=\"0.35\" fill=\"none\"", color(p.color));
        if let Some(dash) = dash_array(p.line_type) {
            let _ = write!(s, " stroke-dasharray=\"{dash}\"");
        }
        s
    }

    fn primitive(&mut self, p: &Primitive) {
        match &p.shape {
            Shape::Segment { a, b } => {
                let a = self.flip(*a);
                let b = self.flip(*b);
                let _ = writeln!(
                    self.out,
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"{}/>",
                    fmt_mm(a.x),
                    fmt_mm(a.y),
                    fmt_mm(b.x),
                    fmt_mm(b.y),
                    self.stroke_attrs(p)
                );
            }
            Shape::Polyline { points } => {
                let mut coords = String::new();
                for (i, pt) in points.iter().enumerate() {
                    let q = self.flip(*pt);
                    if i > 0 {
                        coords.push(' ');
                    }
                    let _ = write!(coords, "{},{}", fmt_mm(q.x), fmt_mm(q.y));
                }
                let _ = writeln!(
                    self.out,
                    "<polyline points=\"{coords}\"{}/>",
                    self.stroke_attrs(p)
                );
            }
            Shape::Circle { center, radius } => {
                let c = self.flip(*center);
                let _ = writeln!(
                    self.out,
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{}\"{}/>",
                    fmt_mm(c.x),
                    fmt_mm(c.y),
                    fmt_mm(*radius),
                    self.stroke_attrs(p)
                );
            }
            Shape::Arc {
                center,
                radius,
                start_deg,
                sweep_deg,
            } => {
                // Arc path between the two endpoints; flipping y reverses
                // the sweep direction.
                let point_at = |deg: f64| {
                    let a = deg.to_radians();
                    self.flip(Point2::new(
                        center.x + radius * a.cos(),
                        center.y + radius * a.sin(),
                    ))
                };
                let start = point_at(*start_deg);
                let end = point_at(*start_deg + *sweep_deg);
                let large = (sweep_deg.abs() > 180.0) as u8;
                let flag_sweep = (*sweep_deg < 0.0) as u8;
                let _ = writeln!(
                    self.out,
                    "<path d=\"M {} {} A {} {} 0 {} {} {} {}\"{}/>",
                    fmt_mm(start.x),
                    fmt_mm(start.y),
                    fmt_mm(*radius),
                    fmt_mm(*radius),
                    large,
                    flag_sweep,
                    fmt_mm(end.x),
                    fmt_mm(end.y),
                    self.stroke_attrs(p)
                );
            }
            Shape::Text {
                pos,
                height,
                angle_deg,
                content,
            } => {
                let q = self.flip(*pos);
                let transform = if *angle_deg != 0.0 {
                    format!(
                        " transform=\"rotate({} {} {})\"",
                        fmt_mm(-angle_deg),
                        fmt_mm(q.x),
                        fmt_mm(q.y)
                    )
                } else {
                    String::new()
                };
                let _ = writeln!(
                    self.out,
                    "<text x=\"{}\" y=\"{}\" font-size=\"{}\" font-family=\"sans-serif\" fill=\"{}\"{}>{}</text>",
                    fmt_mm(q.x),
                    fmt_mm(q.y),
                    fmt_mm(*height),
                    color(p.color),
                    transform,
                    escape(content)
                );
            }
            Shape::Marker { pos, kind } => {
                let q = self.flip(*pos);
                let r = MARKER_HALF_SIZE;
                match kind {
                    MarkerKind::Dot => {
                        let _ = writeln!(
                            self.out,
                            "<path d=\"M {} {} L {} {} M {} {} L {} {}\"{}/>",
                            fmt_mm(q.x - r),
                            fmt_mm(q.y),
                            fmt_mm(q.x + r),
                            fmt_mm(q.y),
                            fmt_mm(q.x),
                            fmt_mm(q.y - r),
                            fmt_mm(q.x),
                            fmt_mm(q.y + r),
                            self.stroke_attrs(p)
                        );
                    }
                    MarkerKind::Elevation => {
                        let _ = writeln!(
                            self.out,
                            "<path d=\"M {} {} L {} {} L {} {} Z\"{}/>",
                            fmt_mm(q.x),
                            fmt_mm(q.y),
                            fmt_mm(q.x - r),
                            fmt_mm(q.y - r),
                            fmt_mm(q.x + r),
                            fmt_mm(q.y - r),
                            self.stroke_attrs(p)
                        );
                    }
                }
            }
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Render a whole drawing: sheet frame, free primitives, module geometry
/// and any working modules, in element order.
pub fn render_drawing(drawing: &Drawing) -> String {
    let primitives = drawing.elements().iter().flat_map(|(_, e)| match e {
        Element::Primitive(p) => std::slice::from_ref(p).iter(),
        Element::Module(m) => m.geometry.iter(),
        Element::Working(w) => w.primitives.iter(),
    });
    render(
        drawing.sheet_width,
        drawing.sheet_height,
        true,
        primitives,
    )
}

/// Render loose primitives into a viewport, used for catalog previews.
pub fn render_primitives<'a>(
    width: f64,
    height: f64,
    primitives: impl Iterator<Item = &'a Primitive>,
) -> String {
    render(width, height, false, primitives)
}

fn render<'a>(
    width: f64,
    height: f64,
    frame: bool,
    primitives: impl Iterator<Item = &'a Primitive>,
) -> String {
    let mut canvas = Canvas {
        out: String::new(),
        height,
    };
    let _ = writeln!(canvas.out, "<?xml version=\"1.0\" encoding=\"UTF-8\"?>");
    let _ = writeln!(
        canvas.out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}mm\" height=\"{h}mm\" viewBox=\"0 0 {w} {h}\">",
        w = fmt_mm(width),
        h = fmt_mm(height)
    );
    if frame {
        let _ = writeln!(
            canvas.out,
            "<rect x=\"0.000\" y=\"0.000\" width=\"{}\" height=\"{}\" stroke=\"#000000\" stroke-width=\"0.35\" fill=\"none\"/>",
            fmt_mm(width),
            fmt_mm(height)
        );
    }
    for p in primitives {
        canvas.primitive(p);
    }
    canvas.out.push_str("</svg>\n");
    canvas.out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::LineType;

    #[test]
    fn empty_drawing_renders_frame_only() {
        let drawing = Drawing::new(420.0, 297.0);
        let svg = render_drawing(&drawing);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("viewBox=\"0 0 420.000 297.000\""));
        assert!(svg.contains("<rect"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(!svg.contains("<line"));
    }

    #[test]
    fn rendering_is_deterministic() {
        let mut drawing = Drawing::new(100.0, 100.0);
        drawing.add_element(Element::Primitive(Primitive::segment(
            Point2::new(0.0, 0.0),
            Point2::new(10.0, 20.0),
            1,
            LineType::DashDot,
        )));
        assert_eq!(render_drawing(&drawing), render_drawing(&drawing));
    }

    #[test]
    fn y_axis_is_flipped() {
        let mut drawing = Drawing::new(100.0, 100.0);
        drawing.add_element(Element::Primitive(Primitive::segment(
            Point2::new(0.0, 0.0),
            Point2::new(0.0, 10.0),
            0,
            LineType::Solid,
        )));
        let svg = render_drawing(&drawing);
        // Paper (0,0) lands at svg y=100, paper (0,10) at svg y=90.
        assert!(svg.contains("y1=\"100.000\""));
        assert!(svg.contains("y2=\"90.000\""));
    }

    #[test]
    fn text_content_is_escaped() {
        let mut drawing = Drawing::new(100.0, 100.0);
        drawing.add_element(Element::Primitive(Primitive::text(
            Point2::new(1.0, 1.0),
            2.5,
            0.0,
            "a<b&c",
            0,
        )));
        let svg = render_drawing(&drawing);
        assert!(svg.contains("a&lt;b&amp;c"));
    }
}
