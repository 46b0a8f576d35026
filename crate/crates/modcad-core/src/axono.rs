//! Axonometric piping schemes: 3D pipe axes, break planes shifting
//! half-spaces along their normal, pipe labels and elevation marks.
//!
//! Geometry pipeline: point coordinates are nature mm; every point is
//! shifted by the offsets of all break planes whose open half-space
//! (coordinate strictly greater than the plane) contains it, projected
//! axonometrically, then divided by the view scale into paper mm.
//! Boundary points (exactly on a plane) are never shifted.

use crate::coords::AxonoProjection;
use crate::error::{Error, Result};
use crate::extension::{CommandSpec, Extension, SpecialContext};
use crate::geom::{LineType, MarkerKind, Point2, Point3, Primitive};
use crate::model::DrawingSettings;
use crate::pp::Pp;
use crate::schema::{FieldKind, FieldSchema, ListSchema, PpSchema, SettingBinding};
use crate::value::Value;
use std::sync::Arc;

pub const EXT_ID: &str = "axono";
pub const MODULE_TYPE: &str = "Аксонометрическая схема";

/// Points closer than this (per coordinate) merge when adding an axis;
/// half of the 0.01 mm coordinate step.
pub const POINT_MERGE_TOLERANCE: f64 = 0.005;

/// Break tick length in paper mm.
const TICK_LENGTH: f64 = 2.0;

const LISTS: (&str, &str, &str, &str) = ("points", "pipes", "breaks", "labels");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> u32 {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn from_index(i: u32) -> Option<Self> {
        match i {
            0 => Some(Axis::X),
            1 => Some(Axis::Y),
            2 => Some(Axis::Z),
            _ => None,
        }
    }

    pub fn parse(token: &str) -> Result<Self> {
        match token {
            "X" | "x" => Ok(Axis::X),
            "Y" | "y" => Ok(Axis::Y),
            "Z" | "z" => Ok(Axis::Z),
            _ => Err(Error::BadArgument(format!("\"{token}\": expected X, Y or Z"))),
        }
    }

    fn coord(self, p: Point3) -> f64 {
        match self {
            Axis::X => p.x,
            Axis::Y => p.y,
            Axis::Z => p.z,
        }
    }

    fn offset_vector(self, amount: f64) -> Point3 {
        match self {
            Axis::X => Point3::new(amount, 0.0, 0.0),
            Axis::Y => Point3::new(0.0, amount, 0.0),
            Axis::Z => Point3::new(0.0, 0.0, amount),
        }
    }
}

pub fn axono_schema() -> PpSchema {
    let (points, pipes, breaks, labels) = LISTS;
    PpSchema {
        name: "axono".to_string(),
        version: 1,
        general: vec![
            FieldSchema::with_default("anchor_x", FieldKind::fixed(32, 0.01), Value::Fixed(0.0)),
            FieldSchema::with_default("anchor_y", FieldKind::fixed(32, 0.01), Value::Fixed(0.0)),
            FieldSchema::with_default("depth_angle", FieldKind::fixed(16, 0.1), Value::Fixed(45.0)),
            FieldSchema::with_default(
                "depth_factor",
                FieldKind::fixed(16, 0.001),
                Value::Fixed(1.0),
            ),
            FieldSchema::with_default("scale", FieldKind::fixed(16, 0.1), Value::Fixed(1.0)),
            FieldSchema::with_default("default_diameter", FieldKind::uint(12), Value::UInt(50)),
            FieldSchema::with_default("label_height", FieldKind::fixed(16, 0.1), Value::Fixed(2.5)),
            FieldSchema::with_default("draw_dimensions", FieldKind::Flag, Value::Flag(false)),
            FieldSchema::with_default("draw_elevations", FieldKind::Flag, Value::Flag(false)),
        ],
        bindings: vec![
            SettingBinding::per_object("default_diameter", pipes, "diameter"),
            SettingBinding::per_object("label_height", labels, "height"),
            SettingBinding::list_wide("draw_dimensions", pipes, "draw_dimension"),
            SettingBinding::list_wide("draw_elevations", points, "draw_elevation"),
        ],
        lists: vec![
            ListSchema::new(
                points,
                vec![
                    FieldSchema::new("x", FieldKind::fixed(32, 0.01)),
                    FieldSchema::new("y", FieldKind::fixed(32, 0.01)),
                    FieldSchema::new("z", FieldKind::fixed(32, 0.01)),
                ],
            ),
            ListSchema::new(
                pipes,
                vec![
                    FieldSchema::new("start", FieldKind::reference(points)),
                    FieldSchema::new("end", FieldKind::reference(points)),
                    FieldSchema::new("diameter", FieldKind::uint(12)),
                    FieldSchema::new(
                        "line_type",
                        FieldKind::enumeration(2, &["solid", "dashed", "dash_dot"]),
                    ),
                ],
            ),
            ListSchema::new(
                breaks,
                vec![
                    FieldSchema::new("axis", FieldKind::enumeration(2, &["X", "Y", "Z"])),
                    FieldSchema::new("plane_coord", FieldKind::fixed(32, 0.01)),
                    FieldSchema::new("offset", FieldKind::fixed(32, 0.01)),
                ],
            ),
            ListSchema::new(
                labels,
                vec![
                    // Bound labels die with their pipe; free labels (null
                    // target) outlive any deletion.
                    FieldSchema::new("target", FieldKind::optional_reference_cascading(pipes)),
                    FieldSchema::new("text", FieldKind::Text),
                    FieldSchema::new("height", FieldKind::fixed(16, 0.1)),
                    FieldSchema::new("x", FieldKind::fixed(32, 0.01)),
                    FieldSchema::new("y", FieldKind::fixed(32, 0.01)),
                    FieldSchema::new("z", FieldKind::fixed(32, 0.01)),
                ],
            ),
        ],
    }
}

fn quantize(v: f64) -> f64 {
    (v / 0.01).round() * 0.01
}

fn point_at(pp: &Pp, index: u32) -> Point3 {
    let record = pp.record("points", index).expect("checked point index");
    Point3::new(
        record[0].as_fixed().unwrap_or(0.0),
        record[1].as_fixed().unwrap_or(0.0),
        record[2].as_fixed().unwrap_or(0.0),
    )
}

#[derive(Debug, Clone, Copy)]
struct BreakPlane {
    axis: Axis,
    plane_coord: f64,
    offset: f64,
}

fn break_at(pp: &Pp, index: u32) -> BreakPlane {
    let record = pp.record("breaks", index).expect("checked break index");
    BreakPlane {
        axis: Axis::from_index(record[0].as_enum().unwrap_or(0)).unwrap_or(Axis::Z),
        plane_coord: record[1].as_fixed().unwrap_or(0.0),
        offset: record[2].as_fixed().unwrap_or(0.0),
    }
}

fn all_breaks(pp: &Pp) -> Vec<BreakPlane> {
    (0..pp.len("breaks").unwrap_or(0)).map(|i| break_at(pp, i)).collect()
}

/// Sum of offsets of all breaks whose open half-space contains `p`.
fn break_shift(p: Point3, breaks: &[BreakPlane]) -> Point3 {
    let mut shifted = Point3::new(0.0, 0.0, 0.0);
    for b in breaks {
        if b.axis.coord(p) > b.plane_coord {
            shifted = shifted.add(b.axis.offset_vector(b.offset));
        }
    }
    shifted
}

struct View {
    projection: AxonoProjection,
    scale: f64,
}

fn view_of(pp: &Pp) -> View {
    let angle = pp
        .general_value("depth_angle")
        .ok()
        .and_then(|v| v.as_fixed())
        .filter(|a| *a > 0.0 && *a < 90.0)
        .unwrap_or(45.0);
    let factor = pp
        .general_value("depth_factor")
        .ok()
        .and_then(|v| v.as_fixed())
        .filter(|k| *k > 0.0)
        .unwrap_or(1.0);
    let scale = pp
        .general_value("scale")
        .ok()
        .and_then(|v| v.as_fixed())
        .filter(|s| *s > 0.0)
        .unwrap_or(1.0);
    View {
        projection: AxonoProjection {
            depth_angle_deg: angle,
            depth_factor: factor,
        },
        scale,
    }
}

impl View {
    /// Nature point (already shifted) to paper mm.
    fn to_paper(&self, p: Point3) -> Point2 {
        self.projection.project(p).scale(1.0 / self.scale)
    }
}

/// Append a polyline axis: each input point is reused when it matches an
/// existing point within the merge tolerance, one pipe is created per
/// consecutive pair with the default diameter. Returns (point indices,
/// pipe indices).
pub fn add_axis(pp: &mut Pp, points: &[Point3]) -> Result<(Vec<u32>, Vec<u32>)> {
    if points.len() < 2 {
        return Err(Error::BadArgument(
            "an axis needs at least two points".to_string(),
        ));
    }
    let quantized: Vec<Point3> = points
        .iter()
        .map(|p| Point3::new(quantize(p.x), quantize(p.y), quantize(p.z)))
        .collect();
    for pair in quantized.windows(2) {
        if coincide(pair[0], pair[1]) {
            return Err(Error::DegeneratePolyline);
        }
    }

    let mut point_indices = Vec::with_capacity(points.len());
    for p in &quantized {
        let found = (0..pp.len("points")?).find(|&i| coincide(point_at(pp, i), *p));
        let index = match found {
            Some(i) => i,
            None => pp.add_object(
                "points",
                &[
                    ("x", Value::Fixed(p.x)),
                    ("y", Value::Fixed(p.y)),
                    ("z", Value::Fixed(p.z)),
                ],
            )?,
        };
        point_indices.push(index);
    }

    let mut pipe_indices = Vec::with_capacity(point_indices.len() - 1);
    for pair in point_indices.windows(2) {
        let index = pp.add_object(
            "pipes",
            &[
                ("start", Value::Ref(Some(pair[0]))),
                ("end", Value::Ref(Some(pair[1]))),
                ("line_type", Value::Enum(0)),
            ],
        )?;
        pipe_indices.push(index);
    }
    Ok((point_indices, pipe_indices))
}

fn coincide(a: Point3, b: Point3) -> bool {
    (a.x - b.x).abs() <= POINT_MERGE_TOLERANCE
        && (a.y - b.y).abs() <= POINT_MERGE_TOLERANCE
        && (a.z - b.z).abs() <= POINT_MERGE_TOLERANCE
}

/// True when the pipe crosses the plane strictly (endpoints on the plane
/// do not count) and runs parallel to the plane normal.
fn strictly_crosses(start: Point3, end: Point3, axis: Axis, plane_coord: f64) -> bool {
    let a = axis.coord(start);
    let b = axis.coord(end);
    a.min(b) < plane_coord && plane_coord < a.max(b)
}

fn parallel_to_axis(start: Point3, end: Point3, axis: Axis) -> bool {
    match axis {
        Axis::X => start.y == end.y && start.z == end.z,
        Axis::Y => start.x == end.x && start.z == end.z,
        Axis::Z => start.x == end.x && start.y == end.y,
    }
}

/// Add a break plane. The shift is possible only when every pipe strictly
/// crossing the plane runs along its normal; otherwise the offending
/// pipes are reported and nothing changes.
pub fn add_break(pp: &mut Pp, axis: Axis, plane_coord: f64, offset: f64) -> Result<u32> {
    if offset == 0.0 {
        return Err(Error::BadArgument("break offset must be non-zero".to_string()));
    }
    let plane_coord = quantize(plane_coord);
    let mut offenders = Vec::new();
    for i in 0..pp.len("pipes")? {
        let record = pp.record("pipes", i)?;
        let (start, end) = match (record[0].as_ref_index(), record[1].as_ref_index()) {
            (Some(Some(s)), Some(Some(e))) => (point_at(pp, s), point_at(pp, e)),
            _ => continue,
        };
        if strictly_crosses(start, end, axis, plane_coord) && !parallel_to_axis(start, end, axis) {
            offenders.push(i);
        }
    }
    if !offenders.is_empty() {
        return Err(Error::BreakNotAllowed(offenders));
    }
    pp.add_object(
        "breaks",
        &[
            ("axis", Value::Enum(axis.index())),
            ("plane_coord", Value::Fixed(plane_coord)),
            ("offset", Value::Fixed(offset)),
        ],
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LabelAnchor {
    Pipe(u32),
    Free(Point3),
}

/// Attach a text label to a pipe (drawn beside its midpoint) or at a free
/// 3D position. Height comes from the label-height setting.
pub fn attach_label(pp: &mut Pp, anchor: LabelAnchor, text: &str) -> Result<u32> {
    let (target, pos) = match anchor {
        LabelAnchor::Pipe(i) => (Some(i), Point3::new(0.0, 0.0, 0.0)),
        LabelAnchor::Free(p) => (None, p),
    };
    pp.add_object(
        "labels",
        &[
            ("target", Value::Ref(target)),
            ("text", Value::Text(text.to_string())),
            ("x", Value::Fixed(pos.x)),
            ("y", Value::Fixed(pos.y)),
            ("z", Value::Fixed(pos.z)),
        ],
    )
}

/// Points connected to `index` through pipes.
fn neighbors(pp: &Pp, index: u32) -> Vec<u32> {
    let mut out = Vec::new();
    for i in 0..pp.len("pipes").unwrap_or(0) {
        let record = pp.record("pipes", i).expect("pipe index in range");
        if let (Some(Some(s)), Some(Some(e))) = (record[0].as_ref_index(), record[1].as_ref_index())
        {
            if s == index {
                out.push(e);
            } else if e == index {
                out.push(s);
            }
        }
    }
    out
}

fn rotate(v: Point2, degrees: f64) -> Point2 {
    let a = degrees.to_radians();
    Point2::new(v.x * a.cos() - v.y * a.sin(), v.x * a.sin() + v.y * a.cos())
}

fn unit(v: Point2) -> Option<Point2> {
    let n = v.norm();
    if n <= f64::EPSILON {
        None
    } else {
        Some(v.scale(1.0 / n))
    }
}

fn generate_pipe(pp: &Pp, index: u32) -> Vec<Primitive> {
    let record = pp.record("pipes", index).expect("pipe index in range");
    let (Some(Some(si)), Some(Some(ei))) = (record[0].as_ref_index(), record[1].as_ref_index())
    else {
        return Vec::new();
    };
    let line_type = LineType::from_id(record[3].as_enum().unwrap_or(0) as u8).unwrap_or_default();
    let start = point_at(pp, si);
    let end = point_at(pp, ei);
    let breaks = all_breaks(pp);
    let view = view_of(pp);

    // Crossings sorted along the pipe.
    let mut crossings: Vec<(f64, BreakPlane, Point3)> = Vec::new();
    for b in &breaks {
        let a1 = b.axis.coord(start);
        let a2 = b.axis.coord(end);
        if strictly_crosses(start, end, b.axis, b.plane_coord) {
            let t = (b.plane_coord - a1) / (a2 - a1);
            let q = Point3::new(
                start.x + t * (end.x - start.x),
                start.y + t * (end.y - start.y),
                start.z + t * (end.z - start.z),
            );
            crossings.push((t, *b, q));
        }
    }
    crossings.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));

    let img = |p: Point3| view.to_paper(p.add(break_shift(p, &breaks)));
    let mut primitives = Vec::new();
    let mut pen = img(start);
    let end_img = img(end);
    let direction = unit(end_img.sub(pen));

    for (_, b, q) in &crossings {
        // The shift exactly on the plane excludes this break; each side
        // adds the break's own offset when it lies in the open half-space.
        let base = q.add(break_shift(*q, &breaks));
        let side = |anchor: Point3| {
            if b.axis.coord(anchor) > b.plane_coord {
                base.add(b.axis.offset_vector(b.offset))
            } else {
                base
            }
        };
        let near = view.to_paper(side(start));
        let far = view.to_paper(side(end));
        if pen.distance(near) > 0.0 {
            primitives.push(Primitive::segment(pen, near, 0, line_type));
        }
        if let Some(d) = direction {
            for tip in [near, far] {
                let tick = rotate(d, 45.0).scale(TICK_LENGTH / 2.0);
                primitives.push(Primitive::segment(tip.sub(tick), tip.add(tick), 0, LineType::Solid));
            }
        }
        pen = far;
    }
    if pen.distance(end_img) > 0.0 || crossings.is_empty() {
        primitives.push(Primitive::segment(pen, end_img, 0, line_type));
    }

    if flag(pp, "draw_dimensions") {
        let height = label_height(pp);
        let length = pp
            .speed_entry(1, index as usize)
            .and_then(|e| e.first().copied())
            .unwrap_or_else(|| start.distance(end));
        let mid = Point2::new((img(start).x + end_img.x) / 2.0, (img(start).y + end_img.y) / 2.0);
        let normal = direction
            .map(|d| rotate(d, 90.0))
            .unwrap_or(Point2::new(0.0, 1.0));
        let pos = mid.sub(normal.scale(1.5 * height));
        primitives.push(Primitive::text(pos, height, 0.0, format!("{length:.0}"), 0));
    }

    primitives
}

fn generate_label(pp: &Pp, index: u32) -> Vec<Primitive> {
    let record = pp.record("labels", index).expect("label index in range");
    let target = record[0].as_ref_index().flatten();
    let text = record[1].as_text().unwrap_or("").to_string();
    let height = record[2].as_fixed().unwrap_or(2.5);
    let breaks = all_breaks(pp);
    let view = view_of(pp);

    let pos = match target {
        Some(pipe) => {
            let pipe_record = pp.record("pipes", pipe).expect("ref integrity");
            let (Some(Some(si)), Some(Some(ei))) =
                (pipe_record[0].as_ref_index(), pipe_record[1].as_ref_index())
            else {
                return Vec::new();
            };
            let start = point_at(pp, si);
            let end = point_at(pp, ei);
            let a = view.to_paper(start.add(break_shift(start, &breaks)));
            let b = view.to_paper(end.add(break_shift(end, &breaks)));
            let mid = Point2::new((a.x + b.x) / 2.0, (a.y + b.y) / 2.0);
            let normal = unit(b.sub(a))
                .map(|d| rotate(d, 90.0))
                .unwrap_or(Point2::new(0.0, 1.0));
            mid.add(normal.scale(1.5 * height))
        }
        None => {
            let p = Point3::new(
                record[3].as_fixed().unwrap_or(0.0),
                record[4].as_fixed().unwrap_or(0.0),
                record[5].as_fixed().unwrap_or(0.0),
            );
            view.to_paper(p.add(break_shift(p, &breaks)))
        }
    };
    vec![Primitive::text(pos, height, 0.0, text, 0)]
}

/// Elevation text: z in metres, three decimals, sign always shown.
pub fn elevation_text(z_mm: f64) -> String {
    format!("{:+.3}", z_mm / 1000.0)
}

fn generate_point(pp: &Pp, index: u32) -> Option<Vec<Primitive>> {
    if !flag(pp, "draw_elevations") {
        return None;
    }
    let p = point_at(pp, index);
    let around = neighbors(pp, index);
    if around.is_empty() || around.iter().any(|&n| point_at(pp, n).z == p.z) {
        return None;
    }
    let breaks = all_breaks(pp);
    let view = view_of(pp);
    let height = label_height(pp);
    let pos = view.to_paper(p.add(break_shift(p, &breaks)));
    Some(vec![
        Primitive::marker(pos, MarkerKind::Elevation, 0),
        Primitive::text(
            Point2::new(pos.x + 1.0, pos.y + 0.5),
            height,
            0.0,
            elevation_text(p.z),
            0,
        ),
    ])
}

fn flag(pp: &Pp, name: &str) -> bool {
    pp.general_value(name)
        .ok()
        .and_then(|v| v.as_flag())
        .unwrap_or(false)
}

fn label_height(pp: &Pp) -> f64 {
    pp.general_value("label_height")
        .ok()
        .and_then(|v| v.as_fixed())
        .filter(|h| *h > 0.0)
        .unwrap_or(2.5)
}

pub struct AxonoExtension {
    schema: Arc<PpSchema>,
}

impl AxonoExtension {
    pub fn new() -> Self {
        Self {
            schema: Arc::new(axono_schema()),
        }
    }
}

impl Default for AxonoExtension {
    fn default() -> Self {
        Self::new()
    }
}

const SPECIAL: &[CommandSpec] = &[
    CommandSpec { name: "add-axis", usage: "add-axis <x,y,z> <x,y,z> [...]" },
    CommandSpec { name: "add-break", usage: "add-break <X|Y|Z> <coord> <offset>" },
    CommandSpec { name: "label", usage: "label <pipe-index>|@x,y,z <text>" },
];

fn parse_point3(token: &str) -> Result<Point3> {
    let parts: Vec<&str> = token.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::BadArgument(format!("\"{token}\": expected x,y,z")));
    }
    let mut coords = [0.0f64; 3];
    for (slot, part) in coords.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::BadArgument(format!("\"{token}\": bad coordinate")))?;
    }
    Ok(Point3::new(coords[0], coords[1], coords[2]))
}

impl Extension for AxonoExtension {
    fn id(&self) -> &str {
        EXT_ID
    }

    fn module_type(&self) -> &str {
        MODULE_TYPE
    }

    fn schema(&self) -> &Arc<PpSchema> {
        &self.schema
    }

    fn special_commands(&self) -> &[CommandSpec] {
        SPECIAL
    }

    fn init_settings(&self, drawing: &DrawingSettings) -> Vec<(String, Value)> {
        vec![("label_height".to_string(), Value::Fixed(drawing.text_height))]
    }

    fn speed_values(&self, pp: &Pp, list: &str, index: u32) -> Vec<f64> {
        match list {
            "pipes" => {
                let record = pp.record("pipes", index).expect("pipe index in range");
                if let (Some(Some(s)), Some(Some(e))) =
                    (record[0].as_ref_index(), record[1].as_ref_index())
                {
                    vec![point_at(pp, s).distance(point_at(pp, e))]
                } else {
                    vec![0.0]
                }
            }
            "labels" => {
                let record = pp.record("labels", index).expect("label index in range");
                let text = record[1].as_text().unwrap_or("");
                let height = record[2].as_fixed().unwrap_or(0.0);
                vec![crate::geom::text_width(text, height), height]
            }
            _ => Vec::new(),
        }
    }

    fn generate(&self, pp: &Pp, list: &str, index: u32) -> Option<Vec<Primitive>> {
        match list {
            "points" => generate_point(pp, index),
            "pipes" => Some(generate_pipe(pp, index)),
            "labels" => Some(generate_label(pp, index)),
            _ => None,
        }
    }

    fn run_special(
        &self,
        ctx: SpecialContext<'_>,
        command: &str,
        args: &[String],
    ) -> Result<Vec<String>> {
        match command {
            "add-axis" => {
                let points: Vec<Point3> = args
                    .iter()
                    .map(|t| parse_point3(t))
                    .collect::<Result<_>>()?;
                let (point_indices, pipe_indices) = add_axis(ctx.pp, &points)?;
                Ok(vec![format!(
                    "axis: points [{}], pipes [{}]",
                    join_indices(&point_indices),
                    join_indices(&pipe_indices)
                )])
            }
            "add-break" => {
                let [axis, coord, offset] = args else {
                    return Err(Error::BadArgument(
                        "usage: add-break <X|Y|Z> <coord> <offset>".to_string(),
                    ));
                };
                let axis = Axis::parse(axis)?;
                let coord: f64 = coord
                    .parse()
                    .map_err(|_| Error::BadArgument(format!("\"{coord}\": bad coordinate")))?;
                let offset: f64 = offset
                    .parse()
                    .map_err(|_| Error::BadArgument(format!("\"{offset}\": bad offset")))?;
                let index = add_break(ctx.pp, axis, coord, offset)?;
                Ok(vec![format!("breaks[{index}] added")])
            }
            "label" => {
                let [target, text] = args else {
                    return Err(Error::BadArgument(
                        "usage: label <pipe-index>|@x,y,z <text>".to_string(),
                    ));
                };
                let anchor = if let Some(stripped) = target.strip_prefix('@') {
                    LabelAnchor::Free(parse_point3(stripped)?)
                } else {
                    LabelAnchor::Pipe(target.parse::<u32>().map_err(|_| {
                        Error::BadArgument(format!("\"{target}\": expected pipe index or @x,y,z"))
                    })?)
                };
                let index = attach_label(ctx.pp, anchor, text)?;
                Ok(vec![format!("labels[{index}] added")])
            }
            other => Err(Error::UnknownCommand(other.to_string())),
        }
    }
}

fn join_indices(indices: &[u32]) -> String {
    indices
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(",")
}
