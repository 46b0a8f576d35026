//! Deterministic, diff-friendly text dump of a drawing: elements in
//! order, property keys sorted, numbers with three decimals, payloads
//! expanded whenever their header matches a shipped schema.

use crate::codec::{decode_compact, CompactImage};
use crate::geom::{fmt_mm, LineType, MarkerKind, Primitive, Shape};
use crate::model::{Drawing, Element, PropertyValue};
use crate::pp::Pp;
use crate::schemas::schema_by_header;
use std::fmt::Write;

fn line_type_word(lt: LineType) -> &'static str {
    match lt {
        LineType::Solid => "solid",
        LineType::Dashed => "dashed",
        LineType::DashDot => "dash_dot",
    }
}

fn fmt_primitive(p: &Primitive) -> String {
    let body = match &p.shape {
        Shape::Segment { a, b } => format!("segment {a}-{b}"),
        Shape::Polyline { points } => {
            let coords: Vec<String> = points.iter().map(|q| q.to_string()).collect();
            format!("polyline {}", coords.join(" "))
        }
        Shape::Circle { center, radius } => {
            format!("circle {center} r={}", fmt_mm(*radius))
        }
        Shape::Arc {
            center,
            radius,
            start_deg,
            sweep_deg,
        } => format!(
            "arc {center} r={} start={} sweep={}",
            fmt_mm(*radius),
            fmt_mm(*start_deg),
            fmt_mm(*sweep_deg)
        ),
        Shape::Text {
            pos,
            height,
            angle_deg,
            content,
        } => format!(
            "text {pos} h={} a={} \"{content}\"",
            fmt_mm(*height),
            fmt_mm(*angle_deg)
        ),
        Shape::Marker { pos, kind } => format!(
            "marker {pos} {}",
            match kind {
                MarkerKind::Dot => "dot",
                MarkerKind::Elevation => "elevation",
            }
        ),
    };
    format!("{body} color={} lt={}", p.color, line_type_word(p.line_type))
}

fn fmt_property(value: &PropertyValue) -> String {
    match value {
        PropertyValue::Text(s) => format!("\"{s}\""),
        PropertyValue::Number(n) => fmt_mm(*n),
        PropertyValue::Point(p) => p.to_string(),
        PropertyValue::Flag(b) => b.to_string(),
        PropertyValue::Bytes(b) => format!("{}B", b.len()),
    }
}

fn dump_pp(out: &mut String, pp: &Pp, indent: &str) {
    let schema = pp.schema();
    let _ = writeln!(out, "{indent}payload schema \"{}\" v{}", schema.name, schema.version);
    let mut general = String::new();
    for (f, v) in schema.general.iter().zip(pp.general_values()) {
        if !general.is_empty() {
            general.push(' ');
        }
        let _ = write!(general, "{}={}", f.name, v.display(&f.kind));
    }
    let _ = writeln!(out, "{indent}general {general}");
    for (li, ls) in schema.lists.iter().enumerate() {
        let records = pp.list_records(li);
        let _ = writeln!(out, "{indent}{}: {}", ls.name, records.len());
        for (ri, record) in records.iter().enumerate() {
            let mut fields = String::new();
            for (f, v) in ls.fields.iter().zip(record) {
                if !fields.is_empty() {
                    fields.push(' ');
                }
                let _ = write!(fields, "{}={}", f.name, v.display(&f.kind));
            }
            let _ = writeln!(out, "{indent}  [{ri}] {fields}");
        }
    }
}

/// Render the whole drawing as stable text.
pub fn dump_drawing(drawing: &Drawing) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "sheet {} {}",
        fmt_mm(drawing.sheet_width),
        fmt_mm(drawing.sheet_height)
    );
    let _ = writeln!(
        out,
        "settings color={} line_type={} text_height={}",
        drawing.settings.color,
        drawing.settings.line_type_id,
        fmt_mm(drawing.settings.text_height)
    );
    let _ = writeln!(out, "elements {}", drawing.elements().len());
    for (id, element) in drawing.elements() {
        match element {
            Element::Primitive(p) => {
                let _ = writeln!(out, "[{id}] {}", fmt_primitive(p));
            }
            Element::Module(m) => {
                let _ = writeln!(
                    out,
                    "[{id}] module \"{}\" anchor={} payload={}B geometry={}",
                    m.type_name,
                    m.anchor,
                    m.payload.len(),
                    m.geometry.len()
                );
                for (key, value) in &m.properties {
                    let _ = writeln!(out, "    prop {key}={}", fmt_property(value));
                }
                if m.has_payload() {
                    let image = CompactImage {
                        bytes: m.payload.clone(),
                    };
                    let decoded = image
                        .header()
                        .ok()
                        .and_then(|(name, hash)| schema_by_header(&name, hash))
                        .and_then(|schema| decode_compact(&image, &schema).ok());
                    match decoded {
                        Some(pp) => dump_pp(&mut out, &pp, "    "),
                        None => {
                            let _ = writeln!(out, "    payload (unknown schema)");
                        }
                    }
                }
                for p in &m.geometry {
                    let _ = writeln!(out, "    {}", fmt_primitive(p));
                }
            }
            Element::Working(w) => {
                let _ = writeln!(
                    out,
                    "[{id}] working {} {} primitives={}",
                    w.ext_id,
                    w.tag,
                    w.primitives.len()
                );
                for p in &w.primitives {
                    let _ = writeln!(out, "    {}", fmt_primitive(p));
                }
            }
        }
    }
    out
}
