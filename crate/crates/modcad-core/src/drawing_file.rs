//! The drawing container file, magic "MCD1": sheet size, settings and the
//! element list. Modules store their type name, properties, payload bytes
//! and regenerated geometry. Working modules are session state and are
//! never written. All multi-byte integers are little-endian; the exact
//! layout is documented in FORMAT.md.

use crate::error::{Error, Result};
use crate::geom::{LineType, MarkerKind, Point2, Primitive, Shape};
use crate::model::{Drawing, DrawingSettings, Element, ElementId, Module, PropertyValue};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"MCD1";
pub const VERSION: u16 = 1;

struct Writer {
    out: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Self { out: Vec::new() }
    }

    fn u8(&mut self, v: u8) {
        self.out.push(v);
    }

    fn u16(&mut self, v: u16) {
        self.out.extend_from_slice(&v.to_le_bytes());
    }

    fn u32(&mut self, v: u32) {
        self.out.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.out.extend_from_slice(&v.to_le_bytes());
    }

    fn f64(&mut self, v: f64) {
        self.out.extend_from_slice(&v.to_le_bytes());
    }

    fn point(&mut self, p: Point2) {
        self.f64(p.x);
        self.f64(p.y);
    }

    fn str16(&mut self, s: &str) -> Result<()> {
        if s.len() > u16::MAX as usize {
            return Err(Error::DrawingFile(format!(
                "string of {} bytes exceeds 65535",
                s.len()
            )));
        }
        self.u16(s.len() as u16);
        self.out.extend_from_slice(s.as_bytes());
        Ok(())
    }

    fn bytes32(&mut self, b: &[u8]) -> Result<()> {
        if b.len() > u32::MAX as usize {
            return Err(Error::DrawingFile("byte block too large".to_string()));
        }
        self.u32(b.len() as u32);
        self.out.extend_from_slice(b);
        Ok(())
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|e| *e <= self.data.len())
            .ok_or_else(|| Error::DrawingFile(format!("unexpected end at byte {}", self.pos)))?;
        let slice = &self.data[self.pos..end];
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        let v = f64::from_le_bytes(self.take(8)?.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::DrawingFile("non-finite number".to_string()));
        }
        Ok(v)
    }

    fn point(&mut self) -> Result<Point2> {
        Ok(Point2::new(self.f64()?, self.f64()?))
    }

    fn str16(&mut self) -> Result<String> {
        let len = self.u16()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::DrawingFile("string is not UTF-8".to_string()))
    }

    fn bytes32(&mut self) -> Result<Vec<u8>> {
        let len = self.u32()? as usize;
        Ok(self.take(len)?.to_vec())
    }

    fn at_end(&self) -> bool {
        self.pos == self.data.len()
    }
}

fn write_primitive(w: &mut Writer, p: &Primitive) -> Result<()> {
    match &p.shape {
        Shape::Segment { a, b } => {
            w.u8(0);
            w.u16(p.color);
            w.u8(p.line_type.id());
            w.point(*a);
            w.point(*b);
        }
        Shape::Polyline { points } => {
            w.u8(1);
            w.u16(p.color);
            w.u8(p.line_type.id());
            w.u32(points.len() as u32);
            for pt in points {
                w.point(*pt);
            }
        }
        Shape::Circle { center, radius } => {
            w.u8(2);
            w.u16(p.color);
            w.u8(p.line_type.id());
            w.point(*center);
            w.f64(*radius);
        }
        Shape::Arc {
            center,
            radius,
            start_deg,
            sweep_deg,
        } => {
            w.u8(3);
            w.u16(p.color);
            w.u8(p.line_type.id());
            w.point(*center);
            w.f64(*radius);
            w.f64(*start_deg);
            w.f64(*sweep_deg);
        }
        Shape::Text {
            pos,
            height,
            angle_deg,
            content,
        } => {
            w.u8(4);
            w.u16(p.color);
            w.u8(p.line_type.id());
            w.point(*pos);
            w.f64(*height);
            w.f64(*angle_deg);
            w.str16(content)?;
        }
        Shape::Marker { pos, kind } => {
            w.u8(5);
            w.u16(p.color);
            w.u8(p.line_type.id());
            w.point(*pos);
            w.u8(kind.id());
        }
    }
    Ok(())
}

fn read_primitive(r: &mut Reader) -> Result<Primitive> {
    let kind = r.u8()?;
    let color = r.u16()?;
    let line_type = LineType::from_id(r.u8()?)
        .ok_or_else(|| Error::DrawingFile("bad line type".to_string()))?;
    let shape = match kind {
        0 => Shape::Segment {
            a: r.point()?,
            b: r.point()?,
        },
        1 => {
            let count = r.u32()? as usize;
            if count as u64 * 16 > (r.data.len() - r.pos) as u64 {
                return Err(Error::DrawingFile("polyline count exceeds data".to_string()));
            }
            let mut points = Vec::with_capacity(count);
            for _ in 0..count {
                points.push(r.point()?);
            }
            Shape::Polyline { points }
        }
        2 => Shape::Circle {
            center: r.point()?,
            radius: r.f64()?,
        },
        3 => Shape::Arc {
            center: r.point()?,
            radius: r.f64()?,
            start_deg: r.f64()?,
            sweep_deg: r.f64()?,
        },
        4 => Shape::Text {
            pos: r.point()?,
            height: r.f64()?,
            angle_deg: r.f64()?,
            content: r.str16()?,
        },
        5 => Shape::Marker {
            pos: r.point()?,
            kind: MarkerKind::from_id(r.u8()?)
                .ok_or_else(|| Error::DrawingFile("bad marker kind".to_string()))?,
        },
        other => return Err(Error::DrawingFile(format!("bad shape kind {other}"))),
    };
    if !shape.is_valid() {
        return Err(Error::DrawingFile("invalid shape geometry".to_string()));
    }
    Ok(Primitive {
        shape,
        color,
        line_type,
    })
}

fn write_property(w: &mut Writer, key: &str, value: &PropertyValue) -> Result<()> {
    w.str16(key)?;
    match value {
        PropertyValue::Text(s) => {
            w.u8(0);
            w.str16(s)?;
        }
        PropertyValue::Number(n) => {
            w.u8(1);
            w.f64(*n);
        }
        PropertyValue::Point(p) => {
            w.u8(2);
            w.point(*p);
        }
        PropertyValue::Flag(b) => {
            w.u8(3);
            w.u8(*b as u8);
        }
        PropertyValue::Bytes(b) => {
            w.u8(4);
            w.bytes32(b)?;
        }
    }
    Ok(())
}

fn read_property(r: &mut Reader) -> Result<(String, PropertyValue)> {
    let key = r.str16()?;
    let value = match r.u8()? {
        0 => PropertyValue::Text(r.str16()?),
        1 => PropertyValue::Number(r.f64()?),
        2 => PropertyValue::Point(r.point()?),
        3 => PropertyValue::Flag(r.u8()? != 0),
        4 => PropertyValue::Bytes(r.bytes32()?),
        other => return Err(Error::DrawingFile(format!("bad property kind {other}"))),
    };
    Ok((key, value))
}

/// Serialize a drawing. Working elements are skipped: they belong to an
/// editing session, not to the sheet.
pub fn to_bytes(drawing: &Drawing) -> Result<Vec<u8>> {
    let mut w = Writer::new();
    w.out.extend_from_slice(MAGIC);
    w.u16(VERSION);
    w.f64(drawing.sheet_width);
    w.f64(drawing.sheet_height);
    w.u16(drawing.settings.color);
    w.u8(drawing.settings.line_type_id);
    w.f64(drawing.settings.text_height);
    w.u64(drawing.next_id());

    let persisted: Vec<&(ElementId, Element)> = drawing
        .elements()
        .iter()
        .filter(|(_, e)| !matches!(e, Element::Working(_)))
        .collect();
    w.u32(persisted.len() as u32);
    for (id, element) in persisted {
        w.u64(id.0);
        match element {
            Element::Primitive(p) => {
                w.u8(0);
                write_primitive(&mut w, p)?;
            }
            Element::Module(m) => {
                w.u8(1);
                w.str16(&m.type_name)?;
                w.point(m.anchor);
                w.u16(m.properties.len() as u16);
                for (key, value) in &m.properties {
                    write_property(&mut w, key, value)?;
                }
                w.bytes32(&m.payload)?;
                w.u32(m.geometry.len() as u32);
                for p in &m.geometry {
                    write_primitive(&mut w, p)?;
                }
            }
            Element::Working(_) => unreachable!("filtered above"),
        }
    }
    Ok(w.out)
}

pub fn from_bytes(data: &[u8]) -> Result<Drawing> {
    let mut r = Reader::new(data);
    if r.take(4)? != MAGIC {
        return Err(Error::DrawingFile("not a drawing file".to_string()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::DrawingFile(format!("unsupported version {version}")));
    }
    let sheet_width = r.f64()?;
    let sheet_height = r.f64()?;
    if sheet_width <= 0.0 || sheet_height <= 0.0 {
        return Err(Error::DrawingFile("non-positive sheet size".to_string()));
    }
    let settings = DrawingSettings {
        color: r.u16()?,
        line_type_id: r.u8()?,
        text_height: r.f64()?,
    };
    let next_id = r.u64()?;
    let count = r.u32()? as usize;

    let mut elements = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for _ in 0..count {
        let id = ElementId(r.u64()?);
        if !seen.insert(id) {
            return Err(Error::DrawingFile(format!("duplicate element id {id}")));
        }
        if id.0 >= next_id {
            return Err(Error::DrawingFile(format!(
                "element id {id} not below next id {next_id}"
            )));
        }
        let element = match r.u8()? {
            0 => Element::Primitive(read_primitive(&mut r)?),
            1 => {
                let type_name = r.str16()?;
                let anchor = r.point()?;
                let prop_count = r.u16()? as usize;
                let mut module = Module::new(&type_name, anchor);
                for _ in 0..prop_count {
                    let (key, value) = read_property(&mut r)?;
                    module.properties.insert(key, value);
                }
                module.payload = r.bytes32()?;
                let geometry_count = r.u32()? as usize;
                for _ in 0..geometry_count {
                    module.geometry.push(read_primitive(&mut r)?);
                }
                Element::Module(module)
            }
            other => return Err(Error::DrawingFile(format!("bad element kind {other}"))),
        };
        elements.push((id, element));
    }
    if !r.at_end() {
        return Err(Error::DrawingFile("trailing bytes".to_string()));
    }
    Ok(Drawing::from_parts(
        sheet_width,
        sheet_height,
        settings,
        elements,
        next_id,
    ))
}

pub fn write_drawing(drawing: &Drawing, path: &Path) -> Result<()> {
    std::fs::write(path, to_bytes(drawing)?)?;
    Ok(())
}

pub fn read_drawing(path: &Path) -> Result<Drawing> {
    let data = std::fs::read(path)?;
    from_bytes(&data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regen::{Tag, WorkingModule};

    fn sample() -> Drawing {
        let mut d = Drawing::new(420.0, 297.0);
        d.add_element(Element::Primitive(Primitive::segment(
            Point2::new(0.0, 0.0),
            Point2::new(10.0, 5.0),
            3,
            LineType::Dashed,
        )));
        let mut m = Module::new("Арматура", Point2::new(50.0, 60.0));
        m.properties.insert(
            "Обозначение".to_string(),
            PropertyValue::Text("15кч18п".to_string()),
        );
        m.properties
            .insert("Масса".to_string(), PropertyValue::Number(3.4));
        m.payload = vec![1, 2, 3];
        m.geometry.push(Primitive::text(
            Point2::new(1.0, 1.0),
            2.5,
            0.0,
            "Вентиль",
            0,
        ));
        d.add_element(Element::Module(m));
        d
    }

    #[test]
    fn round_trip_preserves_drawing() {
        let d = sample();
        let bytes = to_bytes(&d).unwrap();
        let back = from_bytes(&bytes).unwrap();
        assert_eq!(back, d);
        // Byte-determinism of the writer.
        assert_eq!(to_bytes(&back).unwrap(), bytes);
    }

    #[test]
    fn working_elements_are_not_persisted() {
        let mut d = sample();
        d.add_element(Element::Working(WorkingModule {
            ext_id: "axono".to_string(),
            tag: Tag::new("pipes", 0),
            primitives: vec![],
        }));
        let back = from_bytes(&to_bytes(&d).unwrap()).unwrap();
        assert_eq!(back.elements().len(), 2);
        assert_eq!(back.next_id(), d.next_id());
    }

    #[test]
    fn truncated_file_is_an_error() {
        let bytes = to_bytes(&sample()).unwrap();
        for cut in [0, 3, 10, bytes.len() - 1] {
            assert!(from_bytes(&bytes[..cut]).is_err(), "cut at {cut}");
        }
    }

    #[test]
    fn foreign_magic_is_rejected() {
        assert!(from_bytes(b"PPC1rest").is_err());
    }
}
