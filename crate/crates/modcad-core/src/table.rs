//! Tabular document modules and specification building. A specification
//! scans the specifying properties of modules in the current drawing and
//! in external drawing files (opened read-only), groups them and fills a
//! table parameter set that regenerates as a grid of segments and texts.

use crate::drawing_file::read_drawing;
use crate::error::{Error, Result};
use crate::extension::{CommandSpec, Extension, SpecialContext};
use crate::geom::{LineType, Point2, Primitive};
use crate::model::{Drawing, DrawingSettings, Module};
use crate::pp::Pp;
use crate::schema::{FieldKind, FieldSchema, ListSchema, PpSchema, SettingBinding};
use crate::value::Value;
use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

pub const EXT_ID: &str = "table";
pub const MODULE_TYPE: &str = "Табличный";

/// Specifying property keys harvested from modules.
pub const PROP_DESIGNATION: &str = "Обозначение";
pub const PROP_NAME: &str = "Наименование";
pub const PROP_MASS: &str = "Масса";
pub const PROP_NOTE: &str = "Примечание";

/// Default specification columns: titles and widths in mm.
pub const DEFAULT_COLUMNS: &[(&str, f64)] = &[
    (PROP_DESIGNATION, 50.0),
    (PROP_NAME, 60.0),
    ("Кол.", 10.0),
    (PROP_MASS, 15.0),
    (PROP_NOTE, 25.0),
];

/// Horizontal inset of cell texts from the cell border, mm.
const TEXT_INSET: f64 = 1.0;

/// Color id marking header texts.
const HEADER_COLOR: u16 = 1;

pub fn table_schema() -> PpSchema {
    PpSchema {
        name: "table".to_string(),
        version: 1,
        general: vec![
            FieldSchema::with_default("anchor_x", FieldKind::fixed(32, 0.01), Value::Fixed(0.0)),
            FieldSchema::with_default("anchor_y", FieldKind::fixed(32, 0.01), Value::Fixed(0.0)),
            FieldSchema::with_default("row_height", FieldKind::fixed(16, 0.1), Value::Fixed(8.0)),
            FieldSchema::with_default("text_height", FieldKind::fixed(16, 0.1), Value::Fixed(2.5)),
            FieldSchema::with_default("header", FieldKind::Flag, Value::Flag(true)),
        ],
        // Cell text height is a list-wide setting: cells carry no height
        // field of their own.
        bindings: vec![SettingBinding::list_wide("text_height", "cells", "height")],
        lists: vec![
            ListSchema::new(
                "columns",
                vec![
                    FieldSchema::new("title", FieldKind::Text),
                    FieldSchema::new("width", FieldKind::fixed(16, 0.1)),
                ],
            ),
            // Rows are pure primary keys; every datum lives in cells.
            ListSchema::new("rows", vec![]),
            ListSchema::new(
                "cells",
                vec![
                    FieldSchema::new("row", FieldKind::reference("rows")),
                    FieldSchema::new("col", FieldKind::reference("columns")),
                    FieldSchema::new("text", FieldKind::Text),
                ],
            ),
        ],
    }
}

pub fn add_row(pp: &mut Pp) -> Result<u32> {
    pp.add_object("rows", &[])
}

pub fn add_column(pp: &mut Pp, title: &str, width: f64) -> Result<u32> {
    pp.add_object(
        "columns",
        &[
            ("title", Value::Text(title.to_string())),
            ("width", Value::Fixed(width)),
        ],
    )
}

/// Upsert one cell, keeping at most one record per (row, col).
pub fn set_cell(pp: &mut Pp, row: u32, col: u32, text: &str) -> Result<()> {
    if row >= pp.len("rows")? {
        return Err(Error::BrokenRef(format!(
            "\"cells.row\" -> rows[{row}] out of range (len {})",
            pp.len("rows")?
        )));
    }
    if col >= pp.len("columns")? {
        return Err(Error::BrokenRef(format!(
            "\"cells.col\" -> columns[{col}] out of range (len {})",
            pp.len("columns")?
        )));
    }
    let existing = (0..pp.len("cells")?).find(|&i| {
        let record = pp.record("cells", i).expect("cell index in range");
        record[0] == Value::Ref(Some(row)) && record[1] == Value::Ref(Some(col))
    });
    match existing {
        Some(i) => pp.set_field("cells", i, "text", Value::Text(text.to_string())),
        None => pp
            .add_object(
                "cells",
                &[
                    ("row", Value::Ref(Some(row))),
                    ("col", Value::Ref(Some(col))),
                    ("text", Value::Text(text.to_string())),
                ],
            )
            .map(|_| ()),
    }
}

pub fn cell_text(pp: &Pp, row: u32, col: u32) -> Option<String> {
    (0..pp.len("cells").ok()?).find_map(|i| {
        let record = pp.record("cells", i).ok()?;
        if record[0] == Value::Ref(Some(row)) && record[1] == Value::Ref(Some(col)) {
            record[2].as_text().map(String::from)
        } else {
            None
        }
    })
}

/// One aggregated specification row.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecRow {
    pub designation: String,
    pub name: String,
    pub quantity: u32,
    pub unit_mass: Option<f64>,
    pub note: Option<String>,
}

fn qualifying(module: &Module) -> Option<(String, String)> {
    let designation = module.properties.get(PROP_DESIGNATION)?.as_text()?;
    let name = module.properties.get(PROP_NAME)?.as_text()?;
    Some((designation.to_string(), name.to_string()))
}

/// Group the specifying properties of all qualifying modules: quantity is
/// the group size, the unit mass must agree within a group, the note is
/// carried from the first member. Rows come out sorted by (designation,
/// name) in code-point order.
pub fn collect_rows<'a>(modules: impl Iterator<Item = &'a Module>) -> Result<Vec<SpecRow>> {
    let mut groups: BTreeMap<(String, String), SpecRow> = BTreeMap::new();
    for module in modules {
        let Some((designation, name)) = qualifying(module) else {
            continue;
        };
        let mass = module.properties.get(PROP_MASS).and_then(|v| v.as_number());
        let note = module
            .properties
            .get(PROP_NOTE)
            .and_then(|v| v.as_text())
            .map(String::from);
        let entry = groups
            .entry((designation.clone(), name.clone()))
            .or_insert(SpecRow {
                designation,
                name,
                quantity: 0,
                unit_mass: None,
                note: None,
            });
        if entry.quantity == 0 {
            entry.note = note;
        }
        entry.quantity += 1;
        match (entry.unit_mass, mass) {
            (None, Some(m)) => entry.unit_mass = Some(m),
            (Some(have), Some(new)) if have != new => {
                return Err(Error::InconsistentMass(entry.designation.clone()))
            }
            _ => {}
        }
    }
    Ok(groups.into_values().collect())
}

/// Build a specification table over the current drawing plus external
/// drawing files. External sheets are data sources only and are never
/// written to.
pub fn build_specification(drawing: &Drawing, external: &[&Path]) -> Result<Pp> {
    let mut modules: Vec<Module> = drawing.modules().map(|(_, m)| m.clone()).collect();
    for path in external {
        let source = read_drawing(path).map_err(|e| Error::UnreadableSource {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        modules.extend(source.modules().map(|(_, m)| m.clone()));
    }
    let rows = collect_rows(modules.iter())?;

    let mut pp = Pp::new(Arc::new(table_schema()));
    for (title, width) in DEFAULT_COLUMNS {
        add_column(&mut pp, title, *width)?;
    }
    for row in &rows {
        let r = add_row(&mut pp)?;
        set_cell(&mut pp, r, 0, &row.designation)?;
        set_cell(&mut pp, r, 1, &row.name)?;
        set_cell(&mut pp, r, 2, &row.quantity.to_string())?;
        if let Some(mass) = row.unit_mass {
            set_cell(&mut pp, r, 3, &format!("{mass:.3}"))?;
        }
        if let Some(note) = &row.note {
            set_cell(&mut pp, r, 4, note)?;
        }
    }
    Ok(pp)
}

struct Layout {
    /// Cumulative x of column boundaries: x[0] = 0, x[n] = total width.
    xs: Vec<f64>,
    row_height: f64,
    text_height: f64,
    header: bool,
    rows: u32,
}

impl Layout {
    fn of(pp: &Pp) -> Layout {
        let columns = pp.len("columns").unwrap_or(0);
        let mut xs = Vec::with_capacity(columns as usize + 1);
        xs.push(0.0);
        for i in 0..columns {
            let width = pp
                .record("columns", i)
                .ok()
                .and_then(|r| r[1].as_fixed())
                .unwrap_or(0.0)
                .max(0.0);
            xs.push(xs[i as usize] + width);
        }
        Layout {
            xs,
            row_height: general_fixed(pp, "row_height", 8.0),
            text_height: general_fixed(pp, "text_height", 2.5),
            header: pp
                .general_value("header")
                .ok()
                .and_then(|v| v.as_flag())
                .unwrap_or(true),
            rows: pp.len("rows").unwrap_or(0),
        }
    }

    fn total_width(&self) -> f64 {
        *self.xs.last().unwrap_or(&0.0)
    }

    fn total_height(&self) -> f64 {
        let header = if self.header { self.row_height } else { 0.0 };
        header + self.rows as f64 * self.row_height
    }

    /// Bottom y of row `j` (rows run top-down under the header).
    fn row_bottom(&self, j: u32) -> f64 {
        let header = if self.header { self.row_height } else { 0.0 };
        self.total_height() - header - (j + 1) as f64 * self.row_height
    }

    fn body_top(&self) -> f64 {
        if self.header {
            self.total_height() - self.row_height
        } else {
            self.total_height()
        }
    }

    fn text_pos(&self, x_left: f64, y_bottom: f64) -> Point2 {
        Point2::new(
            x_left + TEXT_INSET,
            y_bottom + (self.row_height - self.text_height) / 2.0,
        )
    }
}

fn general_fixed(pp: &Pp, name: &str, fallback: f64) -> f64 {
    pp.general_value(name)
        .ok()
        .and_then(|v| v.as_fixed())
        .filter(|v| *v > 0.0)
        .unwrap_or(fallback)
}

fn rect_outline(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<Primitive> {
    let corners = [
        Point2::new(x0, y0),
        Point2::new(x1, y0),
        Point2::new(x1, y1),
        Point2::new(x0, y1),
    ];
    (0..4)
        .map(|i| Primitive::segment(corners[i], corners[(i + 1) % 4], 0, LineType::Solid))
        .collect()
}

fn generate_column(pp: &Pp, index: u32) -> Option<Vec<Primitive>> {
    let layout = Layout::of(pp);
    let i = index as usize;
    if i + 1 >= layout.xs.len() {
        return None;
    }
    let mut primitives = Vec::new();
    if layout.header {
        let y1 = layout.total_height();
        let y0 = y1 - layout.row_height;
        primitives.extend(rect_outline(layout.xs[i], y0, layout.xs[i + 1], y1));
        let title = pp
            .record("columns", index)
            .ok()
            .and_then(|r| r[0].as_text().map(String::from))
            .unwrap_or_default();
        primitives.push(Primitive::text(
            layout.text_pos(layout.xs[i], y0),
            layout.text_height,
            0.0,
            title,
            HEADER_COLOR,
        ));
    }
    // Inner column boundary through the body.
    let is_inner = (i + 2) < layout.xs.len();
    if is_inner && layout.rows > 0 {
        let x = layout.xs[i + 1];
        primitives.push(Primitive::segment(
            Point2::new(x, layout.row_bottom(layout.rows - 1)),
            Point2::new(x, layout.body_top()),
            0,
            LineType::Solid,
        ));
    }
    if primitives.is_empty() {
        None
    } else {
        Some(primitives)
    }
}

fn generate_row(pp: &Pp, index: u32) -> Option<Vec<Primitive>> {
    let layout = Layout::of(pp);
    if layout.total_width() <= 0.0 {
        return None;
    }
    let y0 = layout.row_bottom(index);
    Some(rect_outline(0.0, y0, layout.total_width(), y0 + layout.row_height))
}

fn generate_cell(pp: &Pp, index: u32) -> Option<Vec<Primitive>> {
    let record = pp.record("cells", index).ok()?;
    let text = record[2].as_text()?.to_string();
    if text.is_empty() {
        return None;
    }
    let row = record[0].as_ref_index().flatten()?;
    let col = record[1].as_ref_index().flatten()?;
    let layout = Layout::of(pp);
    if col as usize + 1 >= layout.xs.len() || row >= layout.rows {
        return None;
    }
    Some(vec![Primitive::text(
        layout.text_pos(layout.xs[col as usize], layout.row_bottom(row)),
        layout.text_height,
        0.0,
        text,
        0,
    )])
}

pub struct TableExtension {
    schema: Arc<PpSchema>,
}

impl TableExtension {
    pub fn new() -> Self {
        Self {
            schema: Arc::new(table_schema()),
        }
    }
}

impl Default for TableExtension {
    fn default() -> Self {
        Self::new()
    }
}

const SPECIAL: &[CommandSpec] = &[
    CommandSpec { name: "build", usage: "build [path.mcd ...]" },
    CommandSpec { name: "set-cell", usage: "set-cell <row> <col> <text>" },
    CommandSpec { name: "add-row", usage: "add-row" },
];

impl Extension for TableExtension {
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
        vec![("text_height".to_string(), Value::Fixed(drawing.text_height))]
    }

    fn speed_values(&self, pp: &Pp, list: &str, index: u32) -> Vec<f64> {
        if list != "cells" {
            return Vec::new();
        }
        let record = pp.record("cells", index).expect("cell index in range");
        let text = record[2].as_text().unwrap_or("");
        let height = general_fixed(pp, "text_height", 2.5);
        vec![crate::geom::text_width(text, height), height]
    }

    fn generate(&self, pp: &Pp, list: &str, index: u32) -> Option<Vec<Primitive>> {
        match list {
            "columns" => generate_column(pp, index),
            "rows" => generate_row(pp, index),
            "cells" => generate_cell(pp, index),
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
            "build" => {
                let paths: Vec<&Path> = args
                    .iter()
                    .filter(|a| a.as_str() != "--from")
                    .map(Path::new)
                    .collect();
                let built = build_specification(ctx.drawing, &paths)?;
                let rows = built.len("rows")?;
                *ctx.pp = built;
                Ok(vec![format!("specification built: {rows} rows")])
            }
            "set-cell" => {
                let [row, col, text] = args else {
                    return Err(Error::BadArgument(
                        "usage: set-cell <row> <col> <text>".to_string(),
                    ));
                };
                let row: u32 = row
                    .parse()
                    .map_err(|_| Error::BadArgument(format!("\"{row}\": expected row index")))?;
                let col: u32 = col
                    .parse()
                    .map_err(|_| Error::BadArgument(format!("\"{col}\": expected column index")))?;
                set_cell(ctx.pp, row, col, text)?;
                Ok(vec![format!("cell ({row},{col}) set")])
            }
            "add-row" => {
                let index = add_row(ctx.pp)?;
                Ok(vec![format!("rows[{index}] added")])
            }
            other => Err(Error::UnknownCommand(other.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Shape;
    use crate::model::{Element, PropertyValue};

    fn fresh() -> Pp {
        let schema = Arc::new(table_schema());
        assert!(schema.validate().is_empty(), "{:?}", schema.validate());
        Pp::new(schema)
    }

    fn armature(designation: &str, name: &str, mass: Option<f64>) -> Module {
        let mut m = Module::new("Арматура", Point2::default());
        m.properties.insert(
            PROP_DESIGNATION.to_string(),
            PropertyValue::Text(designation.to_string()),
        );
        m.properties
            .insert(PROP_NAME.to_string(), PropertyValue::Text(name.to_string()));
        if let Some(mass) = mass {
            m.properties
                .insert(PROP_MASS.to_string(), PropertyValue::Number(mass));
        }
        m
    }

    #[test]
    fn three_equal_modules_make_one_row_of_three() {
        let mut drawing = Drawing::new(420.0, 297.0);
        for _ in 0..3 {
            drawing.add_element(Element::Module(armature("15кч18п", "Вентиль", Some(3.4))));
        }
        let pp = build_specification(&drawing, &[]).unwrap();
        assert_eq!(pp.len("rows").unwrap(), 1);
        assert_eq!(cell_text(&pp, 0, 0).as_deref(), Some("15кч18п"));
        assert_eq!(cell_text(&pp, 0, 2).as_deref(), Some("3"));
        assert_eq!(cell_text(&pp, 0, 3).as_deref(), Some("3.400"));
    }

    #[test]
    fn no_qualifying_modules_yield_empty_table() {
        let drawing = Drawing::new(420.0, 297.0);
        let pp = build_specification(&drawing, &[]).unwrap();
        assert_eq!(pp.len("rows").unwrap(), 0);
        assert_eq!(pp.len("columns").unwrap(), 5);
    }

    #[test]
    fn differing_mass_in_one_group_is_an_error() {
        let mut drawing = Drawing::new(420.0, 297.0);
        drawing.add_element(Element::Module(armature("15кч18п", "Вентиль", Some(3.4))));
        drawing.add_element(Element::Module(armature("15кч18п", "Вентиль", Some(3.5))));
        let err = build_specification(&drawing, &[]).unwrap_err();
        assert!(matches!(err, Error::InconsistentMass(_)));
    }

    #[test]
    fn missing_mass_does_not_conflict() {
        let mut drawing = Drawing::new(420.0, 297.0);
        drawing.add_element(Element::Module(armature("a", "b", None)));
        drawing.add_element(Element::Module(armature("a", "b", Some(1.5))));
        let pp = build_specification(&drawing, &[]).unwrap();
        assert_eq!(cell_text(&pp, 0, 2).as_deref(), Some("2"));
        assert_eq!(cell_text(&pp, 0, 3).as_deref(), Some("1.500"));
    }

    #[test]
    fn rows_sort_by_designation_then_name() {
        let mut drawing = Drawing::new(420.0, 297.0);
        drawing.add_element(Element::Module(armature("b", "z", None)));
        drawing.add_element(Element::Module(armature("a", "z", None)));
        drawing.add_element(Element::Module(armature("a", "m", None)));
        let pp = build_specification(&drawing, &[]).unwrap();
        assert_eq!(cell_text(&pp, 0, 0).as_deref(), Some("a"));
        assert_eq!(cell_text(&pp, 0, 1).as_deref(), Some("m"));
        assert_eq!(cell_text(&pp, 1, 1).as_deref(), Some("z"));
        assert_eq!(cell_text(&pp, 2, 0).as_deref(), Some("b"));
    }

    #[test]
    fn set_cell_upserts() {
        let mut pp = fresh();
        add_column(&mut pp, "A", 40.0).unwrap();
        let row = add_row(&mut pp).unwrap();
        set_cell(&mut pp, row, 0, "first").unwrap();
        set_cell(&mut pp, row, 0, "second").unwrap();
        assert_eq!(pp.len("cells").unwrap(), 1);
        assert_eq!(cell_text(&pp, row, 0).as_deref(), Some("second"));
    }

    #[test]
    fn set_cell_on_missing_row_is_broken_ref() {
        let mut pp = fresh();
        add_column(&mut pp, "A", 40.0).unwrap();
        assert!(matches!(
            set_cell(&mut pp, 5, 0, "x"),
            Err(Error::BrokenRef(_))
        ));
    }

    #[test]
    fn add_row_on_empty_table_is_zero() {
        let mut pp = fresh();
        assert_eq!(add_row(&mut pp).unwrap(), 0);
    }

    #[test]
    fn grid_matches_cumulative_widths() {
        let mut pp = fresh();
        pp.set_general("header", Value::Flag(false)).unwrap();
        add_column(&mut pp, "A", 40.0).unwrap();
        add_column(&mut pp, "B", 60.0).unwrap();
        add_row(&mut pp).unwrap();

        // Row strip: 100 x 8 rectangle.
        let row = generate_row(&pp, 0).unwrap();
        let bounds = crate::regen::primitive_bounds(row.iter()).unwrap();
        assert_eq!(bounds.width(), 100.0);
        assert_eq!(bounds.height(), 8.0);

        // One inner vertical at the 40 mm boundary.
        let inner = generate_column(&pp, 0).unwrap();
        assert_eq!(inner.len(), 1);
        match &inner[0].shape {
            Shape::Segment { a, b } => {
                assert_eq!(a.x, 40.0);
                assert_eq!(b.x, 40.0);
            }
            other => panic!("unexpected shape {other:?}"),
        }
        // The last column adds no separate boundary without a header.
        assert!(generate_column(&pp, 1).is_none());
    }
}
