//! Python bindings: parameter sets, the engine with both reference
//! extensions, drawings and SVG export, driven in-process.
//!
//! Usage from Python:
//!
//!     import modcad
//!     proj = modcad.Project(420, 297)
//!     proj.run("axono", "add-axis", ["0,0,0", "0,0,2500"])
//!     proj.run("axono", "place", ["60,120"])
//!     svg = proj.svg()

use modcad_core::codec::{decode_compact, encode_compact, CompactImage};
use modcad_core::drawing_file;
use modcad_core::dump::dump_drawing;
use modcad_core::error::Error;
use modcad_core::extension::{recompute_speed_vars, Engine};
use modcad_core::geom::{Point2, Point3};
use modcad_core::model::Drawing;
use modcad_core::pp::Pp;
use modcad_core::schema::FieldKind;
use modcad_core::schemas::{schema_by_header, shipped_schemas};
use modcad_core::script;
use modcad_core::svg::render_drawing;
use modcad_core::value::Value;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};
use std::path::PathBuf;

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::UseAfterRelease | Error::Internal(_) => PyRuntimeError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn value_to_py(py: Python<'_>, value: &Value, kind: &FieldKind) -> Py<PyAny> {
    match (value, kind) {
        (Value::Enum(i), FieldKind::Enum { labels, .. }) => labels
            .get(*i as usize)
            .cloned()
            .unwrap_or_else(|| i.to_string())
            .into_pyobject(py)
            .unwrap()
            .into_any()
            .unbind(),
        (Value::UInt(v), _) => v.into_pyobject(py).unwrap().into_any().unbind(),
        (Value::Int(v), _) => v.into_pyobject(py).unwrap().into_any().unbind(),
        (Value::Fixed(v), _) => v.into_pyobject(py).unwrap().into_any().unbind(),
        (Value::Text(s), _) => s.into_pyobject(py).unwrap().into_any().unbind(),
        (Value::Flag(b), _) => b.into_pyobject(py).unwrap().to_owned().into_any().unbind(),
        (Value::Ref(Some(i)), _) => i.into_pyobject(py).unwrap().into_any().unbind(),
        (Value::Ref(None), _) => py.None(),
        (Value::Enum(i), _) => i.into_pyobject(py).unwrap().into_any().unbind(),
    }
}

fn value_from_py(obj: &Bound<'_, PyAny>, kind: &FieldKind) -> PyResult<Value> {
    let fail = |msg: &str| PyValueError::new_err(msg.to_string());
    Ok(match kind {
        FieldKind::UInt { .. } => Value::UInt(obj.extract::<u64>()?),
        FieldKind::Int { .. } => Value::Int(obj.extract::<i64>()?),
        FieldKind::Fixed { .. } => Value::Fixed(obj.extract::<f64>()?),
        FieldKind::Text => Value::Text(obj.extract::<String>()?),
        FieldKind::Flag => Value::Flag(obj.extract::<bool>()?),
        FieldKind::Ref { optional, .. } => {
            if obj.is_none() {
                if *optional {
                    Value::Ref(None)
                } else {
                    return Err(fail("reference is not optional"));
                }
            } else {
                Value::Ref(Some(obj.extract::<u32>()?))
            }
        }
        FieldKind::Enum { labels, .. } => {
            if let Ok(label) = obj.extract::<String>() {
                let idx = labels
                    .iter()
                    .position(|l| *l == label)
                    .ok_or_else(|| fail("unknown enum label"))?;
                Value::Enum(idx as u32)
            } else {
                Value::Enum(obj.extract::<u32>()?)
            }
        }
    })
}

/// A working parameter set for one of the shipped schemas.
#[pyclass(name = "Pp")]
struct Pp_ {
    inner: Option<Pp>,
}

impl Pp_ {
    fn pp(&self) -> PyResult<&Pp> {
        self.inner
            .as_ref()
            .ok_or_else(|| to_py_err(Error::UseAfterRelease))
    }

    fn pp_mut(&mut self) -> PyResult<&mut Pp> {
        self.inner
            .as_mut()
            .ok_or_else(|| to_py_err(Error::UseAfterRelease))
    }

    fn fields_from_dict(
        pp: &Pp,
        list: &str,
        dict: &Bound<'_, PyDict>,
    ) -> PyResult<Vec<(String, Value)>> {
        let (_, ls) = pp
            .schema()
            .list(list)
            .ok_or_else(|| to_py_err(Error::UnknownList(list.to_string())))?;
        let mut out = Vec::new();
        for (key, value) in dict.iter() {
            let name: String = key.extract()?;
            let (_, fs) = ls.field(&name).ok_or_else(|| {
                PyValueError::new_err(format!("unknown field \"{name}\" in \"{list}\""))
            })?;
            out.push((name, value_from_py(&value, &fs.kind)?));
        }
        Ok(out)
    }
}

#[pymethods]
impl Pp_ {
    /// Fresh parameter set: schema is "axono", "table" or "user".
    #[new]
    fn new(schema: &str) -> PyResult<Self> {
        let schema = shipped_schemas()
            .into_iter()
            .find(|s| s.name == schema)
            .ok_or_else(|| PyValueError::new_err(format!("unknown schema \"{schema}\"")))?;
        Ok(Self {
            inner: Some(Pp::new(schema)),
        })
    }

    /// Expand a compact image; the schema is read from its header.
    #[staticmethod]
    fn decode(image: &[u8]) -> PyResult<Self> {
        let image = CompactImage {
            bytes: image.to_vec(),
        };
        let (name, hash) = image.header().map_err(to_py_err)?;
        let schema = schema_by_header(&name, hash).ok_or_else(|| {
            to_py_err(Error::SchemaMismatch(format!("unknown schema \"{name}\"")))
        })?;
        Ok(Self {
            inner: Some(decode_compact(&image, &schema).map_err(to_py_err)?),
        })
    }

    fn encode<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyBytes>> {
        let image = encode_compact(self.pp()?).map_err(to_py_err)?;
        Ok(PyBytes::new(py, &image.bytes))
    }

    #[getter]
    fn schema_name(&self) -> PyResult<String> {
        Ok(self.pp()?.schema().name.clone())
    }

    fn lists(&self) -> PyResult<Vec<String>> {
        Ok(self
            .pp()?
            .schema()
            .lists
            .iter()
            .map(|l| l.name.clone())
            .collect())
    }

    fn add(&mut self, list: &str, fields: &Bound<'_, PyDict>) -> PyResult<u32> {
        let pp = self.pp_mut()?;
        let fields = Self::fields_from_dict(pp, list, fields)?;
        let borrowed: Vec<(&str, Value)> =
            fields.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
        pp.add_object(list, &borrowed).map_err(to_py_err)
    }

    fn edit(&mut self, list: &str, index: u32, fields: &Bound<'_, PyDict>) -> PyResult<()> {
        let pp = self.pp_mut()?;
        let fields = Self::fields_from_dict(pp, list, fields)?;
        for (name, value) in fields {
            pp.set_field(list, index, &name, value).map_err(to_py_err)?;
        }
        Ok(())
    }

    fn delete(&mut self, list: &str, indices: Vec<u32>) -> PyResult<Vec<(String, Vec<u32>)>> {
        let report = self
            .pp_mut()?
            .delete_objects(list, &indices)
            .map_err(to_py_err)?;
        Ok(report
            .removed
            .into_iter()
            .map(|(list, set)| (list, set.into_iter().collect()))
            .collect())
    }

    #[pyo3(name = "len")]
    fn len_(&self, list: &str) -> PyResult<u32> {
        self.pp()?.len(list).map_err(to_py_err)
    }

    /// One record as a field-name -> value dict.
    fn record(&self, py: Python<'_>, list: &str, index: u32) -> PyResult<Py<PyAny>> {
        let pp = self.pp()?;
        let record = pp.record(list, index).map_err(to_py_err)?;
        let (_, ls) = pp.schema().list(list).expect("record() checked the list");
        let dict = PyDict::new(py);
        for (f, v) in ls.fields.iter().zip(record) {
            dict.set_item(&f.name, value_to_py(py, v, &f.kind))?;
        }
        Ok(dict.into_any().unbind())
    }

    fn general(&self, py: Python<'_>, name: &str) -> PyResult<Py<PyAny>> {
        let pp = self.pp()?;
        let value = pp.general_value(name).map_err(to_py_err)?;
        let (_, fs) = pp.schema().general_field(name).expect("checked above");
        Ok(value_to_py(py, value, &fs.kind))
    }

    fn set_general(&mut self, name: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        let pp = self.pp_mut()?;
        let (_, fs) = pp
            .schema()
            .general_field(name)
            .ok_or_else(|| PyValueError::new_err(format!("unknown general field \"{name}\"")))?;
        let value = value_from_py(value, &fs.kind.clone())?;
        pp.set_general(name, value).map_err(to_py_err)
    }

    fn check_integrity(&self) -> PyResult<Vec<String>> {
        Ok(self
            .pp()?
            .check_integrity()
            .iter()
            .map(|v| v.to_string())
            .collect())
    }

    /// Drop the expanded representation; any further use raises.
    fn release(&mut self) {
        self.inner = None;
    }

    fn __repr__(&self) -> String {
        match &self.inner {
            Some(pp) => format!("Pp(schema=\"{}\")", pp.schema().name),
            None => "Pp(released)".to_string(),
        }
    }
}

/// A drawing plus the engine with both reference extensions.
#[pyclass]
struct Project {
    engine: Engine,
    drawing: Drawing,
}

#[pymethods]
impl Project {
    #[new]
    #[pyo3(signature = (width=420.0, height=297.0, catalog_dir=None))]
    fn new(width: f64, height: f64, catalog_dir: Option<PathBuf>) -> PyResult<Self> {
        if width <= 0.0 || height <= 0.0 {
            return Err(PyValueError::new_err("sheet size must be positive"));
        }
        Ok(Self {
            engine: Engine::with_reference_extensions(
                catalog_dir.unwrap_or_else(|| PathBuf::from("./catalog")),
            ),
            drawing: Drawing::new(width, height),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (path, catalog_dir=None))]
    fn load(path: PathBuf, catalog_dir: Option<PathBuf>) -> PyResult<Self> {
        Ok(Self {
            engine: Engine::with_reference_extensions(
                catalog_dir.unwrap_or_else(|| PathBuf::from("./catalog")),
            ),
            drawing: drawing_file::read_drawing(&path).map_err(to_py_err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        drawing_file::write_drawing(&self.drawing, &path).map_err(to_py_err)
    }

    /// Run one extension command; returns its report lines.
    #[pyo3(signature = (extension, command, args=vec![]))]
    fn run(&mut self, extension: &str, command: &str, args: Vec<String>) -> PyResult<Vec<String>> {
        self.engine
            .run_command(&mut self.drawing, extension, command, &args)
            .map(|out| out.lines)
            .map_err(to_py_err)
    }

    /// Run a whole command script (one command per line).
    fn run_script(&mut self, text: &str) -> PyResult<Vec<String>> {
        script::run_script(
            &mut self.engine,
            &mut self.drawing,
            text,
            std::path::Path::new("."),
        )
        .map_err(to_py_err)
    }

    /// Add a property-only module; properties is a key -> value dict.
    #[pyo3(signature = (type_name, properties=None, anchor=(0.0, 0.0)))]
    fn add_module(
        &mut self,
        type_name: &str,
        properties: Option<&Bound<'_, PyDict>>,
        anchor: (f64, f64),
    ) -> PyResult<u64> {
        let mut args = vec![type_name.to_string()];
        if let Some(dict) = properties {
            for (key, value) in dict.iter() {
                let key: String = key.extract()?;
                let value: String = if let Ok(s) = value.extract::<String>() {
                    s
                } else {
                    value.str()?.to_string()
                };
                args.push(format!("{key}={value}"));
            }
        }
        args.push(format!("@{},{}", anchor.0, anchor.1));
        script::add_module_command(&self.engine, &mut self.drawing, &args)
            .map_err(to_py_err)?;
        Ok(self.drawing.next_id() - 1)
    }

    /// Registered module types as (name, allowed_properties, has_payload).
    fn types(&self) -> Vec<(String, Vec<String>, bool)> {
        self.engine
            .registry
            .iter()
            .map(|def| {
                (
                    def.type_name.clone(),
                    def.allowed_properties
                        .iter()
                        .map(|(k, _)| k.clone())
                        .collect(),
                    def.has_payload,
                )
            })
            .collect()
    }

    /// Commands of one extension as (name, usage) pairs.
    fn commands(&self, extension: &str) -> PyResult<Vec<(String, String)>> {
        self.engine
            .commands(extension)
            .map(|specs| {
                specs
                    .iter()
                    .map(|c| (c.name.to_string(), c.usage.to_string()))
                    .collect()
            })
            .map_err(to_py_err)
    }

    /// Session parameter set of an extension, cloned, or None.
    fn session(&self, extension: &str) -> Option<Pp_> {
        self.engine.session_pp(extension).map(|pp| Pp_ {
            inner: Some(pp.clone()),
        })
    }

    /// Working-module tags near a paper point: (list, index) pairs.
    #[pyo3(signature = (extension, point, radius, allowed_lists=None))]
    fn pick(
        &self,
        extension: &str,
        point: (f64, f64),
        radius: f64,
        allowed_lists: Option<Vec<String>>,
    ) -> PyResult<Vec<(String, u32)>> {
        self.engine
            .pick(
                &self.drawing,
                extension,
                Point2::new(point.0, point.1),
                radius,
                allowed_lists.as_deref(),
            )
            .map(|tags| tags.into_iter().map(|t| (t.list, t.index)).collect())
            .map_err(to_py_err)
    }

    fn svg(&self) -> String {
        render_drawing(&self.drawing)
    }

    fn dump(&self) -> String {
        dump_drawing(&self.drawing)
    }

    fn element_count(&self) -> usize {
        self.drawing.elements().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Project({} x {} mm, {} elements)",
            self.drawing.sheet_width,
            self.drawing.sheet_height,
            self.drawing.elements().len()
        )
    }
}

/// Axonometric projection of a nature point onto the 2D plane.
#[pyfunction]
#[pyo3(signature = (x, y, z, depth_angle=45.0, depth_factor=1.0))]
fn project3(x: f64, y: f64, z: f64, depth_angle: f64, depth_factor: f64) -> (f64, f64) {
    let p = modcad_core::coords::AxonoProjection {
        depth_angle_deg: depth_angle,
        depth_factor,
    }
    .project(Point3::new(x, y, z));
    (p.x, p.y)
}

#[pyfunction]
fn nature_to_paper(x: f64, y: f64, origin: (f64, f64), scale: f64) -> PyResult<(f64, f64)> {
    if scale <= 0.0 {
        return Err(PyValueError::new_err("scale must be positive"));
    }
    let cs = modcad_core::coords::PlaneCs::new(Point2::new(origin.0, origin.1), scale);
    let q = cs.nature_to_paper(Point2::new(x, y));
    Ok((q.x, q.y))
}

#[pyfunction]
fn paper_to_nature(x: f64, y: f64, origin: (f64, f64), scale: f64) -> PyResult<(f64, f64)> {
    if scale <= 0.0 {
        return Err(PyValueError::new_err("scale must be positive"));
    }
    let cs = modcad_core::coords::PlaneCs::new(Point2::new(origin.0, origin.1), scale);
    let q = cs.paper_to_nature(Point2::new(x, y));
    Ok((q.x, q.y))
}

/// Names of the shipped parameter-set schemas.
#[pyfunction]
fn schemas() -> Vec<String> {
    shipped_schemas().iter().map(|s| s.name.clone()).collect()
}

/// Recompute cached speed values of a session-less parameter set using
/// the extension that owns its schema.
#[pyfunction]
fn recompute_speed(pp: &mut Pp_) -> PyResult<()> {
    let inner = pp.pp_mut()?;
    let engine = Engine::with_reference_extensions("./catalog");
    let ext = engine
        .extensions()
        .find(|e| e.schema().hash() == inner.schema().hash())
        .ok_or_else(|| PyValueError::new_err("no extension owns this schema"))?;
    recompute_speed_vars(inner, ext.as_ref()).map_err(to_py_err)
}

#[pymodule]
fn modcad(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Project>()?;
    m.add_class::<Pp_>()?;
    m.add_function(wrap_pyfunction!(project3, m)?)?;
    m.add_function(wrap_pyfunction!(nature_to_paper, m)?)?;
    m.add_function(wrap_pyfunction!(paper_to_nature, m)?)?;
    m.add_function(wrap_pyfunction!(schemas, m)?)?;
    m.add_function(wrap_pyfunction!(recompute_speed, m)?)?;
    Ok(())
}
