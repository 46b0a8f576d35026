//! Drawings and modules. A module is a drawing element that carries all
//! specialized parameters of one project part as a compact payload plus
//! the geometry regenerated from it; the parametric part is primary and
//! fully determines the geometric part. Each module type allows a fixed
//! property set, kept verbatim from the built-in catalog.

use crate::codec::{decode_compact, CompactImage};
use crate::error::{Error, Result};
use crate::geom::{Point2, Primitive};
use crate::pp::Pp;
use crate::regen::{Tag, WorkingModule};
use crate::schema::PpSchema;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyKind {
    Text,
    Number,
    Point,
    Flag,
    /// Structure not interpreted by this engine; carried opaquely.
    Bytes,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PropertyValue {
    Text(String),
    Number(f64),
    Point(Point2),
    Flag(bool),
    Bytes(Vec<u8>),
}

impl PropertyValue {
    pub fn kind(&self) -> PropertyKind {
        match self {
            PropertyValue::Text(_) => PropertyKind::Text,
            PropertyValue::Number(_) => PropertyKind::Number,
            PropertyValue::Point(_) => PropertyKind::Point,
            PropertyValue::Flag(_) => PropertyKind::Flag,
            PropertyValue::Bytes(_) => PropertyKind::Bytes,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            PropertyValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            PropertyValue::Number(n) => Some(*n),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ModuleTypeDef {
    pub type_name: String,
    pub allowed_properties: Vec<(String, PropertyKind)>,
    pub has_payload: bool,
}

impl ModuleTypeDef {
    pub fn new(type_name: &str, allowed: &[(&str, PropertyKind)], has_payload: bool) -> Self {
        Self {
            type_name: type_name.to_string(),
            allowed_properties: allowed
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            has_payload,
        }
    }

    pub fn property_kind(&self, key: &str) -> Option<PropertyKind> {
        self.allowed_properties
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
    }
}

/// Registry of module types; registration order is preserved for listing.
#[derive(Debug, Default, Clone)]
pub struct TypeRegistry {
    types: Vec<ModuleTypeDef>,
}

/// Opaque handle to a registered module type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeHandle(pub usize);

impl TypeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, def: ModuleTypeDef) -> Result<TypeHandle> {
        if self.types.iter().any(|t| t.type_name == def.type_name) {
            return Err(Error::DuplicateType(def.type_name));
        }
        let mut seen = std::collections::HashSet::new();
        for (key, _) in &def.allowed_properties {
            if !seen.insert(key.as_str()) {
                return Err(Error::DuplicatePropertyKey(key.clone()));
            }
        }
        self.types.push(def);
        Ok(TypeHandle(self.types.len() - 1))
    }

    pub fn get(&self, type_name: &str) -> Option<&ModuleTypeDef> {
        self.types.iter().find(|t| t.type_name == type_name)
    }

    pub fn by_handle(&self, handle: TypeHandle) -> Option<&ModuleTypeDef> {
        self.types.get(handle.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = &ModuleTypeDef> {
        self.types.iter()
    }

    /// The module-type catalog this system ships with. Property keys are
    /// data, printed verbatim.
    pub fn with_builtins() -> Self {
        use PropertyKind::*;

        fn with_base(
            extra: &[(&'static str, PropertyKind)],
        ) -> Vec<(&'static str, PropertyKind)> {
            let mut v = vec![
                ("Привязка", PropertyKind::Point),
                ("Симметрия", PropertyKind::Flag),
                ("Комментарий", PropertyKind::Text),
            ];
            v.extend_from_slice(extra);
            v
        }

        let mut registry = Self::new();
        let mut register = |name: &str, props: &[(&str, PropertyKind)], payload: bool| {
            registry
                .register(ModuleTypeDef::new(name, props, payload))
                .expect("builtin registry is collision-free");
        };

        register("Пользовательский", &with_base(&[]), false);
        register("Трубопровод", &with_base(&[]), true);
        register(
            "Арматура",
            &with_base(&[
                ("Строительная длина", Number),
                ("Обозначение", Text),
                ("Наименование", Text),
                ("Масса", Number),
                ("Примечание", Text),
                ("Dy", Number),
                ("Py", Number),
            ]),
            false,
        );
        register("Таблица КИПиА", &with_base(&[]), true);
        register(
            "Прибор",
            &[
                ("Привязка", Point),
                ("Несущая геометрия", Bytes),
                ("Позиционное обозначение", Text),
                ("Обозначение", Text),
                ("Наименование", Text),
                ("Масса", Number),
                ("Примечание", Text),
                ("Тип, марка оборудования", Text),
                ("Единица измерения", Text),
                ("Код единиц измерения", Text),
                ("Код завода-изготовителя", Text),
                ("Код оборудования, материала", Text),
                ("Цена", Number),
                ("Наименование и технич. х-ка", Text),
                ("На щите", Flag),
                ("Функциональный признак прибора", Text),
                ("Верхний индекс", Text),
                ("Нижний индекс", Text),
                ("Комментарий", Text),
                ("Тип линии приборов КИП", Number),
            ],
            false,
        );
        register("Исполнительный механизм", &with_base(&[]), false);
        register(
            "План этажа",
            &[
                ("Комментарий", Text),
                ("Параметры этажа в плане", Bytes),
                ("Масштаб при создании", Number),
            ],
            true,
        );
        register(
            "Обозначение для аксонометрии",
            &with_base(&[("Вырезаемый на трубе отрезок", Bytes)]),
            false,
        );
        register(
            "Аксонометрическая схема",
            &[
                ("Комментарий", Text),
                ("Параметры аксонометрич. схемы", Bytes),
                ("Масштаб при создании", Number),
            ],
            true,
        );
        register("Оформление чертежа", &[("Описание оформления чертежа", Bytes)], true);
        register(
            "Табличный",
            &[("Комментарий", Text), ("Описание таблицы", Bytes)],
            true,
        );
        register(
            "Позиционное обозначение",
            &[
                ("Тип позиционного обозначения", Text),
                ("Тип объекта позиционного обозначения", Text),
                ("Специфицирующие свойства", Bytes),
            ],
            false,
        );
        register(
            "Профиль наружной сети ВК",
            &[
                ("Комментарий", Text),
                ("Параметры профиля наружной сети ВК", Bytes),
                ("Масштаб при создании", Number),
            ],
            true,
        );
        register(
            "Молниезащита зданий и сооружений",
            &[
                ("Комментарий", Text),
                ("Параметры молниезащиты зданий и сооружений", Bytes),
                ("Масштаб при создании", Number),
            ],
            true,
        );
        register(
            "Электронная подпись",
            &[
                ("Сотрудник", Text),
                ("Должность", Text),
                ("Пароль", Text),
                ("Дата", Text),
                ("Время", Text),
            ],
            false,
        );
        registry
    }
}

/// A placed module: typed properties, compact payload, regenerated
/// geometry and its paper anchor point.
#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    pub type_name: String,
    pub properties: BTreeMap<String, PropertyValue>,
    pub payload: Vec<u8>,
    pub geometry: Vec<Primitive>,
    pub anchor: Point2,
}

impl Module {
    pub fn new(type_name: &str, anchor: Point2) -> Self {
        Self {
            type_name: type_name.to_string(),
            properties: BTreeMap::new(),
            payload: Vec::new(),
            geometry: Vec::new(),
            anchor,
        }
    }

    pub fn has_payload(&self) -> bool {
        !self.payload.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementId(pub u64);

impl std::fmt::Display for ElementId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Primitive(Primitive),
    Module(Module),
    /// Temporary element visualizing one parameter-set object while an
    /// extension session is editing; never saved to disk.
    Working(WorkingModule),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrawingSettings {
    pub color: u16,
    pub line_type_id: u8,
    pub text_height: f64,
}

impl Default for DrawingSettings {
    fn default() -> Self {
        Self {
            color: 0,
            line_type_id: 0,
            text_height: 2.5,
        }
    }
}

/// One sheet: ordered elements plus current drawing settings. Element
/// identifiers are unique for the lifetime of the drawing.
#[derive(Debug, Clone, PartialEq)]
pub struct Drawing {
    pub sheet_width: f64,
    pub sheet_height: f64,
    pub settings: DrawingSettings,
    elements: Vec<(ElementId, Element)>,
    next_id: u64,
}

impl Drawing {
    pub fn new(sheet_width: f64, sheet_height: f64) -> Self {
        Self {
            sheet_width,
            sheet_height,
            settings: DrawingSettings::default(),
            elements: Vec::new(),
            next_id: 1,
        }
    }

    pub(crate) fn from_parts(
        sheet_width: f64,
        sheet_height: f64,
        settings: DrawingSettings,
        elements: Vec<(ElementId, Element)>,
        next_id: u64,
    ) -> Self {
        Self {
            sheet_width,
            sheet_height,
            settings,
            elements,
            next_id,
        }
    }

    pub fn elements(&self) -> &[(ElementId, Element)] {
        &self.elements
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    pub fn add_element(&mut self, element: Element) -> ElementId {
        let id = ElementId(self.next_id);
        self.next_id += 1;
        self.elements.push((id, element));
        id
    }

    pub fn get(&self, id: ElementId) -> Option<&Element> {
        self.elements
            .iter()
            .find(|(eid, _)| *eid == id)
            .map(|(_, e)| e)
    }

    pub fn get_mut(&mut self, id: ElementId) -> Option<&mut Element> {
        self.elements
            .iter_mut()
            .find(|(eid, _)| *eid == id)
            .map(|(_, e)| e)
    }

    pub fn remove(&mut self, id: ElementId) -> Option<Element> {
        let pos = self.elements.iter().position(|(eid, _)| *eid == id)?;
        Some(self.elements.remove(pos).1)
    }

    pub fn module(&self, id: ElementId) -> Option<&Module> {
        match self.get(id)? {
            Element::Module(m) => Some(m),
            _ => None,
        }
    }

    pub fn modules(&self) -> impl Iterator<Item = (ElementId, &Module)> {
        self.elements.iter().filter_map(|(id, e)| match e {
            Element::Module(m) => Some((*id, m)),
            _ => None,
        })
    }

    /// Working elements belonging to one extension, in drawing order.
    pub fn working_of(&self, ext_id: &str) -> Vec<(ElementId, &WorkingModule)> {
        self.elements
            .iter()
            .filter_map(|(id, e)| match e {
                Element::Working(w) if w.ext_id == ext_id => Some((*id, w)),
                _ => None,
            })
            .collect()
    }

    pub fn working_ids_of(&self, ext_id: &str) -> Vec<ElementId> {
        self.working_of(ext_id).iter().map(|(id, _)| *id).collect()
    }

    pub fn find_working(&self, ext_id: &str, tag: &Tag) -> Option<ElementId> {
        self.elements.iter().find_map(|(id, e)| match e {
            Element::Working(w) if w.ext_id == ext_id && &w.tag == tag => Some(*id),
            _ => None,
        })
    }

    /// Set a module property, enforcing the type's allowed set and kinds.
    pub fn set_module_property(
        &mut self,
        registry: &TypeRegistry,
        id: ElementId,
        key: &str,
        value: PropertyValue,
    ) -> Result<()> {
        let module = match self.get_mut(id) {
            Some(Element::Module(m)) => m,
            _ => return Err(Error::ReplaceTargetMissing(id.to_string())),
        };
        let def = registry
            .get(&module.type_name)
            .ok_or_else(|| Error::UnknownType(module.type_name.clone()))?;
        match def.property_kind(key) {
            None => Err(Error::UnknownProperty {
                type_name: module.type_name.clone(),
                key: key.to_string(),
            }),
            Some(kind) if kind != value.kind() => {
                Err(Error::PropertyKindMismatch(key.to_string()))
            }
            Some(_) => {
                module.properties.insert(key.to_string(), value);
                Ok(())
            }
        }
    }

    /// Validate all modules against the registry: known types, allowed
    /// property keys, matching kinds.
    pub fn validate(&self, registry: &TypeRegistry) -> Vec<String> {
        let mut out = Vec::new();
        for (id, module) in self.modules() {
            let Some(def) = registry.get(&module.type_name) else {
                out.push(format!("element {id}: unknown type \"{}\"", module.type_name));
                continue;
            };
            for (key, value) in &module.properties {
                match def.property_kind(key) {
                    None => out.push(format!(
                        "element {id}: property \"{key}\" not allowed for \"{}\"",
                        module.type_name
                    )),
                    Some(kind) if kind != value.kind() => out.push(format!(
                        "element {id}: property \"{key}\" has wrong kind"
                    )),
                    _ => {}
                }
            }
        }
        out
    }
}

/// Collect the geometry of the given working modules into one module and
/// put it into the drawing, removing the contributors. Geometry is
/// translated so the parameter-set origin lands on `anchor`. With a
/// replace target, the existing module of the same type is updated in
/// place and keeps its identifier and properties.
pub fn place_module(
    drawing: &mut Drawing,
    registry: &TypeRegistry,
    working_ids: &[ElementId],
    payload: Vec<u8>,
    type_name: &str,
    anchor: Point2,
    replace_target: Option<ElementId>,
) -> Result<ElementId> {
    if registry.get(type_name).is_none() {
        return Err(Error::UnknownType(type_name.to_string()));
    }
    if working_ids.is_empty() {
        return Err(Error::EmptyResult);
    }

    let mut geometry = Vec::new();
    for id in working_ids {
        match drawing.get(*id) {
            Some(Element::Working(w)) => {
                geometry.extend(w.primitives.iter().map(|p| p.translated(anchor)));
            }
            _ => return Err(Error::Internal(format!("element {id} is not a working module"))),
        }
    }

    let placed = match replace_target {
        Some(target) => {
            match drawing.get_mut(target) {
                Some(Element::Module(m)) if m.type_name == type_name => {
                    m.payload = payload;
                    m.geometry = geometry;
                    m.anchor = anchor;
                }
                _ => return Err(Error::ReplaceTargetMissing(target.to_string())),
            }
            target
        }
        None => {
            let mut module = Module::new(type_name, anchor);
            module.payload = payload;
            module.geometry = geometry;
            drawing.add_element(Element::Module(module))
        }
    };

    for id in working_ids {
        drawing.remove(*id);
    }
    Ok(placed)
}

/// Expand the parameter set stored in a module. The caller's extension is
/// responsible for recomputing speed values afterwards.
pub fn extract_pp(module: &Module, schema: &Arc<PpSchema>) -> Result<Pp> {
    if !module.has_payload() {
        return Err(Error::CorruptPayload("module carries no payload".into()));
    }
    decode_compact(
        &CompactImage {
            bytes: module.payload.clone(),
        },
        schema,
    )
}
