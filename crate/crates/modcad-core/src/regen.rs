//! Working modules: temporary drawing elements that visualize parameter-
//! set objects during editing. Generation runs on every change, so it is
//! pure over the parameter set and reads only cached speed values.

use crate::error::{Error, Result};
use crate::extension::Extension;
use crate::geom::{Point2, Primitive, Rect};
use crate::model::{Drawing, Element};
use crate::pp::Pp;
use crate::schema::PpSchema;
use std::collections::BTreeSet;

/// Identifies the parameter-set object a working module visualizes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tag {
    pub list: String,
    pub index: u32,
    pub extra: u32,
}

impl Tag {
    pub fn new(list: &str, index: u32) -> Self {
        Self {
            list: list.to_string(),
            index,
            extra: 0,
        }
    }
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}[{}]", self.list, self.index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkingModule {
    pub ext_id: String,
    pub tag: Tag,
    pub primitives: Vec<Primitive>,
}

/// One working module per visible record, in (list order, index order).
/// Pure over the parameter set and its settings.
pub fn generate_all(pp: &Pp, ext: &dyn Extension) -> Result<Vec<WorkingModule>> {
    if ext.schema().hash() != pp.schema().hash() {
        return Err(Error::ExtensionMismatch);
    }
    let mut out = Vec::new();
    for ls in &pp.schema().lists {
        let len = pp.len(&ls.name)?;
        for index in 0..len {
            if let Some(primitives) = ext.generate(pp, &ls.name, index) {
                out.push(WorkingModule {
                    ext_id: ext.id().to_string(),
                    tag: Tag::new(&ls.name, index),
                    primitives,
                });
            }
        }
    }
    Ok(out)
}

/// Replace working modules in the drawing with freshly generated ones.
/// With a subset, only those tags are touched: regenerated if the record
/// is still visible, removed if stale. Without a subset the drawing ends
/// up carrying exactly the visible-record set. Surviving elements keep
/// their identifiers.
pub fn regenerate(
    drawing: &mut Drawing,
    pp: &Pp,
    ext: &dyn Extension,
    subset: Option<&BTreeSet<Tag>>,
) -> Result<()> {
    match subset {
        None => {
            let fresh = generate_all(pp, ext)?;
            let mut by_tag: std::collections::BTreeMap<Tag, Vec<Primitive>> = fresh
                .into_iter()
                .map(|wm| (wm.tag, wm.primitives))
                .collect();
            // Pass 1: update or drop existing working elements.
            let existing = drawing.working_ids_of(ext.id());
            for id in existing {
                let tag = match drawing.get(id) {
                    Some(Element::Working(w)) => w.tag.clone(),
                    _ => continue,
                };
                match by_tag.remove(&tag) {
                    Some(primitives) => {
                        if let Some(Element::Working(w)) = drawing.get_mut(id) {
                            w.primitives = primitives;
                        }
                    }
                    None => {
                        drawing.remove(id);
                    }
                }
            }
            // Pass 2: append newly visible records in (list, index) order.
            for (tag, primitives) in by_tag {
                drawing.add_element(Element::Working(WorkingModule {
                    ext_id: ext.id().to_string(),
                    tag,
                    primitives,
                }));
            }
        }
        Some(tags) => {
            if ext.schema().hash() != pp.schema().hash() {
                return Err(Error::ExtensionMismatch);
            }
            for tag in tags {
                let live = pp
                    .schema()
                    .list(&tag.list)
                    .map(|_| pp.len(&tag.list).unwrap_or(0) > tag.index)
                    .unwrap_or(false);
                let fresh = if live {
                    ext.generate(pp, &tag.list, tag.index)
                } else {
                    None
                };
                let existing = drawing.find_working(ext.id(), tag);
                match (existing, fresh) {
                    (Some(id), Some(primitives)) => {
                        if let Some(Element::Working(w)) = drawing.get_mut(id) {
                            w.primitives = primitives;
                        }
                    }
                    (Some(id), None) => {
                        drawing.remove(id);
                    }
                    (None, Some(primitives)) => {
                        drawing.add_element(Element::Working(WorkingModule {
                            ext_id: ext.id().to_string(),
                            tag: tag.clone(),
                            primitives,
                        }));
                    }
                    (None, None) => {}
                }
            }
        }
    }
    Ok(())
}

/// Tags of working modules whose ink passes within `radius` of `point`,
/// nearest first; ties broken by (schema list order, index).
pub fn pick(
    drawing: &Drawing,
    ext_id: &str,
    schema: &PpSchema,
    point: Point2,
    radius: f64,
    allowed_lists: Option<&[String]>,
) -> Vec<Tag> {
    let list_rank = |name: &str| {
        schema
            .list(name)
            .map(|(i, _)| i)
            .unwrap_or(usize::MAX)
    };
    let mut hits: Vec<(f64, usize, u32, Tag)> = Vec::new();
    for (_, wm) in drawing.working_of(ext_id) {
        if let Some(allowed) = allowed_lists {
            if !allowed.iter().any(|l| l == &wm.tag.list) {
                continue;
            }
        }
        let distance = wm
            .primitives
            .iter()
            .map(|p| p.distance_to(point))
            .fold(f64::INFINITY, f64::min);
        if distance <= radius {
            hits.push((distance, list_rank(&wm.tag.list), wm.tag.index, wm.tag.clone()));
        }
    }
    hits.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    hits.into_iter().map(|(_, _, _, t)| t).collect()
}

/// Tight box over all primitives of the given working modules; `None`
/// when there is no geometry at all.
pub fn bounds(working_modules: &[WorkingModule]) -> Option<Rect> {
    primitive_bounds(working_modules.iter().flat_map(|wm| wm.primitives.iter()))
}

pub fn primitive_bounds<'a>(primitives: impl Iterator<Item = &'a Primitive>) -> Option<Rect> {
    let mut rect: Option<Rect> = None;
    for p in primitives {
        let b = p.bounds();
        match &mut rect {
            Some(r) => r.union(&b),
            None => rect = Some(b),
        }
    }
    rect
}
