//! The expanded working form of a parameter set: per-list record arrays,
//! general parameters and cached speed values. Record indices act as
//! primary keys; every reference must point at a live record.

use crate::error::{Error, Result};
use crate::schema::{FieldKind, PpSchema};
use crate::value::Value;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

pub type Record = Vec<Value>;
/// Cached derived values for one record; empty until recomputed.
pub type SpeedEntry = Vec<f64>;

#[derive(Debug, Clone)]
pub struct Pp {
    schema: Arc<PpSchema>,
    general: Vec<Value>,
    lists: Vec<Vec<Record>>,
    speed: Vec<Vec<SpeedEntry>>,
}

/// Removed original indices per list after a cascading delete.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DeleteReport {
    pub removed: BTreeMap<String, BTreeSet<u32>>,
}

impl DeleteReport {
    pub fn is_empty(&self) -> bool {
        self.removed.values().all(|s| s.is_empty())
    }

    pub fn total(&self) -> usize {
        self.removed.values().map(|s| s.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrityViolation {
    pub list: String,
    pub index: Option<u32>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for IntegrityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "list \"{}\"", self.list)?;
        if let Some(i) = self.index {
            write!(f, " record {i}")?;
        }
        if let Some(field) = &self.field {
            write!(f, " field \"{field}\"")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl PartialEq for Pp {
    /// Serialized-content equality: schema, general values and records.
    /// Speed values are cache and never compared.
    fn eq(&self, other: &Self) -> bool {
        self.schema.hash() == other.schema.hash()
            && self.general == other.general
            && self.lists == other.lists
    }
}

impl Pp {
    /// Fresh parameter set with every general parameter at its default.
    pub fn new(schema: Arc<PpSchema>) -> Self {
        let general = schema
            .general
            .iter()
            .map(|f| {
                f.default
                    .clone()
                    .expect("validated schema: general fields carry defaults")
                    .normalized(&f.kind)
            })
            .collect();
        let lists = vec![Vec::new(); schema.lists.len()];
        let speed = vec![Vec::new(); schema.lists.len()];
        Self {
            schema,
            general,
            lists,
            speed,
        }
    }

    pub fn schema(&self) -> &Arc<PpSchema> {
        &self.schema
    }

    pub fn len(&self, list: &str) -> Result<u32> {
        let (i, _) = self.list_index(list)?;
        Ok(self.lists[i].len() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.lists.iter().all(|l| l.is_empty())
    }

    pub fn records(&self, list: &str) -> Result<&[Record]> {
        let (i, _) = self.list_index(list)?;
        Ok(&self.lists[i])
    }

    pub fn record(&self, list: &str, index: u32) -> Result<&Record> {
        let (i, _) = self.list_index(list)?;
        self.lists[i]
            .get(index as usize)
            .ok_or_else(|| Error::IndexOutOfRange {
                list: list.to_string(),
                index,
                len: self.lists[i].len() as u32,
            })
    }

    pub fn field(&self, list: &str, index: u32, field: &str) -> Result<&Value> {
        let (li, ls) = self.list_index(list)?;
        let (fi, _) = ls
            .field(field)
            .ok_or_else(|| Error::FieldMismatch(format!("unknown field \"{field}\" in \"{list}\"")))?;
        let record = self.lists[li]
            .get(index as usize)
            .ok_or_else(|| Error::IndexOutOfRange {
                list: list.to_string(),
                index,
                len: self.lists[li].len() as u32,
            })?;
        Ok(&record[fi])
    }

    pub fn general_value(&self, name: &str) -> Result<&Value> {
        let (i, _) = self
            .schema
            .general_field(name)
            .ok_or_else(|| Error::FieldMismatch(format!("unknown general field \"{name}\"")))?;
        Ok(&self.general[i])
    }

    pub fn set_general(&mut self, name: &str, value: Value) -> Result<()> {
        let (i, f) = self
            .schema
            .general_field(name)
            .ok_or_else(|| Error::FieldMismatch(format!("unknown general field \"{name}\"")))?;
        if !value.matches(&f.kind) {
            return Err(Error::FieldMismatch(format!(
                "general field \"{name}\" expects {}, got {}",
                kind_word(&f.kind),
                value.kind_name()
            )));
        }
        let value = value.normalized(&f.kind);
        if let (Value::Enum(v), FieldKind::Enum { labels, .. }) = (&value, &f.kind) {
            if *v as usize >= labels.len() {
                return Err(Error::FieldMismatch(format!(
                    "enum value {v} out of range for general field \"{name}\""
                )));
            }
        }
        self.general[i] = value;
        Ok(())
    }

    pub fn general_values(&self) -> &[Value] {
        &self.general
    }

    /// Raw record store for a list by position; used by codec and dumps.
    pub fn list_records(&self, list_pos: usize) -> &[Record] {
        &self.lists[list_pos]
    }

    pub fn speed_entries(&self, list: &str) -> Result<&[SpeedEntry]> {
        let (i, _) = self.list_index(list)?;
        Ok(&self.speed[i])
    }

    pub fn speed_entry(&self, list_pos: usize, index: usize) -> Option<&SpeedEntry> {
        self.speed.get(list_pos).and_then(|l| l.get(index))
    }

    fn list_index(&self, list: &str) -> Result<(usize, &crate::schema::ListSchema)> {
        self.schema
            .list(list)
            .ok_or_else(|| Error::UnknownList(list.to_string()))
            .map(|(i, l)| (i, l))
    }

    /// Append a record built from `fields` (name, value) pairs. Omitted
    /// fields with a per-object-default setting are filled from the bound
    /// general parameter; any other omission is an error. Returns the new
    /// index.
    pub fn add_object(&mut self, list: &str, fields: &[(&str, Value)]) -> Result<u32> {
        let (li, _) = self.list_index(list)?;

        let mut provided: BTreeMap<&str, &Value> = BTreeMap::new();
        for (name, value) in fields {
            if self.schema.lists[li].field(name).is_none() {
                return Err(Error::FieldMismatch(format!(
                    "unknown field \"{name}\" in \"{list}\""
                )));
            }
            if provided.insert(name, value).is_some() {
                return Err(Error::FieldMismatch(format!("field \"{name}\" given twice")));
            }
        }

        let defaults: BTreeMap<String, Value> = self
            .schema
            .default_bindings(list)
            .filter_map(|b| {
                let (gi, _) = self.schema.general_field(&b.general_field)?;
                Some((b.field.clone(), self.general[gi].clone()))
            })
            .collect();

        let list_schema = &self.schema.lists[li];
        let mut record = Vec::with_capacity(list_schema.fields.len());
        for f in &list_schema.fields {
            let value = match provided.get(f.name.as_str()) {
                Some(v) => (*v).clone(),
                None => match defaults.get(&f.name) {
                    Some(v) => v.clone(),
                    None => {
                        return Err(Error::FieldMismatch(format!(
                            "missing field \"{}\" for \"{list}\"",
                            f.name
                        )))
                    }
                },
            };
            if !value.matches(&f.kind) {
                return Err(Error::FieldMismatch(format!(
                    "field \"{}\" expects {}, got {}",
                    f.name,
                    kind_word(&f.kind),
                    value.kind_name()
                )));
            }
            if let (Value::Enum(v), FieldKind::Enum { labels, .. }) = (&value, &f.kind) {
                if *v as usize >= labels.len() {
                    return Err(Error::FieldMismatch(format!(
                        "enum value {v} out of range for field \"{}\"",
                        f.name
                    )));
                }
            }
            record.push(value.normalized(&f.kind));
        }

        self.check_record_refs(li, &record)?;
        self.lists[li].push(record);
        self.speed[li].push(Vec::new());
        Ok((self.lists[li].len() - 1) as u32)
    }

    /// Overwrite one field of an existing record, keeping integrity.
    pub fn set_field(&mut self, list: &str, index: u32, field: &str, value: Value) -> Result<()> {
        let (li, ls) = self.list_index(list)?;
        let (fi, fs) = ls
            .field(field)
            .ok_or_else(|| Error::FieldMismatch(format!("unknown field \"{field}\" in \"{list}\"")))?;
        if index as usize >= self.lists[li].len() {
            return Err(Error::IndexOutOfRange {
                list: list.to_string(),
                index,
                len: self.lists[li].len() as u32,
            });
        }
        if !value.matches(&fs.kind) {
            return Err(Error::FieldMismatch(format!(
                "field \"{field}\" expects {}, got {}",
                kind_word(&fs.kind),
                value.kind_name()
            )));
        }
        if let (Value::Enum(v), FieldKind::Enum { labels, .. }) = (&value, &fs.kind) {
            if *v as usize >= labels.len() {
                return Err(Error::FieldMismatch(format!(
                    "enum value {v} out of range for field \"{field}\""
                )));
            }
        }
        let value = value.normalized(&fs.kind);
        if let (Value::Ref(r), FieldKind::Ref { target, optional, .. }) = (&value, &fs.kind) {
            self.check_ref(list, &fs.name, *r, target, *optional)?;
        }
        self.lists[li][index as usize][fi] = value;
        Ok(())
    }

    fn check_record_refs(&self, list_pos: usize, record: &Record) -> Result<()> {
        let ls = &self.schema.lists[list_pos];
        for (f, v) in ls.fields.iter().zip(record) {
            if let (FieldKind::Ref { target, optional, .. }, Value::Ref(r)) = (&f.kind, v) {
                self.check_ref(&ls.name, &f.name, *r, target, *optional)?;
            }
        }
        Ok(())
    }

    fn check_ref(
        &self,
        list: &str,
        field: &str,
        value: Option<u32>,
        target: &str,
        optional: bool,
    ) -> Result<()> {
        match value {
            None if optional => Ok(()),
            None => Err(Error::BrokenRef(format!(
                "\"{list}.{field}\" requires a target in \"{target}\""
            ))),
            Some(i) => {
                let len = self.len(target)?;
                if i < len {
                    Ok(())
                } else {
                    Err(Error::BrokenRef(format!(
                        "\"{list}.{field}\" -> {target}[{i}] out of range (len {len})"
                    )))
                }
            }
        }
    }

    /// Delete the given records and, transitively, every record holding a
    /// non-optional reference to a deleted one. Optional references to
    /// deleted records become null; surviving references are renumbered.
    pub fn delete_objects(&mut self, list: &str, indices: &[u32]) -> Result<DeleteReport> {
        let (li, _) = self.list_index(list)?;
        let len = self.lists[li].len() as u32;
        for &i in indices {
            if i >= len {
                return Err(Error::IndexOutOfRange {
                    list: list.to_string(),
                    index: i,
                    len,
                });
            }
        }

        let mut removed: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); self.schema.lists.len()];
        removed[li].extend(indices.iter().copied());

        // Propagate the cascade until stable. List count is small; the
        // loop runs at most once per list in a validated (acyclic) schema.
        loop {
            let mut changed = false;
            for (si, ls) in self.schema.lists.iter().enumerate() {
                for (fi, f) in ls.fields.iter().enumerate() {
                    let FieldKind::Ref {
                        target, on_delete, ..
                    } = &f.kind
                    else {
                        continue;
                    };
                    if *on_delete == crate::schema::OnDelete::Nullify {
                        continue;
                    }
                    let Some((ti, _)) = self.schema.list(target) else {
                        continue;
                    };
                    if removed[ti].is_empty() {
                        continue;
                    }
                    for (ri, record) in self.lists[si].iter().enumerate() {
                        if removed[si].contains(&(ri as u32)) {
                            continue;
                        }
                        if let Value::Ref(Some(t)) = &record[fi] {
                            if removed[ti].contains(t) {
                                removed[si].insert(ri as u32);
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        // Remap tables: old index -> new index for survivors.
        let remaps: Vec<Vec<Option<u32>>> = self
            .schema
            .lists
            .iter()
            .enumerate()
            .map(|(si, _)| {
                let mut next = 0u32;
                (0..self.lists[si].len() as u32)
                    .map(|i| {
                        if removed[si].contains(&i) {
                            None
                        } else {
                            let n = next;
                            next += 1;
                            Some(n)
                        }
                    })
                    .collect()
            })
            .collect();

        for (si, ls) in self.schema.lists.iter().enumerate() {
            let keep = &remaps[si];
            let mut new_records = Vec::with_capacity(self.lists[si].len() - removed[si].len());
            let mut new_speed = Vec::with_capacity(new_records.capacity());
            for (ri, record) in self.lists[si].iter().enumerate() {
                if keep[ri].is_none() {
                    continue;
                }
                let mut record = record.clone();
                for (fi, f) in ls.fields.iter().enumerate() {
                    if let FieldKind::Ref { target, .. } = &f.kind {
                        if let Some((ti, _)) = self.schema.list(target) {
                            if let Value::Ref(Some(t)) = &record[fi] {
                                record[fi] = Value::Ref(remaps[ti][*t as usize]);
                            }
                        }
                    }
                }
                new_records.push(record);
                new_speed.push(self.speed[si][ri].clone());
            }
            self.lists[si] = new_records;
            self.speed[si] = new_speed;
        }

        let mut report = DeleteReport::default();
        for (si, set) in removed.into_iter().enumerate() {
            if !set.is_empty() {
                report.removed.insert(self.schema.lists[si].name.clone(), set);
            }
        }
        Ok(report)
    }

    /// Every referential-integrity and structural violation, empty when
    /// the parameter set is sound.
    pub fn check_integrity(&self) -> Vec<IntegrityViolation> {
        let mut out = Vec::new();
        for (si, ls) in self.schema.lists.iter().enumerate() {
            if self.speed[si].len() != self.lists[si].len() {
                out.push(IntegrityViolation {
                    list: ls.name.clone(),
                    index: None,
                    field: None,
                    message: format!(
                        "speed array length {} != record count {}",
                        self.speed[si].len(),
                        self.lists[si].len()
                    ),
                });
            }
            for (ri, record) in self.lists[si].iter().enumerate() {
                if record.len() != ls.fields.len() {
                    out.push(IntegrityViolation {
                        list: ls.name.clone(),
                        index: Some(ri as u32),
                        field: None,
                        message: format!(
                            "record arity {} != field count {}",
                            record.len(),
                            ls.fields.len()
                        ),
                    });
                    continue;
                }
                for (f, v) in ls.fields.iter().zip(record) {
                    if !v.matches(&f.kind) {
                        out.push(IntegrityViolation {
                            list: ls.name.clone(),
                            index: Some(ri as u32),
                            field: Some(f.name.clone()),
                            message: format!(
                                "value kind {} does not match field kind",
                                v.kind_name()
                            ),
                        });
                        continue;
                    }
                    match (&f.kind, v) {
                        (FieldKind::Ref { target, optional, .. }, Value::Ref(r)) => {
                            let target_len = self
                                .schema
                                .list(target)
                                .map(|(ti, _)| self.lists[ti].len() as u32)
                                .unwrap_or(0);
                            match r {
                                None if !optional => out.push(IntegrityViolation {
                                    list: ls.name.clone(),
                                    index: Some(ri as u32),
                                    field: Some(f.name.clone()),
                                    message: "null in non-optional reference".to_string(),
                                }),
                                Some(t) if *t >= target_len => out.push(IntegrityViolation {
                                    list: ls.name.clone(),
                                    index: Some(ri as u32),
                                    field: Some(f.name.clone()),
                                    message: format!(
                                        "ref {t} out of range (len {target_len})"
                                    ),
                                }),
                                _ => {}
                            }
                        }
                        (FieldKind::Enum { labels, .. }, Value::Enum(v)) => {
                            if *v as usize >= labels.len() {
                                out.push(IntegrityViolation {
                                    list: ls.name.clone(),
                                    index: Some(ri as u32),
                                    field: Some(f.name.clone()),
                                    message: format!("enum value {v} out of range"),
                                });
                            }
                        }
                        _ => {}
                    }
                }
            }
        }
        out
    }

    /// Replace the speed entry of one record.
    pub fn set_speed(&mut self, list_pos: usize, index: usize, values: SpeedEntry) {
        self.speed[list_pos][index] = values;
    }

    /// Install decoded record arrays wholesale. The codec validates refs
    /// and enum ranges before calling this; speed entries are allocated
    /// per record but left empty.
    pub(crate) fn install_decoded(&mut self, lists: Vec<Vec<Record>>) {
        debug_assert_eq!(lists.len(), self.schema.lists.len());
        self.speed = lists.iter().map(|l| vec![Vec::new(); l.len()]).collect();
        self.lists = lists;
    }

    /// Drop all cached speed values (entries stay allocated per record).
    pub fn clear_speed(&mut self) {
        for list in &mut self.speed {
            for e in list.iter_mut() {
                e.clear();
            }
        }
    }
}

fn kind_word(kind: &FieldKind) -> &'static str {
    match kind {
        FieldKind::UInt { .. } => "uint",
        FieldKind::Int { .. } => "int",
        FieldKind::Fixed { .. } => "fixed",
        FieldKind::Text => "text",
        FieldKind::Flag => "flag",
        FieldKind::Ref { .. } => "ref",
        FieldKind::Enum { .. } => "enum",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{FieldSchema, ListSchema, SettingBinding};

    fn schema() -> Arc<PpSchema> {
        let schema = PpSchema {
            name: "t".into(),
            version: 1,
            general: vec![FieldSchema::with_default(
                "default_diameter",
                FieldKind::uint(12),
                Value::UInt(50),
            )],
            bindings: vec![SettingBinding::per_object(
                "default_diameter",
                "pipes",
                "diameter",
            )],
            lists: vec![
                ListSchema::new(
                    "points",
                    vec![
                        FieldSchema::new("x", FieldKind::fixed(32, 0.01)),
                        FieldSchema::new("y", FieldKind::fixed(32, 0.01)),
                        FieldSchema::new("z", FieldKind::fixed(32, 0.01)),
                    ],
                ),
                ListSchema::new(
                    "pipes",
                    vec![
                        FieldSchema::new("start", FieldKind::reference("points")),
                        FieldSchema::new("end", FieldKind::reference("points")),
                        FieldSchema::new("diameter", FieldKind::uint(12)),
                    ],
                ),
                ListSchema::new(
                    "labels",
                    vec![
                        FieldSchema::new("target", FieldKind::optional_reference("pipes")),
                        FieldSchema::new("text", FieldKind::Text),
                    ],
                ),
            ],
        };
        assert!(schema.validate().is_empty());
        Arc::new(schema)
    }

    fn point(pp: &mut Pp, x: f64, y: f64, z: f64) -> u32 {
        pp.add_object(
            "points",
            &[
                ("x", Value::Fixed(x)),
                ("y", Value::Fixed(y)),
                ("z", Value::Fixed(z)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn first_append_gets_index_zero() {
        let mut pp = Pp::new(schema());
        assert_eq!(point(&mut pp, 0.0, 0.0, 0.0), 0);
    }

    #[test]
    fn out_of_range_ref_is_rejected() {
        let mut pp = Pp::new(schema());
        point(&mut pp, 0.0, 0.0, 0.0);
        let err = pp
            .add_object(
                "pipes",
                &[("start", Value::Ref(Some(0))), ("end", Value::Ref(Some(1)))],
            )
            .unwrap_err();
        assert!(matches!(err, Error::BrokenRef(_)));
    }

    #[test]
    fn omitted_field_takes_bound_default() {
        let mut pp = Pp::new(schema());
        point(&mut pp, 0.0, 0.0, 0.0);
        point(&mut pp, 1.0, 0.0, 0.0);
        let i = pp
            .add_object(
                "pipes",
                &[("start", Value::Ref(Some(0))), ("end", Value::Ref(Some(1)))],
            )
            .unwrap();
        assert_eq!(pp.field("pipes", i, "diameter").unwrap(), &Value::UInt(50));
    }

    #[test]
    fn cascade_delete_renumbers_refs() {
        let mut pp = Pp::new(schema());
        for i in 0..3 {
            point(&mut pp, i as f64, 0.0, 0.0);
        }
        for (s, e) in [(0u32, 1u32), (1, 2)] {
            pp.add_object(
                "pipes",
                &[("start", Value::Ref(Some(s))), ("end", Value::Ref(Some(e)))],
            )
            .unwrap();
        }
        let report = pp.delete_objects("points", &[0]).unwrap();
        assert_eq!(report.removed["points"], BTreeSet::from([0]));
        assert_eq!(report.removed["pipes"], BTreeSet::from([0]));
        assert_eq!(pp.len("points").unwrap(), 2);
        assert_eq!(pp.len("pipes").unwrap(), 1);
        // Former pipe (1,2) now references renumbered points (0,1).
        assert_eq!(pp.field("pipes", 0, "start").unwrap(), &Value::Ref(Some(0)));
        assert_eq!(pp.field("pipes", 0, "end").unwrap(), &Value::Ref(Some(1)));
        assert!(pp.check_integrity().is_empty());
    }

    #[test]
    fn optional_refs_become_null_on_cascade() {
        let mut pp = Pp::new(schema());
        point(&mut pp, 0.0, 0.0, 0.0);
        point(&mut pp, 1.0, 0.0, 0.0);
        pp.add_object(
            "pipes",
            &[("start", Value::Ref(Some(0))), ("end", Value::Ref(Some(1)))],
        )
        .unwrap();
        pp.add_object(
            "labels",
            &[
                ("target", Value::Ref(Some(0))),
                ("text", Value::Text("DN50".into())),
            ],
        )
        .unwrap();
        pp.delete_objects("points", &[0]).unwrap();
        assert_eq!(pp.len("pipes").unwrap(), 0);
        assert_eq!(pp.len("labels").unwrap(), 1);
        assert_eq!(pp.field("labels", 0, "target").unwrap(), &Value::Ref(None));
        assert!(pp.check_integrity().is_empty());
    }

    #[test]
    fn empty_delete_is_identity() {
        let mut pp = Pp::new(schema());
        point(&mut pp, 0.0, 0.0, 0.0);
        let before = pp.clone();
        let report = pp.delete_objects("points", &[]).unwrap();
        assert!(report.is_empty());
        assert_eq!(pp, before);
    }

    #[test]
    fn integrity_reports_corrupt_ref() {
        let mut pp = Pp::new(schema());
        point(&mut pp, 0.0, 0.0, 0.0);
        point(&mut pp, 1.0, 0.0, 0.0);
        pp.add_object(
            "pipes",
            &[("start", Value::Ref(Some(0))), ("end", Value::Ref(Some(1)))],
        )
        .unwrap();
        // Corrupt through the raw store.
        pp.lists[1][0][0] = Value::Ref(Some(99));
        let violations = pp.check_integrity();
        assert_eq!(violations.len(), 1);
        let v = &violations[0];
        assert_eq!(v.list, "pipes");
        assert_eq!(v.index, Some(0));
        assert_eq!(v.field.as_deref(), Some("start"));
    }
}
