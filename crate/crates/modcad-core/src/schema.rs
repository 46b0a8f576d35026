//! Parameter-set schemas: named object lists with bit-width fields and
//! index references, general parameters, and setting bindings. A schema is
//! identified on the wire by a 64-bit hash of its canonical text form.

use crate::value::Value;
use std::collections::{HashMap, HashSet};
use std::fmt;

pub const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// 64-bit FNV-1a over a byte string.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Reference fields are stored in this many bits on the wire.
pub const REF_BITS: u8 = 32;

/// What happens to a record whose reference points at a deleted target.
/// Required references always cascade; optional ones choose per field
/// whether the referrer dies too or merely loses the link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnDelete {
    Cascade,
    Nullify,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldKind {
    UInt { bits: u8 },
    Int { bits: u8 },
    /// Signed fixed-point: stored as round(value/scale) in `bits` bits.
    Fixed { bits: u8, scale: f64 },
    Text,
    Flag,
    Ref {
        target: String,
        optional: bool,
        on_delete: OnDelete,
    },
    Enum { bits: u8, labels: Vec<String> },
}

impl FieldKind {
    pub fn uint(bits: u8) -> Self {
        FieldKind::UInt { bits }
    }

    pub fn int(bits: u8) -> Self {
        FieldKind::Int { bits }
    }

    pub fn fixed(bits: u8, scale: f64) -> Self {
        FieldKind::Fixed { bits, scale }
    }

    /// Required reference; the referrer is deleted with its target.
    pub fn reference(target: &str) -> Self {
        FieldKind::Ref {
            target: target.to_string(),
            optional: false,
            on_delete: OnDelete::Cascade,
        }
    }

    /// Nullable reference that outlives its target (nulled on cascade).
    pub fn optional_reference(target: &str) -> Self {
        FieldKind::Ref {
            target: target.to_string(),
            optional: true,
            on_delete: OnDelete::Nullify,
        }
    }

    /// Nullable reference whose referrer still dies with the target.
    pub fn optional_reference_cascading(target: &str) -> Self {
        FieldKind::Ref {
            target: target.to_string(),
            optional: true,
            on_delete: OnDelete::Cascade,
        }
    }

    pub fn enumeration(bits: u8, labels: &[&str]) -> Self {
        FieldKind::Enum {
            bits,
            labels: labels.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Minimum encoded size in bits (texts count their length prefix only).
    pub fn min_bits(&self) -> u64 {
        match self {
            FieldKind::UInt { bits } | FieldKind::Int { bits } | FieldKind::Enum { bits, .. } => {
                *bits as u64
            }
            FieldKind::Fixed { bits, .. } => *bits as u64,
            FieldKind::Flag => 1,
            FieldKind::Ref { optional, .. } => {
                if *optional {
                    1
                } else {
                    REF_BITS as u64
                }
            }
            FieldKind::Text => 16,
        }
    }

    fn canonical(&self) -> String {
        match self {
            FieldKind::UInt { bits } => format!("uint({bits})"),
            FieldKind::Int { bits } => format!("int({bits})"),
            FieldKind::Fixed { bits, scale } => format!("fixed({bits},{scale})"),
            FieldKind::Text => "text".to_string(),
            FieldKind::Flag => "flag".to_string(),
            FieldKind::Ref {
                target,
                optional,
                on_delete,
            } => {
                let mark = if *optional { "?" } else { "" };
                let rule = match on_delete {
                    OnDelete::Cascade => "",
                    OnDelete::Nullify => "~",
                };
                format!("ref{mark}{rule}({target})")
            }
            FieldKind::Enum { bits, labels } => {
                format!("enum({bits},[{}])", labels.join("|"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSchema {
    pub name: String,
    pub kind: FieldKind,
    /// Initial value; required for general fields, unused on record fields.
    pub default: Option<Value>,
}

impl FieldSchema {
    pub fn new(name: &str, kind: FieldKind) -> Self {
        Self {
            name: name.to_string(),
            kind,
            default: None,
        }
    }

    pub fn with_default(name: &str, kind: FieldKind, default: Value) -> Self {
        Self {
            name: name.to_string(),
            kind,
            default: Some(default),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ListSchema {
    pub name: String,
    pub fields: Vec<FieldSchema>,
    /// Link lists hold pure relations: only reference fields, at least two.
    pub is_link_list: bool,
}

impl ListSchema {
    pub fn new(name: &str, fields: Vec<FieldSchema>) -> Self {
        Self {
            name: name.to_string(),
            fields,
            is_link_list: false,
        }
    }

    pub fn link(name: &str, fields: Vec<FieldSchema>) -> Self {
        Self {
            name: name.to_string(),
            fields,
            is_link_list: true,
        }
    }

    pub fn field(&self, name: &str) -> Option<(usize, &FieldSchema)> {
        self.fields
            .iter()
            .enumerate()
            .find(|(_, f)| f.name == name)
    }

    /// Lower bound on the encoded size of one record, in bits.
    pub fn min_record_bits(&self) -> u64 {
        self.fields.iter().map(|f| f.kind.min_bits()).sum()
    }
}

/// Which settings mechanism governs a bound field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SettingMode {
    /// Copied into each new record; editable per object afterwards.
    PerObjectDefault,
    /// Stored once in the general parameters; the record has no such field.
    ListWide,
}

/// Ties a general parameter to a list as a settings source.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingBinding {
    pub general_field: String,
    pub list: String,
    pub field: String,
    pub mode: SettingMode,
}

impl SettingBinding {
    pub fn per_object(general_field: &str, list: &str, field: &str) -> Self {
        Self {
            general_field: general_field.to_string(),
            list: list.to_string(),
            field: field.to_string(),
            mode: SettingMode::PerObjectDefault,
        }
    }

    pub fn list_wide(general_field: &str, list: &str, field: &str) -> Self {
        Self {
            general_field: general_field.to_string(),
            list: list.to_string(),
            field: field.to_string(),
            mode: SettingMode::ListWide,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpSchema {
    pub name: String,
    pub version: u32,
    pub general: Vec<FieldSchema>,
    pub lists: Vec<ListSchema>,
    pub bindings: Vec<SettingBinding>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaViolation {
    pub message: String,
}

impl fmt::Display for SchemaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl PpSchema {
    pub fn list(&self, name: &str) -> Option<(usize, &ListSchema)> {
        self.lists.iter().enumerate().find(|(_, l)| l.name == name)
    }

    pub fn general_field(&self, name: &str) -> Option<(usize, &FieldSchema)> {
        self.general
            .iter()
            .enumerate()
            .find(|(_, f)| f.name == name)
    }

    /// Bindings that feed defaults into new records of `list`.
    pub fn default_bindings<'a>(
        &'a self,
        list: &'a str,
    ) -> impl Iterator<Item = &'a SettingBinding> + 'a {
        self.bindings
            .iter()
            .filter(move |b| b.mode == SettingMode::PerObjectDefault && b.list == list)
    }

    /// Canonical text rendering; the schema hash is FNV-1a over its bytes.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("schema {} v{}\n", self.name, self.version));
        for f in &self.general {
            let d = f
                .default
                .as_ref()
                .map(|v| format!("={v}"))
                .unwrap_or_default();
            out.push_str(&format!("general {}:{}{}\n", f.name, f.kind.canonical(), d));
        }
        for b in &self.bindings {
            let mode = match b.mode {
                SettingMode::PerObjectDefault => "default",
                SettingMode::ListWide => "listwide",
            };
            out.push_str(&format!(
                "binding {} {} {}.{}\n",
                mode, b.general_field, b.list, b.field
            ));
        }
        for l in &self.lists {
            let tag = if l.is_link_list { "linklist" } else { "list" };
            out.push_str(&format!("{tag} {}\n", l.name));
            for f in &l.fields {
                out.push_str(&format!("  {}:{}\n", f.name, f.kind.canonical()));
            }
        }
        out
    }

    pub fn hash(&self) -> u64 {
        fnv1a(self.canonical_text().as_bytes())
    }

    /// Full structural validation; returns every violation found.
    pub fn validate(&self) -> Vec<SchemaViolation> {
        let mut out = Vec::new();
        let mut push = |message: String| out.push(SchemaViolation { message });

        let list_names: HashSet<&str> = self.lists.iter().map(|l| l.name.as_str()).collect();

        // Unique names and the reserved word.
        let mut seen = HashSet::new();
        for l in &self.lists {
            if l.name == "general" {
                push("list name \"general\" is reserved".to_string());
            }
            if !seen.insert(l.name.as_str()) {
                push(format!("duplicate list name \"{}\"", l.name));
            }
            let mut fseen = HashSet::new();
            for f in &l.fields {
                if !fseen.insert(f.name.as_str()) {
                    push(format!(
                        "duplicate field name \"{}\" in list \"{}\"",
                        f.name, l.name
                    ));
                }
            }
        }
        let mut gseen = HashSet::new();
        for f in &self.general {
            if !gseen.insert(f.name.as_str()) {
                push(format!("duplicate general field name \"{}\"", f.name));
            }
            if matches!(f.kind, FieldKind::Ref { .. }) {
                push(format!(
                    "general field \"{}\" may not be a reference",
                    f.name
                ));
            }
            match &f.default {
                None => push(format!("general field \"{}\" has no default", f.name)),
                Some(v) if !v.matches(&f.kind) => push(format!(
                    "general field \"{}\" default has wrong kind",
                    f.name
                )),
                _ => {}
            }
            check_kind(&f.kind, &format!("general field \"{}\"", f.name), &mut push);
        }

        // Field kinds and reference targets.
        for l in &self.lists {
            let mut ref_count = 0usize;
            for f in &l.fields {
                let ctx = format!("list \"{}\" field \"{}\"", l.name, f.name);
                check_kind(&f.kind, &ctx, &mut push);
                if let FieldKind::Ref { target, .. } = &f.kind {
                    ref_count += 1;
                    if !list_names.contains(target.as_str()) {
                        push(format!("{ctx}: unknown target \"{target}\""));
                    }
                }
            }
            if l.is_link_list && (ref_count < 2 || ref_count != l.fields.len()) {
                push(format!(
                    "link list \"{}\" must consist of two or more reference fields only",
                    l.name
                ));
            }
        }

        // Reference cycles at list level (edge A -> B iff a field of A
        // references B), detected by depth-first search.
        if let Some(cycle) = self.find_cycle() {
            push(format!("reference cycle: {}", cycle.join(" -> ")));
        }

        // Setting bindings.
        let mut bound: HashSet<(String, String)> = HashSet::new();
        for b in &self.bindings {
            let gf = self.general_field(&b.general_field);
            if gf.is_none() {
                push(format!(
                    "binding references unknown general field \"{}\"",
                    b.general_field
                ));
            }
            let Some((_, list)) = self.list(&b.list) else {
                push(format!("binding references unknown list \"{}\"", b.list));
                continue;
            };
            if !bound.insert((b.list.clone(), b.field.clone())) {
                push(format!(
                    "field \"{}.{}\" is governed by more than one setting",
                    b.list, b.field
                ));
            }
            match b.mode {
                SettingMode::PerObjectDefault => match list.field(&b.field) {
                    None => push(format!(
                        "default binding targets missing field \"{}.{}\"",
                        b.list, b.field
                    )),
                    Some((_, f)) => {
                        if let Some((_, g)) = gf {
                            if std::mem::discriminant(&g.kind)
                                != std::mem::discriminant(&f.kind)
                            {
                                push(format!(
                                    "default binding \"{}\" kind differs from \"{}.{}\"",
                                    b.general_field, b.list, b.field
                                ));
                            }
                        }
                    }
                },
                SettingMode::ListWide => {
                    if list.field(&b.field).is_some() {
                        push(format!(
                            "list-wide setting \"{}.{}\" must not also be a record field",
                            b.list, b.field
                        ));
                    }
                }
            }
        }

        out
    }

    /// First reference cycle among lists, as the names along the cycle.
    fn find_cycle(&self) -> Option<Vec<String>> {
        let index: HashMap<&str, usize> = self
            .lists
            .iter()
            .enumerate()
            .map(|(i, l)| (l.name.as_str(), i))
            .collect();
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); self.lists.len()];
        for (i, l) in self.lists.iter().enumerate() {
            for f in &l.fields {
                if let FieldKind::Ref { target, .. } = &f.kind {
                    if let Some(&j) = index.get(target.as_str()) {
                        adjacency[i].push(j);
                    }
                }
            }
        }

        // 0 unvisited, 1 on stack, 2 done.
        let mut state = vec![0u8; self.lists.len()];
        let mut stack: Vec<usize> = Vec::new();

        fn dfs(
            v: usize,
            adjacency: &[Vec<usize>],
            state: &mut [u8],
            stack: &mut Vec<usize>,
        ) -> Option<Vec<usize>> {
            state[v] = 1;
            stack.push(v);
            for &w in &adjacency[v] {
                if state[w] == 1 {
                    let start = stack.iter().position(|&s| s == w).unwrap();
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(w);
                    return Some(cycle);
                }
                if state[w] == 0 {
                    if let Some(c) = dfs(w, adjacency, state, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            state[v] = 2;
            None
        }

        for v in 0..self.lists.len() {
            if state[v] == 0 {
                if let Some(cycle) = dfs(v, &adjacency, &mut state, &mut stack) {
                    return Some(
                        cycle
                            .into_iter()
                            .map(|i| self.lists[i].name.clone())
                            .collect(),
                    );
                }
            }
        }
        None
    }
}

fn check_kind(kind: &FieldKind, ctx: &str, push: &mut impl FnMut(String)) {
    match kind {
        FieldKind::UInt { bits } | FieldKind::Int { bits } => {
            if *bits == 0 || *bits > 64 {
                push(format!("{ctx}: bit width {bits} out of 1..=64"));
            }
        }
        FieldKind::Fixed { bits, scale } => {
            if *bits == 0 || *bits > 64 {
                push(format!("{ctx}: bit width {bits} out of 1..=64"));
            }
            if !(*scale > 0.0) {
                push(format!("{ctx}: fixed-point scale must be positive"));
            }
        }
        FieldKind::Enum { bits, labels } => {
            if *bits == 0 || *bits > 32 {
                push(format!("{ctx}: enum bit width {bits} out of 1..=32"));
            } else if labels.is_empty() {
                push(format!("{ctx}: enum has no labels"));
            } else if *bits < 64 && labels.len() as u64 > (1u64 << *bits) {
                push(format!("{ctx}: {} labels exceed {bits} bits", labels.len()));
            }
        }
        FieldKind::Ref {
            optional,
            on_delete,
            ..
        } => {
            if !optional && *on_delete == OnDelete::Nullify {
                push(format!("{ctx}: a required reference cannot nullify on delete"));
            }
        }
        _ => {}
    }
}
