//! Shared test support: randomized parameter-set generation and the
//! independent oracles the property suites check against. Oracles are
//! deliberately implemented from first principles, not by calling the
//! code under test.

#![allow(dead_code)]

use modcad_core::pp::Pp;
use modcad_core::schema::{FieldKind, FieldSchema, ListSchema, OnDelete, PpSchema};
use modcad_core::value::Value;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random value of a field kind, always within the declared bit range and
/// quantized for fixed-point kinds. `target_len` bounds reference values.
pub fn random_value(kind: &FieldKind, rng: &mut ChaCha8Rng, target_len: u32) -> Value {
    match kind {
        FieldKind::UInt { bits } => {
            let cap = 1u64 << (*bits).min(16);
            Value::UInt(rng.random_range(0..cap))
        }
        FieldKind::Int { bits } => {
            let half = 1i64 << ((*bits).min(16) - 1);
            Value::Int(rng.random_range(-half..half))
        }
        FieldKind::Fixed { bits, scale } => {
            let half = 1i64 << ((*bits).min(24) - 1);
            let q = rng.random_range(-(half - 1)..half);
            Value::Fixed(q as f64 * scale)
        }
        FieldKind::Text => {
            let alphabet: Vec<char> = "abcXYZ -Вент150д".chars().collect();
            let len = rng.random_range(0..8);
            Value::Text((0..len).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect())
        }
        FieldKind::Flag => Value::Flag(rng.random_bool(0.5)),
        FieldKind::Ref { optional, .. } => {
            if *optional && (target_len == 0 || rng.random_bool(0.3)) {
                Value::Ref(None)
            } else {
                Value::Ref(Some(rng.random_range(0..target_len.max(1))))
            }
        }
        FieldKind::Enum { labels, .. } => {
            Value::Enum(rng.random_range(0..labels.len() as u32))
        }
    }
}

/// Random schema-valid parameter set. Lists are filled in declaration
/// order (shipped schemas declare reference targets first); lists whose
/// required references point at an empty target stay empty.
pub fn random_pp(schema: &Arc<PpSchema>, rng: &mut ChaCha8Rng, max_records: u32) -> Pp {
    let mut pp = Pp::new(Arc::clone(schema));
    for f in &schema.general {
        let v = random_value(&f.kind, rng, 0);
        if matches!(f.kind, FieldKind::Ref { .. }) {
            continue;
        }
        pp.set_general(&f.name, v).expect("general value in range");
    }
    for ls in &schema.lists {
        let mut blocked = false;
        for f in &ls.fields {
            if let FieldKind::Ref {
                target,
                optional: false,
                ..
            } = &f.kind
            {
                if pp.len(target).unwrap_or(0) == 0 {
                    blocked = true;
                }
            }
        }
        let count = if blocked { 0 } else { rng.random_range(0..=max_records) };
        for _ in 0..count {
            let fields: Vec<(String, Value)> = ls
                .fields
                .iter()
                .map(|f| {
                    let target_len = match &f.kind {
                        FieldKind::Ref { target, .. } => pp.len(target).unwrap_or(0),
                        _ => 0,
                    };
                    (f.name.clone(), random_value(&f.kind, rng, target_len))
                })
                .collect();
            let borrowed: Vec<(&str, Value)> =
                fields.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
            pp.add_object(&ls.name, &borrowed).expect("generated record is valid");
        }
    }
    pp
}

/// Reachability oracle for cascading deletion: a record survives iff it
/// was not requested for deletion and every cascading reference in it
/// points at a surviving record. The surviving set is computed as a
/// closure, then a fresh parameter set is rebuilt record by record with
/// remapped references (nullified where the schema says so).
pub fn delete_oracle(pp: &Pp, list: &str, indices: &[u32]) -> Pp {
    let schema = pp.schema();
    let requested: BTreeSet<u32> = indices.iter().copied().collect();

    // keep[list][index]
    let mut keep: BTreeMap<String, Vec<bool>> = schema
        .lists
        .iter()
        .map(|ls| {
            let len = pp.len(&ls.name).unwrap() as usize;
            let kept = (0..len)
                .map(|i| !(ls.name == list && requested.contains(&(i as u32))))
                .collect();
            (ls.name.clone(), kept)
        })
        .collect();

    // Fixpoint: drop records whose cascading refs point at dropped ones.
    loop {
        let mut changed = false;
        for ls in &schema.lists {
            for (fi, f) in ls.fields.iter().enumerate() {
                let FieldKind::Ref {
                    target,
                    on_delete: OnDelete::Cascade,
                    ..
                } = &f.kind
                else {
                    continue;
                };
                let target_keep = keep[target].clone();
                let this = keep.get_mut(&ls.name).unwrap();
                for (ri, kept) in this.iter_mut().enumerate() {
                    if !*kept {
                        continue;
                    }
                    let record = pp.record(&ls.name, ri as u32).unwrap();
                    if let Value::Ref(Some(t)) = &record[fi] {
                        if !target_keep[*t as usize] {
                            *kept = false;
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

    // Remap: old index -> new index among survivors.
    let remap: BTreeMap<String, Vec<Option<u32>>> = keep
        .iter()
        .map(|(name, kept)| {
            let mut next = 0;
            let map = kept
                .iter()
                .map(|k| {
                    if *k {
                        let v = next;
                        next += 1;
                        Some(v)
                    } else {
                        None
                    }
                })
                .collect();
            (name.clone(), map)
        })
        .collect();

    let mut rebuilt = Pp::new(Arc::clone(schema));
    for (gi, f) in schema.general.iter().enumerate() {
        rebuilt
            .set_general(&f.name, pp.general_values()[gi].clone())
            .unwrap();
    }
    for ls in &schema.lists {
        let kept = &keep[&ls.name];
        for (ri, kept_flag) in kept.iter().enumerate() {
            if !kept_flag {
                continue;
            }
            let record = pp.record(&ls.name, ri as u32).unwrap();
            let fields: Vec<(String, Value)> = ls
                .fields
                .iter()
                .zip(record)
                .map(|(f, v)| {
                    let v = match (&f.kind, v) {
                        (FieldKind::Ref { target, .. }, Value::Ref(Some(t))) => {
                            Value::Ref(remap[target][*t as usize])
                        }
                        _ => v.clone(),
                    };
                    (f.name.clone(), v)
                })
                .collect();
            let borrowed: Vec<(&str, Value)> =
                fields.iter().map(|(n, v)| (n.as_str(), v.clone())).collect();
            rebuilt
                .add_object(&ls.name, &borrowed)
                .expect("oracle rebuild is valid");
        }
    }
    rebuilt
}

/// Three-list chain for cascade tests: labels -> pipes -> points, all
/// cascading; notes -> pipes nullifies instead.
pub fn chain_schema() -> Arc<PpSchema> {
    let schema = PpSchema {
        name: "chain".into(),
        version: 1,
        general: vec![],
        bindings: vec![],
        lists: vec![
            ListSchema::new(
                "points",
                vec![FieldSchema::new("x", FieldKind::fixed(32, 0.01))],
            ),
            ListSchema::new(
                "pipes",
                vec![
                    FieldSchema::new("start", FieldKind::reference("points")),
                    FieldSchema::new("end", FieldKind::reference("points")),
                ],
            ),
            ListSchema::new(
                "labels",
                vec![
                    FieldSchema::new("target", FieldKind::reference("pipes")),
                    FieldSchema::new("text", FieldKind::Text),
                ],
            ),
            ListSchema::new(
                "notes",
                vec![FieldSchema::new(
                    "target",
                    FieldKind::optional_reference("pipes"),
                )],
            ),
        ],
    };
    assert!(schema.validate().is_empty());
    Arc::new(schema)
}

/// Serialized-equality helper with a readable failure message.
pub fn assert_pp_eq(actual: &Pp, expected: &Pp, context: &str) {
    assert!(
        actual == expected,
        "{context}: parameter sets differ\nactual lists: {:?}\nexpected lists: {:?}",
        summarize(actual),
        summarize(expected),
    );
}

fn summarize(pp: &Pp) -> Vec<(String, Vec<Vec<String>>)> {
    pp.schema()
        .lists
        .iter()
        .map(|ls| {
            let records = pp
                .records(&ls.name)
                .unwrap()
                .iter()
                .map(|r| r.iter().map(|v| v.to_string()).collect())
                .collect();
            (ls.name.clone(), records)
        })
        .collect()
}
