//! The schemas this build ships with and a lookup used when decoding
//! payloads of unknown provenance (dumps, catalog previews).

use crate::axono::axono_schema;
use crate::schema::{FieldKind, FieldSchema, ListSchema, PpSchema};
use crate::table::table_schema;
use crate::value::Value;
use std::sync::Arc;

/// Free 2D sketch payload for user modules: points, segments between
/// them, annotation texts. Exercises every field kind the codec knows.
pub fn user_schema() -> PpSchema {
    PpSchema {
        name: "user".to_string(),
        version: 1,
        general: vec![
            FieldSchema::with_default("anchor_x", FieldKind::fixed(32, 0.01), Value::Fixed(0.0)),
            FieldSchema::with_default("anchor_y", FieldKind::fixed(32, 0.01), Value::Fixed(0.0)),
            FieldSchema::with_default("comment", FieldKind::Text, Value::Text(String::new())),
        ],
        bindings: vec![],
        lists: vec![
            ListSchema::new(
                "points",
                vec![
                    FieldSchema::new("x", FieldKind::fixed(32, 0.01)),
                    FieldSchema::new("y", FieldKind::fixed(32, 0.01)),
                ],
            ),
            ListSchema::new(
                "segments",
                vec![
                    FieldSchema::new("start", FieldKind::reference("points")),
                    FieldSchema::new("end", FieldKind::reference("points")),
                    FieldSchema::new("color", FieldKind::uint(4)),
                    FieldSchema::new(
                        "line_type",
                        FieldKind::enumeration(2, &["solid", "dashed", "dash_dot"]),
                    ),
                    FieldSchema::new("z_order", FieldKind::int(7)),
                ],
            ),
            ListSchema::new(
                "texts",
                vec![
                    FieldSchema::new("target", FieldKind::optional_reference("segments")),
                    FieldSchema::new("x", FieldKind::fixed(32, 0.01)),
                    FieldSchema::new("y", FieldKind::fixed(32, 0.01)),
                    FieldSchema::new("height", FieldKind::fixed(16, 0.1)),
                    FieldSchema::new("underline", FieldKind::Flag),
                    FieldSchema::new("content", FieldKind::Text),
                ],
            ),
        ],
    }
}

/// All schemas shipped with the engine.
pub fn shipped_schemas() -> Vec<Arc<PpSchema>> {
    vec![
        Arc::new(axono_schema()),
        Arc::new(table_schema()),
        Arc::new(user_schema()),
    ]
}

/// Find a shipped schema by the (name, hash) pair a payload header
/// carries.
pub fn schema_by_header(name: &str, hash: u64) -> Option<Arc<PpSchema>> {
    shipped_schemas()
        .into_iter()
        .find(|s| s.name == name && s.hash() == hash)
}
