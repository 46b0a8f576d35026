//! On-disk prototype catalog: a flat directory of `.ppc` files, each
//! holding one compact parameter image, keyed by file stem. Saved
//! parameter sets are reused as starting points for new designs.

use crate::codec::{decode_compact, encode_compact, CompactImage};
use crate::error::{Error, Result};
use crate::geom::Rect;
use crate::pp::Pp;
use crate::schema::PpSchema;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const CATALOG_EXT: &str = "ppc";

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub path: PathBuf,
    pub image: CompactImage,
    /// Schema name from the image header.
    pub schema_name: String,
    pub schema_hash: u64,
    /// Extent of the regenerated geometry; `None` when the schema is not
    /// known to the caller or the entry is empty.
    pub preview_bounds: Option<Rect>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && !name.contains(['/', '\\'])
        && name != "."
        && name != ".."
        && !name.contains('\0')
}

fn entry_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.{CATALOG_EXT}"))
}

/// Write `pp` as `<name>.ppc` under `dir`, creating the directory on first
/// save. Refuses to overwrite unless asked to.
pub fn catalog_save(dir: &Path, name: &str, pp: &Pp, overwrite: bool) -> Result<PathBuf> {
    if !valid_name(name) {
        return Err(Error::InvalidCatalogName(name.to_string()));
    }
    let image = encode_compact(pp)?;
    fs::create_dir_all(dir)?;
    let path = entry_path(dir, name);
    if path.exists() && !overwrite {
        return Err(Error::NameCollision(name.to_string()));
    }
    fs::write(&path, &image.bytes)?;
    Ok(path)
}

/// Load `<name>.ppc` and expand it under the given schema. Speed values
/// must be recomputed by the caller's extension.
pub fn catalog_load(dir: &Path, name: &str, schema: &Arc<PpSchema>) -> Result<Pp> {
    if !valid_name(name) {
        return Err(Error::InvalidCatalogName(name.to_string()));
    }
    let path = entry_path(dir, name);
    if !path.exists() {
        return Err(Error::NotFound(name.to_string()));
    }
    let bytes = fs::read(&path)?;
    decode_compact(&CompactImage { bytes }, schema)
}

/// All entries sorted by name. `preview` receives each decodable image
/// header and may return regenerated bounds (entries whose schema it does
/// not recognize get `None`). Unreadable or foreign files are skipped.
pub fn catalog_list(
    dir: &Path,
    mut preview: impl FnMut(&CompactImage, &str, u64) -> Option<Rect>,
) -> Result<Vec<CatalogEntry>> {
    let mut entries = Vec::new();
    if !dir.exists() {
        return Ok(entries);
    }
    for item in fs::read_dir(dir)? {
        let item = item?;
        let path = item.path();
        if path.extension().and_then(|e| e.to_str()) != Some(CATALOG_EXT) {
            continue;
        }
        let Some(name) = path.file_stem().and_then(|s| s.to_str()).map(String::from) else {
            continue;
        };
        let bytes = fs::read(&path)?;
        let image = CompactImage { bytes };
        let Ok((schema_name, schema_hash)) = image.header() else {
            continue;
        };
        let preview_bounds = preview(&image, &schema_name, schema_hash);
        entries.push(CatalogEntry {
            name,
            path,
            image,
            schema_name,
            schema_hash,
            preview_bounds,
        });
    }
    entries.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{FieldKind, FieldSchema, ListSchema};
    use crate::value::Value;

    fn schema() -> Arc<PpSchema> {
        Arc::new(PpSchema {
            name: "cat".into(),
            version: 1,
            general: vec![],
            bindings: vec![],
            lists: vec![ListSchema::new(
                "items",
                vec![FieldSchema::new("v", FieldKind::uint(8))],
            )],
        })
    }

    #[test]
    fn save_list_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let schema = schema();
        let mut pp = Pp::new(Arc::clone(&schema));
        pp.add_object("items", &[("v", Value::UInt(7))]).unwrap();

        catalog_save(dir.path(), "riser-A", &pp, false).unwrap();
        let entries = catalog_list(dir.path(), |_, _, _| None).unwrap();
        assert_eq!(entries.len(), 1);
        assert_eq!(entries[0].name, "riser-A");
        assert_eq!(entries[0].schema_name, "cat");

        let loaded = catalog_load(dir.path(), "riser-A", &schema).unwrap();
        assert_eq!(loaded, pp);
    }

    #[test]
    fn save_without_overwrite_collides() {
        let dir = tempfile::tempdir().unwrap();
        let pp = Pp::new(schema());
        catalog_save(dir.path(), "a", &pp, false).unwrap();
        assert!(matches!(
            catalog_save(dir.path(), "a", &pp, false),
            Err(Error::NameCollision(_))
        ));
        catalog_save(dir.path(), "a", &pp, true).unwrap();
    }

    #[test]
    fn load_unknown_name_is_not_found() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            catalog_load(dir.path(), "nope", &schema()),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn names_with_separators_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let pp = Pp::new(schema());
        assert!(matches!(
            catalog_save(dir.path(), "a/b", &pp, false),
            Err(Error::InvalidCatalogName(_))
        ));
    }

    #[test]
    fn listing_sorts_lexicographically() {
        let dir = tempfile::tempdir().unwrap();
        let pp = Pp::new(schema());
        for name in ["zeta", "alpha", "mid"] {
            catalog_save(dir.path(), name, &pp, false).unwrap();
        }
        let names: Vec<String> = catalog_list(dir.path(), |_, _, _| None)
            .unwrap()
            .into_iter()
            .map(|e| e.name)
            .collect();
        assert_eq!(names, vec!["alpha", "mid", "zeta"]);
    }
}
