//! Engine-level flows: command dispatch, session lifecycle, placement and
//! extraction round trips, regeneration locality, picking, catalog use
//! and the engine-wide contract after every command.

mod common;

use modcad_core::codec::encode_compact;
use modcad_core::error::Error;
use modcad_core::extension::{recompute_speed_vars, Engine, TYPICAL_COMMANDS};
use modcad_core::geom::Point2;
use modcad_core::model::{extract_pp, Drawing, Element};
use modcad_core::pp::Pp;
use modcad_core::regen::{bounds, generate_all, regenerate, Tag};
use modcad_core::schema::fnv1a;
use modcad_core::value::Value;
use std::collections::BTreeSet;
use std::sync::Arc;

fn strings(args: &[&str]) -> Vec<String> {
    args.iter().map(|s| s.to_string()).collect()
}

fn engine_and_drawing() -> (Engine, Drawing) {
    let dir = tempfile::tempdir().unwrap();
    let engine = Engine::with_reference_extensions(dir.keep());
    (engine, Drawing::new(420.0, 297.0))
}

fn run(engine: &mut Engine, drawing: &mut Drawing, ext: &str, command: &str, args: &[&str]) {
    engine
        .run_command(drawing, ext, command, &strings(args))
        .unwrap_or_else(|e| panic!("{ext} {command}: {e}"));
}

#[test]
fn add_axis_produces_working_modules_then_place_collects_them() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "0,0,2500", "2000,0,2500"]);
    run(&mut engine, &mut drawing, "axono", "label", &["0", "DN50"]);

    // Two pipes and one label are visible.
    let tags: Vec<Tag> = drawing
        .working_of("axono")
        .into_iter()
        .map(|(_, w)| w.tag.clone())
        .collect();
    assert_eq!(tags.len(), 3);

    run(&mut engine, &mut drawing, "axono", "place", &["60,120"]);
    assert!(drawing.working_of("axono").is_empty());
    assert_eq!(drawing.modules().count(), 1);
    let (_, module) = drawing.modules().next().unwrap();
    assert_eq!(module.type_name, "Аксонометрическая схема");
    assert!(module.has_payload());
    assert!(!module.geometry.is_empty());
    assert_eq!(module.anchor, Point2::new(60.0, 120.0));
}

#[test]
fn place_then_take_round_trips_the_parameter_set() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "0,0,2500"]);
    run(&mut engine, &mut drawing, "axono", "add-break", &["Z", "1200", "-600"]);
    run(&mut engine, &mut drawing, "axono", "label", &["0", "DN50"]);
    let expected = engine.session_pp("axono").unwrap().clone();
    run(&mut engine, &mut drawing, "axono", "place", &["60,120"]);

    let (id, module) = drawing.modules().next().unwrap();
    let ext = engine.extension("axono").unwrap();
    let mut extracted = extract_pp(module, ext.schema()).unwrap();
    // The anchor was stamped into the generals at placement.
    assert_eq!(
        extracted.general_value("anchor_x").unwrap(),
        &Value::Fixed(60.0)
    );
    let mut reference = expected.clone();
    reference.set_general("anchor_x", Value::Fixed(60.0)).unwrap();
    reference.set_general("anchor_y", Value::Fixed(120.0)).unwrap();
    assert!(extracted == reference, "extracted differs from placed");

    // Speed values come back after explicit recomputation.
    assert!(extracted.speed_entries("pipes").unwrap().iter().all(|e| e.is_empty()));
    recompute_speed_vars(&mut extracted, ext.as_ref()).unwrap();
    assert_eq!(extracted.speed_entries("pipes").unwrap()[0][0], 2500.0);

    // Engine-level take gives the same parameter set.
    run(&mut engine, &mut drawing, "axono", "take", &[&id.to_string()]);
    assert!(engine.session_pp("axono").unwrap() == &reference);
}

#[test]
fn replacing_a_module_keeps_element_count_and_is_idempotent() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "1000,0,0"]);
    run(&mut engine, &mut drawing, "axono", "place", &["50,50"]);
    let (id, _) = drawing.modules().next().unwrap();

    run(&mut engine, &mut drawing, "axono", "take", &[&id.to_string()]);
    run(&mut engine, &mut drawing, "axono", "edit", &["pipes", "0", "diameter=80"]);
    run(&mut engine, &mut drawing, "axono", "place", &["50,50", &format!("replace={id}")]);
    assert_eq!(drawing.elements().len(), 1);
    let svg_once = modcad_core::svg::render_drawing(&drawing);

    // Placing the same payload over the same target again changes nothing.
    run(&mut engine, &mut drawing, "axono", "take", &[&id.to_string()]);
    run(&mut engine, &mut drawing, "axono", "place", &["50,50", &format!("replace={id}")]);
    let svg_twice = modcad_core::svg::render_drawing(&drawing);
    assert_eq!(svg_once, svg_twice);
}

#[test]
fn generation_is_deterministic_and_local() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "0,0,2500", "2000,0,2500"]);
    run(&mut engine, &mut drawing, "axono", "label", &["1", "DN50"]);
    let ext = engine.extension("axono").unwrap();
    let pp = engine.session_pp("axono").unwrap().clone();

    let hash_of = |pp: &Pp| {
        let mut text = String::new();
        for wm in generate_all(pp, ext.as_ref()).unwrap() {
            text.push_str(&format!("{} {:?}\n", wm.tag, wm.primitives));
        }
        fnv1a(text.as_bytes())
    };
    assert_eq!(hash_of(&pp), hash_of(&pp), "generation hash unstable");

    // Edit one pipe's diameter: only that tag's primitives may differ.
    let before: Vec<_> = generate_all(&pp, ext.as_ref()).unwrap();
    let mut edited = pp.clone();
    edited.set_field("pipes", 0, "diameter", Value::UInt(150)).unwrap();
    recompute_speed_vars(&mut edited, ext.as_ref()).unwrap();
    let after: Vec<_> = generate_all(&edited, ext.as_ref()).unwrap();
    assert_eq!(before.len(), after.len());
    for (b, a) in before.iter().zip(&after) {
        assert_eq!(b.tag, a.tag);
        if b.tag != Tag::new("pipes", 0) {
            assert_eq!(b.primitives, a.primitives, "unrelated tag {} changed", b.tag);
        }
    }
}

#[test]
fn subset_regeneration_touches_only_named_tags() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "0,0,2500", "2000,0,2500"]);
    let ext = engine.extension("axono").unwrap();
    let mut pp = engine.session_pp("axono").unwrap().clone();

    pp.set_field("pipes", 0, "diameter", Value::UInt(125)).unwrap();
    recompute_speed_vars(&mut pp, ext.as_ref()).unwrap();
    let subset: BTreeSet<Tag> = [Tag::new("pipes", 0)].into();
    regenerate(&mut drawing, &pp, ext.as_ref(), Some(&subset)).unwrap();
    // Everything still lines up with the visible set.
    let tags: BTreeSet<Tag> = drawing
        .working_of("axono")
        .into_iter()
        .map(|(_, w)| w.tag.clone())
        .collect();
    let visible: BTreeSet<Tag> = generate_all(&pp, ext.as_ref())
        .unwrap()
        .into_iter()
        .map(|w| w.tag)
        .collect();
    assert_eq!(tags, visible);

    // A stale tag in the subset removes its working module, adds nothing.
    let mut shrunk = pp.clone();
    shrunk.delete_objects("pipes", &[1]).unwrap();
    recompute_speed_vars(&mut shrunk, ext.as_ref()).unwrap();
    let stale: BTreeSet<Tag> = [Tag::new("pipes", 1)].into();
    regenerate(&mut drawing, &shrunk, ext.as_ref(), Some(&stale)).unwrap();
    assert!(drawing.find_working("axono", &Tag::new("pipes", 1)).is_none());
}

#[test]
fn pick_orders_by_distance_then_list_then_index() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "100,0,0"]);
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,30,0", "100,30,0"]);

    // Points on the first pipe pick it first.
    let hits = engine
        .pick(&drawing, "axono", Point2::new(50.0, 0.0), 0.5, None)
        .unwrap();
    assert_eq!(hits.first(), Some(&Tag::new("pipes", 0)));

    // Empty region picks nothing.
    let hits = engine
        .pick(&drawing, "axono", Point2::new(500.0, 500.0), 2.0, None)
        .unwrap();
    assert!(hits.is_empty());

    // Equidistant overlapping labels tie-break by index.
    run(&mut engine, &mut drawing, "axono", "label", &["@50,0,10", "A"]);
    run(&mut engine, &mut drawing, "axono", "label", &["@50,0,10", "B"]);
    let hits = engine
        .pick(
            &drawing,
            "axono",
            Point2::new(55.0, 12.0),
            10.0,
            Some(&["labels".to_string()]),
        )
        .unwrap();
    assert_eq!(hits, vec![Tag::new("labels", 0), Tag::new("labels", 1)]);

    // Picked tags always exist in the drawing.
    for tag in hits {
        assert!(drawing.find_working("axono", &tag).is_some());
    }
}

#[test]
fn catalog_write_read_through_engine() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "0,0,1000"]);
    let saved = engine.session_pp("axono").unwrap().clone();
    run(&mut engine, &mut drawing, "axono", "write", &["riser-A"]);

    // Listing shows the entry with preview bounds computed by regen.
    let entries = modcad_core::catalog::catalog_list(engine.catalog_dir(), |image, name, hash| {
        let schema = modcad_core::schemas::schema_by_header(name, hash)?;
        let pp = modcad_core::codec::decode_compact(image, &schema).ok()?;
        let ext = engine.extension("axono").ok()?;
        bounds(&generate_all(&pp, ext.as_ref()).ok()?)
    })
    .unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0].name, "riser-A");
    let preview = entries[0].preview_bounds.unwrap();
    assert_eq!(preview.height(), 1000.0);

    // Second write without --overwrite collides.
    let err = engine
        .run_command(&mut drawing, "axono", "write", &strings(&["riser-A"]))
        .unwrap_err();
    assert!(matches!(err, Error::NameCollision(_)));

    run(&mut engine, &mut drawing, "axono", "new", &[]);
    run(&mut engine, &mut drawing, "axono", "read", &["riser-A"]);
    assert!(engine.session_pp("axono").unwrap() == &saved);
    // Speed values are live after read.
    assert_eq!(
        engine.session_pp("axono").unwrap().speed_entries("pipes").unwrap()[0][0],
        1000.0
    );

    let err = engine
        .run_command(&mut drawing, "axono", "read", &strings(&["missing"]))
        .unwrap_err();
    assert!(matches!(err, Error::NotFound(_)));
}

#[test]
fn release_blocks_every_command_except_new() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "0,0,1000"]);
    run(&mut engine, &mut drawing, "axono", "release", &[]);
    assert!(drawing.working_of("axono").is_empty());

    let err = engine
        .run_command(&mut drawing, "axono", "add-axis", &strings(&["0,0,0", "1,0,0"]))
        .unwrap_err();
    assert!(matches!(err, Error::UseAfterRelease));

    run(&mut engine, &mut drawing, "axono", "new", &[]);
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "0,0,1000"]);
    assert_eq!(drawing.working_of("axono").len(), 1);
}

#[test]
fn init_settings_seed_from_drawing_and_schema_defaults() {
    let (engine, mut drawing) = engine_and_drawing();
    drawing.settings.text_height = 3.5;
    let pp = engine.new_pp("axono", &drawing).unwrap();
    assert_eq!(pp.general_value("label_height").unwrap(), &Value::Fixed(3.5));
    assert_eq!(pp.general_value("default_diameter").unwrap(), &Value::UInt(50));

    let table = engine.new_pp("table", &drawing).unwrap();
    assert_eq!(table.general_value("text_height").unwrap(), &Value::Fixed(3.5));
}

#[test]
fn typical_command_set_is_identical_across_extensions() {
    let (engine, _) = engine_and_drawing();
    let names: Vec<&str> = TYPICAL_COMMANDS.iter().map(|c| c.name).collect();
    assert_eq!(
        names,
        vec!["new", "add", "delete", "edit", "read", "write", "take", "place", "release"]
    );
    for ext in ["axono", "table"] {
        let all = engine.commands(ext).unwrap();
        let head: Vec<&str> = all.iter().take(names.len()).map(|c| c.name).collect();
        assert_eq!(head, names, "{ext} deviates from the typical set");
    }
}

#[test]
fn unknown_extension_and_command_are_typed_errors() {
    let (mut engine, mut drawing) = engine_and_drawing();
    let err = engine
        .run_command(&mut drawing, "nope", "add", &[])
        .unwrap_err();
    assert!(matches!(err, Error::UnknownExtension(_)));
    let err = engine
        .run_command(&mut drawing, "axono", "nope", &[])
        .unwrap_err();
    assert!(matches!(err, Error::UnknownCommand(_)));
}

#[test]
fn register_extension_rejects_duplicates_and_bad_schemas() {
    let (mut engine, _) = engine_and_drawing();
    let err = engine
        .register_extension(Arc::new(modcad_core::axono::AxonoExtension::new()))
        .unwrap_err();
    assert!(matches!(err, Error::DuplicateExtension(_)));

    struct Broken {
        schema: Arc<modcad_core::schema::PpSchema>,
    }
    impl modcad_core::extension::Extension for Broken {
        fn id(&self) -> &str {
            "broken"
        }
        fn module_type(&self) -> &str {
            "Пользовательский"
        }
        fn schema(&self) -> &Arc<modcad_core::schema::PpSchema> {
            &self.schema
        }
        fn special_commands(&self) -> &[modcad_core::extension::CommandSpec] {
            &[]
        }
        fn init_settings(
            &self,
            _: &modcad_core::model::DrawingSettings,
        ) -> Vec<(String, Value)> {
            vec![]
        }
        fn speed_values(&self, _: &Pp, _: &str, _: u32) -> Vec<f64> {
            vec![]
        }
        fn generate(
            &self,
            _: &Pp,
            _: &str,
            _: u32,
        ) -> Option<Vec<modcad_core::geom::Primitive>> {
            None
        }
        fn run_special(
            &self,
            _: modcad_core::extension::SpecialContext<'_>,
            command: &str,
            _: &[String],
        ) -> modcad_core::error::Result<Vec<String>> {
            Err(Error::UnknownCommand(command.to_string()))
        }
    }

    use modcad_core::schema::{FieldKind, FieldSchema, ListSchema, PpSchema};
    let cyclic = PpSchema {
        name: "cyclic".into(),
        version: 1,
        general: vec![],
        bindings: vec![],
        lists: vec![
            ListSchema::new("a", vec![FieldSchema::new("r", FieldKind::reference("b"))]),
            ListSchema::new("b", vec![FieldSchema::new("r", FieldKind::reference("a"))]),
        ],
    };
    let err = engine
        .register_extension(Arc::new(Broken {
            schema: Arc::new(cyclic),
        }))
        .unwrap_err();
    assert!(matches!(err, Error::InvalidSchema(_)));
}

#[test]
fn speed_vars_follow_the_extent_formula() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "0,0,1000"]);
    run(&mut engine, &mut drawing, "axono", "label", &["0", "DN50"]);
    let pp = engine.session_pp("axono").unwrap();
    // 4 chars x 2.5 mm x 0.6 = 6.0 mm cached extent width.
    let entry = &pp.speed_entries("labels").unwrap()[0];
    assert!((entry[0] - 6.0).abs() < 1e-9, "extent {entry:?}");
    assert!((entry[1] - 2.5).abs() < 1e-9);
}

#[test]
fn empty_parameter_set_generates_nothing_and_place_fails() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "new", &[]);
    assert!(drawing.working_of("axono").is_empty());
    let err = engine
        .run_command(&mut drawing, "axono", "place", &strings(&["10,10"]))
        .unwrap_err();
    assert!(matches!(err, Error::EmptyResult));
}

#[test]
fn encoded_payload_matches_separately_encoded_session() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "500,0,0"]);
    let mut pp = engine.session_pp("axono").unwrap().clone();
    pp.set_general("anchor_x", Value::Fixed(10.0)).unwrap();
    pp.set_general("anchor_y", Value::Fixed(20.0)).unwrap();
    let expected = encode_compact(&pp).unwrap();
    run(&mut engine, &mut drawing, "axono", "place", &["10,20"]);
    let (_, module) = drawing.modules().next().unwrap();
    assert_eq!(module.payload, expected.bytes);
}

#[test]
fn table_commands_build_edit_and_place() {
    let (mut engine, mut drawing) = engine_and_drawing();
    for _ in 0..2 {
        modcad_core::script::add_module_command(
            &engine,
            &mut drawing,
            &strings(&["Арматура", "Обозначение=15кч18п", "Наименование=Вентиль", "Масса=3.4"]),
        )
        .unwrap();
    }
    run(&mut engine, &mut drawing, "table", "build", &[]);
    {
        let pp = engine.session_pp("table").unwrap();
        assert_eq!(pp.len("rows").unwrap(), 1);
        assert_eq!(
            modcad_core::table::cell_text(pp, 0, 2).as_deref(),
            Some("2")
        );
    }
    run(&mut engine, &mut drawing, "table", "add-row", &[]);
    run(&mut engine, &mut drawing, "table", "set-cell", &["1", "1", "Прокладки"]);
    run(&mut engine, &mut drawing, "table", "place", &["200,40"]);
    let table_module = drawing
        .modules()
        .find(|(_, m)| m.type_name == "Табличный");
    assert!(table_module.is_some());

    // Element snapshot: 2 armature modules + 1 table module.
    assert_eq!(drawing.modules().count(), 3);
    assert!(drawing.working_of("table").is_empty());
}

#[test]
fn working_modules_of_two_extensions_coexist() {
    let (mut engine, mut drawing) = engine_and_drawing();
    run(&mut engine, &mut drawing, "axono", "add-axis", &["0,0,0", "100,0,0"]);
    run(&mut engine, &mut drawing, "table", "add-row", &[]);
    run(&mut engine, &mut drawing, "table", "add", &["columns", "title=А", "width=40"]);
    assert!(!drawing.working_of("axono").is_empty());
    assert!(!drawing.working_of("table").is_empty());
    // Each extension only collects its own working modules on placement.
    run(&mut engine, &mut drawing, "axono", "place", &["10,10"]);
    assert!(drawing.working_of("axono").is_empty());
    assert!(!drawing.working_of("table").is_empty());
}
