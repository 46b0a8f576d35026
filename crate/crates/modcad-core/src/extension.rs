//! The contract every problem-oriented extension implements, and the
//! engine that dispatches its commands. Each extension works on a
//! parameter set in its own session; the drawing shows working modules
//! for the visible objects, and placement collects them into one module.
//!
//! The typical command set is identical across all extensions:
//! new / add / delete / edit / read / write / take / place / release.
//! Special commands are extension-supplied entries in the same table.

use crate::catalog::{catalog_load, catalog_save};
use crate::codec::encode_compact;
use crate::error::{Error, Result};
use crate::geom::{Point2, Primitive};
use crate::model::{place_module, DrawingSettings, extract_pp, Drawing, ElementId, TypeRegistry};
use crate::pp::Pp;
use crate::regen::{generate_all, regenerate, Tag};
use crate::schema::PpSchema;
use crate::value::Value;
use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Names of general parameters the engine maintains when present in a
/// schema: the paper-mm anchor the module was placed at.
pub const ANCHOR_X: &str = "anchor_x";
pub const ANCHOR_Y: &str = "anchor_y";

#[derive(Debug, Clone)]
pub struct CommandSpec {
    pub name: &'static str,
    pub usage: &'static str,
}

/// The typical operations, available in every extension's menu.
pub const TYPICAL_COMMANDS: &[CommandSpec] = &[
    CommandSpec { name: "new", usage: "new" },
    CommandSpec { name: "add", usage: "add <list> [field=value ...]" },
    CommandSpec { name: "delete", usage: "delete <list> <index> [index ...]" },
    CommandSpec { name: "edit", usage: "edit <list>|general <index> field=value ..." },
    CommandSpec { name: "read", usage: "read <name>" },
    CommandSpec { name: "write", usage: "write <name> [--overwrite]" },
    CommandSpec { name: "take", usage: "take <element-id>" },
    CommandSpec { name: "place", usage: "place <x,y> [replace=<element-id>]" },
    CommandSpec { name: "release", usage: "release" },
];

/// Context handed to special commands.
pub struct SpecialContext<'a> {
    pub pp: &'a mut Pp,
    pub drawing: &'a Drawing,
}

pub trait Extension: Send + Sync {
    fn id(&self) -> &str;

    /// Module type used when placing results into the drawing.
    fn module_type(&self) -> &str;

    fn schema(&self) -> &Arc<PpSchema>;

    /// Special commands beyond the typical set.
    fn special_commands(&self) -> &[CommandSpec];

    /// Settings taken over from the drawing when a session starts; the
    /// rest of the general parameters keep their schema defaults.
    fn init_settings(&self, drawing: &DrawingSettings) -> Vec<(String, Value)>;

    /// Cached derived values for one record (text extents and similar).
    fn speed_values(&self, pp: &Pp, list: &str, index: u32) -> Vec<f64>;

    /// Geometry of one record in paper mm relative to the parameter-set
    /// origin; `None` marks records with no visible image.
    fn generate(&self, pp: &Pp, list: &str, index: u32) -> Option<Vec<Primitive>>;

    /// Dispatch one special command; returns user-facing report lines.
    fn run_special(
        &self,
        ctx: SpecialContext<'_>,
        command: &str,
        args: &[String],
    ) -> Result<Vec<String>>;
}

/// Recompute every cached speed entry from the extension's speed function.
pub fn recompute_speed_vars(pp: &mut Pp, ext: &dyn Extension) -> Result<()> {
    if ext.schema().hash() != pp.schema().hash() {
        return Err(Error::ExtensionMismatch);
    }
    let schema = Arc::clone(pp.schema());
    for (li, ls) in schema.lists.iter().enumerate() {
        for index in 0..pp.len(&ls.name)? {
            let values = ext.speed_values(pp, &ls.name, index);
            pp.set_speed(li, index as usize, values);
        }
    }
    Ok(())
}

#[derive(Debug)]
enum SessionSlot {
    Active(Pp),
    /// Explicitly released; only `new` starts over.
    Released,
}

#[derive(Debug, Clone, Default)]
pub struct CommandOutput {
    pub lines: Vec<String>,
}

impl CommandOutput {
    fn say(msg: impl Into<String>) -> Self {
        Self {
            lines: vec![msg.into()],
        }
    }
}

/// Holds the module-type registry, the registered extensions and one
/// editing session per extension.
pub struct Engine {
    pub registry: TypeRegistry,
    extensions: Vec<Arc<dyn Extension>>,
    sessions: HashMap<String, SessionSlot>,
    pub catalog_dir: PathBuf,
}

impl Engine {
    /// Engine with the built-in module types and no extensions.
    pub fn new(catalog_dir: impl Into<PathBuf>) -> Self {
        Self {
            registry: TypeRegistry::with_builtins(),
            extensions: Vec::new(),
            sessions: HashMap::new(),
            catalog_dir: catalog_dir.into(),
        }
    }

    /// Engine with the two reference extensions registered.
    pub fn with_reference_extensions(catalog_dir: impl Into<PathBuf>) -> Self {
        let mut engine = Self::new(catalog_dir);
        engine
            .register_extension(Arc::new(crate::axono::AxonoExtension::new()))
            .expect("axono extension registers");
        engine
            .register_extension(Arc::new(crate::table::TableExtension::new()))
            .expect("table extension registers");
        engine
    }

    pub fn register_extension(&mut self, ext: Arc<dyn Extension>) -> Result<()> {
        if self.extensions.iter().any(|e| e.id() == ext.id()) {
            return Err(Error::DuplicateExtension(ext.id().to_string()));
        }
        let violations = ext.schema().validate();
        if !violations.is_empty() {
            let text = violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::InvalidSchema(text));
        }
        if self.registry.get(ext.module_type()).is_none() {
            return Err(Error::UnknownType(ext.module_type().to_string()));
        }
        self.extensions.push(ext);
        Ok(())
    }

    pub fn extension(&self, ext_id: &str) -> Result<Arc<dyn Extension>> {
        self.extensions
            .iter()
            .find(|e| e.id() == ext_id)
            .cloned()
            .ok_or_else(|| Error::UnknownExtension(ext_id.to_string()))
    }

    pub fn extensions(&self) -> impl Iterator<Item = &Arc<dyn Extension>> {
        self.extensions.iter()
    }

    /// Full command table of one extension: typical then special.
    pub fn commands(&self, ext_id: &str) -> Result<Vec<CommandSpec>> {
        let ext = self.extension(ext_id)?;
        let mut out: Vec<CommandSpec> = TYPICAL_COMMANDS.to_vec();
        out.extend(ext.special_commands().iter().cloned());
        Ok(out)
    }

    /// Fresh parameter set for an extension: schema defaults overlaid
    /// with settings taken from the drawing.
    pub fn new_pp(&self, ext_id: &str, drawing: &Drawing) -> Result<Pp> {
        let ext = self.extension(ext_id)?;
        let mut pp = Pp::new(Arc::clone(ext.schema()));
        for (name, value) in ext.init_settings(&drawing.settings) {
            pp.set_general(&name, value)?;
        }
        Ok(pp)
    }

    /// Parameter set currently being edited, if any.
    pub fn session_pp(&self, ext_id: &str) -> Option<&Pp> {
        match self.sessions.get(ext_id) {
            Some(SessionSlot::Active(pp)) => Some(pp),
            _ => None,
        }
    }

    pub fn catalog_dir(&self) -> &Path {
        &self.catalog_dir
    }

    /// Dispatch one command. Typical operations run in the framework,
    /// special ones in the extension; afterwards the drawing's working
    /// modules are regenerated and the engine contract checked: the
    /// parameter set is sound and drawing tags equal visible records.
    pub fn run_command(
        &mut self,
        drawing: &mut Drawing,
        ext_id: &str,
        command: &str,
        args: &[String],
    ) -> Result<CommandOutput> {
        let ext = self.extension(ext_id)?;

        if command == "new" {
            let pp = self.new_pp(ext_id, drawing)?;
            regenerate(drawing, &pp, ext.as_ref(), None)?;
            self.sessions
                .insert(ext_id.to_string(), SessionSlot::Active(pp));
            return Ok(CommandOutput::say("new parameter set"));
        }

        if command == "release" {
            // Drop the expanded representation; working modules disappear.
            for id in drawing.working_ids_of(ext_id) {
                drawing.remove(id);
            }
            self.sessions
                .insert(ext_id.to_string(), SessionSlot::Released);
            return Ok(CommandOutput::say("parameter set released"));
        }

        // Remaining commands need an active session; one is started on
        // demand unless the previous one was explicitly released.
        match self.sessions.get(ext_id) {
            Some(SessionSlot::Released) => return Err(Error::UseAfterRelease),
            Some(SessionSlot::Active(_)) => {}
            None => {
                let pp = self.new_pp(ext_id, drawing)?;
                self.sessions
                    .insert(ext_id.to_string(), SessionSlot::Active(pp));
            }
        }
        let Some(SessionSlot::Active(pp)) = self.sessions.get_mut(ext_id) else {
            unreachable!("session activated above");
        };

        let is_typical = TYPICAL_COMMANDS.iter().any(|c| c.name == command);
        let output = if is_typical {
            match command {
                "add" => cmd_add(pp, args),
                "delete" => cmd_delete(pp, args),
                "edit" => cmd_edit(pp, args),
                "read" => {
                    let name = one_arg(args, "read <name>")?;
                    *pp = catalog_load(&self.catalog_dir, name, ext.schema())?;
                    Ok(CommandOutput::say(format!("read \"{name}\"")))
                }
                "write" => {
                    let (name, overwrite) = name_and_overwrite(args)?;
                    recompute_speed_vars(pp, ext.as_ref())?;
                    let path = catalog_save(&self.catalog_dir, name, pp, overwrite)?;
                    Ok(CommandOutput::say(format!(
                        "wrote \"{name}\" to {}",
                        path.display()
                    )))
                }
                "take" => {
                    let token = one_arg(args, "take <element-id>")?;
                    let id = ElementId(token.parse::<u64>().map_err(|_| {
                        Error::BadArgument(format!("\"{token}\": expected element id"))
                    })?);
                    let module = drawing
                        .module(id)
                        .ok_or_else(|| Error::ReplaceTargetMissing(id.to_string()))?;
                    *pp = extract_pp(module, ext.schema())?;
                    Ok(CommandOutput::say(format!("took parameter set from {id}")))
                }
                "place" => {
                    let out = cmd_place(drawing, &self.registry, pp, ext.as_ref(), args)?;
                    self.sessions.remove(ext_id);
                    return Ok(out);
                }
                other => Err(Error::UnknownCommand(other.to_string())),
            }
        } else {
            let known = ext.special_commands().iter().any(|c| c.name == command);
            if !known {
                return Err(Error::UnknownCommand(command.to_string()));
            }
            let ctx = SpecialContext { pp, drawing };
            ext.run_special(ctx, command, args)
                .map(|lines| CommandOutput { lines })
        }?;

        recompute_speed_vars(pp, ext.as_ref())?;
        regenerate(drawing, pp, ext.as_ref(), None)?;
        self.enforce_contract(drawing, ext.as_ref(), ext_id)?;
        Ok(output)
    }

    /// Pick working modules of one extension near a paper point.
    pub fn pick(
        &self,
        drawing: &Drawing,
        ext_id: &str,
        point: Point2,
        radius: f64,
        allowed_lists: Option<&[String]>,
    ) -> Result<Vec<Tag>> {
        let ext = self.extension(ext_id)?;
        Ok(crate::regen::pick(
            drawing,
            ext_id,
            ext.schema(),
            point,
            radius,
            allowed_lists,
        ))
    }

    fn enforce_contract(&self, drawing: &Drawing, ext: &dyn Extension, ext_id: &str) -> Result<()> {
        let Some(SessionSlot::Active(pp)) = self.sessions.get(ext_id) else {
            return Ok(());
        };
        let violations = pp.check_integrity();
        if !violations.is_empty() {
            return Err(Error::Internal(format!(
                "integrity violated after command: {}",
                violations[0]
            )));
        }
        let expected: BTreeSet<Tag> = generate_all(pp, ext)?
            .into_iter()
            .map(|wm| wm.tag)
            .collect();
        let actual: BTreeSet<Tag> = drawing
            .working_of(ext_id)
            .into_iter()
            .map(|(_, wm)| wm.tag.clone())
            .collect();
        if expected != actual {
            return Err(Error::Internal(
                "drawing tags diverge from visible records".to_string(),
            ));
        }
        Ok(())
    }
}

fn one_arg<'a>(args: &'a [String], usage: &str) -> Result<&'a str> {
    match args {
        [single] => Ok(single.as_str()),
        _ => Err(Error::BadArgument(format!("usage: {usage}"))),
    }
}

fn name_and_overwrite(args: &[String]) -> Result<(&str, bool)> {
    match args {
        [name] => Ok((name.as_str(), false)),
        [name, flag] if flag == "--overwrite" => Ok((name.as_str(), true)),
        _ => Err(Error::BadArgument(
            "usage: write <name> [--overwrite]".to_string(),
        )),
    }
}

/// Parse "x,y" into a paper point.
pub fn parse_point2(token: &str) -> Result<Point2> {
    let parts: Vec<&str> = token.split(',').collect();
    if parts.len() != 2 {
        return Err(Error::BadArgument(format!("\"{token}\": expected x,y")));
    }
    let x = parts[0]
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::BadArgument(format!("\"{token}\": bad x coordinate")))?;
    let y = parts[1]
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::BadArgument(format!("\"{token}\": bad y coordinate")))?;
    Ok(Point2::new(x, y))
}

/// Split a `field=value` token; surrounding quotes on the value are
/// stripped by the script tokenizer before we get here.
fn split_assignment(token: &str) -> Result<(&str, &str)> {
    token
        .split_once('=')
        .ok_or_else(|| Error::BadArgument(format!("\"{token}\": expected field=value")))
}

fn parse_fields<'a>(
    schema: &PpSchema,
    list: &str,
    tokens: &'a [String],
) -> Result<Vec<(String, Value)>> {
    let (_, ls) = schema
        .list(list)
        .ok_or_else(|| Error::UnknownList(list.to_string()))?;
    let mut out = Vec::with_capacity(tokens.len());
    for token in tokens {
        let (field, raw) = split_assignment(token)?;
        let (_, fs) = ls.field(field).ok_or_else(|| {
            Error::FieldMismatch(format!("unknown field \"{field}\" in \"{list}\""))
        })?;
        out.push((field.to_string(), Value::parse(raw, &fs.kind)?));
    }
    Ok(out)
}

fn cmd_add(pp: &mut Pp, args: &[String]) -> Result<CommandOutput> {
    let [list, rest @ ..] = args else {
        return Err(Error::BadArgument(
            "usage: add <list> [field=value ...]".to_string(),
        ));
    };
    let schema = Arc::clone(pp.schema());
    let fields = parse_fields(&schema, list, rest)?;
    let borrowed: Vec<(&str, Value)> = fields
        .iter()
        .map(|(name, value)| (name.as_str(), value.clone()))
        .collect();
    let index = pp.add_object(list, &borrowed)?;
    Ok(CommandOutput::say(format!("{list}[{index}] added")))
}

fn cmd_delete(pp: &mut Pp, args: &[String]) -> Result<CommandOutput> {
    let [list, rest @ ..] = args else {
        return Err(Error::BadArgument(
            "usage: delete <list> <index> [index ...]".to_string(),
        ));
    };
    if rest.is_empty() {
        return Err(Error::BadArgument(
            "usage: delete <list> <index> [index ...]".to_string(),
        ));
    }
    let mut indices = Vec::with_capacity(rest.len());
    for token in rest {
        indices.push(token.parse::<u32>().map_err(|_| {
            Error::BadArgument(format!("\"{token}\": expected record index"))
        })?);
    }
    let report = pp.delete_objects(list, &indices)?;
    let mut lines = Vec::new();
    for (list, removed) in &report.removed {
        let ids: Vec<String> = removed.iter().map(|i| i.to_string()).collect();
        lines.push(format!("removed {}[{}]", list, ids.join(",")));
    }
    if lines.is_empty() {
        lines.push("nothing removed".to_string());
    }
    Ok(CommandOutput { lines })
}

fn cmd_edit(pp: &mut Pp, args: &[String]) -> Result<CommandOutput> {
    let usage = || Error::BadArgument("usage: edit <list>|general [<index>] field=value ...".to_string());
    let schema = Arc::clone(pp.schema());
    match args {
        [target, rest @ ..] if target == "general" => {
            if rest.is_empty() {
                return Err(usage());
            }
            for token in rest {
                let (field, raw) = split_assignment(token)?;
                let (_, fs) = schema
                    .general_field(field)
                    .ok_or_else(|| Error::FieldMismatch(format!("unknown general field \"{field}\"")))?;
                pp.set_general(field, Value::parse(raw, &fs.kind)?)?;
            }
            Ok(CommandOutput::say("general parameters updated"))
        }
        [list, index, rest @ ..] => {
            if rest.is_empty() {
                return Err(usage());
            }
            let index: u32 = index
                .parse()
                .map_err(|_| Error::BadArgument(format!("\"{index}\": expected record index")))?;
            let fields = parse_fields(&schema, list, rest)?;
            for (field, value) in fields {
                pp.set_field(list, index, &field, value)?;
            }
            Ok(CommandOutput::say(format!("{list}[{index}] updated")))
        }
        _ => Err(usage()),
    }
}

fn cmd_place(
    drawing: &mut Drawing,
    registry: &TypeRegistry,
    pp: &mut Pp,
    ext: &dyn Extension,
    args: &[String],
) -> Result<CommandOutput> {
    let usage = || Error::BadArgument("usage: place <x,y> [replace=<element-id>]".to_string());
    let (anchor_token, replace) = match args {
        [anchor] => (anchor, None),
        [anchor, replace_token] => {
            let (key, value) = split_assignment(replace_token)?;
            if key != "replace" {
                return Err(usage());
            }
            let id = value.parse::<u64>().map_err(|_| {
                Error::BadArgument(format!("\"{value}\": expected element id"))
            })?;
            (anchor, Some(ElementId(id)))
        }
        _ => return Err(usage()),
    };
    let anchor = parse_point2(anchor_token)?;

    if pp.schema().general_field(ANCHOR_X).is_some() {
        pp.set_general(ANCHOR_X, Value::Fixed(anchor.x))?;
    }
    if pp.schema().general_field(ANCHOR_Y).is_some() {
        pp.set_general(ANCHOR_Y, Value::Fixed(anchor.y))?;
    }

    let violations = pp.check_integrity();
    if !violations.is_empty() {
        return Err(Error::Internal(format!(
            "refusing to place an unsound parameter set: {}",
            violations[0]
        )));
    }
    let payload = encode_compact(pp)?;
    let working_ids = drawing.working_ids_of(ext.id());
    let placed = place_module(
        drawing,
        registry,
        &working_ids,
        payload.bytes,
        ext.module_type(),
        anchor,
        replace,
    )?;
    Ok(CommandOutput::say(format!(
        "placed module {placed} ({} working modules collected)",
        working_ids.len()
    )))
}
