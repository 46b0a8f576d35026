//! Line-oriented command scripts: one command per line, `#` comments,
//! whitespace-separated tokens with double-quoted spans. Scripts drive
//! the same engine commands the CLI exposes; unknown commands abort with
//! their line number.

use crate::dump::dump_drawing;
use crate::error::{Error, Result};
use crate::extension::{parse_point2, Engine};
use crate::geom::Point2;
use crate::model::{Drawing, Element, Module, PropertyKind, PropertyValue};
use crate::svg::render_drawing;
use std::path::Path;

/// Split one line into tokens. Double quotes group spans (including
/// whitespace) inside a token and are stripped; `#` outside quotes starts
/// a comment.
pub fn tokenize(line: &str) -> Result<Vec<String>> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut in_quotes = false;
    let mut has_token = false;
    for c in line.chars() {
        match c {
            '"' => {
                in_quotes = !in_quotes;
                has_token = true;
            }
            '#' if !in_quotes => break,
            c if c.is_whitespace() && !in_quotes => {
                if has_token {
                    tokens.push(std::mem::take(&mut current));
                    has_token = false;
                }
            }
            c => {
                current.push(c);
                has_token = true;
            }
        }
    }
    if in_quotes {
        return Err(Error::BadArgument("unterminated quote".to_string()));
    }
    if has_token {
        tokens.push(current);
    }
    Ok(tokens)
}

/// Create a plain property-only module (no payload, no geometry), e.g. a
/// fitting whose specifying properties feed the specification table.
pub fn add_module_command(
    engine: &Engine,
    drawing: &mut Drawing,
    args: &[String],
) -> Result<String> {
    let [type_name, rest @ ..] = args else {
        return Err(Error::BadArgument(
            "usage: add-module <type> [key=value ...] [@x,y]".to_string(),
        ));
    };
    let def = engine
        .registry
        .get(type_name)
        .ok_or_else(|| Error::UnknownType(type_name.to_string()))?;

    let mut anchor = Point2::default();
    let mut properties = Vec::new();
    for token in rest {
        if let Some(coords) = token.strip_prefix('@') {
            anchor = parse_point2(coords)?;
            continue;
        }
        let (key, raw) = token.split_once('=').ok_or_else(|| {
            Error::BadArgument(format!("\"{token}\": expected key=value or @x,y"))
        })?;
        let kind = def.property_kind(key).ok_or_else(|| Error::UnknownProperty {
            type_name: type_name.to_string(),
            key: key.to_string(),
        })?;
        let value = parse_property(raw, kind)
            .ok_or_else(|| Error::PropertyKindMismatch(key.to_string()))?;
        properties.push((key.to_string(), value));
    }

    let mut module = Module::new(type_name, anchor);
    for (key, value) in properties {
        module.properties.insert(key, value);
    }
    let id = drawing.add_element(Element::Module(module));
    Ok(format!("module {id} added"))
}

fn parse_property(raw: &str, kind: PropertyKind) -> Option<PropertyValue> {
    match kind {
        PropertyKind::Text => Some(PropertyValue::Text(raw.to_string())),
        PropertyKind::Number => raw.parse::<f64>().ok().map(PropertyValue::Number),
        PropertyKind::Flag => match raw {
            "true" | "1" | "on" => Some(PropertyValue::Flag(true)),
            "false" | "0" | "off" => Some(PropertyValue::Flag(false)),
            _ => None,
        },
        PropertyKind::Point => parse_point2(raw).ok().map(PropertyValue::Point),
        PropertyKind::Bytes => decode_hex(raw).map(PropertyValue::Bytes),
    }
}

fn decode_hex(raw: &str) -> Option<Vec<u8>> {
    if raw.len() % 2 != 0 {
        return None;
    }
    (0..raw.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(raw.get(i..i + 2)?, 16).ok())
        .collect()
}

/// Run a script against a drawing. Output lines from every command are
/// collected in order; the first failure aborts with its line number.
pub fn run_script(
    engine: &mut Engine,
    drawing: &mut Drawing,
    script: &str,
    work_dir: &Path,
) -> Result<Vec<String>> {
    let mut output = Vec::new();
    for (line_index, raw_line) in script.lines().enumerate() {
        let line_no = line_index + 1;
        let fail = |e: Error| Error::Script {
            line: line_no,
            message: e.to_string(),
        };
        let tokens = tokenize(raw_line).map_err(fail)?;
        let Some((head, args)) = tokens.split_first() else {
            continue;
        };
        match head.as_str() {
            "add-module" => {
                let line = add_module_command(engine, drawing, args).map_err(fail)?;
                output.push(line);
            }
            "export-svg" => {
                let [path] = args else {
                    return Err(fail(Error::BadArgument(
                        "usage: export-svg <path>".to_string(),
                    )));
                };
                let svg = render_drawing(drawing);
                std::fs::write(work_dir.join(path), svg).map_err(|e| fail(e.into()))?;
                output.push(format!("exported {path}"));
            }
            "dump" => {
                output.extend(dump_drawing(drawing).lines().map(String::from));
            }
            ext_id if engine.extension(ext_id).is_ok() => {
                let [command, rest @ ..] = args else {
                    return Err(fail(Error::BadArgument(format!(
                        "usage: {ext_id} <command> [args ...]"
                    ))));
                };
                let result = engine
                    .run_command(drawing, ext_id, command, rest)
                    .map_err(fail)?;
                output.extend(result.lines);
            }
            unknown => {
                return Err(Error::Script {
                    line: line_no,
                    message: format!("unknown command \"{unknown}\""),
                })
            }
        }
    }
    Ok(output)
}
