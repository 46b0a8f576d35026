//! modcad — scriptable front end for the parametric drawing-module
//! engine. Exit codes: 0 success, 1 user error (message on stderr),
//! 2 internal invariant failure.

use clap::{Parser, Subcommand};
use modcad_core::catalog::{catalog_list, catalog_save};
use modcad_core::codec::decode_compact;
use modcad_core::drawing_file::{read_drawing, write_drawing};
use modcad_core::dump::dump_drawing;
use modcad_core::error::Error;
use modcad_core::extension::{parse_point2, recompute_speed_vars, Engine};
use modcad_core::geom::fmt_mm;
use modcad_core::model::{extract_pp, Drawing};
use modcad_core::regen::{bounds, generate_all};
use modcad_core::schemas::schema_by_header;
use modcad_core::script::run_script;
use modcad_core::svg::render_drawing;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "modcad",
    version,
    about = "Parametric drawing modules: axonometric piping schemes and specification tables",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Create an empty drawing with the given sheet size in mm.
    New {
        file: PathBuf,
        width: f64,
        height: f64,
    },
    /// Run a command script against a drawing and save it back.
    Run { file: PathBuf, script: PathBuf },
    /// List the registered module types and their allowed properties.
    Types,
    /// Run one extension command against a drawing.
    Ext {
        id: String,
        command: String,
        args: Vec<String>,
        /// Drawing file the command operates on.
        #[arg(long)]
        file: PathBuf,
    },
    /// Prototype catalog operations.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Render a drawing to SVG.
    ExportSvg { file: PathBuf, out: PathBuf },
    /// Print a deterministic text dump of a drawing.
    Dump { file: PathBuf },
    /// Specification documents.
    Spec {
        #[command(subcommand)]
        action: SpecAction,
    },
    /// Add a property-only module (no payload) to a drawing.
    AddModule {
        file: PathBuf,
        type_name: String,
        /// key=value properties and an optional @x,y anchor.
        args: Vec<String>,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List saved parameter sets with preview bounds.
    Ls,
    /// Save the parameter set of a module into the catalog.
    Save {
        drawing: PathBuf,
        module_id: u64,
        name: String,
        #[arg(long)]
        overwrite: bool,
    },
    /// Load a parameter set and place it into a drawing as one module.
    Load {
        drawing: PathBuf,
        name: String,
        ext: String,
        /// Anchor point x,y in paper mm.
        anchor: String,
    },
    /// Render a catalog entry into a small preview SVG.
    Preview { name: String, out: PathBuf },
}

#[derive(Subcommand)]
enum SpecAction {
    /// Build a specification table over external drawings into a new file.
    Build {
        out: PathBuf,
        /// Source drawings scanned for specifying properties.
        #[arg(long = "from", num_args = 0..)]
        from: Vec<PathBuf>,
        /// Table anchor x,y in paper mm.
        #[arg(long, default_value = "20,40")]
        anchor: String,
        /// Sheet size WxH in mm.
        #[arg(long, default_value = "420x297")]
        sheet: String,
    },
}

fn catalog_dir() -> PathBuf {
    std::env::var_os("MODCAD_CATALOG")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("./catalog"))
}

fn engine() -> Engine {
    Engine::with_reference_extensions(catalog_dir())
}

fn parse_sheet(token: &str) -> Result<(f64, f64), Error> {
    let (w, h) = token
        .split_once('x')
        .ok_or_else(|| Error::BadArgument(format!("\"{token}\": expected WxH")))?;
    let parse = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| *v > 0.0)
            .ok_or_else(|| Error::BadArgument(format!("\"{token}\": bad sheet size")))
    };
    Ok((parse(w)?, parse(h)?))
}

fn preview_of(engine: &Engine) -> impl Fn(&modcad_core::codec::CompactImage, &str, u64) -> Option<modcad_core::geom::Rect> + '_ {
    move |image, name, hash| {
        let schema = schema_by_header(name, hash)?;
        let mut pp = decode_compact(image, &schema).ok()?;
        let ext = engine
            .extensions()
            .find(|e| e.schema().hash() == schema.hash())?;
        recompute_speed_vars(&mut pp, ext.as_ref()).ok()?;
        bounds(&generate_all(&pp, ext.as_ref()).ok()?)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::New {
            file,
            width,
            height,
        } => {
            if width <= 0.0 || height <= 0.0 {
                return Err(Error::BadArgument("sheet size must be positive".into()));
            }
            write_drawing(&Drawing::new(width, height), &file)?;
            println!("created {} ({} x {} mm)", file.display(), fmt_mm(width), fmt_mm(height));
        }
        Command::Run { file, script } => {
            let mut drawing = read_drawing(&file)?;
            let text = std::fs::read_to_string(&script)?;
            let mut engine = engine();
            let output = run_script(&mut engine, &mut drawing, &text, Path::new("."))?;
            for line in output {
                println!("{line}");
            }
            write_drawing(&drawing, &file)?;
        }
        Command::Types => {
            let engine = engine();
            for def in engine.registry.iter() {
                let keys: Vec<&str> = def
                    .allowed_properties
                    .iter()
                    .map(|(k, _)| k.as_str())
                    .collect();
                let payload = if def.has_payload { " [payload]" } else { "" };
                println!("{}{}: {}", def.type_name, payload, keys.join(", "));
            }
        }
        Command::Ext {
            id,
            command,
            args,
            file,
        } => {
            let mut drawing = read_drawing(&file)?;
            let mut engine = engine();
            let output = engine.run_command(&mut drawing, &id, &command, &args)?;
            for line in output.lines {
                println!("{line}");
            }
            write_drawing(&drawing, &file)?;
        }
        Command::Catalog { action } => match action {
            CatalogAction::Ls => {
                let engine = engine();
                let entries = catalog_list(&catalog_dir(), preview_of(&engine))?;
                for e in entries {
                    let bounds = match e.preview_bounds {
                        Some(r) => format!("({},{})-({},{})",
                            fmt_mm(r.min.x), fmt_mm(r.min.y), fmt_mm(r.max.x), fmt_mm(r.max.y)),
                        None => "-".to_string(),
                    };
                    println!("{}\t{}\t{}", e.name, e.schema_name, bounds);
                }
            }
            CatalogAction::Save {
                drawing,
                module_id,
                name,
                overwrite,
            } => {
                let d = read_drawing(&drawing)?;
                let module = d
                    .module(modcad_core::model::ElementId(module_id))
                    .ok_or_else(|| Error::ReplaceTargetMissing(module_id.to_string()))?;
                let (schema_name, hash) = modcad_core::codec::CompactImage {
                    bytes: module.payload.clone(),
                }
                .header()?;
                let schema = schema_by_header(&schema_name, hash).ok_or_else(|| {
                    Error::SchemaMismatch(format!("unknown schema \"{schema_name}\""))
                })?;
                let pp = extract_pp(module, &schema)?;
                let path = catalog_save(&catalog_dir(), &name, &pp, overwrite)?;
                println!("saved {}", path.display());
            }
            CatalogAction::Load {
                drawing,
                name,
                ext,
                anchor,
            } => {
                let mut d = read_drawing(&drawing)?;
                let mut engine = engine();
                parse_point2(&anchor)?;
                engine.run_command(&mut d, &ext, "read", &[name])?;
                let output = engine.run_command(&mut d, &ext, "place", &[anchor])?;
                for line in output.lines {
                    println!("{line}");
                }
                write_drawing(&d, &drawing)?;
            }
            CatalogAction::Preview { name, out } => {
                let engine = engine();
                let bytes = std::fs::read(catalog_dir().join(format!("{name}.ppc")))
                    .map_err(|_| Error::NotFound(name.clone()))?;
                let image = modcad_core::codec::CompactImage { bytes };
                let (schema_name, hash) = image.header()?;
                let schema = schema_by_header(&schema_name, hash).ok_or_else(|| {
                    Error::SchemaMismatch(format!("unknown schema \"{schema_name}\""))
                })?;
                let mut pp = decode_compact(&image, &schema)?;
                let ext = engine
                    .extensions()
                    .find(|e| e.schema().hash() == schema.hash())
                    .ok_or_else(|| Error::UnknownExtension(schema_name.clone()))?;
                recompute_speed_vars(&mut pp, ext.as_ref())?;
                let wms = generate_all(&pp, ext.as_ref())?;
                // Shift the geometry into a tight viewport with a margin.
                let margin = 5.0;
                let rect = bounds(&wms).unwrap_or(modcad_core::geom::Rect {
                    min: modcad_core::geom::Point2::new(0.0, 0.0),
                    max: modcad_core::geom::Point2::new(10.0, 10.0),
                });
                let shift = modcad_core::geom::Point2::new(
                    margin - rect.min.x,
                    margin - rect.min.y,
                );
                let shifted: Vec<modcad_core::geom::Primitive> = wms
                    .iter()
                    .flat_map(|w| w.primitives.iter())
                    .map(|p| p.translated(shift))
                    .collect();
                let svg = modcad_core::svg::render_primitives(
                    rect.width() + 2.0 * margin,
                    rect.height() + 2.0 * margin,
                    shifted.iter(),
                );
                std::fs::write(&out, svg)?;
                println!("previewed \"{name}\" to {}", out.display());
            }
        },
        Command::ExportSvg { file, out } => {
            let drawing = read_drawing(&file)?;
            std::fs::write(&out, render_drawing(&drawing))?;
            println!("exported {}", out.display());
        }
        Command::Dump { file } => {
            let drawing = read_drawing(&file)?;
            print!("{}", dump_drawing(&drawing));
        }
        Command::Spec { action } => match action {
            SpecAction::Build {
                out,
                from,
                anchor,
                sheet,
            } => {
                let (width, height) = parse_sheet(&sheet)?;
                let mut drawing = Drawing::new(width, height);
                let mut engine = engine();
                let args: Vec<String> = from
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect();
                let built = engine.run_command(&mut drawing, "table", "build", &args)?;
                for line in built.lines {
                    println!("{line}");
                }
                engine.run_command(&mut drawing, "table", "place", &[anchor])?;
                write_drawing(&drawing, &out)?;
                println!("wrote {}", out.display());
            }
        },
        Command::AddModule {
            file,
            type_name,
            args,
        } => {
            let mut drawing = read_drawing(&file)?;
            let engine = engine();
            let mut full = vec![type_name];
            full.extend(args);
            let line = modcad_core::script::add_module_command(&engine, &mut drawing, &full)?;
            println!("{line}");
            write_drawing(&drawing, &file)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are success; anything else is a
            // user error with usage on stderr.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let outcome = std::panic::catch_unwind(|| run(cli));
    match outcome {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e @ Error::Internal(_))) => {
            eprintln!("internal error: {e}");
            ExitCode::from(2)
        }
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(_) => {
            eprintln!("internal error: panic");
            ExitCode::from(2)
        }
    }
}
