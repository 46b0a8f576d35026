//! Error type shared across the engine.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // -- module-type registry / drawing model --
    #[error("module type \"{0}\" is already registered")]
    DuplicateType(String),
    #[error("duplicate property key \"{0}\"")]
    DuplicatePropertyKey(String),
    #[error("unknown module type \"{0}\"")]
    UnknownType(String),
    #[error("property \"{key}\" is not allowed for module type \"{type_name}\"")]
    UnknownProperty { type_name: String, key: String },
    #[error("property \"{0}\" has the wrong value kind")]
    PropertyKindMismatch(String),
    #[error("replace target {0} missing or not replaceable")]
    ReplaceTargetMissing(String),
    #[error("no working modules to place")]
    EmptyResult,

    // -- pp store --
    #[error("unknown list \"{0}\"")]
    UnknownList(String),
    #[error("field mismatch: {0}")]
    FieldMismatch(String),
    #[error("broken reference: {0}")]
    BrokenRef(String),
    #[error("index {index} out of range for list \"{list}\" (len {len})")]
    IndexOutOfRange { list: String, index: u32, len: u32 },

    // -- codec / catalog --
    #[error("bad magic: not a compact parameter image")]
    BadMagic,
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("corrupt payload: {0}")]
    CorruptPayload(String),
    #[error("value out of range: {0}")]
    ValueOutOfRange(String),
    #[error("catalog entry \"{0}\" already exists")]
    NameCollision(String),
    #[error("catalog entry \"{0}\" not found")]
    NotFound(String),
    #[error("invalid catalog name \"{0}\"")]
    InvalidCatalogName(String),

    // -- engine / extensions --
    #[error("extension \"{0}\" is already registered")]
    DuplicateExtension(String),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("unknown extension \"{0}\"")]
    UnknownExtension(String),
    #[error("unknown command \"{0}\"")]
    UnknownCommand(String),
    #[error("extension does not match this parameter set")]
    ExtensionMismatch,
    #[error("parameter set was released; start a new one")]
    UseAfterRelease,
    #[error("bad argument: {0}")]
    BadArgument(String),

    // -- axonometric extension --
    #[error("degenerate polyline: consecutive points coincide")]
    DegeneratePolyline,
    #[error("break not allowed: pipes {0:?} cross the plane off-normal")]
    BreakNotAllowed(Vec<u32>),

    // -- specification extension --
    #[error("inconsistent unit mass for designation \"{0}\"")]
    InconsistentMass(String),
    #[error("unreadable source \"{path}\": {reason}")]
    UnreadableSource { path: String, reason: String },

    // -- files / misc --
    #[error("drawing file error: {0}")]
    DrawingFile(String),
    #[error("script line {line}: {message}")]
    Script { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("internal invariant failure: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
