//! Parametric drawing-module engine.
//!
//! Every specialized part of a drawing is one typed module whose compact
//! bit-packed payload fully determines its regenerated geometry. The
//! payload expands into a parameter set (PP): schema-declared object lists
//! forming a small relational store with index references, referential
//! integrity and cascading deletion, plus general parameters and settings.
//! Problem-oriented extensions plug into a shared framework of typical
//! operations; two reference extensions ship here — axonometric piping
//! schemes and tabular specification documents.

pub mod axono;
pub mod bits;
pub mod catalog;
pub mod codec;
pub mod coords;
pub mod drawing_file;
pub mod dump;
pub mod error;
pub mod extension;
pub mod geom;
pub mod model;
pub mod pp;
pub mod regen;
pub mod schema;
pub mod schemas;
pub mod script;
pub mod svg;
pub mod table;
pub mod value;

pub use error::{Error, Result};
