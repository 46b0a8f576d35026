//! Compact bit-packed serialization of parameter sets. The wire format is
//! documented in FORMAT.md: magic "PPC1", schema name and hash, general
//! parameters, then each list as a 32-bit record count plus contiguously
//! bit-packed records, byte-aligned after the general block and after each
//! list. Speed values are never serialized.

use crate::bits::{BitReader, BitWriter};
use crate::error::{Error, Result};
use crate::pp::Pp;
use crate::schema::{FieldKind, PpSchema, REF_BITS};
use crate::value::Value;
use std::sync::Arc;

pub const MAGIC: &[u8; 4] = b"PPC1";

/// Hard ceiling on records per list accepted by the decoder. Lists whose
/// records occupy zero bits would otherwise let a hostile count field
/// demand unbounded allocation.
pub const MAX_RECORDS: u32 = 1_000_000;

/// Serialized image of a parameter set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactImage {
    pub bytes: Vec<u8>,
}

impl CompactImage {
    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    /// Schema name and hash from the header, without decoding the body.
    pub fn header(&self) -> Result<(String, u64)> {
        let mut r = BitReader::new(&self.bytes);
        if r.read_bytes(4)? != MAGIC {
            return Err(Error::BadMagic);
        }
        let name_len = r.read_u16_le()? as usize;
        let name = std::str::from_utf8(r.read_bytes(name_len)?)
            .map_err(|_| Error::CorruptPayload("schema name is not UTF-8".into()))?
            .to_string();
        let hash = r.read_u64_le()?;
        Ok((name, hash))
    }
}

/// Serialize; fails loudly on any value that does not fit its declared
/// width — values are never truncated.
pub fn encode_compact(pp: &Pp) -> Result<CompactImage> {
    let schema = pp.schema();
    let mut w = BitWriter::new();
    w.write_bytes(MAGIC);
    let name = schema.name.as_bytes();
    w.write_u16_le(name.len() as u16);
    w.write_bytes(name);
    w.write_u64_le(schema.hash());

    for (f, v) in schema.general.iter().zip(pp.general_values()) {
        encode_value(&mut w, &f.kind, v, &f.name)?;
    }
    w.align();

    for (li, ls) in schema.lists.iter().enumerate() {
        let records = pp.list_records(li);
        w.write_u32_le(records.len() as u32);
        for record in records {
            for (f, v) in ls.fields.iter().zip(record) {
                encode_value(&mut w, &f.kind, v, &f.name)?;
            }
        }
        w.align();
    }

    Ok(CompactImage {
        bytes: w.into_bytes(),
    })
}

/// Deserialize against an expected schema. Any structural problem — wrong
/// magic, foreign schema hash, short data, trailing bytes — is a typed
/// error; no input can cause a read past the buffer. Speed entries come
/// back allocated but empty.
pub fn decode_compact(image: &CompactImage, schema: &Arc<PpSchema>) -> Result<Pp> {
    let mut r = BitReader::new(&image.bytes);
    if r.read_bytes(4).map_err(|_| Error::BadMagic)? != MAGIC {
        return Err(Error::BadMagic);
    }
    let name_len = r.read_u16_le()? as usize;
    let name = std::str::from_utf8(r.read_bytes(name_len)?)
        .map_err(|_| Error::CorruptPayload("schema name is not UTF-8".into()))?
        .to_string();
    let hash = r.read_u64_le()?;
    if name != schema.name {
        return Err(Error::SchemaMismatch(format!(
            "image carries schema \"{name}\", expected \"{}\"",
            schema.name
        )));
    }
    if hash != schema.hash() {
        return Err(Error::SchemaMismatch(format!(
            "schema hash {hash:016x} != expected {:016x}",
            schema.hash()
        )));
    }

    let mut pp = Pp::new(Arc::clone(schema));
    for (gi, f) in schema.general.iter().enumerate() {
        let v = decode_value(&mut r, &f.kind)?;
        let _ = gi;
        pp.set_general(&f.name, v)
            .map_err(|e| Error::CorruptPayload(e.to_string()))?;
    }
    r.align();

    // Records are rebuilt through a raw staging structure and installed
    // via the integrity-checked store only after all lists are read, since
    // forward references may point at lists decoded later.
    let mut staged: Vec<Vec<Vec<Value>>> = Vec::with_capacity(schema.lists.len());
    for ls in &schema.lists {
        let count = r.read_u32_le()?;
        if count > MAX_RECORDS {
            return Err(Error::CorruptPayload(format!(
                "list \"{}\" count {count} exceeds the record limit",
                ls.name
            )));
        }
        // A record cannot be smaller than the sum of its declared widths;
        // reject counts that could not possibly fit the remaining bytes.
        let min_bits = ls.min_record_bits();
        if (count as u64).saturating_mul(min_bits) > r.remaining_bits() {
            return Err(Error::CorruptPayload(format!(
                "list \"{}\" count {count} exceeds remaining data",
                ls.name
            )));
        }
        let mut records = Vec::new();
        for _ in 0..count {
            let mut record = Vec::with_capacity(ls.fields.len());
            for f in &ls.fields {
                record.push(decode_value(&mut r, &f.kind)?);
            }
            records.push(record);
        }
        r.align();
        staged.push(records);
    }

    if !r.at_end() {
        return Err(Error::CorruptPayload("trailing bytes after last list".into()));
    }

    install_records(&mut pp, staged)?;
    Ok(pp)
}

/// Validate staged records (kinds were enforced by decode; refs and enums
/// still need range checks) and move them into the parameter set.
fn install_records(pp: &mut Pp, staged: Vec<Vec<Vec<Value>>>) -> Result<()> {
    let schema = Arc::clone(pp.schema());
    let lens: Vec<u32> = staged.iter().map(|l| l.len() as u32).collect();
    for (ls, records) in schema.lists.iter().zip(&staged) {
        for (ri, record) in records.iter().enumerate() {
            for (f, v) in ls.fields.iter().zip(record) {
                match (&f.kind, v) {
                    (FieldKind::Ref { target, optional, .. }, Value::Ref(r)) => {
                        let tlen = schema.list(target).map(|(ti, _)| lens[ti]).unwrap_or(0);
                        match r {
                            None if !*optional => {
                                return Err(Error::CorruptPayload(format!(
                                    "list \"{}\" record {ri}: null non-optional ref",
                                    ls.name
                                )))
                            }
                            Some(t) if *t >= tlen => {
                                return Err(Error::CorruptPayload(format!(
                                    "list \"{}\" record {ri} field \"{}\": ref {t} out of range",
                                    ls.name, f.name
                                )))
                            }
                            _ => {}
                        }
                    }
                    (FieldKind::Enum { labels, .. }, Value::Enum(v)) => {
                        if *v as usize >= labels.len() {
                            return Err(Error::CorruptPayload(format!(
                                "list \"{}\" record {ri} field \"{}\": enum {v} out of range",
                                ls.name, f.name
                            )));
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    pp.install_decoded(staged);
    Ok(())
}

fn signed_bounds(bits: u8) -> (i64, i64) {
    if bits == 64 {
        (i64::MIN, i64::MAX)
    } else {
        let half = 1i64 << (bits - 1);
        (-half, half - 1)
    }
}

fn encode_value(w: &mut BitWriter, kind: &FieldKind, value: &Value, field: &str) -> Result<()> {
    let out_of_range = |detail: String| Error::ValueOutOfRange(format!("field \"{field}\": {detail}"));
    match (kind, value) {
        (FieldKind::UInt { bits }, Value::UInt(v)) => {
            if *bits < 64 && *v >= (1u64 << *bits) {
                return Err(out_of_range(format!("{v} does not fit {bits} bits")));
            }
            w.write_bits(*v, *bits);
        }
        (FieldKind::Int { bits }, Value::Int(v)) => {
            let (lo, hi) = signed_bounds(*bits);
            if *v < lo || *v > hi {
                return Err(out_of_range(format!("{v} does not fit {bits} signed bits")));
            }
            w.write_bits(*v as u64, *bits);
        }
        (FieldKind::Fixed { bits, scale }, Value::Fixed(v)) => {
            let q = (v / scale).round();
            let (lo, hi) = signed_bounds(*bits);
            if !(q >= lo as f64 && q <= hi as f64) {
                return Err(out_of_range(format!(
                    "{v} needs {q} steps, outside {bits}-bit signed range"
                )));
            }
            w.write_bits(q as i64 as u64, *bits);
        }
        (FieldKind::Text, Value::Text(s)) => {
            if s.len() > u16::MAX as usize {
                return Err(out_of_range(format!("text of {} bytes exceeds 65535", s.len())));
            }
            w.write_u16_le(s.len() as u16);
            w.write_bytes(s.as_bytes());
        }
        (FieldKind::Flag, Value::Flag(b)) => w.write_bit(*b),
        (FieldKind::Ref { optional, .. }, Value::Ref(r)) => {
            if *optional {
                w.write_bit(r.is_some());
                if let Some(i) = r {
                    w.write_bits(*i as u64, REF_BITS);
                }
            } else {
                let i = r.ok_or_else(|| out_of_range("null non-optional reference".into()))?;
                w.write_bits(i as u64, REF_BITS);
            }
        }
        (FieldKind::Enum { bits, labels }, Value::Enum(v)) => {
            if *v as usize >= labels.len() {
                return Err(out_of_range(format!("enum index {v} out of range")));
            }
            w.write_bits(*v as u64, *bits);
        }
        _ => {
            return Err(Error::Internal(format!(
                "field \"{field}\": value kind {} does not match schema",
                value.kind_name()
            )))
        }
    }
    Ok(())
}

fn decode_value(r: &mut BitReader, kind: &FieldKind) -> Result<Value> {
    Ok(match kind {
        FieldKind::UInt { bits } => Value::UInt(r.read_bits(*bits)?),
        FieldKind::Int { bits } => Value::Int(sign_extend(r.read_bits(*bits)?, *bits)),
        FieldKind::Fixed { bits, scale } => {
            let q = sign_extend(r.read_bits(*bits)?, *bits);
            Value::Fixed(q as f64 * scale)
        }
        FieldKind::Text => {
            let len = r.read_u16_le()? as usize;
            let bytes = r.read_bytes(len)?;
            Value::Text(
                std::str::from_utf8(bytes)
                    .map_err(|_| Error::CorruptPayload("text is not UTF-8".into()))?
                    .to_string(),
            )
        }
        FieldKind::Flag => Value::Flag(r.read_bit()?),
        FieldKind::Ref { optional, .. } => {
            if *optional {
                if r.read_bit()? {
                    Value::Ref(Some(r.read_bits(REF_BITS)? as u32))
                } else {
                    Value::Ref(None)
                }
            } else {
                Value::Ref(Some(r.read_bits(REF_BITS)? as u32))
            }
        }
        FieldKind::Enum { bits, .. } => Value::Enum(r.read_bits(*bits)? as u32),
    })
}

fn sign_extend(raw: u64, bits: u8) -> i64 {
    if bits == 64 {
        return raw as i64;
    }
    let shift = 64 - bits;
    ((raw << shift) as i64) >> shift
}
