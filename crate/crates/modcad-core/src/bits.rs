//! Bit-level cursors over byte buffers. Bits are packed MSB-first within
//! each byte; multi-byte plain integers are written little-endian through
//! the byte-aligned helpers. The reader never looks past the buffer end.

use crate::error::{Error, Result};

#[derive(Debug, Default)]
pub struct BitWriter {
    bytes: Vec<u8>,
    /// Bits already used in the last byte (0 when aligned).
    bit_pos: u8,
}

impl BitWriter {
    pub fn new() -> Self {
        Self::default()
    }

    /// Append the low `bits` bits of `value`, MSB first.
    pub fn write_bits(&mut self, value: u64, bits: u8) {
        debug_assert!(bits <= 64);
        for i in (0..bits).rev() {
            let bit = ((value >> i) & 1) as u8;
            if self.bit_pos == 0 {
                self.bytes.push(0);
            }
            let last = self.bytes.last_mut().unwrap();
            *last |= bit << (7 - self.bit_pos);
            self.bit_pos = (self.bit_pos + 1) % 8;
        }
    }

    pub fn write_bit(&mut self, bit: bool) {
        self.write_bits(bit as u64, 1);
    }

    /// Pad with zero bits to the next byte boundary.
    pub fn align(&mut self) {
        self.bit_pos = 0;
    }

    pub fn write_bytes(&mut self, data: &[u8]) {
        self.align();
        self.bytes.extend_from_slice(data);
    }

    pub fn write_u16_le(&mut self, v: u16) {
        self.write_bytes(&v.to_le_bytes());
    }

    pub fn write_u32_le(&mut self, v: u32) {
        self.write_bytes(&v.to_le_bytes());
    }

    pub fn write_u64_le(&mut self, v: u64) {
        self.write_bytes(&v.to_le_bytes());
    }

    pub fn len(&self) -> usize {
        self.bytes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bytes.is_empty()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

#[derive(Debug)]
pub struct BitReader<'a> {
    bytes: &'a [u8],
    byte_pos: usize,
    bit_pos: u8,
}

impl<'a> BitReader<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self {
            bytes,
            byte_pos: 0,
            bit_pos: 0,
        }
    }

    fn truncated(&self) -> Error {
        Error::CorruptPayload(format!("unexpected end at byte {}", self.byte_pos))
    }

    /// Read `bits` bits MSB-first into the low bits of the result.
    pub fn read_bits(&mut self, bits: u8) -> Result<u64> {
        debug_assert!(bits <= 64);
        let mut value = 0u64;
        for _ in 0..bits {
            if self.byte_pos >= self.bytes.len() {
                return Err(self.truncated());
            }
            let bit = (self.bytes[self.byte_pos] >> (7 - self.bit_pos)) & 1;
            value = (value << 1) | bit as u64;
            self.bit_pos += 1;
            if self.bit_pos == 8 {
                self.bit_pos = 0;
                self.byte_pos += 1;
            }
        }
        Ok(value)
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        Ok(self.read_bits(1)? == 1)
    }

    /// Skip to the next byte boundary.
    pub fn align(&mut self) {
        if self.bit_pos != 0 {
            self.bit_pos = 0;
            self.byte_pos += 1;
        }
    }

    pub fn read_bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        self.align();
        let end = self
            .byte_pos
            .checked_add(n)
            .ok_or_else(|| self.truncated())?;
        if end > self.bytes.len() {
            return Err(self.truncated());
        }
        let slice = &self.bytes[self.byte_pos..end];
        self.byte_pos = end;
        Ok(slice)
    }

    pub fn read_u16_le(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.read_bytes(2)?.try_into().unwrap()))
    }

    pub fn read_u32_le(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.read_bytes(4)?.try_into().unwrap()))
    }

    pub fn read_u64_le(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.read_bytes(8)?.try_into().unwrap()))
    }

    /// Bits left before the end of the buffer.
    pub fn remaining_bits(&self) -> u64 {
        let total = self.bytes.len() as u64 * 8;
        let used = self.byte_pos as u64 * 8 + self.bit_pos as u64;
        total - used
    }

    /// True once every byte has been consumed (a trailing partial byte
    /// counts as consumed after `align`).
    pub fn at_end(&mut self) -> bool {
        self.align();
        self.byte_pos >= self.bytes.len()
    }
}
